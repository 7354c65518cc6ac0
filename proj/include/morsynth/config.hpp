#pragma once

// JSON form of the parameter records. Keys missing from a document keep their
// defaults; unknown keys are rejected so typos do not silently fall back.

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "blend.hpp"
#include "error.hpp"
#include "rain_model.hpp"
#include "rgf.hpp"

namespace morsynth {

struct SynthConfig {
    RainParams rain;
    StreakPatternParams streaks; ///< `seed` is overwritten per sample
    BlendParams blend;
    RgfParams rgf;
    double tau_s = 0.05;
    std::optional<double> depth_scale; ///< meters per unit for 16-bit PNG depth
    bool emit_decomposition = false;   ///< also write RGF low/high of the rainy image

    void validate() const
    {
        rain.validate();
        streaks.validate();
        blend.validate();
        rgf.validate();
        detail::require_config(tau_s >= 0.0 && tau_s <= 1.0, "tau_s must lie in [0,1]");
        detail::require_config(!depth_scale || (*depth_scale > 0.0 && std::isfinite(*depth_scale)),
                               "depth_scale must be > 0");
    }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> known,
                                const std::string& where)
{
    if (!obj.is_object())
        throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
        bool found = false;
        for (const char* k : known)
            found = found || key == k;
        if (!found)
            throw ConfigError("unknown config key " + where + "." + key);
    }
}

template <typename T>
void read_key(const nlohmann::json& obj, const char* key, T& out, const std::string& where)
{
    if (!obj.contains(key))
        return;
    try {
        out = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config key " + where + "." + key + ": " + e.what());
    }
}

} // namespace detail

inline nlohmann::json to_json(const SynthConfig& c)
{
    nlohmann::json rgf = {{"sigma_s", c.rgf.sigma_s}, {"sigma_r", c.rgf.sigma_r}, {"n_iter", c.rgf.n_iter}};
    rgf["window_radius"] = c.rgf.window_radius ? nlohmann::json(*c.rgf.window_radius) : nlohmann::json(nullptr);
    return {
        {"rain", {{"alpha", c.rain.alpha}, {"beta", c.rain.beta}, {"d1", c.rain.d1}, {"a0", c.rain.a0}}},
        {"streaks",
         {{"seed", c.streaks.seed},
          {"density", c.streaks.density},
          {"angle_mean", c.streaks.angle_mean},
          {"angle_jitter", c.streaks.angle_jitter},
          {"length_min", c.streaks.length_min},
          {"length_max", c.streaks.length_max},
          {"width", c.streaks.width},
          {"intensity_min", c.streaks.intensity_min},
          {"intensity_max", c.streaks.intensity_max}}},
        {"blend", {{"mode", std::string(to_string(c.blend.mode))}, {"t", c.blend.t}, {"tau_d", c.blend.tau_d}}},
        {"rgf", rgf},
        {"tau_s", c.tau_s},
        {"depth_scale", c.depth_scale ? nlohmann::json(*c.depth_scale) : nlohmann::json(nullptr)},
        {"emit_decomposition", c.emit_decomposition},
    };
}

/// Overlay the keys present in `doc` onto `base`.
inline SynthConfig merge_config(SynthConfig base, const nlohmann::json& doc)
{
    using detail::read_key;
    detail::reject_unknown_keys(doc, {"rain", "streaks", "blend", "rgf", "tau_s", "depth_scale",
                                      "emit_decomposition"},
                                "config");
    if (doc.contains("rain")) {
        const auto& j = doc["rain"];
        detail::reject_unknown_keys(j, {"alpha", "beta", "d1", "a0"}, "rain");
        read_key(j, "alpha", base.rain.alpha, "rain");
        read_key(j, "beta", base.rain.beta, "rain");
        read_key(j, "d1", base.rain.d1, "rain");
        read_key(j, "a0", base.rain.a0, "rain");
    }
    if (doc.contains("streaks")) {
        const auto& j = doc["streaks"];
        detail::reject_unknown_keys(j, {"seed", "density", "angle_mean", "angle_jitter", "length_min", "length_max",
                                        "width", "intensity_min", "intensity_max"},
                                    "streaks");
        read_key(j, "seed", base.streaks.seed, "streaks");
        read_key(j, "density", base.streaks.density, "streaks");
        read_key(j, "angle_mean", base.streaks.angle_mean, "streaks");
        read_key(j, "angle_jitter", base.streaks.angle_jitter, "streaks");
        read_key(j, "length_min", base.streaks.length_min, "streaks");
        read_key(j, "length_max", base.streaks.length_max, "streaks");
        read_key(j, "width", base.streaks.width, "streaks");
        read_key(j, "intensity_min", base.streaks.intensity_min, "streaks");
        read_key(j, "intensity_max", base.streaks.intensity_max, "streaks");
    }
    if (doc.contains("blend")) {
        const auto& j = doc["blend"];
        detail::reject_unknown_keys(j, {"mode", "t", "tau_d"}, "blend");
        if (j.contains("mode")) {
            std::string name;
            read_key(j, "mode", name, "blend");
            auto mode = parse_blend_mode(name);
            if (!mode)
                throw ConfigError("unknown blend mode '" + name + "'");
            base.blend.mode = *mode;
        }
        read_key(j, "t", base.blend.t, "blend");
        read_key(j, "tau_d", base.blend.tau_d, "blend");
    }
    if (doc.contains("rgf")) {
        const auto& j = doc["rgf"];
        detail::reject_unknown_keys(j, {"sigma_s", "sigma_r", "n_iter", "window_radius"}, "rgf");
        read_key(j, "sigma_s", base.rgf.sigma_s, "rgf");
        read_key(j, "sigma_r", base.rgf.sigma_r, "rgf");
        read_key(j, "n_iter", base.rgf.n_iter, "rgf");
        if (j.contains("window_radius")) {
            if (j["window_radius"].is_null())
                base.rgf.window_radius.reset();
            else {
                int r = 0;
                read_key(j, "window_radius", r, "rgf");
                base.rgf.window_radius = r;
            }
        }
    }
    read_key(doc, "tau_s", base.tau_s, "config");
    if (doc.contains("depth_scale")) {
        if (doc["depth_scale"].is_null())
            base.depth_scale.reset();
        else {
            double s = 0.0;
            read_key(doc, "depth_scale", s, "config");
            base.depth_scale = s;
        }
    }
    read_key(doc, "emit_decomposition", base.emit_decomposition, "config");
    return base;
}

inline SynthConfig config_from_json(const nlohmann::json& doc) { return merge_config(SynthConfig{}, doc); }

inline nlohmann::json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

inline SynthConfig load_config(const std::filesystem::path& path) { return config_from_json(read_json_file(path)); }

} // namespace morsynth

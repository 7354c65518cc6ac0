#pragma once

// Dataset manifest (schema version "1").
//
// {
//   "version": "1",
//   "config":  { resolved SynthConfig },
//   "encoding": { ... how map files are quantised ... },
//   "samples": [ DatasetSample, ... ],
//   "groups":  { "g0000": [ids], ... },
//   "split":   { "train": [ids], "test": [ids] }
// }
//
// Output paths inside a sample are relative to the manifest's directory;
// input paths are stored as given (made absolute by the builder).

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "error.hpp"
#include "quality_report.hpp"

namespace morsynth {

inline constexpr const char* kManifestVersion = "1";

struct SampleMaps {
    std::string m_s;
    std::string m_d;
    std::string a;
    std::optional<std::string> s;
    std::optional<std::string> t_r;
    std::optional<std::string> high;
    std::optional<std::string> low;
};

struct DatasetSample {
    std::string id;
    std::string background; ///< clean input image
    std::string depth;
    std::optional<std::string> cover;
    std::string rainy;
    std::string clean;
    SampleMaps maps;
    SynthConfig params; ///< snapshot sufficient to regenerate the sample
    std::uint64_t seed = 0;
};

struct Manifest {
    std::string version = kManifestVersion;
    nlohmann::json config = nlohmann::json::object();
    std::vector<DatasetSample> samples;
    std::map<std::string, std::vector<std::string>> groups;
    std::map<std::string, std::vector<std::string>> split;

    /// Throws DataError if the split overlaps or names unknown ids.
    void check_split() const
    {
        std::set<std::string> ids;
        for (const auto& s : samples)
            ids.insert(s.id);
        std::set<std::string> train;
        if (auto it = split.find("train"); it != split.end())
            train.insert(it->second.begin(), it->second.end());
        for (const auto& [name, members] : split) {
            for (const auto& id : members) {
                if (!ids.count(id))
                    throw DataError("split '" + name + "' names unknown sample " + id);
                if (name == "test" && train.count(id))
                    throw DataError("sample " + id + " is in both train and test");
            }
        }
    }
};

inline nlohmann::json encoding_notes()
{
    return {
        {"rgb", "8-bit RGB PNG, byte = floor(v*255 + 0.5)"},
        {"scalar_maps", "8-bit gray PNG, byte = floor(v*255 + 0.5)"},
        {"masks", "8-bit gray PNG, 0 or 255"},
        {"high", "8-bit RGB PNG, byte = floor((h+1)/2*255 + 0.5)"},
    };
}

namespace detail {

inline void put_optional(nlohmann::json& j, const char* key, const std::optional<std::string>& v)
{
    if (v)
        j[key] = *v;
}

inline std::optional<std::string> get_optional(const nlohmann::json& j, const char* key)
{
    if (j.contains(key) && !j[key].is_null())
        return j[key].get<std::string>();
    return std::nullopt;
}

} // namespace detail

inline nlohmann::json to_json(const DatasetSample& s)
{
    nlohmann::json maps = {{"m_s", s.maps.m_s}, {"m_d", s.maps.m_d}, {"a", s.maps.a}};
    detail::put_optional(maps, "s", s.maps.s);
    detail::put_optional(maps, "t_r", s.maps.t_r);
    detail::put_optional(maps, "high", s.maps.high);
    detail::put_optional(maps, "low", s.maps.low);
    nlohmann::json j = {{"id", s.id},       {"seed", s.seed},   {"background", s.background},
                        {"depth", s.depth}, {"rainy", s.rainy}, {"clean", s.clean},
                        {"maps", maps},     {"params", to_json(s.params)}};
    detail::put_optional(j, "cover", s.cover);
    return j;
}

inline DatasetSample sample_from_json(const nlohmann::json& j)
{
    try {
        DatasetSample s;
        s.id = j.at("id").get<std::string>();
        s.seed = j.value("seed", std::uint64_t{0});
        s.background = j.value("background", std::string{});
        s.depth = j.value("depth", std::string{});
        s.cover = detail::get_optional(j, "cover");
        s.rainy = j.value("rainy", std::string{});
        s.clean = j.value("clean", std::string{});
        if (j.contains("maps")) {
            const auto& m = j["maps"];
            s.maps.m_s = m.value("m_s", std::string{});
            s.maps.m_d = m.value("m_d", std::string{});
            s.maps.a = m.value("a", std::string{});
            s.maps.s = detail::get_optional(m, "s");
            s.maps.t_r = detail::get_optional(m, "t_r");
            s.maps.high = detail::get_optional(m, "high");
            s.maps.low = detail::get_optional(m, "low");
        }
        if (j.contains("params"))
            s.params = config_from_json(j["params"]);
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed manifest sample: ") + e.what());
    }
}

inline nlohmann::json to_json(const Manifest& m)
{
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : m.samples)
        samples.push_back(to_json(s));
    return {{"version", m.version}, {"config", m.config},   {"encoding", encoding_notes()},
            {"samples", samples},   {"groups", m.groups}, {"split", m.split}};
}

inline Manifest manifest_from_json(const nlohmann::json& j)
{
    Manifest m;
    try {
        m.version = j.at("version").get<std::string>();
        if (m.version != kManifestVersion)
            throw DataError("unsupported manifest version '" + m.version + "'");
        if (j.contains("config"))
            m.config = j["config"];
        for (const auto& s : j.at("samples"))
            m.samples.push_back(sample_from_json(s));
        if (j.contains("groups"))
            m.groups = j["groups"].get<std::map<std::string, std::vector<std::string>>>();
        if (j.contains("split"))
            m.split = j["split"].get<std::map<std::string, std::vector<std::string>>>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

inline Manifest load_manifest(const std::filesystem::path& path) { return manifest_from_json(read_json_file(path)); }

inline void save_manifest(const Manifest& m, const std::filesystem::path& path)
{
    write_text_file(path, to_json(m).dump(2) + "\n");
}

} // namespace morsynth

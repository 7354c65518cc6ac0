#pragma once

// Dataset builder, splitter and evaluation harness.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "blend.hpp"
#include "config.hpp"
#include "domain.hpp"
#include "io.hpp"
#include "manifest.hpp"
#include "metrics.hpp"
#include "quality_report.hpp"
#include "rain_model.hpp"
#include "random.hpp"
#include "rgf.hpp"

namespace morsynth {

// ---------------------------------------------------------------------------
// In-memory synthesis

struct SynthResult {
    ByteImage rainy;
    GroundTruthMaps maps;
    ScalarMap transmission;
    std::optional<Decomposition> decomposition;
};

/// Streaks + haze via the image model (M_d = 0, D = 0), then the optional
/// raindrop cover blended on top, which also yields M_d.
inline SynthResult synthesize(const ByteImage& clean, const DepthMap& depth, const ByteImage* cover,
                              const SynthConfig& config, std::uint64_t seed)
{
    config.validate();
    require_same_shape(clean, depth, "synth: background vs depth");
    if (cover)
        require_same_shape(clean, *cover, "synth: background vs cover");

    const std::size_t w = clean.width();
    const std::size_t h = clean.height();

    StreakPatternParams streaks = config.streaks;
    streaks.seed = seed;

    SynthResult result{ByteImage(w, h), GroundTruthMaps::zeros(w, h), streak_transmission(depth, config.rain),
                       std::nullopt};
    result.maps.a = haze_layer(depth, config.rain);
    result.maps.s = streak_layer(generate_streak_pattern(w, h, streaks), result.transmission);
    result.maps.m_s = threshold_streak_mask(result.maps.s, config.tau_s);

    const RgbImage streaked = compose_mor(from_byte_domain(clean), result.maps, config.rain);
    result.rainy = to_byte_domain(streaked);
    if (cover) {
        BlendResult blended = composite_bytes(result.rainy, *cover, config.blend);
        result.rainy = to_byte_domain(blended.composite);
        result.maps.m_d = std::move(blended.m_d);
    }
    if (config.emit_decomposition)
        result.decomposition = decompose(from_byte_domain(result.rainy), config.rgf);
    return result;
}

// ---------------------------------------------------------------------------
// One sample on disk

struct SynthInputs {
    std::string id;
    std::filesystem::path background;
    std::filesystem::path depth;
    std::optional<std::filesystem::path> cover;
};

inline void validate_sample_id(const std::string& id)
{
    const bool ok = !id.empty() && id != "." && id != ".." &&
                    std::all_of(id.begin(), id.end(), [](char ch) {
                        return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                               ch == '_' || ch == '-' || ch == '.';
                    });
    if (!ok)
        throw ConfigError("invalid sample id '" + id + "' (allowed: letters, digits, '_', '-', '.')");
}

/// Writes <out_dir>/<id>/{rainy,clean,m_s,m_d,a,s,t_r}.png (plus low/high
/// when configured) and returns the sample record.
inline DatasetSample synth(const SynthInputs& in, const SynthConfig& config, std::uint64_t seed,
                           const std::filesystem::path& out_dir)
{
    validate_sample_id(in.id);
    config.validate();

    const ByteImage clean = load_png_rgb8(in.background);
    const DepthMap depth = load_depth(in.depth, config.depth_scale);
    std::optional<ByteImage> cover;
    if (in.cover)
        cover = load_png_rgb8(*in.cover);

    const SynthResult result = synthesize(clean, depth, cover ? &*cover : nullptr, config, seed);

    std::filesystem::create_directories(out_dir / in.id);
    auto rel = [&](const char* name) { return (std::filesystem::path(in.id) / name).generic_string(); };

    DatasetSample sample;
    sample.id = in.id;
    sample.seed = seed;
    sample.background = std::filesystem::absolute(in.background).lexically_normal().string();
    sample.depth = std::filesystem::absolute(in.depth).lexically_normal().string();
    if (in.cover)
        sample.cover = std::filesystem::absolute(*in.cover).lexically_normal().string();
    sample.params = config;
    sample.params.streaks.seed = seed;

    sample.rainy = rel("rainy.png");
    sample.clean = rel("clean.png");
    sample.maps.m_s = rel("m_s.png");
    sample.maps.m_d = rel("m_d.png");
    sample.maps.a = rel("a.png");
    sample.maps.s = rel("s.png");
    sample.maps.t_r = rel("t_r.png");

    save_png_rgb8(result.rainy, out_dir / sample.rainy);
    save_png_rgb8(clean, out_dir / sample.clean);
    save_mask(result.maps.m_s, out_dir / sample.maps.m_s);
    save_mask(result.maps.m_d, out_dir / sample.maps.m_d);
    save_map(result.maps.a, out_dir / sample.maps.a);
    save_map(result.maps.s, out_dir / *sample.maps.s);
    save_map(result.transmission, out_dir / *sample.maps.t_r);
    if (result.decomposition) {
        sample.maps.low = rel("low.png");
        sample.maps.high = rel("high.png");
        save_image(result.decomposition->low, out_dir / *sample.maps.low);
        save_png_rgb8(signed_to_bytes(result.decomposition->high), out_dir / *sample.maps.high);
    }
    return sample;
}

// ---------------------------------------------------------------------------
// Batch

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception
/// (by index) is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn)
{
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

/// Sample i gets seed mix_seed(base_seed, i), so seeds do not depend on how
/// work is scheduled.
inline Manifest build_dataset(const std::vector<SynthInputs>& inputs, const SynthConfig& config,
                              std::uint64_t base_seed, const std::filesystem::path& out_dir, unsigned jobs = 1)
{
    config.validate();
    std::set<std::string> seen;
    for (const auto& in : inputs) {
        validate_sample_id(in.id);
        if (!seen.insert(in.id).second)
            throw ConfigError("duplicate sample id '" + in.id + "'");
    }
    std::filesystem::create_directories(out_dir);

    Manifest manifest;
    manifest.config = to_json(config);
    manifest.config["base_seed"] = base_seed;
    manifest.samples.resize(inputs.size());
    parallel_for(inputs.size(), jobs, [&](std::size_t i) {
        manifest.samples[i] = synth(inputs[i], config, mix_seed(base_seed, i), out_dir);
    });
    save_manifest(manifest, out_dir / "manifest.json");
    return manifest;
}

/// Regenerates every sample of `source` from its recorded inputs, params and
/// seed into `out_dir`. Groups and split are carried over.
inline Manifest rebuild_dataset(const Manifest& source, const std::filesystem::path& out_dir, unsigned jobs = 1)
{
    std::filesystem::create_directories(out_dir);
    Manifest manifest = source;
    parallel_for(source.samples.size(), jobs, [&](std::size_t i) {
        const auto& s = source.samples[i];
        SynthInputs in{s.id, s.background, s.depth, std::nullopt};
        if (s.cover)
            in.cover = *s.cover;
        manifest.samples[i] = synth(in, s.params, s.seed, out_dir);
    });
    save_manifest(manifest, out_dir / "manifest.json");
    return manifest;
}

// ---------------------------------------------------------------------------
// Split

/// Partitions samples (in manifest order) into consecutive groups of
/// `group_size`, then draws `per_group_train` + `per_group_test` distinct
/// members from each group without replacement.
inline Manifest split_manifest(Manifest manifest, std::size_t group_size, std::size_t per_group_train,
                               std::size_t per_group_test, std::uint64_t seed)
{
    const std::size_t n = manifest.samples.size();
    if (group_size == 0)
        throw ConfigError("split: group size must be >= 1");
    if (n == 0 || n % group_size != 0)
        throw ConfigError("split: " + std::to_string(n) + " samples cannot be divided into groups of " +
                          std::to_string(group_size));
    if (per_group_train + per_group_test > group_size)
        throw ConfigError("split: " + std::to_string(per_group_train) + " train + " +
                          std::to_string(per_group_test) + " test per group exceeds group size " +
                          std::to_string(group_size));

    const std::size_t groups = n / group_size;
    const int digits = std::max<int>(4, static_cast<int>(std::to_string(groups - 1).size()));
    manifest.groups.clear();
    std::vector<std::string> train, test;
    train.reserve(groups * per_group_train);
    test.reserve(groups * per_group_test);

    std::vector<std::size_t> order(group_size);
    for (std::size_t g = 0; g < groups; ++g) {
        std::string gid = std::to_string(g);
        gid = "g" + std::string(static_cast<std::size_t>(digits) - std::min<std::size_t>(gid.size(), digits), '0') + gid;
        auto& members = manifest.groups[gid];
        for (std::size_t k = 0; k < group_size; ++k) {
            members.push_back(manifest.samples[g * group_size + k].id);
            order[k] = k;
        }
        // Partial Fisher-Yates: the first train+test slots are a uniform
        // draw without replacement.
        UniformSampler rng(mix_seed(seed, g));
        const std::size_t take = per_group_train + per_group_test;
        for (std::size_t k = 0; k < take; ++k)
            std::swap(order[k], order[k + rng.below(group_size - k)]);
        std::vector<std::size_t> tr(order.begin(), order.begin() + per_group_train);
        std::vector<std::size_t> te(order.begin() + per_group_train, order.begin() + take);
        std::sort(tr.begin(), tr.end());
        std::sort(te.begin(), te.end());
        for (auto k : tr)
            train.push_back(members[k]);
        for (auto k : te)
            test.push_back(members[k]);
    }
    manifest.split = {{"train", std::move(train)}, {"test", std::move(test)}};
    manifest.check_split();
    return manifest;
}

// ---------------------------------------------------------------------------
// Evaluation

inline std::set<std::string> png_names(const std::filesystem::path& dir)
{
    if (!std::filesystem::is_directory(dir))
        throw IoError("not a directory: " + dir.string());
    std::set<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            names.insert(entry.path().filename().string());
    return names;
}

/// PSNR/SSIM for every PNG name present in both directories. Unless
/// `allow_unmatched`, a file present on only one side is an error; an empty
/// intersection always is.
inline QualityReport evaluate_dirs(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                                   bool allow_unmatched = false)
{
    const auto pred = png_names(pred_dir);
    const auto gt = png_names(gt_dir);
    std::vector<std::string> common, unmatched;
    std::set_intersection(pred.begin(), pred.end(), gt.begin(), gt.end(), std::back_inserter(common));
    std::set_symmetric_difference(pred.begin(), pred.end(), gt.begin(), gt.end(), std::back_inserter(unmatched));
    if (common.empty())
        throw DataError("eval: no matching PNG filenames between " + pred_dir.string() + " and " + gt_dir.string());
    if (!allow_unmatched && !unmatched.empty())
        throw DataError("eval: " + std::to_string(unmatched.size()) + " unmatched file(s), first: " + unmatched.front());

    QualityReport report;
    for (const auto& name : common) {
        const RgbImage p = load_image(pred_dir / name);
        const RgbImage g = load_image(gt_dir / name);
        require_same_shape(p, g, ("eval: " + name).c_str());
        report.rows.push_back({std::filesystem::path(name).stem().string(), psnr(p, g), ssim(p, g)});
    }
    report.finalize();
    return report;
}

/// Writes the JSON report to `json_path` and the CSV next to it.
inline void write_report(const QualityReport& report, const std::filesystem::path& json_path)
{
    if (json_path.has_parent_path())
        std::filesystem::create_directories(json_path.parent_path());
    write_text_file(json_path, to_json(report).dump(2) + "\n");
    auto csv = json_path;
    csv.replace_extension(".csv");
    write_text_file(csv, to_csv(report));
}

} // namespace morsynth

// morsynth: mixture-of-rain dataset builder, decomposer and evaluator.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include <morsynth/morsynth.hpp>

namespace fs = std::filesystem;
using namespace morsynth;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

/// Flags shared by every subcommand, plus the parameter overrides each one
/// may register. Unset overrides leave the config value alone.
struct CommonFlags {
    std::uint64_t seed = 0;
    std::optional<std::string> config;
    std::string out;

    std::optional<double> alpha, beta, d1, a0;
    std::optional<double> density, angle_mean, angle_jitter, length_min, length_max, streak_width;
    std::optional<double> tau_s;
    std::optional<std::string> mode;
    std::optional<double> t, tau_d;
    std::optional<double> sigma_s, sigma_r;
    std::optional<int> iterations, window_radius;
    std::optional<double> depth_scale;

    void add_common(CLI::App* app, bool out_required = true)
    {
        app->add_option("--seed", seed, "Random seed")->capture_default_str();
        app->add_option("--config", config, "JSON config file (flags override it)")->check(CLI::ExistingFile);
        auto* o = app->add_option("--out", out, "Output location");
        if (out_required)
            o->required();
    }
    void add_rain(CLI::App* app)
    {
        app->add_option("--alpha", alpha, "Streak attenuation coefficient (1/m)");
        app->add_option("--beta", beta, "Haze attenuation coefficient (1/m)");
        app->add_option("--d1", d1, "Streak saturation depth (m)");
        app->add_option("--a0", a0, "Atmospheric light");
        app->add_option("--tau-s", tau_s, "Streak mask threshold");
    }
    void add_streaks(CLI::App* app)
    {
        app->add_option("--density", density, "Streaks per megapixel");
        app->add_option("--angle-mean", angle_mean, "Mean streak angle from vertical (deg)");
        app->add_option("--angle-jitter", angle_jitter, "Streak angle jitter (deg)");
        app->add_option("--length-min", length_min, "Minimum streak length (px)");
        app->add_option("--length-max", length_max, "Maximum streak length (px)");
        app->add_option("--streak-width", streak_width, "Streak width (px)");
    }
    void add_blend(CLI::App* app)
    {
        app->add_option("--mode", mode, "Blend mode")
            ->check(CLI::IsMember({"overlay", "highlight", "transparency", "final"}));
        app->add_option("--t", t, "Transparency (background weight)");
        app->add_option("--tau-d", tau_d, "Raindrop mask threshold (bytes)");
    }
    void add_rgf(CLI::App* app)
    {
        app->add_option("--sigma-s", sigma_s, "RGF spatial sigma (px)");
        app->add_option("--sigma-r", sigma_r, "RGF range sigma");
        app->add_option("--iterations", iterations, "RGF iteration count");
        app->add_option("--window-radius", window_radius, "RGF window radius (default ceil(3 sigma_s))");
    }
    void add_depth(CLI::App* app)
    {
        app->add_option("--depth-scale", depth_scale, "Meters per unit for 16-bit PNG depth");
    }

    SynthConfig resolve() const
    {
        SynthConfig c = config ? load_config(*config) : SynthConfig{};
        auto set = [](auto& dst, const auto& src) {
            if (src)
                dst = *src;
        };
        set(c.rain.alpha, alpha);
        set(c.rain.beta, beta);
        set(c.rain.d1, d1);
        set(c.rain.a0, a0);
        set(c.tau_s, tau_s);
        set(c.streaks.density, density);
        set(c.streaks.angle_mean, angle_mean);
        set(c.streaks.angle_jitter, angle_jitter);
        set(c.streaks.length_min, length_min);
        set(c.streaks.length_max, length_max);
        set(c.streaks.width, streak_width);
        if (mode)
            c.blend.mode = *parse_blend_mode(*mode);
        set(c.blend.t, t);
        set(c.blend.tau_d, tau_d);
        set(c.rgf.sigma_s, sigma_s);
        set(c.rgf.sigma_r, sigma_r);
        set(c.rgf.n_iter, iterations);
        if (window_radius)
            c.rgf.window_radius = *window_radius;
        if (depth_scale)
            c.depth_scale = *depth_scale;
        c.validate();
        return c;
    }
};

std::vector<SynthInputs> read_input_list(const fs::path& path)
{
    const auto doc = read_json_file(path);
    const fs::path base = path.parent_path();
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
    std::vector<SynthInputs> inputs;
    try {
        for (const auto& item : doc.at("samples")) {
            SynthInputs in;
            in.id = item.at("id").get<std::string>();
            in.background = resolve(item.at("background").get<std::string>());
            in.depth = resolve(item.at("depth").get<std::string>());
            if (item.contains("cover") && !item["cover"].is_null())
                in.cover = resolve(item["cover"].get<std::string>());
            inputs.push_back(std::move(in));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": malformed input list: " + e.what());
    }
    return inputs;
}

unsigned default_jobs()
{
    if (const char* env = std::getenv("MOR_SYNTH_JOBS")) {
        try {
            const int v = std::stoi(env);
            if (v >= 1)
                return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
        throw ConfigError("MOR_SYNTH_JOBS must be a positive integer");
    }
    return 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Mixture-of-rain image synthesis, decomposition and evaluation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "morsynth 1.0");

    // synth -------------------------------------------------------------
    CommonFlags synth_flags;
    std::optional<std::string> background, depth, cover, inputs_file, from_manifest;
    std::string sample_id = "sample";
    std::optional<unsigned> jobs;
    bool emit_decomposition = false;
    auto* synth_cmd = app.add_subcommand("synth", "Synthesize rainy samples and write a manifest into --out");
    synth_flags.add_common(synth_cmd);
    synth_flags.add_rain(synth_cmd);
    synth_flags.add_streaks(synth_cmd);
    synth_flags.add_blend(synth_cmd);
    synth_flags.add_rgf(synth_cmd);
    synth_flags.add_depth(synth_cmd);
    auto* bg_opt = synth_cmd->add_option("--background", background, "Clean RGB PNG");
    auto* depth_opt = synth_cmd->add_option("--depth", depth, "Depth map (PFM or 16-bit PNG)");
    synth_cmd->add_option("--cover", cover, "Raindrop cover layer RGB PNG");
    synth_cmd->add_option("--id", sample_id, "Sample id for single-sample mode")->capture_default_str();
    auto* list_opt = synth_cmd->add_option("--inputs", inputs_file, "JSON list of {id, background, depth, cover}")
                         ->check(CLI::ExistingFile);
    auto* rebuild_opt = synth_cmd->add_option("--from-manifest", from_manifest, "Regenerate every sample of a manifest")
                            ->check(CLI::ExistingFile);
    synth_cmd->add_option("--jobs", jobs, "Parallel samples (default: MOR_SYNTH_JOBS or 1)")
        ->check(CLI::PositiveNumber);
    synth_cmd->add_flag("--decompose", emit_decomposition, "Also write RGF low/high layers of each rainy image");
    bg_opt->needs(depth_opt);
    depth_opt->needs(bg_opt);
    list_opt->excludes(bg_opt)->excludes(rebuild_opt);
    rebuild_opt->excludes(bg_opt);

    // blend -------------------------------------------------------------
    CommonFlags blend_flags;
    std::string blend_background, blend_cover;
    auto* blend_cmd = app.add_subcommand("blend", "Blend a raindrop cover onto a background; writes composite + m_d");
    blend_flags.add_common(blend_cmd);
    blend_flags.add_blend(blend_cmd);
    blend_cmd->add_option("--background", blend_background, "Background RGB PNG")->required();
    blend_cmd->add_option("--cover", blend_cover, "Cover RGB PNG")->required();

    // decompose ---------------------------------------------------------
    CommonFlags dec_flags;
    std::string dec_input;
    auto* dec_cmd = app.add_subcommand("decompose", "Rolling-guidance decomposition; writes low.png and high.png");
    dec_flags.add_common(dec_cmd);
    dec_flags.add_rgf(dec_cmd);
    dec_cmd->add_option("--input", dec_input, "Input RGB PNG")->required();

    // maps --------------------------------------------------------------
    CommonFlags maps_flags;
    std::string maps_depth;
    auto* maps_cmd = app.add_subcommand("maps", "Depth-derived ground-truth maps (t_r, pattern, s, a, m_s)");
    maps_flags.add_common(maps_cmd);
    maps_flags.add_rain(maps_cmd);
    maps_flags.add_streaks(maps_cmd);
    maps_flags.add_depth(maps_cmd);
    maps_cmd->add_option("--depth", maps_depth, "Depth map (PFM or 16-bit PNG)")->required();

    // split -------------------------------------------------------------
    CommonFlags split_flags;
    std::string split_manifest_path;
    std::size_t group_size = 20, per_train = 5, per_test = 0;
    auto* split_cmd = app.add_subcommand("split", "Grouped train/test split; writes a new manifest to --out");
    split_flags.add_common(split_cmd);
    split_cmd->add_option("--manifest", split_manifest_path, "Input manifest")->required();
    split_cmd->add_option("--group-size", group_size, "Samples per group")->capture_default_str();
    split_cmd->add_option("--train", per_train, "Train samples drawn per group")->capture_default_str();
    split_cmd->add_option("--test", per_test, "Test samples drawn per group")->capture_default_str();

    // eval --------------------------------------------------------------
    CommonFlags eval_flags;
    std::string pred_dir, gt_dir;
    bool allow_unmatched = false;
    auto* eval_cmd = app.add_subcommand("eval", "PSNR/SSIM of predictions vs ground truth; --out is the JSON path");
    eval_flags.add_common(eval_cmd);
    eval_cmd->add_option("--pred", pred_dir, "Directory of predicted PNGs")->required();
    eval_cmd->add_option("--gt", gt_dir, "Directory of ground-truth PNGs")->required();
    eval_cmd->add_flag("--allow-unmatched", allow_unmatched, "Evaluate the filename intersection only");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (synth_cmd->parsed()) {
            const unsigned n_jobs = jobs ? *jobs : default_jobs();
            const fs::path out = synth_flags.out;
            if (from_manifest) {
                auto manifest = rebuild_dataset(load_manifest(*from_manifest), out, n_jobs);
                std::cout << "rebuilt " << manifest.samples.size() << " samples into " << out << "\n";
                return 0;
            }
            SynthConfig config = synth_flags.resolve();
            config.emit_decomposition = config.emit_decomposition || emit_decomposition;
            std::vector<SynthInputs> inputs;
            if (inputs_file)
                inputs = read_input_list(*inputs_file);
            else if (background)
                inputs.push_back({sample_id, *background, *depth, cover ? std::optional<fs::path>(*cover) : std::nullopt});
            else
                throw ConfigError("synth needs --background/--depth, --inputs or --from-manifest");
            auto manifest = build_dataset(inputs, config, synth_flags.seed, out, n_jobs);
            std::cout << "wrote " << manifest.samples.size() << " samples and " << (out / "manifest.json") << "\n";
        } else if (blend_cmd->parsed()) {
            SynthConfig config = blend_flags.resolve();
            const fs::path out = blend_flags.out;
            auto result = composite_bytes(load_png_rgb8(blend_background), load_png_rgb8(blend_cover), config.blend);
            fs::create_directories(out);
            save_image(result.composite, out / "composite.png");
            save_mask(result.m_d, out / "m_d.png");
            std::cout << "wrote " << (out / "composite.png") << " and " << (out / "m_d.png") << "\n";
        } else if (dec_cmd->parsed()) {
            SynthConfig config = dec_flags.resolve();
            const fs::path out = dec_flags.out;
            auto dec = decompose(load_image(dec_input), config.rgf);
            fs::create_directories(out);
            save_image(dec.low, out / "low.png");
            save_png_rgb8(signed_to_bytes(dec.high), out / "high.png");
            std::cout << "wrote " << (out / "low.png") << " and " << (out / "high.png")
                      << " (high byte = round((h+1)/2*255))\n";
        } else if (maps_cmd->parsed()) {
            SynthConfig config = maps_flags.resolve();
            const fs::path out = maps_flags.out;
            const DepthMap d = load_depth(maps_depth, config.depth_scale);
            StreakPatternParams streaks = config.streaks;
            streaks.seed = maps_flags.seed;
            const auto transmission = streak_transmission(d, config.rain);
            const auto pattern = generate_streak_pattern(d.width(), d.height(), streaks);
            const auto s = streak_layer(pattern, transmission);
            fs::create_directories(out);
            save_map(transmission, out / "t_r.png");
            save_map(pattern, out / "pattern.png");
            save_map(s, out / "s.png");
            save_map(haze_layer(d, config.rain), out / "a.png");
            save_mask(threshold_streak_mask(s, config.tau_s), out / "m_s.png");
            std::cout << "wrote t_r, pattern, s, a, m_s maps into " << out << "\n";
        } else if (split_cmd->parsed()) {
            auto manifest = split_manifest(load_manifest(split_manifest_path), group_size, per_train, per_test,
                                           split_flags.seed);
            const fs::path out = split_flags.out;
            if (out.has_parent_path())
                fs::create_directories(out.parent_path());
            save_manifest(manifest, out);
            std::cout << manifest.groups.size() << " groups, " << manifest.split["train"].size() << " train, "
                      << manifest.split["test"].size() << " test -> " << out << "\n";
        } else if (eval_cmd->parsed()) {
            if (eval_flags.config)
                (void)eval_flags.resolve(); // validates the file; metrics take no parameters
            auto report = evaluate_dirs(pred_dir, gt_dir, allow_unmatched);
            write_report(report, eval_flags.out);
            std::cout << "images: " << report.rows.size() << "  mean PSNR: " << detail::format_number(report.mean_psnr_db)
                      << " dB  mean SSIM: " << detail::format_number(report.mean_ssim) << "\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include <morsynth/morsynth.hpp>

#include "test_util.hpp"

using namespace morsynth;
namespace fs = std::filesystem;

namespace {

Manifest manifest_with_ids(std::size_t n)
{
    Manifest m;
    for (std::size_t i = 0; i < n; ++i) {
        DatasetSample s;
        s.id = "img" + std::to_string(i);
        m.samples.push_back(s);
    }
    return m;
}

// Writes a small scene and returns inputs pointing at it.
SynthInputs write_scene(const fs::path& dir, const std::string& id, std::size_t w, std::size_t h, std::uint64_t seed,
                        bool with_cover)
{
    fs::create_directories(dir);
    auto scene = make_street_scene(w, h, seed);
    save_png_rgb8(scene.clean, dir / (id + "_clean.png"));
    save_depth_pfm(scene.depth, dir / (id + "_depth.pfm"));
    SynthInputs in{id, dir / (id + "_clean.png"), dir / (id + "_depth.pfm"), std::nullopt};
    if (with_cover) {
        save_png_rgb8(make_raindrop_cover(w, h, seed + 100), dir / (id + "_cover.png"));
        in.cover = dir / (id + "_cover.png");
    }
    return in;
}

std::map<std::string, std::string> hash_tree(const fs::path& root)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file())
            out[fs::relative(e.path(), root).generic_string()] = test_util::file_hash(e.path());
    return out;
}

} // namespace

TEST(Synthesize, NullDegradationIsIdentity)
{
    auto scene = make_street_scene(64, 48, 1);
    SynthConfig c;
    c.rain.beta = 0;
    c.streaks.density = 0;
    auto r = synthesize(scene.clean, scene.depth, nullptr, c, 9);
    EXPECT_EQ(r.rainy, scene.clean);
    EXPECT_EQ(r.maps.m_s, BinaryMask(64, 48));
    EXPECT_EQ(r.maps.m_d, BinaryMask(64, 48));
}

TEST(Synthesize, HazeOnBlackScene)
{
    SynthConfig c;
    c.rain.beta = 0.01;
    c.streaks.density = 0;
    auto r = synthesize(ByteImage(16, 16), DepthMap(16, 16, 100.0), nullptr, c, 0);
    const auto expected = round_to_byte(255 * 0.8 * (1 - std::exp(-1.0)));
    for (auto v : r.rainy.values())
        EXPECT_EQ(v, expected);
    EXPECT_NEAR(expected / 255.0, 0.506, 0.002);
}

TEST(Synthesize, SameSeedSameBytes)
{
    auto scene = make_street_scene(96, 64, 2);
    auto cover = make_raindrop_cover(96, 64, 3);
    SynthConfig c;
    auto a = synthesize(scene.clean, scene.depth, &cover, c, 11);
    auto b = synthesize(scene.clean, scene.depth, &cover, c, 11);
    EXPECT_EQ(a.rainy, b.rainy);
    EXPECT_EQ(a.maps.s, b.maps.s);
    EXPECT_NE(a.rainy, synthesize(scene.clean, scene.depth, &cover, c, 12).rainy);
}

TEST(Synthesize, CoverProducesDropMask)
{
    auto scene = make_street_scene(96, 64, 4);
    auto cover = make_raindrop_cover(96, 64, 5, 6);
    SynthConfig c;
    c.blend.mode = BlendMode::highlight;
    auto r = synthesize(scene.clean, scene.depth, &cover, c, 1);
    std::size_t marked = 0;
    for (auto v : r.maps.m_d.values())
        marked += v;
    EXPECT_GT(marked, 0u);
    EXPECT_LT(marked, 96u * 64u);
}

TEST(Synthesize, ShapeMismatch)
{
    EXPECT_THROW(synthesize(ByteImage(4, 4), DepthMap(5, 4), nullptr, SynthConfig{}, 0), DimensionError);
}

TEST(Config, JsonRoundTripAndStrictKeys)
{
    SynthConfig c;
    c.rain.beta = 0.02;
    c.blend.mode = BlendMode::overlay;
    c.rgf.window_radius = 5;
    c.depth_scale = 0.01;
    auto back = config_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));

    EXPECT_THROW(config_from_json(nlohmann::json{{"rain", {{"betta", 1}}}}), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json{{"blend", {{"mode", "screen"}}}}), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json{{"rain", {{"alpha", "x"}}}}), ConfigError);
}

TEST(Config, PartialDocumentKeepsDefaults)
{
    auto c = config_from_json(nlohmann::json{{"rain", {{"beta", 0.02}}}});
    EXPECT_EQ(c.rain.beta, 0.02);
    EXPECT_EQ(c.rain.alpha, 0.01);
    EXPECT_EQ(c.rgf.n_iter, 6);
}

TEST(Manifest, JsonRoundTrip)
{
    auto m = split_manifest(manifest_with_ids(40), 20, 5, 2, 3);
    m.samples[0].cover = "c.png";
    m.samples[0].maps.high = "x/high.png";
    auto back = manifest_from_json(to_json(m));
    EXPECT_EQ(to_json(back), to_json(m));
    EXPECT_THROW(manifest_from_json(nlohmann::json{{"version", "2"}, {"samples", nlohmann::json::array()}}),
                 DataError);
}

TEST(Split, PaperScaleCounts)
{
    auto m = split_manifest(manifest_with_ids(8580), 20, 5, 0, 1);
    EXPECT_EQ(m.groups.size(), 429u);
    EXPECT_EQ(m.split["train"].size(), 2145u);
    EXPECT_TRUE(m.split["test"].empty());
}

TEST(Split, DisjointExactCountsForFeasibleTest)
{
    const auto base = manifest_with_ids(200);
    for (std::size_t k_test = 0; k_test <= 15; ++k_test) {
        auto m = split_manifest(base, 20, 5, k_test, k_test);
        ASSERT_EQ(m.split["train"].size(), 50u);
        ASSERT_EQ(m.split["test"].size(), 10 * k_test);
        std::set<std::string> train(m.split["train"].begin(), m.split["train"].end());
        for (const auto& id : m.split["test"])
            ASSERT_FALSE(train.count(id));
        // Each group contributes exactly its quota.
        for (const auto& [gid, members] : m.groups) {
            std::set<std::string> g(members.begin(), members.end());
            std::size_t tr = 0;
            for (const auto& id : m.split["train"])
                tr += g.count(id);
            ASSERT_EQ(tr, 5u) << gid;
        }
    }
}

TEST(Split, SeededAndVaried)
{
    const auto base = manifest_with_ids(100);
    EXPECT_EQ(split_manifest(base, 20, 5, 3, 7).split, split_manifest(base, 20, 5, 3, 7).split);
    EXPECT_NE(split_manifest(base, 20, 5, 3, 7).split, split_manifest(base, 20, 5, 3, 8).split);
}

TEST(Split, Infeasible)
{
    EXPECT_THROW(split_manifest(manifest_with_ids(40), 20, 20, 1, 0), ConfigError);
    EXPECT_THROW(split_manifest(manifest_with_ids(41), 20, 5, 0, 0), ConfigError);
    EXPECT_THROW(split_manifest(manifest_with_ids(40), 0, 5, 0, 0), ConfigError);
}

TEST(Split, UniformSelection)
{
    // Each member of a 20-group should be picked for train ~5/20 of the time.
    std::vector<int> hits(20, 0);
    const auto base = manifest_with_ids(20);
    const int trials = 4000;
    for (int s = 0; s < trials; ++s) {
        auto m = split_manifest(base, 20, 5, 0, static_cast<std::uint64_t>(s));
        for (const auto& id : m.split["train"])
            ++hits[std::stoi(id.substr(3))];
    }
    for (int h : hits)
        EXPECT_NEAR(h / double(trials), 0.25, 0.03);
}

class DatasetTest : public ::testing::Test {
protected:
    test_util::TempDir dir;
};

TEST_F(DatasetTest, BuildWritesSamplesAndManifest)
{
    std::vector<SynthInputs> inputs{write_scene(dir.path / "in", "a", 64, 48, 1, true),
                                    write_scene(dir.path / "in", "b", 64, 48, 2, false)};
    SynthConfig c;
    c.emit_decomposition = true;
    auto m = build_dataset(inputs, c, 5, dir.path / "out");
    ASSERT_EQ(m.samples.size(), 2u);
    EXPECT_EQ(m.samples[0].seed, mix_seed(5, 0));
    EXPECT_EQ(m.samples[1].seed, mix_seed(5, 1));
    for (const char* f : {"rainy.png", "clean.png", "m_s.png", "m_d.png", "a.png", "s.png", "t_r.png", "low.png",
                          "high.png"})
        EXPECT_TRUE(fs::exists(dir.path / "out" / "a" / f)) << f;
    auto loaded = load_manifest(dir.path / "out" / "manifest.json");
    EXPECT_EQ(to_json(loaded), to_json(m));
    EXPECT_FALSE(loaded.samples[1].cover.has_value());

    // Maps read back at PNG precision.
    auto scene = make_street_scene(64, 48, 1);
    EXPECT_EQ(load_png_rgb8(dir.path / "out" / "a" / "clean.png"), scene.clean);
    auto t_r = load_map(dir.path / "out" / "a" / "t_r.png");
    auto expected = streak_transmission(scene.depth, c.rain);
    for (std::size_t i = 0; i < t_r.size(); ++i)
        EXPECT_LE(std::abs(t_r.values()[i] - expected.values()[i]), 0.5 / 255 + 1e-12);

    // Decoded low + high is within one byte step of the rainy image.
    auto rainy = load_image(dir.path / "out" / "a" / "rainy.png");
    auto low = load_image(dir.path / "out" / "a" / "low.png");
    auto high = signed_from_bytes(load_png_rgb8(dir.path / "out" / "a" / "high.png"));
    for (std::size_t i = 0; i < rainy.size(); ++i)
        EXPECT_LE(std::abs(low.values()[i] + high.values()[i] - rainy.values()[i]), 1.0 / 255 + 1e-12);
}

TEST_F(DatasetTest, RebuildAndJobCountGiveIdenticalBytes)
{
    std::vector<SynthInputs> inputs;
    for (int i = 0; i < 4; ++i)
        inputs.push_back(write_scene(dir.path / "in", "s" + std::to_string(i), 80, 48, i, i % 2 == 0));
    auto m = build_dataset(inputs, SynthConfig{}, 77, dir.path / "one", 1);
    build_dataset(inputs, SynthConfig{}, 77, dir.path / "three", 3);
    rebuild_dataset(load_manifest(dir.path / "one" / "manifest.json"), dir.path / "again", 2);
    const auto h1 = hash_tree(dir.path / "one");
    EXPECT_EQ(h1, hash_tree(dir.path / "three"));
    EXPECT_EQ(h1, hash_tree(dir.path / "again"));
}

TEST_F(DatasetTest, BadIdsAndDuplicates)
{
    auto in = write_scene(dir.path / "in", "ok", 32, 32, 1, false);
    auto bad = in;
    bad.id = "../evil";
    EXPECT_THROW(build_dataset({bad}, SynthConfig{}, 0, dir.path / "o"), ConfigError);
    EXPECT_THROW(build_dataset({in, in}, SynthConfig{}, 0, dir.path / "o"), ConfigError);
}

TEST_F(DatasetTest, MissingInputIsIoError)
{
    SynthInputs in{"x", dir.path / "nope.png", dir.path / "nope.pfm", std::nullopt};
    EXPECT_THROW(build_dataset({in}, SynthConfig{}, 0, dir.path / "o"), IoError);
}

TEST_F(DatasetTest, EvalIdenticalAndOffset)
{
    fs::create_directories(dir.path / "p");
    fs::create_directories(dir.path / "g");
    fs::create_directories(dir.path / "q");
    for (int i = 0; i < 3; ++i) {
        auto scene = make_street_scene(40, 32, i);
        save_png_rgb8(scene.clean, dir.path / "p" / ("x" + std::to_string(i) + ".png"));
        save_png_rgb8(scene.clean, dir.path / "g" / ("x" + std::to_string(i) + ".png"));
        ByteImage shifted(40, 32, std::uint8_t{110});
        save_png_rgb8(ByteImage(40, 32, std::uint8_t{100}), dir.path / "q" / ("x" + std::to_string(i) + ".png"));
        save_png_rgb8(shifted, dir.path / ("r" + std::to_string(i) + ".png"));
    }
    auto same = evaluate_dirs(dir.path / "p", dir.path / "g");
    EXPECT_EQ(same.rows.size(), 3u);
    EXPECT_TRUE(std::isinf(same.mean_psnr_db));
    EXPECT_NEAR(same.mean_ssim, 1.0, 1e-9);

    fs::create_directories(dir.path / "r");
    for (int i = 0; i < 3; ++i)
        fs::rename(dir.path / ("r" + std::to_string(i) + ".png"), dir.path / "r" / ("x" + std::to_string(i) + ".png"));
    auto off = evaluate_dirs(dir.path / "q", dir.path / "r");
    EXPECT_NEAR(off.mean_psnr_db, 28.131, 0.001);

    write_report(off, dir.path / "rep" / "report.json");
    EXPECT_TRUE(fs::exists(dir.path / "rep" / "report.csv"));
    auto j = read_json_file(dir.path / "rep" / "report.json");
    EXPECT_EQ(j["count"], 3);
}

TEST_F(DatasetTest, EvalUnmatched)
{
    fs::create_directories(dir.path / "p");
    fs::create_directories(dir.path / "g");
    save_png_rgb8(ByteImage(16, 16), dir.path / "p" / "a.png");
    save_png_rgb8(ByteImage(16, 16), dir.path / "g" / "b.png");
    EXPECT_THROW(evaluate_dirs(dir.path / "p", dir.path / "g", true), DataError);
    save_png_rgb8(ByteImage(16, 16), dir.path / "p" / "b.png");
    EXPECT_THROW(evaluate_dirs(dir.path / "p", dir.path / "g"), DataError);
    EXPECT_EQ(evaluate_dirs(dir.path / "p", dir.path / "g", true).rows.size(), 1u);
}

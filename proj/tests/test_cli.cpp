#include <cstdlib>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include <morsynth/morsynth.hpp>

#include "test_util.hpp"

using namespace morsynth;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const std::string& env = "")
{
    const std::string cmd = env + " '" MORSYNTH_CLI_PATH "' " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

} // namespace

class CliTest : public ::testing::Test {
protected:
    test_util::TempDir dir;

    void SetUp() override
    {
        auto scene = make_street_scene(48, 32, 3);
        save_png_rgb8(scene.clean, dir.path / "clean.png");
        save_depth_pfm(scene.depth, dir.path / "depth.pfm");
        save_png_rgb8(make_raindrop_cover(48, 32, 4), dir.path / "cover.png");
    }
};

TEST_F(CliTest, UsageErrorsExitOne)
{
    EXPECT_EQ(run("--help"), 0);
    EXPECT_EQ(run(""), 1);
    EXPECT_EQ(run("frobnicate"), 1);
    EXPECT_EQ(run("synth --bogus --out x"), 1);
    EXPECT_EQ(run("decompose --input " + q(dir.path / "clean.png")), 1); // --out missing
    EXPECT_EQ(run("blend --background a --cover b --out o --mode screen"), 1);
}

TEST_F(CliTest, ConfigErrorsExitOne)
{
    const auto out = dir.path / "o";
    const std::string base = "synth --background " + q(dir.path / "clean.png") + " --depth " +
                             q(dir.path / "depth.pfm") + " --out " + q(out);
    EXPECT_EQ(run(base + " --beta -1"), 1);
    EXPECT_EQ(run(base + " --iterations 0"), 1);
    EXPECT_EQ(run(base, "MOR_SYNTH_JOBS=abc"), 1);
    test_util::TempDir cfg;
    {
        std::ofstream f(cfg.path / "c.json");
        f << R"({"rain": {"alpah": 1}})";
    }
    EXPECT_EQ(run(base + " --config " + q(cfg.path / "c.json")), 1);
}

TEST_F(CliTest, DataErrorsExitTwo)
{
    EXPECT_EQ(run("synth --background " + q(dir.path / "missing.png") + " --depth " + q(dir.path / "depth.pfm") +
                  " --out " + q(dir.path / "o")),
              2);
    fs::create_directories(dir.path / "p");
    fs::create_directories(dir.path / "g");
    save_png_rgb8(ByteImage(16, 16), dir.path / "p" / "a.png");
    save_png_rgb8(ByteImage(16, 16), dir.path / "g" / "b.png");
    EXPECT_EQ(run("eval --pred " + q(dir.path / "p") + " --gt " + q(dir.path / "g") + " --out " +
                  q(dir.path / "r.json")),
              2);
}

TEST_F(CliTest, SynthFlagsOverrideConfigAndRebuildMatches)
{
    {
        std::ofstream f(dir.path / "c.json");
        f << R"({"rain": {"beta": 0.02}, "blend": {"mode": "highlight"}})";
    }
    const auto out = dir.path / "ds";
    ASSERT_EQ(run("synth --background " + q(dir.path / "clean.png") + " --depth " + q(dir.path / "depth.pfm") +
                  " --cover " + q(dir.path / "cover.png") + " --id s0 --seed 4 --config " + q(dir.path / "c.json") +
                  " --beta 0.03 --out " + q(out)),
              0);
    auto m = load_manifest(out / "manifest.json");
    ASSERT_EQ(m.samples.size(), 1u);
    EXPECT_EQ(m.samples[0].params.rain.beta, 0.03);
    EXPECT_EQ(m.samples[0].params.blend.mode, BlendMode::highlight);
    EXPECT_EQ(m.config["base_seed"], 4);

    ASSERT_EQ(run("synth --from-manifest " + q(out / "manifest.json") + " --out " + q(dir.path / "re"),
                  "MOR_SYNTH_JOBS=2"),
              0);
    for (const char* f : {"rainy.png", "m_s.png", "m_d.png", "a.png"})
        EXPECT_EQ(test_util::file_hash(out / "s0" / f), test_util::file_hash(dir.path / "re" / "s0" / f)) << f;
}

TEST_F(CliTest, InputListResolvesRelativePaths)
{
    {
        std::ofstream f(dir.path / "list.json");
        f << R"({"samples": [{"id": "x", "background": "clean.png", "depth": "depth.pfm"},
                             {"id": "y", "background": "clean.png", "depth": "depth.pfm", "cover": "cover.png"}]})";
    }
    ASSERT_EQ(run("synth --inputs " + q(dir.path / "list.json") + " --out " + q(dir.path / "ds") + " --jobs 2"), 0);
    EXPECT_EQ(load_manifest(dir.path / "ds" / "manifest.json").samples.size(), 2u);
    EXPECT_TRUE(fs::exists(dir.path / "ds" / "y" / "m_d.png"));
}

TEST_F(CliTest, DecomposeConstantImageGivesMidGrayHigh)
{
    save_png_rgb8(ByteImage(20, 20, std::uint8_t{90}), dir.path / "flat.png");
    ASSERT_EQ(run("decompose --input " + q(dir.path / "flat.png") + " --out " + q(dir.path / "d")), 0);
    EXPECT_EQ(load_png_rgb8(dir.path / "d" / "high.png"), ByteImage(20, 20, std::uint8_t{128}));
    EXPECT_EQ(load_png_rgb8(dir.path / "d" / "low.png"), ByteImage(20, 20, std::uint8_t{90}));
}

TEST_F(CliTest, DecomposeReconstructsWithinOneStep)
{
    ASSERT_EQ(run("decompose --input " + q(dir.path / "clean.png") + " --iterations 3 --out " + q(dir.path / "d")), 0);
    auto in = load_image(dir.path / "clean.png");
    auto low = load_image(dir.path / "d" / "low.png");
    auto high = signed_from_bytes(load_png_rgb8(dir.path / "d" / "high.png"));
    for (std::size_t i = 0; i < in.size(); ++i)
        EXPECT_LE(std::abs(low.values()[i] + high.values()[i] - in.values()[i]), 1.0 / 255 + 1e-12);
}

TEST_F(CliTest, BlendAndMaps)
{
    ASSERT_EQ(run("blend --background " + q(dir.path / "clean.png") + " --cover " + q(dir.path / "cover.png") +
                  " --mode transparency --t 0.5 --out " + q(dir.path / "b")),
              0);
    auto composite = load_png_rgb8(dir.path / "b" / "composite.png");
    auto bg = load_png_rgb8(dir.path / "clean.png");
    auto cover = load_png_rgb8(dir.path / "cover.png");
    for (std::size_t i = 0; i < composite.size(); ++i)
        EXPECT_EQ(composite.values()[i], blend_transparency(bg.values()[i], cover.values()[i], 0.5));
    EXPECT_TRUE(fs::exists(dir.path / "b" / "m_d.png"));

    ASSERT_EQ(run("maps --depth " + q(dir.path / "depth.pfm") + " --seed 2 --out " + q(dir.path / "m")), 0);
    for (const char* f : {"t_r.png", "pattern.png", "s.png", "a.png", "m_s.png"})
        EXPECT_TRUE(fs::exists(dir.path / "m" / f)) << f;
}

TEST_F(CliTest, SplitAndEval)
{
    Manifest m;
    for (int i = 0; i < 60; ++i) {
        DatasetSample s;
        s.id = "i" + std::to_string(i);
        m.samples.push_back(s);
    }
    save_manifest(m, dir.path / "m.json");
    ASSERT_EQ(run("split --manifest " + q(dir.path / "m.json") + " --group-size 20 --train 5 --test 3 --seed 1 --out " +
                  q(dir.path / "split.json")),
              0);
    auto s = load_manifest(dir.path / "split.json");
    EXPECT_EQ(s.split["train"].size(), 15u);
    EXPECT_EQ(s.split["test"].size(), 9u);
    EXPECT_EQ(run("split --manifest " + q(dir.path / "m.json") + " --train 20 --test 1 --out " +
                  q(dir.path / "bad.json")),
              1);

    fs::create_directories(dir.path / "p");
    fs::copy_file(dir.path / "clean.png", dir.path / "p" / "clean.png");
    fs::create_directories(dir.path / "g");
    fs::copy_file(dir.path / "clean.png", dir.path / "g" / "clean.png");
    ASSERT_EQ(run("eval --pred " + q(dir.path / "p") + " --gt " + q(dir.path / "g") + " --out " +
                  q(dir.path / "r" / "report.json")),
              0);
    auto j = read_json_file(dir.path / "r" / "report.json");
    EXPECT_EQ(j["mean"]["psnr_db"], "inf");
    EXPECT_TRUE(fs::exists(dir.path / "r" / "report.csv"));
}

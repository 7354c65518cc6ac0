#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>

#include <morsynth/random.hpp>
#include <morsynth/raster.hpp>

namespace test_util {

struct TempDir {
    std::filesystem::path path;

    TempDir()
    {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() /
               ("morsynth_test_" + std::to_string(rd()) + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline morsynth::RgbImage random_image(std::size_t w, std::size_t h, std::uint64_t seed)
{
    morsynth::UniformSampler rng(seed);
    morsynth::RgbImage img(w, h);
    for (auto& v : img.values())
        v = rng.unit();
    return img;
}

// FNV-1a over the file bytes; enough to tell two files apart in a test.
inline std::string file_hash(const std::filesystem::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char c;
    while (f.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << h;
    return s.str();
}

} // namespace test_util

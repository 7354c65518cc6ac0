// Writes a procedural street scene to feed `morsynth synth`:
//   clean.png, depth.pfm, cover.png
//
// usage: make_demo_scene OUT_DIR [WIDTH HEIGHT SEED]

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <morsynth/morsynth.hpp>

int main(int argc, char** argv)
{
    if (argc < 2) {
        std::cerr << "usage: make_demo_scene OUT_DIR [WIDTH HEIGHT SEED]\n";
        return 1;
    }
    const std::filesystem::path out = argv[1];
    const std::size_t width = argc > 2 ? std::stoul(argv[2]) : 512;
    const std::size_t height = argc > 3 ? std::stoul(argv[3]) : 256;
    const std::uint64_t seed = argc > 4 ? std::stoull(argv[4]) : 7;

    try {
        std::filesystem::create_directories(out);
        auto scene = morsynth::make_street_scene(width, height, seed);
        morsynth::save_png_rgb8(scene.clean, out / "clean.png");
        morsynth::save_depth_pfm(scene.depth, out / "depth.pfm");
        morsynth::save_png_rgb8(morsynth::make_raindrop_cover(width, height, seed + 1), out / "cover.png");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cout << "wrote clean.png, depth.pfm, cover.png to " << out << "\n";
    return 0;
}

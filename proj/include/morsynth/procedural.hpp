#pragma once

// Small procedural scenes (clean image + depth, raindrop cover layer) for
// demos and tests when no real dataset is at hand.

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "domain.hpp"
#include "random.hpp"
#include "raster.hpp"

namespace morsynth {

struct Scene {
    ByteImage clean;
    DepthMap depth;
};

/// Sky over a row of box buildings over a road. Depth grows from ~4 m at the
/// bottom row to the building facades; the sky sits at `sky_depth`.
inline Scene make_street_scene(std::size_t width, std::size_t height, std::uint64_t seed, double sky_depth = 400.0)
{
    UniformSampler rng(seed);
    ByteImage clean(width, height);
    DepthMap depth(width, height);
    const double horizon = 0.55 * static_cast<double>(height);

    // Skyline: per-column building top and facade depth.
    std::vector<double> roof(width), facade(width);
    std::vector<std::uint8_t> tint(width * 3);
    for (std::size_t x = 0; x < width;) {
        const auto span = static_cast<std::size_t>(rng.uniform(0.06, 0.2) * static_cast<double>(width)) + 1;
        const double top = horizon * rng.uniform(0.2, 0.8);
        const double dist = rng.uniform(30.0, 220.0);
        const auto r = static_cast<std::uint8_t>(rng.uniform(60, 170));
        const auto g = static_cast<std::uint8_t>(rng.uniform(60, 160));
        const auto b = static_cast<std::uint8_t>(rng.uniform(60, 150));
        for (std::size_t k = x; k < std::min(width, x + span); ++k) {
            roof[k] = top;
            facade[k] = dist;
            tint[k * 3 + 0] = r;
            tint[k * 3 + 1] = g;
            tint[k * 3 + 2] = b;
        }
        x += span;
    }

    for (std::size_t y = 0; y < height; ++y) {
        const double fy = static_cast<double>(y);
        for (std::size_t x = 0; x < width; ++x) {
            std::uint8_t rgb[3];
            double d;
            if (fy >= horizon) {
                // Road: ground plane, depth ~ 1 / (distance below horizon).
                const double below = (fy - horizon + 1.0) / (static_cast<double>(height) - horizon);
                d = std::min(sky_depth, 4.0 / below);
                const auto shade = static_cast<std::uint8_t>(70 + 40 * below);
                const bool lane = std::abs(static_cast<double>(x) - 0.5 * static_cast<double>(width)) < 2.0 + 6.0 * below;
                rgb[0] = rgb[1] = rgb[2] = lane ? 200 : shade;
            } else if (fy >= roof[x]) {
                d = facade[x];
                const bool window = (x / 4) % 3 == 1 && (y / 5) % 3 == 1;
                for (int c = 0; c < 3; ++c)
                    rgb[c] = window ? static_cast<std::uint8_t>(tint[x * 3 + c] / 2) : tint[x * 3 + c];
            } else {
                d = sky_depth;
                const double t = fy / horizon;
                rgb[0] = static_cast<std::uint8_t>(150 + 40 * t);
                rgb[1] = static_cast<std::uint8_t>(170 + 30 * t);
                rgb[2] = static_cast<std::uint8_t>(200 + 20 * t);
            }
            for (std::size_t c = 0; c < 3; ++c)
                clean(x, y, c) = rgb[c];
            depth(x, y) = d;
        }
    }
    return {std::move(clean), std::move(depth)};
}

/// Neutral mid-gray glass (128, the pass-through value of the highlight
/// blend) with round drops: dark core, bright rim.
inline ByteImage make_raindrop_cover(std::size_t width, std::size_t height, std::uint64_t seed,
                                     std::size_t drops = 0)
{
    UniformSampler rng(seed);
    ByteImage cover(width, height, std::uint8_t{128});
    if (drops == 0)
        drops = std::max<std::size_t>(1, width * height / 2500);
    for (std::size_t i = 0; i < drops; ++i) {
        const double cx = rng.uniform(0.0, static_cast<double>(width));
        const double cy = rng.uniform(0.0, static_cast<double>(height));
        const double radius = rng.uniform(2.0, 0.04 * static_cast<double>(std::min(width, height)) + 3.0);
        const auto x0 = static_cast<std::size_t>(std::max(0.0, cx - radius - 1));
        const auto x1 = static_cast<std::size_t>(std::min(static_cast<double>(width) - 1, cx + radius + 1));
        const auto y0 = static_cast<std::size_t>(std::max(0.0, cy - radius - 1));
        const auto y1 = static_cast<std::size_t>(std::min(static_cast<double>(height) - 1, cy + radius + 1));
        for (std::size_t y = y0; y <= y1; ++y)
            for (std::size_t x = x0; x <= x1; ++x) {
                const double r = std::hypot(static_cast<double>(x) + 0.5 - cx, static_cast<double>(y) + 0.5 - cy) / radius;
                if (r > 1.0)
                    continue;
                const double v = r > 0.75 ? 128.0 + 110.0 * (r - 0.75) / 0.25 : 70.0 + 50.0 * r;
                for (std::size_t c = 0; c < 3; ++c)
                    cover(x, y, c) = round_to_byte(v);
            }
    }
    return cover;
}

} // namespace morsynth

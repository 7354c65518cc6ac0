#pragma once

#include <morsynth/rain_model.hpp>

namespace test_scenes {

// Smooth horizontal ramp 0.1 -> 0.6 plus thin rain streaks of amplitude 0.3
// (never clips). m_s thresholds the streak layer at the default tau_s.
struct RampStreak {
    morsynth::RgbImage ramp;
    morsynth::RgbImage image;
    morsynth::ScalarMap streaks; ///< additive streak amplitude per pixel
    morsynth::BinaryMask m_s;
};

inline RampStreak ramp_streak(std::size_t w, std::size_t h, std::uint64_t seed, double width = 1.0)
{
    using namespace morsynth;
    StreakPatternParams sp;
    sp.seed = seed;
    sp.width = width;
    sp.intensity_min = sp.intensity_max = 1.0;
    const auto pattern = generate_streak_pattern(w, h, sp);
    auto streaks = generate_like<ScalarMap>(pattern, [&](std::size_t x, std::size_t y) { return 0.3 * pattern(x, y); });
    RgbImage ramp(w, h), image(w, h);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < 3; ++c) {
                ramp(x, y, c) = 0.1 + 0.5 * static_cast<double>(x) / static_cast<double>(w - 1);
                image(x, y, c) = ramp(x, y, c) + streaks(x, y);
            }
    auto m_s = threshold_streak_mask(streaks, 0.05);
    return {std::move(ramp), std::move(image), std::move(streaks), std::move(m_s)};
}

} // namespace test_scenes

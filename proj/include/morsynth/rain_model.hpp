#pragma once

// Depth-driven rain streak and rainy haze layers, the procedural streak
// pattern, and the mixture-of-rain image model
//
//   I(x) = (1 - M_d(x)) * [B(x)(1 - S(x) - A(x)) + S(x) + A0 A(x)] + D(x)
//
// together with its algebraic inverse.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "domain.hpp"
#include "error.hpp"
#include "random.hpp"
#include "raster.hpp"

namespace morsynth {

struct RainParams {
    double alpha = 0.01; ///< streak attenuation, 1/m
    double beta = 0.005; ///< haze attenuation, 1/m
    double d1 = 50.0;    ///< depth (m) below which streak transmission saturates
    double a0 = 0.8;     ///< atmospheric light

    void validate() const
    {
        detail::require_config(alpha > 0.0 && std::isfinite(alpha), "rain.alpha must be > 0");
        detail::require_config(beta >= 0.0 && std::isfinite(beta), "rain.beta must be >= 0");
        detail::require_config(d1 > 0.0 && std::isfinite(d1), "rain.d1 must be > 0");
        detail::require_config(a0 >= 0.0 && a0 <= 1.0, "rain.a0 must lie in [0,1]");
    }
};

/// Rendering parameters for the streak intensity pattern. Angles are degrees
/// from vertical, lengths and width in pixels.
struct StreakPatternParams {
    std::uint64_t seed = 0;
    double density = 1500.0; ///< streaks per megapixel
    double angle_mean = 10.0;
    double angle_jitter = 5.0;
    double length_min = 10.0;
    double length_max = 40.0;
    double width = 1.0;
    double intensity_min = 0.5;
    double intensity_max = 1.0;

    void validate() const
    {
        detail::require_config(density >= 0.0 && std::isfinite(density), "streaks.density must be >= 0");
        detail::require_config(std::isfinite(angle_mean), "streaks.angle_mean must be finite");
        detail::require_config(angle_jitter >= 0.0 && std::isfinite(angle_jitter),
                               "streaks.angle_jitter must be >= 0");
        detail::require_config(length_min > 0.0 && length_min <= length_max && std::isfinite(length_max),
                               "streaks.length range must satisfy 0 < min <= max");
        detail::require_config(width > 0.0 && std::isfinite(width), "streaks.width must be > 0");
        detail::require_config(intensity_min >= 0.0 && intensity_min <= intensity_max && intensity_max <= 1.0,
                               "streaks.intensity range must satisfy 0 <= min <= max <= 1");
    }
};

/// One rendered rain streak: a capsule from (x0,y0) to (x1,y1) in pixel
/// coordinates where pixel (i,j) has its centre at (i+0.5, j+0.5).
struct StreakSegment {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    double width = 1.0;
    double intensity = 1.0;
};

struct GroundTruthMaps {
    BinaryMask m_s;
    BinaryMask m_d;
    ScalarMap a;
    ScalarMap s;
    ScalarMap d_layer;

    /// All-empty maps of the given size: no streaks, haze, drops.
    static GroundTruthMaps zeros(std::size_t width, std::size_t height)
    {
        return {BinaryMask(width, height), BinaryMask(width, height), ScalarMap(width, height),
                ScalarMap(width, height), ScalarMap(width, height)};
    }

    void check_shapes() const
    {
        require_same_shape(m_s, m_d, "ground-truth maps");
        require_same_shape(m_s, a, "ground-truth maps");
        require_same_shape(m_s, s, "ground-truth maps");
        require_same_shape(m_s, d_layer, "ground-truth maps");
    }
};

// ---------------------------------------------------------------------------
// Depth-driven layers

/// t_r(x) = exp(-alpha * max(d1, d(x))).
inline ScalarMap streak_transmission(const DepthMap& depth, const RainParams& params)
{
    params.validate();
    return generate_like<ScalarMap>(depth, [&](std::size_t x, std::size_t y) {
        return std::exp(-params.alpha * std::max(params.d1, depth(x, y)));
    });
}

/// A(x) = 1 - exp(-beta * d(x)).
inline ScalarMap haze_layer(const DepthMap& depth, const RainParams& params)
{
    params.validate();
    return generate_like<ScalarMap>(depth, [&](std::size_t x, std::size_t y) {
        // -expm1 keeps A exactly 0 at d = 0 and accurate for small beta*d.
        return -std::expm1(-params.beta * depth(x, y));
    });
}

/// S(x) = pattern(x) * t_r(x).
inline ScalarMap streak_layer(const ScalarMap& pattern, const ScalarMap& transmission)
{
    require_same_shape(pattern, transmission, "streak_layer");
    return generate_like<ScalarMap>(pattern, [&](std::size_t x, std::size_t y) {
        return pattern(x, y) * transmission(x, y);
    });
}

/// M_s(x) = 1 iff s(x) > tau_s.
inline BinaryMask threshold_streak_mask(const ScalarMap& s, double tau_s)
{
    detail::require_config(tau_s >= 0.0 && tau_s <= 1.0, "tau_s must lie in [0,1]");
    return generate_like<BinaryMask>(s, [&](std::size_t x, std::size_t y) -> std::uint8_t {
        return s(x, y) > tau_s ? 1 : 0;
    });
}

// ---------------------------------------------------------------------------
// Streak pattern

/// Draw the streak segments for a width x height frame. The count is
/// round(density * width * height / 1e6).
inline std::vector<StreakSegment> plan_streaks(std::size_t width, std::size_t height,
                                               const StreakPatternParams& params)
{
    if (width == 0 || height == 0)
        throw DimensionError("streak pattern needs a non-empty frame");
    params.validate();

    const double expected = params.density * static_cast<double>(width) * static_cast<double>(height) / 1e6;
    const auto count = static_cast<std::size_t>(std::floor(expected + 0.5));

    UniformSampler rng(params.seed);
    std::vector<StreakSegment> segments;
    segments.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        // Fixed draw order: centre x, centre y, angle, length, intensity.
        const double cx = rng.uniform(0.0, static_cast<double>(width));
        const double cy = rng.uniform(0.0, static_cast<double>(height));
        const double angle =
            (params.angle_mean + params.angle_jitter * (2.0 * rng.unit() - 1.0)) * std::numbers::pi / 180.0;
        const double length = rng.uniform(params.length_min, params.length_max);
        const double intensity = rng.uniform(params.intensity_min, params.intensity_max);

        const double dx = 0.5 * length * std::sin(angle);
        const double dy = 0.5 * length * std::cos(angle);
        segments.push_back({cx - dx, cy - dy, cx + dx, cy + dy, params.width, intensity});
    }
    return segments;
}

namespace detail {

inline double distance_to_segment(double px, double py, const StreakSegment& seg)
{
    const double vx = seg.x1 - seg.x0;
    const double vy = seg.y1 - seg.y0;
    const double len2 = vx * vx + vy * vy;
    double t = 0.0;
    if (len2 > 0.0)
        t = std::clamp(((px - seg.x0) * vx + (py - seg.y0) * vy) / len2, 0.0, 1.0);
    const double ex = px - (seg.x0 + t * vx);
    const double ey = py - (seg.y0 + t * vy);
    return std::sqrt(ex * ex + ey * ey);
}

} // namespace detail

/// Anti-aliased capsule rendering with a one-pixel coverage ramp; overlapping
/// streaks combine by per-pixel maximum.
inline ScalarMap rasterize_streaks(std::size_t width, std::size_t height, const std::vector<StreakSegment>& segments)
{
    ScalarMap out(width, height);
    const auto w = static_cast<double>(width);
    const auto h = static_cast<double>(height);
    for (const auto& seg : segments) {
        const double reach = 0.5 * seg.width + 0.5;
        const double xmin = std::max(0.0, std::floor(std::min(seg.x0, seg.x1) - reach));
        const double xmax = std::min(w - 1.0, std::ceil(std::max(seg.x0, seg.x1) + reach));
        const double ymin = std::max(0.0, std::floor(std::min(seg.y0, seg.y1) - reach));
        const double ymax = std::min(h - 1.0, std::ceil(std::max(seg.y0, seg.y1) + reach));
        if (xmin > xmax || ymin > ymax)
            continue;
        for (auto y = static_cast<std::size_t>(ymin); y <= static_cast<std::size_t>(ymax); ++y) {
            for (auto x = static_cast<std::size_t>(xmin); x <= static_cast<std::size_t>(xmax); ++x) {
                const double dist = detail::distance_to_segment(static_cast<double>(x) + 0.5,
                                                                static_cast<double>(y) + 0.5, seg);
                const double coverage = std::clamp(reach - dist, 0.0, 1.0);
                out(x, y) = std::max(out(x, y), seg.intensity * coverage);
            }
        }
    }
    return out;
}

inline ScalarMap generate_streak_pattern(std::size_t width, std::size_t height, const StreakPatternParams& params)
{
    return rasterize_streaks(width, height, plan_streaks(width, height, params));
}

// ---------------------------------------------------------------------------
// Image model

/// Applies the mixture-of-rain model per channel and clamps to [0,1].
/// 1 - S - A may go negative; the formula is applied as written.
inline RgbImage compose_mor(const RgbImage& background, const GroundTruthMaps& maps, const RainParams& params)
{
    params.validate();
    maps.check_shapes();
    require_same_shape(background, maps.m_d, "compose_mor");

    RgbImage out(background.width(), background.height());
    for (std::size_t y = 0; y < background.height(); ++y) {
        for (std::size_t x = 0; x < background.width(); ++x) {
            const double d = maps.d_layer(x, y);
            if (maps.m_d(x, y)) {
                for (std::size_t c = 0; c < 3; ++c)
                    out(x, y, c) = d;
                continue;
            }
            const double s = maps.s(x, y);
            const double a = maps.a(x, y);
            for (std::size_t c = 0; c < 3; ++c) {
                const double bracket = background(x, y, c) * (1.0 - s - a) + s + params.a0 * a;
                out(x, y, c) = clamp_unit(bracket + d);
            }
        }
    }
    return out;
}

struct MorInversion {
    RgbImage background; ///< recovered B, zero where invalid
    BinaryMask valid;    ///< 1 where B was recoverable
};

/// Solves the image model for B where M_d = 0 and 1 - S - A > epsilon.
/// Recovered values are clamped to [0,1]; D is subtracted before solving.
inline MorInversion invert_mor(const RgbImage& image, const GroundTruthMaps& maps, const RainParams& params,
                               double epsilon = 1e-3)
{
    params.validate();
    maps.check_shapes();
    require_same_shape(image, maps.m_d, "invert_mor");

    MorInversion result{RgbImage(image.width(), image.height()), BinaryMask(image.width(), image.height())};
    for (std::size_t y = 0; y < image.height(); ++y) {
        for (std::size_t x = 0; x < image.width(); ++x) {
            const double s = maps.s(x, y);
            const double a = maps.a(x, y);
            const double denom = 1.0 - s - a;
            if (maps.m_d(x, y) || !(denom > epsilon))
                continue;
            result.valid(x, y) = 1;
            for (std::size_t c = 0; c < 3; ++c) {
                const double numer = image(x, y, c) - maps.d_layer(x, y) - s - params.a0 * a;
                result.background(x, y, c) = clamp_unit(numer / denom);
            }
        }
    }
    return result;
}

} // namespace morsynth

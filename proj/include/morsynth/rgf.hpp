#pragma once

// Rolling guidance filter: an iterated joint bilateral filter that always
// filters the original input, guided by the previous iterate, starting from
// a zero guidance image.
//
//   J^{k+1}(p) = 1/K_p * sum_{q in N(p)} W_s(|p-q|) W_r(|J^k(p) - J^k(q)|) I(q)
//
// N(p) is the square window of radius r truncated at the image border; the
// weights are renormalised over whatever part of the window remains.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "error.hpp"
#include "raster.hpp"

namespace morsynth {

struct RgfParams {
    double sigma_s = 3.0;
    double sigma_r = 0.1;
    int n_iter = 6;
    std::optional<int> window_radius; ///< defaults to ceil(3 * sigma_s)

    int radius() const { return window_radius.value_or(static_cast<int>(std::ceil(3.0 * sigma_s))); }

    void validate() const
    {
        detail::require_config(sigma_s > 0.0 && std::isfinite(sigma_s), "rgf.sigma_s must be > 0");
        detail::require_config(sigma_r > 0.0 && std::isfinite(sigma_r), "rgf.sigma_r must be > 0");
        detail::require_config(n_iter >= 1, "rgf.n_iter must be >= 1");
        detail::require_config(!window_radius || *window_radius >= 0, "rgf.window_radius must be >= 0");
    }
};

struct Decomposition {
    RgbImage low;     ///< structure
    SignedImage high; ///< input - low
};

namespace detail {

inline std::vector<double> gaussian_taps(double sigma, int radius)
{
    std::vector<double> taps(2 * static_cast<std::size_t>(radius) + 1);
    for (int i = -radius; i <= radius; ++i)
        taps[static_cast<std::size_t>(i + radius)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    return taps;
}

// One renormalised 1-D pass along x (horizontal == true) or y over all three
// channels. Sums are of offsets from the centre sample so a constant row
// comes back bit for bit.
inline void gaussian_pass(const std::vector<double>& src, std::vector<double>& dst, std::size_t width,
                          std::size_t height, const std::vector<double>& taps, int radius, bool horizontal)
{
    const auto w = static_cast<std::ptrdiff_t>(width);
    const auto h = static_cast<std::ptrdiff_t>(height);
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            const std::ptrdiff_t pos = horizontal ? x : y;
            const std::ptrdiff_t extent = horizontal ? w : h;
            const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, pos - radius);
            const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(extent - 1, pos + radius);
            const std::size_t out = static_cast<std::size_t>(y * w + x) * 3;
            const double* centre = src.data() + out;
            double acc[3] = {0.0, 0.0, 0.0};
            double norm = 0.0;
            for (std::ptrdiff_t q = lo; q <= hi; ++q) {
                const double wt = taps[static_cast<std::size_t>(q - pos + radius)];
                const std::size_t idx =
                    horizontal ? static_cast<std::size_t>(y * w + q) : static_cast<std::size_t>(q * w + x);
                acc[0] += wt * (src[idx * 3 + 0] - centre[0]);
                acc[1] += wt * (src[idx * 3 + 1] - centre[1]);
                acc[2] += wt * (src[idx * 3 + 2] - centre[2]);
                norm += wt;
            }
            dst[out + 0] = centre[0] + acc[0] / norm;
            dst[out + 1] = centre[1] + acc[1] / norm;
            dst[out + 2] = centre[2] + acc[2] / norm;
        }
    }
}

} // namespace detail

/// Gaussian blur with a square window truncated at the borders and
/// renormalised. The truncated window is a rectangle, so the 2-D
/// normalisation factors into two 1-D passes.
inline RgbImage gaussian_blur(const RgbImage& input, double sigma, int radius)
{
    detail::require_config(sigma > 0.0, "gaussian_blur: sigma must be > 0");
    detail::require_config(radius >= 0, "gaussian_blur: radius must be >= 0");
    const auto taps = detail::gaussian_taps(sigma, radius);
    std::vector<double> src(input.values().begin(), input.values().end());
    std::vector<double> tmp(src.size());
    detail::gaussian_pass(src, tmp, input.width(), input.height(), taps, radius, true);
    detail::gaussian_pass(tmp, src, input.width(), input.height(), taps, radius, false);
    for (double& v : src)
        v = clamp_unit(v);
    return RgbImage(input.width(), input.height(), std::move(src));
}

/// Dense windowed joint bilateral filter of `input` guided by `guidance`.
/// Range distance is Euclidean over the three guidance channels.
inline RgbImage joint_bilateral_step(const RgbImage& input, const RgbImage& guidance, const RgfParams& params)
{
    params.validate();
    require_same_shape(input, guidance, "joint_bilateral_step");

    const int r = params.radius();
    const auto spatial_taps = detail::gaussian_taps(params.sigma_s, r);
    const std::size_t span = spatial_taps.size();
    std::vector<double> spatial(span * span);
    for (std::size_t j = 0; j < span; ++j)
        for (std::size_t i = 0; i < span; ++i)
            spatial[j * span + i] = spatial_taps[j] * spatial_taps[i];
    const double range_scale = -1.0 / (2.0 * params.sigma_r * params.sigma_r);

    const auto w = static_cast<std::ptrdiff_t>(input.width());
    const auto h = static_cast<std::ptrdiff_t>(input.height());
    const double* in = input.values().data();
    const double* g = guidance.values().data();
    std::vector<double> out(input.size());

    for (std::ptrdiff_t y = 0; y < h; ++y) {
        const std::ptrdiff_t y0 = std::max<std::ptrdiff_t>(0, y - r);
        const std::ptrdiff_t y1 = std::min<std::ptrdiff_t>(h - 1, y + r);
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, x - r);
            const std::ptrdiff_t x1 = std::min<std::ptrdiff_t>(w - 1, x + r);
            const double* gp = g + (y * w + x) * 3;
            const double* ip = in + (y * w + x) * 3;
            double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, norm = 0.0;
            for (std::ptrdiff_t qy = y0; qy <= y1; ++qy) {
                const double* srow = spatial.data() + static_cast<std::size_t>(qy - y + r) * span;
                for (std::ptrdiff_t qx = x0; qx <= x1; ++qx) {
                    const std::ptrdiff_t q = (qy * w + qx) * 3;
                    const double d0 = gp[0] - g[q + 0];
                    const double d1 = gp[1] - g[q + 1];
                    const double d2 = gp[2] - g[q + 2];
                    const double wt =
                        srow[qx - x + r] * std::exp((d0 * d0 + d1 * d1 + d2 * d2) * range_scale);
                    acc0 += wt * (in[q + 0] - ip[0]);
                    acc1 += wt * (in[q + 1] - ip[1]);
                    acc2 += wt * (in[q + 2] - ip[2]);
                    norm += wt;
                }
            }
            const std::size_t o = static_cast<std::size_t>(y * w + x) * 3;
            out[o + 0] = clamp_unit(ip[0] + acc0 / norm);
            out[o + 1] = clamp_unit(ip[1] + acc1 / norm);
            out[o + 2] = clamp_unit(ip[2] + acc2 / norm);
        }
    }
    return RgbImage(input.width(), input.height(), std::move(out));
}

/// J^0 = 0, so the first iteration has W_r == 1 and is evaluated as a
/// separable Gaussian blur; later iterations use the dense step.
inline RgbImage rolling_guidance_filter(const RgbImage& input, const RgfParams& params)
{
    params.validate();
    RgbImage guidance = gaussian_blur(input, params.sigma_s, params.radius());
    for (int k = 1; k < params.n_iter; ++k)
        guidance = joint_bilateral_step(input, guidance, params);
    return guidance;
}

/// low = RGF(input), high = input - low. The low layer is re-derived as
/// input - high so the pair sums back to the input whenever a double pair
/// can represent that sum exactly.
inline Decomposition decompose(const RgbImage& input, const RgfParams& params)
{
    RgbImage low = rolling_guidance_filter(input, params);
    std::vector<double> high(input.size());
    auto in = input.values();
    auto lo = low.values();
    for (std::size_t i = 0; i < in.size(); ++i) {
        high[i] = in[i] - lo[i];
        const double refined = in[i] - high[i];
        if (refined >= 0.0 && refined <= 1.0)
            lo[i] = refined;
    }
    return {std::move(low), SignedImage(input.width(), input.height(), std::move(high))};
}

} // namespace morsynth

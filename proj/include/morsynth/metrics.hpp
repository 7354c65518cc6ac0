#pragma once

// Image quality metrics and the closed-form training losses, as pure
// functions over rasters.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "raster.hpp"

namespace morsynth {

struct LossWeights {
    std::vector<double> lambdas{0.4, 0.6, 0.8, 1.0};
    double gamma = 0.10;

    void validate() const
    {
        detail::require_config(!lambdas.empty(), "loss weights: lambdas must be nonempty");
        for (double l : lambdas)
            detail::require_config(l >= 0.0 && std::isfinite(l), "loss weights: lambdas must be finite and >= 0");
        detail::require_config(gamma >= 0.0 && std::isfinite(gamma), "loss weights: gamma must be >= 0");
    }
};

// ---------------------------------------------------------------------------
// MSE

inline double mse(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw DimensionError("mse: length mismatch " + std::to_string(x.size()) + " vs " +
                             std::to_string(y.size()));
    if (x.empty())
        throw DimensionError("mse: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        acc += d * d;
    }
    return acc / static_cast<double>(x.size());
}

/// Mean of squared differences over every sample. The two rasters may be of
/// different kinds (an attention map against a binary mask) but must have the
/// same shape and channel count.
template <typename TX, std::size_t C, typename DX, typename TY, typename DY>
double mse(const Raster<TX, C, DX>& x, const Raster<TY, C, DY>& y)
{
    require_same_shape(x, y, "mse");
    auto xs = x.values();
    auto ys = y.values();
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double d = static_cast<double>(xs[i]) - static_cast<double>(ys[i]);
        acc += d * d;
    }
    return acc / static_cast<double>(xs.size());
}

/// mse(x, 0).
template <typename T, std::size_t C, typename D>
double mean_square(const Raster<T, C, D>& x)
{
    double acc = 0.0;
    for (T v : x.values())
        acc += static_cast<double>(v) * static_cast<double>(v);
    return acc / static_cast<double>(x.size());
}

// ---------------------------------------------------------------------------
// PSNR / SSIM

/// 10 log10(peak^2 / mse) over all RGB samples jointly; +infinity when the
/// images are identical.
inline double psnr(const RgbImage& pred, const RgbImage& gt, double peak = 1.0)
{
    detail::require_config(peak > 0.0, "psnr: peak must be > 0");
    const double err = mse(pred, gt);
    if (err == 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / err);
}

struct SsimOptions {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
};

namespace detail {

// "Valid" separable correlation: output is (w - n + 1) x (h - n + 1).
inline std::vector<double> valid_filter(const std::vector<double>& src, std::size_t w, std::size_t h,
                                        const std::vector<double>& taps)
{
    const std::size_t n = taps.size();
    const std::size_t ow = w - n + 1;
    const std::size_t oh = h - n + 1;
    std::vector<double> tmp(ow * h);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                acc += taps[k] * src[y * w + x + k];
            tmp[y * ow + x] = acc;
        }
    std::vector<double> out(ow * oh);
    for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                acc += taps[k] * tmp[(y + k) * ow + x];
            out[y * ow + x] = acc;
        }
    return out;
}

} // namespace detail

/// Mean SSIM over the valid region of a Gaussian window, per channel, then
/// averaged over channels.
inline double ssim(const RgbImage& pred, const RgbImage& gt, const SsimOptions& opt = {})
{
    require_same_shape(pred, gt, "ssim");
    const auto n = static_cast<std::size_t>(opt.window);
    if (pred.width() < n || pred.height() < n)
        throw DimensionError("ssim: image " + pred.shape_string() + " is smaller than the " +
                             std::to_string(n) + "x" + std::to_string(n) + " window");

    std::vector<double> taps(n);
    double tap_sum = 0.0;
    const double centre = (static_cast<double>(n) - 1.0) / 2.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(i) - centre;
        taps[i] = std::exp(-d * d / (2.0 * opt.sigma * opt.sigma));
        tap_sum += taps[i];
    }
    for (double& t : taps)
        t /= tap_sum;

    const double c1 = (opt.k1 * opt.dynamic_range) * (opt.k1 * opt.dynamic_range);
    const double c2 = (opt.k2 * opt.dynamic_range) * (opt.k2 * opt.dynamic_range);
    const std::size_t w = pred.width();
    const std::size_t h = pred.height();

    double total = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        std::vector<double> x(w * h), y(w * h), xx(w * h), yy(w * h), xy(w * h);
        for (std::size_t i = 0; i < w * h; ++i) {
            x[i] = pred.values()[i * 3 + c];
            y[i] = gt.values()[i * 3 + c];
            xx[i] = x[i] * x[i];
            yy[i] = y[i] * y[i];
            xy[i] = x[i] * y[i];
        }
        const auto mx = detail::valid_filter(x, w, h, taps);
        const auto my = detail::valid_filter(y, w, h, taps);
        const auto mxx = detail::valid_filter(xx, w, h, taps);
        const auto myy = detail::valid_filter(yy, w, h, taps);
        const auto mxy = detail::valid_filter(xy, w, h, taps);

        double sum = 0.0;
        for (std::size_t i = 0; i < mx.size(); ++i) {
            const double vx = mxx[i] - mx[i] * mx[i];
            const double vy = myy[i] - my[i] * my[i];
            const double cov = mxy[i] - mx[i] * my[i];
            sum += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
                   ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
        }
        total += sum / static_cast<double>(mx.size());
    }
    return total / 3.0;
}

// ---------------------------------------------------------------------------
// Losses

struct AttentionLosses {
    double hfam = 0.0; ///< streak attention vs M_s
    double lfam = 0.0; ///< haze attention vs A
    double rsam = 0.0; ///< raindrop attention vs M_d
};

inline AttentionLosses attention_losses(const ScalarMap& a_hn, const ScalarMap& a_fn, const ScalarMap& a_rn,
                                        const BinaryMask& m_s, const ScalarMap& a, const BinaryMask& m_d)
{
    return {mse(a_hn, m_s), mse(a_fn, a), mse(a_rn, m_d)};
}

/// sum_i lambda_i * mse(preds[i], targets[i]).
template <typename R>
double multiscale_loss(std::span<const R> preds, std::span<const R> targets, const LossWeights& weights)
{
    weights.validate();
    if (preds.size() != targets.size() || preds.size() != weights.lambdas.size())
        throw DimensionError("multiscale_loss: expected " + std::to_string(weights.lambdas.size()) +
                             " prediction/target pairs, got " + std::to_string(preds.size()) + "/" +
                             std::to_string(targets.size()));
    double total = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        total += weights.lambdas[i] * mse(preds[i], targets[i]);
    return total;
}

/// Attentive-discriminator map loss. The low-frequency attention here is the
/// haze branch output A_FN.
inline double discriminator_map_loss(const ScalarMap& d_map_output, const ScalarMap& d_map_real,
                                     const ScalarMap& a_hn, const ScalarMap& a_fn, const ScalarMap& a_rn)
{
    return mse(d_map_output, a_hn) + mse(d_map_output, a_fn) + mse(d_map_output, a_rn) +
           mean_square(d_map_real);
}

/// -ln D(R) - ln(1 - D(O)) + gamma * L_map, natural log.
inline double gan_losses(double d_real, double d_output, double l_map, const LossWeights& weights)
{
    weights.validate();
    if (!(d_real > 0.0 && d_real < 1.0) || !(d_output > 0.0 && d_output < 1.0))
        throw DataError("gan_losses: discriminator probabilities must lie strictly inside (0,1)");
    return -std::log(d_real) - std::log1p(-d_output) + weights.gamma * l_map;
}

/// Generator objective restricted to the terms computable without a
/// pretrained feature network. The perceptual term is always absent.
struct GeneratorLoss {
    AttentionLosses attention;
    double multiscale = 0.0;
    static constexpr bool perceptual_included = false;

    double total() const { return attention.hfam + attention.lfam + attention.rsam + multiscale; }
};

} // namespace morsynth

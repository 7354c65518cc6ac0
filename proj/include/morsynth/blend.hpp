#pragma once

// Raindrop cover-layer blending on the 0-255 scale. `a` is the background
// layer, `b` the cover layer, a_t = 255 - a and b_t = 255 - b their
// anti-phases. Results are rounded half-up and clamped to [0,255].

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>

#include "domain.hpp"
#include "error.hpp"
#include "raster.hpp"

namespace morsynth {

enum class BlendMode { overlay, highlight, transparency, final };

inline std::string_view to_string(BlendMode mode)
{
    switch (mode) {
    case BlendMode::overlay: return "overlay";
    case BlendMode::highlight: return "highlight";
    case BlendMode::transparency: return "transparency";
    case BlendMode::final: return "final";
    }
    return "final";
}

inline std::optional<BlendMode> parse_blend_mode(std::string_view name)
{
    for (auto mode : {BlendMode::overlay, BlendMode::highlight, BlendMode::transparency, BlendMode::final})
        if (to_string(mode) == name)
            return mode;
    return std::nullopt;
}

struct BlendParams {
    BlendMode mode = BlendMode::final;
    double t = 0.7;      ///< background weight; cover gets 1 - t
    double tau_d = 10.0; ///< drop-mask threshold, byte units

    void validate() const
    {
        if (mode == BlendMode::final)
            detail::require_config(t > 0.0 && t < 1.0, "blend.t must lie in (0,1) for final mode");
        else if (mode == BlendMode::transparency)
            detail::require_config(t >= 0.0 && t <= 1.0, "blend.t must lie in [0,1]");
        detail::require_config(tau_d >= 0.0 && tau_d <= 255.0, "blend.tau_d must lie in [0,255]");
    }
};

inline std::uint8_t blend_overlay(std::uint8_t a, std::uint8_t b)
{
    if (a <= 128)
        return round_to_byte(a * b / 128.0);
    return round_to_byte(255.0 - (255 - a) * (255 - b) / 128.0);
}

inline std::uint8_t blend_highlight(std::uint8_t a, std::uint8_t b)
{
    if (b <= 128)
        return round_to_byte(a * b / 128.0);
    return round_to_byte(255.0 - (255 - a) * (255 - b) / 128.0);
}

inline std::uint8_t blend_transparency(std::uint8_t a, std::uint8_t b, double t)
{
    return round_to_byte(t * a + (1.0 - t) * b);
}

/// The highlight branches with the background scaled by t and the cover by
/// 1 - t inside the product, exactly as the combined model is written.
inline std::uint8_t blend_final(std::uint8_t a, std::uint8_t b, double t)
{
    const double keep = t * (1.0 - t);
    if (b <= 128)
        return round_to_byte(keep * a * b / 128.0);
    return round_to_byte(255.0 - keep * (255 - a) * (255 - b) / 128.0);
}

inline std::uint8_t blend_pixel(std::uint8_t a, std::uint8_t b, const BlendParams& params)
{
    switch (params.mode) {
    case BlendMode::overlay: return blend_overlay(a, b);
    case BlendMode::highlight: return blend_highlight(a, b);
    case BlendMode::transparency: return blend_transparency(a, b, params.t);
    case BlendMode::final: return blend_final(a, b, params.t);
    }
    return a;
}

struct BlendResult {
    RgbImage composite;
    BinaryMask m_d;
};

/// Blends on bytes so results are exact; m_d marks pixels whose largest
/// per-channel deviation from the background exceeds tau_d.
inline BlendResult composite_bytes(const ByteImage& background, const ByteImage& cover, const BlendParams& params)
{
    params.validate();
    require_same_shape(background, cover, "composite_with_mask");

    ByteImage composite(background.width(), background.height());
    BinaryMask mask(background.width(), background.height());
    for (std::size_t y = 0; y < background.height(); ++y) {
        for (std::size_t x = 0; x < background.width(); ++x) {
            int deviation = 0;
            for (std::size_t c = 0; c < 3; ++c) {
                const std::uint8_t a = background(x, y, c);
                const std::uint8_t v = blend_pixel(a, cover(x, y, c), params);
                composite(x, y, c) = v;
                deviation = std::max(deviation, std::abs(int(v) - int(a)));
            }
            mask(x, y) = deviation > params.tau_d ? 1 : 0;
        }
    }
    return {from_byte_domain(composite), std::move(mask)};
}

inline BlendResult composite_with_mask(const RgbImage& background, const RgbImage& cover, const BlendParams& params)
{
    return composite_bytes(to_byte_domain(background), to_byte_domain(cover), params);
}

} // namespace morsynth

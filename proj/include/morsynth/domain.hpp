#pragma once

#include <cmath>
#include <cstdint>

#include "raster.hpp"

namespace morsynth {

/// floor(v + 0.5) clamped to [0, 255]. Used for every real -> byte step so
/// outputs are bit-reproducible.
inline std::uint8_t round_to_byte(double v)
{
    const double r = std::floor(v + 0.5);
    if (!(r > 0.0))
        return 0;
    if (r >= 255.0)
        return 255;
    return static_cast<std::uint8_t>(r);
}

inline std::uint8_t unit_to_byte(double v) { return round_to_byte(v * 255.0); }
inline double byte_to_unit(std::uint8_t b) { return static_cast<double>(b) / 255.0; }

inline ByteImage to_byte_domain(const RgbImage& img)
{
    std::vector<std::uint8_t> out(img.size());
    auto in = img.values();
    for (std::size_t i = 0; i < in.size(); ++i)
        out[i] = unit_to_byte(in[i]);
    return ByteImage(img.width(), img.height(), std::move(out));
}

inline RgbImage from_byte_domain(const ByteImage& raster)
{
    std::vector<double> out(raster.size());
    auto in = raster.values();
    for (std::size_t i = 0; i < in.size(); ++i)
        out[i] = byte_to_unit(in[i]);
    return RgbImage(raster.width(), raster.height(), std::move(out));
}

inline ByteGray to_byte_domain(const ScalarMap& map)
{
    std::vector<std::uint8_t> out(map.size());
    auto in = map.values();
    for (std::size_t i = 0; i < in.size(); ++i)
        out[i] = unit_to_byte(in[i]);
    return ByteGray(map.width(), map.height(), std::move(out));
}

inline ScalarMap from_byte_domain(const ByteGray& raster)
{
    std::vector<double> out(raster.size());
    auto in = raster.values();
    for (std::size_t i = 0; i < in.size(); ++i)
        out[i] = byte_to_unit(in[i]);
    return ScalarMap(raster.width(), raster.height(), std::move(out));
}

/// Masks are stored as 0 / 255.
inline ByteGray mask_to_bytes(const BinaryMask& mask)
{
    std::vector<std::uint8_t> out(mask.size());
    auto in = mask.values();
    for (std::size_t i = 0; i < in.size(); ++i)
        out[i] = in[i] ? 255 : 0;
    return ByteGray(mask.width(), mask.height(), std::move(out));
}

/// Inverse of mask_to_bytes. Anything other than 0 or 255 is rejected.
inline BinaryMask mask_from_bytes(const ByteGray& raster)
{
    std::vector<std::uint8_t> out(raster.size());
    auto in = raster.values();
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] != 0 && in[i] != 255)
            throw DataError("mask byte " + std::to_string(in[i]) + " is neither 0 nor 255");
        out[i] = in[i] ? 1 : 0;
    }
    return BinaryMask(raster.width(), raster.height(), std::move(out));
}

// Signed detail layer <-> bytes: byte = round((h + 1) / 2 * 255).
inline ByteImage signed_to_bytes(const SignedImage& img)
{
    std::vector<std::uint8_t> out(img.size());
    auto in = img.values();
    for (std::size_t i = 0; i < in.size(); ++i)
        out[i] = round_to_byte((in[i] + 1.0) * 0.5 * 255.0);
    return ByteImage(img.width(), img.height(), std::move(out));
}

inline SignedImage signed_from_bytes(const ByteImage& raster)
{
    std::vector<double> out(raster.size());
    auto in = raster.values();
    for (std::size_t i = 0; i < in.size(); ++i)
        out[i] = 2.0 * static_cast<double>(in[i]) / 255.0 - 1.0;
    return SignedImage(raster.width(), raster.height(), std::move(out));
}

} // namespace morsynth

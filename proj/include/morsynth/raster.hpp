#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace morsynth {

// Value-domain policies. Each one names the legal range of a raster's samples
// and is checked whenever a raster is built from external data.
struct UnitRange {
    static constexpr const char* name = "[0,1]";
    static bool contains(double v) { return v >= 0.0 && v <= 1.0; }
};

struct SignedUnitRange {
    static constexpr const char* name = "[-1,1]";
    static bool contains(double v) { return v >= -1.0 && v <= 1.0; }
};

struct BinaryValues {
    static constexpr const char* name = "{0,1}";
    static bool contains(std::uint8_t v) { return v == 0 || v == 1; }
};

struct NonNegativeFinite {
    static constexpr const char* name = "finite and >= 0";
    static bool contains(double v) { return std::isfinite(v) && v >= 0.0; }
};

struct AnyValue {
    static constexpr const char* name = "any";
    template <typename T>
    static bool contains(T) { return true; }
};

/// Interleaved H x W x Channels raster, row-major. The Domain parameter makes
/// images, maps, masks and depth fields distinct types even when their storage
/// coincides.
template <typename T, std::size_t Channels, typename Domain>
class Raster {
public:
    using value_type = T;
    using domain_type = Domain;
    static constexpr std::size_t channels = Channels;

    Raster() = default;

    Raster(std::size_t width, std::size_t height, T fill = T{})
        : width_(width), height_(height), data_(checked_size(width, height), fill)
    {
        check_value(fill);
    }

    Raster(std::size_t width, std::size_t height, std::vector<T> data)
        : width_(width), height_(height), data_(std::move(data))
    {
        if (data_.size() != checked_size(width, height))
            throw DimensionError("raster data length " + std::to_string(data_.size()) +
                                 " does not match " + shape_string());
        for (T v : data_)
            check_value(v);
    }

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::size_t pixel_count() const { return width_ * height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& operator()(std::size_t x, std::size_t y, std::size_t c = 0)
    {
        return data_[(y * width_ + x) * Channels + c];
    }
    const T& operator()(std::size_t x, std::size_t y, std::size_t c = 0) const
    {
        return data_[(y * width_ + x) * Channels + c];
    }

    std::span<T> values() { return data_; }
    std::span<const T> values() const { return data_; }

    std::span<T> row(std::size_t y) { return values().subspan(y * width_ * Channels, width_ * Channels); }
    std::span<const T> row(std::size_t y) const
    {
        return values().subspan(y * width_ * Channels, width_ * Channels);
    }

    template <typename OtherT, std::size_t OtherC, typename OtherD>
    bool same_shape(const Raster<OtherT, OtherC, OtherD>& other) const
    {
        return width_ == other.width() && height_ == other.height();
    }

    std::string shape_string() const
    {
        return std::to_string(width_) + "x" + std::to_string(height_) + "x" + std::to_string(Channels);
    }

    /// Throws DataError unless every sample lies in Domain.
    void validate() const
    {
        for (T v : data_)
            check_value(v);
    }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    static std::size_t checked_size(std::size_t width, std::size_t height)
    {
        if (width == 0 || height == 0)
            throw DimensionError("raster dimensions must be at least 1x1, got " + std::to_string(width) + "x" +
                                 std::to_string(height));
        return width * height * Channels;
    }

    static void check_value(T v)
    {
        if (!Domain::contains(v))
            throw DataError(std::string("raster value outside ") + Domain::name);
    }

    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<T> data_;
};

using RgbImage = Raster<double, 3, UnitRange>;
using ScalarMap = Raster<double, 1, UnitRange>;
using BinaryMask = Raster<std::uint8_t, 1, BinaryValues>;
using DepthMap = Raster<double, 1, NonNegativeFinite>;
/// Signed detail layer; input - low of two unit-range images always fits.
using SignedImage = Raster<double, 3, SignedUnitRange>;
using ByteImage = Raster<std::uint8_t, 3, AnyValue>;
using ByteGray = Raster<std::uint8_t, 1, AnyValue>;
using GrayU16 = Raster<std::uint16_t, 1, AnyValue>;

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* context)
{
    if (!a.same_shape(b))
        throw DimensionError(std::string(context) + ": shape mismatch " + a.shape_string() + " vs " +
                             b.shape_string());
}

/// Build a raster of the same width/height as `like` by evaluating `fn(x, y)`
/// for single-channel outputs.
template <typename Out, typename Like, typename Fn>
Out generate_like(const Like& like, Fn&& fn)
{
    static_assert(Out::channels == 1);
    Out out(like.width(), like.height());
    for (std::size_t y = 0; y < like.height(); ++y)
        for (std::size_t x = 0; x < like.width(); ++x)
            out(x, y) = fn(x, y);
    return out;
}

inline double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

} // namespace morsynth

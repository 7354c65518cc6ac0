#pragma once

// PNG (libpng, low-level API, no colour transforms) and PFM readers/writers.
//
// Supported PNG layouts: 8-bit RGB for images, 8-bit grayscale for maps and
// masks, 16-bit grayscale for depth. Anything else is rejected instead of
// being converted.

#include <png.h>

#include <bit>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "domain.hpp"
#include "raster.hpp"

namespace morsynth {

namespace detail {

struct PngErrorState {
    char message[256] = {};
};

inline void png_error_handler(png_structp png, png_const_charp msg)
{
    auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
    std::snprintf(state->message, sizeof(state->message), "%s", msg ? msg : "unknown libpng error");
    png_longjmp(png, 1);
}

inline void png_warning_handler(png_structp, png_const_charp) {}

struct FileCloser {
    void operator()(std::FILE* f) const
    {
        if (f)
            std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngDecoded {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    int bit_depth = 0;
    int color_type = 0;
    std::vector<std::uint8_t> bytes; // rows packed, 16-bit samples in native order
};

inline const char* png_color_type_name(int color_type)
{
    switch (color_type) {
    case PNG_COLOR_TYPE_GRAY: return "grayscale";
    case PNG_COLOR_TYPE_RGB: return "RGB";
    case PNG_COLOR_TYPE_PALETTE: return "palette";
    case PNG_COLOR_TYPE_GRAY_ALPHA: return "grayscale+alpha";
    case PNG_COLOR_TYPE_RGB_ALPHA: return "RGBA";
    default: return "unknown";
    }
}

/// Decode a PNG that must have exactly the given color type and bit depth.
inline PngDecoded read_png(const std::filesystem::path& path, int want_color_type, int want_bit_depth)
{
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file)
        throw IoError("cannot open " + path.string());

    png_byte signature[8];
    if (std::fread(signature, 1, sizeof(signature), file.get()) != sizeof(signature) ||
        png_sig_cmp(signature, 0, sizeof(signature)) != 0)
        throw IoError(path.string() + ": not a PNG file");

    // Everything touched after setjmp lives behind these pointers, which
    // are never reassigned.
    auto ctx = std::make_unique<PngDecoded>();
    auto rows = std::make_unique<std::vector<png_bytep>>();
    auto problem = std::make_unique<std::string>();
    PngErrorState errors;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &errors, png_error_handler,
                                             png_warning_handler);
    if (!png)
        throw IoError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(path.string() + ": decode error: " + errors.message);
    }

    png_init_io(png, file.get());
    png_set_sig_bytes(png, sizeof(signature));
    png_read_info(png, info);
    ctx->width = png_get_image_width(png, info);
    ctx->height = png_get_image_height(png, info);
    ctx->bit_depth = png_get_bit_depth(png, info);
    ctx->color_type = png_get_color_type(png, info);

    if (ctx->color_type != want_color_type)
        *problem = std::string("unsupported color type ") + png_color_type_name(ctx->color_type) + " (expected " +
                  png_color_type_name(want_color_type) + ")";
    else if (ctx->bit_depth != want_bit_depth)
        *problem = "unsupported bit depth " + std::to_string(ctx->bit_depth) + " (expected " +
                  std::to_string(want_bit_depth) + ")";
    else if (ctx->width == 0 || ctx->height == 0)
        *problem = "zero image dimension";
    if (!problem->empty()) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(path.string() + ": " + *problem);
    }

    if (ctx->bit_depth == 16 && std::endian::native == std::endian::little)
        png_set_swap(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    const std::size_t row_bytes = png_get_rowbytes(png, info);
    ctx->bytes.resize(row_bytes * ctx->height);
    rows->resize(ctx->height);
    for (std::size_t y = 0; y < ctx->height; ++y)
        (*rows)[y] = ctx->bytes.data() + y * row_bytes;
    png_read_image(png, rows->data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return std::move(*ctx);
}

inline void write_png(const std::filesystem::path& path, std::uint32_t width, std::uint32_t height, int color_type,
                      int bit_depth, const std::uint8_t* data, std::size_t row_bytes)
{
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file)
        throw IoError("cannot open " + path.string() + " for writing");

    PngErrorState errors;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &errors, png_error_handler,
                                              png_warning_handler);
    if (!png)
        throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    auto rows = std::make_unique<std::vector<png_bytep>>(height);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError(path.string() + ": encode error: " + errors.message);
    }

    png_init_io(png, file.get());
    png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16 && std::endian::native == std::endian::little)
        png_set_swap(png);
    for (std::size_t y = 0; y < height; ++y)
        (*rows)[y] = const_cast<png_bytep>(data + y * row_bytes);
    png_write_image(png, rows->data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(file.get()) != 0)
        throw IoError("failed to flush " + path.string());
}

inline bool has_prefix(const std::filesystem::path& path, std::string_view prefix)
{
    std::ifstream in(path, std::ios::binary);
    std::string head(prefix.size(), '\0');
    if (!in.read(head.data(), static_cast<std::streamsize>(head.size())))
        return false;
    return head == prefix;
}

} // namespace detail

// ---------------------------------------------------------------------------
// 8-bit RGB

inline ByteImage load_png_rgb8(const std::filesystem::path& path)
{
    auto png = detail::read_png(path, PNG_COLOR_TYPE_RGB, 8);
    return ByteImage(png.width, png.height, std::move(png.bytes));
}

inline void save_png_rgb8(const ByteImage& img, const std::filesystem::path& path)
{
    detail::write_png(path, static_cast<std::uint32_t>(img.width()), static_cast<std::uint32_t>(img.height()),
                      PNG_COLOR_TYPE_RGB, 8, img.values().data(), img.width() * 3);
}

inline RgbImage load_image(const std::filesystem::path& path) { return from_byte_domain(load_png_rgb8(path)); }

inline void save_image(const RgbImage& img, const std::filesystem::path& path)
{
    save_png_rgb8(to_byte_domain(img), path);
}

// ---------------------------------------------------------------------------
// 8-bit grayscale (maps and masks)

inline ByteGray load_png_gray8(const std::filesystem::path& path)
{
    auto png = detail::read_png(path, PNG_COLOR_TYPE_GRAY, 8);
    return ByteGray(png.width, png.height, std::move(png.bytes));
}

inline void save_png_gray8(const ByteGray& img, const std::filesystem::path& path)
{
    detail::write_png(path, static_cast<std::uint32_t>(img.width()), static_cast<std::uint32_t>(img.height()),
                      PNG_COLOR_TYPE_GRAY, 8, img.values().data(), img.width());
}

inline void save_map(const ScalarMap& map, const std::filesystem::path& path)
{
    save_png_gray8(to_byte_domain(map), path);
}

inline ScalarMap load_map(const std::filesystem::path& path) { return from_byte_domain(load_png_gray8(path)); }

inline void save_mask(const BinaryMask& mask, const std::filesystem::path& path)
{
    save_png_gray8(mask_to_bytes(mask), path);
}

inline BinaryMask load_mask(const std::filesystem::path& path) { return mask_from_bytes(load_png_gray8(path)); }

// ---------------------------------------------------------------------------
// 16-bit grayscale

inline GrayU16 load_png_gray16(const std::filesystem::path& path)
{
    auto png = detail::read_png(path, PNG_COLOR_TYPE_GRAY, 16);
    std::vector<std::uint16_t> values(static_cast<std::size_t>(png.width) * png.height);
    std::memcpy(values.data(), png.bytes.data(), values.size() * sizeof(std::uint16_t));
    return GrayU16(png.width, png.height, std::move(values));
}

inline void save_png_gray16(const GrayU16& img, const std::filesystem::path& path)
{
    detail::write_png(path, static_cast<std::uint32_t>(img.width()), static_cast<std::uint32_t>(img.height()),
                      PNG_COLOR_TYPE_GRAY, 16, reinterpret_cast<const std::uint8_t*>(img.values().data()),
                      img.width() * 2);
}

// ---------------------------------------------------------------------------
// PFM, single channel ("Pf"). Rows are stored bottom-to-top; a negative scale
// means little-endian floats.

struct PfmData {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<float> values; // top-to-bottom rows
};

inline PfmData read_pfm(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());

    std::string magic;
    long long width = 0, height = 0;
    double scale = 0.0;
    in >> magic;
    if (magic == "PF")
        throw IoError(path.string() + ": 3-channel PFM is not a depth map");
    if (magic != "Pf")
        throw IoError(path.string() + ": not a PFM file");
    if (!(in >> width >> height >> scale) || scale == 0.0)
        throw IoError(path.string() + ": malformed PFM header");
    if (width <= 0 || height <= 0)
        throw IoError(path.string() + ": zero image dimension");
    in.get(); // single whitespace byte ends the header

    PfmData pfm;
    pfm.width = static_cast<std::size_t>(width);
    pfm.height = static_cast<std::size_t>(height);
    std::vector<std::uint32_t> raw(pfm.width * pfm.height);
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4)))
        throw IoError(path.string() + ": truncated PFM data");

    const bool file_little = scale < 0.0;
    const bool host_little = std::endian::native == std::endian::little;
    pfm.values.resize(raw.size());
    for (std::size_t y = 0; y < pfm.height; ++y) {
        const std::size_t src_row = pfm.height - 1 - y;
        for (std::size_t x = 0; x < pfm.width; ++x) {
            std::uint32_t bits = raw[src_row * pfm.width + x];
            if (file_little != host_little)
                bits = __builtin_bswap32(bits);
            pfm.values[y * pfm.width + x] = std::bit_cast<float>(bits);
        }
    }
    return pfm;
}

inline void write_pfm(const std::filesystem::path& path, std::size_t width, std::size_t height,
                      std::span<const float> values)
{
    if (values.size() != width * height)
        throw DimensionError("PFM payload does not match dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    const bool host_little = std::endian::native == std::endian::little;
    out << "Pf\n" << width << ' ' << height << '\n' << (host_little ? "-1.0" : "1.0") << '\n';
    for (std::size_t y = height; y-- > 0;)
        out.write(reinterpret_cast<const char*>(values.data() + y * width), static_cast<std::streamsize>(width * 4));
    if (!out)
        throw IoError("failed writing " + path.string());
}

inline void save_depth_pfm(const DepthMap& depth, const std::filesystem::path& path)
{
    std::vector<float> values(depth.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] = static_cast<float>(depth.values()[i]);
    write_pfm(path, depth.width(), depth.height(), values);
}

namespace detail {

inline DepthMap depth_from_samples(std::size_t width, std::size_t height, std::vector<double> values,
                                   const std::filesystem::path& path)
{
    for (double v : values) {
        if (std::isnan(v))
            throw DataError(path.string() + ": depth contains NaN");
        if (!std::isfinite(v))
            throw DataError(path.string() + ": depth contains infinity");
        if (v < 0.0)
            throw DataError(path.string() + ": negative depth");
    }
    return DepthMap(width, height, std::move(values));
}

} // namespace detail

/// Load a depth map in meters. PFM is read as-is; a 16-bit grayscale PNG
/// needs `meters_per_unit`.
inline DepthMap load_depth(const std::filesystem::path& path, std::optional<double> meters_per_unit = std::nullopt)
{
    if (!std::filesystem::exists(path))
        throw IoError("cannot open " + path.string());

    if (detail::has_prefix(path, "Pf") || detail::has_prefix(path, "PF")) {
        auto pfm = read_pfm(path);
        std::vector<double> values(pfm.values.begin(), pfm.values.end());
        return detail::depth_from_samples(pfm.width, pfm.height, std::move(values), path);
    }
    if (detail::has_prefix(path, "\x89PNG")) {
        if (!meters_per_unit)
            throw IoError(path.string() + ": 16-bit PNG depth requires a depth scale (meters per unit)");
        if (!(*meters_per_unit > 0.0) || !std::isfinite(*meters_per_unit))
            throw ConfigError("depth scale must be a positive finite number");
        auto raw = load_png_gray16(path);
        std::vector<double> values(raw.size());
        for (std::size_t i = 0; i < values.size(); ++i)
            values[i] = static_cast<double>(raw.values()[i]) * *meters_per_unit;
        return detail::depth_from_samples(raw.width(), raw.height(), std::move(values), path);
    }
    throw IoError(path.string() + ": unknown depth format (expected PFM or 16-bit PNG)");
}

} // namespace morsynth

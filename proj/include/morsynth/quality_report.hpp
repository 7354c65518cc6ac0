#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "error.hpp"

namespace morsynth {

struct QualityRow {
    std::string id;
    double psnr_db = 0.0; ///< +inf for identical images
    double ssim = 0.0;
};

struct QualityReport {
    std::vector<QualityRow> rows;
    double mean_psnr_db = 0.0;
    double mean_ssim = 0.0;

    /// Recomputes the means; an infinite PSNR row makes the mean infinite.
    void finalize()
    {
        if (rows.empty()) {
            mean_psnr_db = mean_ssim = 0.0;
            return;
        }
        double p = 0.0, s = 0.0;
        for (const auto& r : rows) {
            p += r.psnr_db;
            s += r.ssim;
        }
        mean_psnr_db = p / static_cast<double>(rows.size());
        mean_ssim = s / static_cast<double>(rows.size());
    }
};

namespace detail {

inline nlohmann::json psnr_json(double db)
{
    if (std::isinf(db))
        return "inf";
    return db;
}

inline std::string format_number(double v)
{
    if (std::isinf(v))
        return "inf";
    std::ostringstream out;
    out << std::setprecision(10) << v;
    return out.str();
}

} // namespace detail

inline nlohmann::json to_json(const QualityReport& report)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"id", r.id}, {"psnr_db", detail::psnr_json(r.psnr_db)}, {"ssim", r.ssim}});
    return {
        {"psnr_domain", "rgb-joint, unit range, peak 1.0"},
        {"ssim_setup", "gaussian 11x11 sigma 1.5, K1 0.01, K2 0.03, per channel mean"},
        {"count", report.rows.size()},
        {"rows", rows},
        {"mean", {{"psnr_db", detail::psnr_json(report.mean_psnr_db)}, {"ssim", report.mean_ssim}}},
    };
}

/// Columns id, psnr_db, ssim; the last row carries id "mean".
inline std::string to_csv(const QualityReport& report)
{
    std::ostringstream out;
    out << "id,psnr_db,ssim\n";
    for (const auto& r : report.rows)
        out << r.id << ',' << detail::format_number(r.psnr_db) << ',' << detail::format_number(r.ssim) << '\n';
    out << "mean," << detail::format_number(report.mean_psnr_db) << ','
        << detail::format_number(report.mean_ssim) << '\n';
    return out.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text))
        throw IoError("failed writing " + path.string());
}

} // namespace morsynth

#pragma once

/// @file plot.hpp
/// @brief Minimal SVG output: space-time heatmaps and line charts.
///
/// Plots only render arrays handed to them; callers pass the same data they
/// write to CSV.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "mfgcov/csv.hpp"
#include "mfgcov/grid.hpp"

namespace mfgcov::plot {

namespace detail {

/// Piecewise-linear approximation of the viridis map, s in [0, 1].
inline std::string color(double s) {
    static constexpr std::array<std::array<double, 3>, 6> stops{{{68, 1, 84},
                                                                 {65, 68, 135},
                                                                 {42, 120, 142},
                                                                 {34, 168, 132},
                                                                 {122, 209, 81},
                                                                 {253, 231, 37}}};
    s = std::clamp(std::isfinite(s) ? s : 0.0, 0.0, 1.0) * static_cast<double>(stops.size() - 1);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(s), stops.size() - 2);
    const double w = s - static_cast<double>(i);
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c) {
        rgb[c] = static_cast<int>(std::lround((1.0 - w) * stops[i][c] + w * stops[i + 1][c]));
    }
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

inline std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string open_svg(int w, int h, const std::string& title) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
           std::to_string(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" "
           "fill=\"white\"/>\n<text x=\"" + std::to_string(w / 2) + "\" y=\"20\" text-anchor=\"middle\" "
           "font-size=\"14\">" + escape(title) + "</text>\n";
}

}  // namespace detail

/// x along the horizontal axis, time increasing upward.
inline void heatmap(const std::filesystem::path& path, const std::string& title, const SpaceTimeField& f) {
    constexpr int left = 60, top = 35, width = 512, height = 400, bar = 20;
    const auto values = f.values();
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it > lo ? *hi_it : lo + 1.0;
    const double cw = static_cast<double>(width) / static_cast<double>(f.num_cells());
    const double ch = static_cast<double>(height) / static_cast<double>(f.num_rows());

    std::string svg = detail::open_svg(left + width + 110, top + height + 50, title);
    for (std::size_t n = 0; n < f.num_rows(); ++n) {
        const auto row = f.row(n);
        const double y = top + height - static_cast<double>(n + 1) * ch;
        for (std::size_t i = 0; i < row.size(); ++i) {
            svg += "<rect x=\"" + detail::px(left + static_cast<double>(i) * cw) + "\" y=\"" + detail::px(y) +
                   "\" width=\"" + detail::px(cw + 0.05) + "\" height=\"" + detail::px(ch + 0.05) + "\" fill=\"" +
                   detail::color((row[i] - lo) / (hi - lo)) + "\"/>\n";
        }
    }
    const double t_end = static_cast<double>(f.num_steps()) * f.dt();
    svg += "<text x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(top + height + 16) + "\">0</text>\n";
    svg += "<text x=\"" + std::to_string(left + width) + "\" y=\"" + std::to_string(top + height + 16) +
           "\" text-anchor=\"end\">1</text>\n";
    svg += "<text x=\"" + std::to_string(left + width / 2) + "\" y=\"" + std::to_string(top + height + 34) +
           "\" text-anchor=\"middle\">x</text>\n";
    svg += "<text x=\"" + std::to_string(left - 6) + "\" y=\"" + std::to_string(top + height) +
           "\" text-anchor=\"end\">0</text>\n";
    svg += "<text x=\"" + std::to_string(left - 6) + "\" y=\"" + std::to_string(top + 10) + "\" text-anchor=\"end\">" +
           detail::num(t_end) + "</text>\n";
    svg += "<text x=\"20\" y=\"" + std::to_string(top + height / 2) + "\">t</text>\n";

    const int bx = left + width + 20;
    constexpr int steps = 50;
    for (int s = 0; s < steps; ++s) {
        const double y = top + height - static_cast<double>(s + 1) * height / steps;
        svg += "<rect x=\"" + std::to_string(bx) + "\" y=\"" + detail::px(y) + "\" width=\"" + std::to_string(bar) +
               "\" height=\"" + detail::px(static_cast<double>(height) / steps + 0.05) + "\" fill=\"" +
               detail::color((s + 0.5) / steps) + "\"/>\n";
    }
    svg += "<text x=\"" + std::to_string(bx + bar + 4) + "\" y=\"" + std::to_string(top + height) + "\">" +
           detail::num(lo) + "</text>\n";
    svg += "<text x=\"" + std::to_string(bx + bar + 4) + "\" y=\"" + std::to_string(top + 10) + "\">" +
           detail::num(hi) + "</text>\n";
    svg += "</svg>\n";
    csv::write_file(path, svg);
}

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct Axes {
    std::string xlabel;
    std::string ylabel;
    bool log_x = false;
    bool markers = false;
};

inline void lines(const std::filesystem::path& path, const std::string& title, const std::vector<Series>& series,
                  const Axes& axes) {
    constexpr int left = 70, top = 35, width = 520, height = 340;
    static constexpr std::array<const char*, 6> palette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                                        "#17becf"};
    auto tx = [&](double v) { return axes.log_x ? std::log10(v) : v; };
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x0 = std::min(x0, tx(s.x[i]));
            x1 = std::max(x1, tx(s.x[i]));
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    if (!(x1 > x0)) { x0 -= 0.5; x1 += 0.5; }
    if (!(y1 > y0)) { y0 -= 0.5; y1 += 0.5; }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto sx = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * width; };
    auto sy = [&](double v) { return top + height - (v - y0) / (y1 - y0) * height; };

    std::string svg = detail::open_svg(left + width + 30, top + height + 60 + 16 * static_cast<int>(series.size()), title);
    svg += "<rect x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(top) + "\" width=\"" +
           std::to_string(width) + "\" height=\"" + std::to_string(height) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double yv = y0 + (y1 - y0) * k / 4.0;
        svg += "<text x=\"" + std::to_string(left - 6) + "\" y=\"" + detail::px(sy(yv) + 4) +
               "\" text-anchor=\"end\">" + detail::num(yv) + "</text>\n";
        const double xv = x0 + (x1 - x0) * k / 4.0;
        const double label = axes.log_x ? std::pow(10.0, xv) : xv;
        svg += "<text x=\"" + detail::px(left + (xv - x0) / (x1 - x0) * width) + "\" y=\"" +
               std::to_string(top + height + 16) + "\" text-anchor=\"middle\">" + detail::num(label) + "</text>\n";
    }
    svg += "<text x=\"" + std::to_string(left + width / 2) + "\" y=\"" + std::to_string(top + height + 34) +
           "\" text-anchor=\"middle\">" + detail::escape(axes.xlabel) + "</text>\n";
    svg += "<text x=\"14\" y=\"" + std::to_string(top + height / 2) + "\" transform=\"rotate(-90 14 " +
           std::to_string(top + height / 2) + ")\" text-anchor=\"middle\">" + detail::escape(axes.ylabel) +
           "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* c = palette[k % palette.size()];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) pts += detail::px(sx(s.x[i])) + "," + detail::px(sy(s.y[i])) + " ";
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(c) + "\" stroke-width=\"1.5\" points=\"" + pts +
               "\"/>\n";
        if (axes.markers) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                svg += "<circle cx=\"" + detail::px(sx(s.x[i])) + "\" cy=\"" + detail::px(sy(s.y[i])) +
                       "\" r=\"3\" fill=\"" + c + "\"/>\n";
            }
        }
        const int ly = top + height + 52 + 16 * static_cast<int>(k);
        svg += "<line x1=\"" + std::to_string(left) + "\" y1=\"" + std::to_string(ly - 4) + "\" x2=\"" +
               std::to_string(left + 20) + "\" y2=\"" + std::to_string(ly - 4) + "\" stroke=\"" + c +
               "\" stroke-width=\"2\"/>\n<text x=\"" + std::to_string(left + 26) + "\" y=\"" + std::to_string(ly) +
               "\">" + detail::escape(s.label) + "</text>\n";
    }
    svg += "</svg>\n";
    csv::write_file(path, svg);
}

}  // namespace mfgcov::plot

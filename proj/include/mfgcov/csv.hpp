#pragma once

/// @file csv.hpp
/// @brief Locale-independent CSV output and the matching reader for space-time tables.
///
/// Values are written in shortest round-trip form with std::to_chars, so the
/// same doubles always produce the same bytes.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mfgcov/grid.hpp"

namespace mfgcov::csv {

/// Shortest decimal that reads back to the same double.
inline void append(std::string& out, double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("csv: number formatting failed");
    out.append(buf, end);
}

/// Times are products like k * dt; 12 significant digits hide the rounding noise.
inline void append_time(std::string& out, double t) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, t, std::chars_format::general, 12);
    if (ec != std::errc{}) throw std::runtime_error("csv: number formatting failed");
    out.append(buf, end);
}

inline void append(std::string& out, std::size_t v) {
    char buf[24];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("csv: number formatting failed");
    out.append(buf, end);
}

[[nodiscard]] inline std::string format(double v) {
    std::string s;
    append(s, v);
    return s;
}

[[nodiscard]] inline std::string format_time(double t) {
    std::string s;
    append_time(s, t);
    return s;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

/// Header `t,x_0,...,x_{M-1}` with cell-center coordinates, then one row per time.
[[nodiscard]] inline std::string space_time_table(const SpaceTimeField& f) {
    std::string out = "t";
    const Grid& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        out += ',';
        append(out, g.x(i));
    }
    out += '\n';
    for (std::size_t n = 0; n < f.num_rows(); ++n) {
        append_time(out, static_cast<double>(n) * f.dt());
        for (double v : f.row(n)) {
            out += ',';
            append(out, v);
        }
        out += '\n';
    }
    return out;
}

[[nodiscard]] inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

[[nodiscard]] inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw std::runtime_error("csv: not a number: '" + std::string(s) + "'");
    }
    return v;
}

/// Reads a table written by space_time_table.
[[nodiscard]] inline SpaceTimeField read_space_time_table(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error(path.string() + ": empty file");
    const auto header = split(line);
    if (header.size() < 2 || header[0] != "t") throw std::runtime_error(path.string() + ": bad header");
    const std::size_t m = header.size() - 1;

    std::vector<double> times;
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != m + 1) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(m + 1) + " columns");
        }
        times.push_back(parse_double(cells[0]));
        for (std::size_t i = 1; i <= m; ++i) values.push_back(parse_double(cells[i]));
    }
    if (times.empty()) throw std::runtime_error(path.string() + ": no data rows");
    const double dt = times.size() > 1 ? times[1] - times[0] : 1.0;
    SpaceTimeField out(Grid(static_cast<int>(m)), dt, times.size());
    for (std::size_t n = 0; n < times.size(); ++n) {
        out.set_row(n, std::span<const double>(values.data() + n * m, m));
    }
    return out;
}

}  // namespace mfgcov::csv

#pragma once

/// @file grid.hpp
/// @brief Periodic 1D cell-centered grid on [0,1) and the fields that live on it.
///
/// A Grid is fully determined by its cell count M; the spacing dx = 1/M is
/// always derived. Fields are value types: a sampled snapshot (Field) or a
/// stack of snapshots over a time window (SpaceTimeField, row 0 = earliest).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mfgcov {

class Grid {
public:
    static constexpr int kMinCells = 8;
    static constexpr double kDomainLength = 1.0;

    explicit Grid(int num_cells) : num_cells_(num_cells) {
        if (num_cells < kMinCells) {
            throw std::invalid_argument("Grid: num_cells must be >= " + std::to_string(kMinCells) +
                                        ", got " + std::to_string(num_cells));
        }
    }

    [[nodiscard]] int num_cells() const noexcept { return num_cells_; }
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(num_cells_); }
    [[nodiscard]] double dx() const noexcept { return kDomainLength / num_cells_; }
    [[nodiscard]] static constexpr double domain_length() noexcept { return kDomainLength; }
    [[nodiscard]] static constexpr bool periodic() noexcept { return true; }

    /// Cell-center coordinate of cell i.
    [[nodiscard]] double x(std::size_t i) const noexcept { return (static_cast<double>(i) + 0.5) * dx(); }

    [[nodiscard]] std::size_t next(std::size_t i) const noexcept { return i + 1 == size() ? 0 : i + 1; }
    [[nodiscard]] std::size_t prev(std::size_t i) const noexcept { return i == 0 ? size() - 1 : i - 1; }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    int num_cells_;
};

namespace detail {

inline void require_finite(std::span<const double> v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            throw std::invalid_argument(std::string(what) + ": non-finite value at index " + std::to_string(i));
        }
    }
}

}  // namespace detail

/// Real-valued function sampled at the cell centers of a Grid.
class Field {
public:
    explicit Field(Grid grid, double fill = 0.0) : grid_(grid), values_(grid.size(), fill) {
        detail::require_finite(values_, "Field");
    }

    Field(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size()) {
            throw std::invalid_argument("Field: expected " + std::to_string(grid_.size()) + " values, got " +
                                        std::to_string(values_.size()));
        }
        detail::require_finite(values_, "Field");
    }

    /// Samples fn at every cell center.
    template <typename Fn>
    static Field sample(Grid grid, Fn&& fn) {
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.x(i));
        return Field(grid, std::move(v));
    }

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] const std::vector<double>& vector() const noexcept { return values_; }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }

    friend bool operator==(const Field&, const Field&) = default;

private:
    Grid grid_;
    std::vector<double> values_;
};

/// Field snapshots at num_steps + 1 equally spaced times, stored row-major.
class SpaceTimeField {
public:
    SpaceTimeField(Grid grid, double dt, std::size_t num_rows, double fill = 0.0)
        : grid_(grid), dt_(dt), rows_(num_rows), values_(num_rows * grid.size(), fill) {
        if (num_rows == 0) throw std::invalid_argument("SpaceTimeField: need at least one row");
        if (!(dt > 0.0)) throw std::invalid_argument("SpaceTimeField: dt must be positive");
    }

    /// Every row initialized to `row`.
    static SpaceTimeField constant_in_time(const Field& row, double dt, std::size_t num_rows) {
        SpaceTimeField out(row.grid(), dt, num_rows);
        for (std::size_t n = 0; n < num_rows; ++n) out.set_row(n, row.values());
        return out;
    }

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] std::size_t num_rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t num_steps() const noexcept { return rows_ - 1; }
    [[nodiscard]] std::size_t num_cells() const noexcept { return grid_.size(); }

    [[nodiscard]] std::span<const double> row(std::size_t n) const {
        return {values_.data() + offset(n), grid_.size()};
    }
    [[nodiscard]] std::span<double> row(std::size_t n) { return {values_.data() + offset(n), grid_.size()}; }

    [[nodiscard]] Field field(std::size_t n) const {
        auto r = row(n);
        return Field(grid_, std::vector<double>(r.begin(), r.end()));
    }

    void set_row(std::size_t n, std::span<const double> v) {
        if (v.size() != grid_.size()) throw std::invalid_argument("SpaceTimeField::set_row: size mismatch");
        detail::require_finite(v, "SpaceTimeField row");
        std::copy(v.begin(), v.end(), values_.begin() + static_cast<std::ptrdiff_t>(offset(n)));
    }

    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::span<double> values() noexcept { return values_; }

    friend bool operator==(const SpaceTimeField&, const SpaceTimeField&) = default;

private:
    [[nodiscard]] std::size_t offset(std::size_t n) const {
        if (n >= rows_) throw std::out_of_range("SpaceTimeField: row " + std::to_string(n) + " out of range");
        return n * grid_.size();
    }

    Grid grid_;
    double dt_;
    std::size_t rows_;
    std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Span kernels. These do the work; the Field overloads below wrap them.
// ---------------------------------------------------------------------------

namespace ops {

/// Central difference with periodic wrap.
inline void gradient(std::span<const double> f, double dx, std::span<double> out) {
    const std::size_t m = f.size();
    const double inv = 1.0 / (2.0 * dx);
    for (std::size_t i = 0; i < m; ++i) {
        const double right = f[i + 1 == m ? 0 : i + 1];
        const double left = f[i == 0 ? m - 1 : i - 1];
        out[i] = (right - left) * inv;
    }
}

inline void laplacian(std::span<const double> f, double dx, std::span<double> out) {
    const std::size_t m = f.size();
    const double inv = 1.0 / (dx * dx);
    for (std::size_t i = 0; i < m; ++i) {
        const double right = f[i + 1 == m ? 0 : i + 1];
        const double left = f[i == 0 ? m - 1 : i - 1];
        out[i] = (right - 2.0 * f[i] + left) * inv;
    }
}

inline double integrate(std::span<const double> f, double dx) {
    double s = 0.0;
    for (double v : f) s += v;
    return s * dx;
}

inline double max_abs(std::span<const double> f) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace ops

struct Norms {
    double l2;
    double linf;
};

[[nodiscard]] inline Field gradient(const Field& f) {
    std::vector<double> out(f.size());
    ops::gradient(f.values(), f.grid().dx(), out);
    return Field(f.grid(), std::move(out));
}

[[nodiscard]] inline Field laplacian(const Field& f) {
    std::vector<double> out(f.size());
    ops::laplacian(f.values(), f.grid().dx(), out);
    return Field(f.grid(), std::move(out));
}

/// Midpoint quadrature over the unit domain.
[[nodiscard]] inline double integrate(const Field& f) { return ops::integrate(f.values(), f.grid().dx()); }

[[nodiscard]] inline Norms norms(const Field& f) {
    double sq = 0.0;
    for (double v : f.values()) sq += v * v;
    return {std::sqrt(sq * f.grid().dx()), ops::max_abs(f.values())};
}

/// Pointwise a*f + b*g.
[[nodiscard]] inline Field axpby(double a, const Field& f, double b, const Field& g) {
    if (!(f.grid() == g.grid())) throw std::invalid_argument("axpby: grid mismatch");
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * f[i] + b * g[i];
    return Field(f.grid(), std::move(out));
}

}  // namespace mfgcov

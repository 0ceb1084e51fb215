#pragma once

/// @file metrics.hpp
/// @brief Swarm-level evaluation functional and the distance between two closed-loop strategies.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mfgcov/coverage_cost.hpp"
#include "mfgcov/errors.hpp"
#include "mfgcov/grid.hpp"
#include "mfgcov/mp_mfg.hpp"

namespace mfgcov {

struct EvalSeries {
    std::vector<double> times;
    std::vector<double> values;

    void validate() const {
        if (times.size() != values.size()) throw std::invalid_argument("EvalSeries: length mismatch");
        for (std::size_t i = 1; i < times.size(); ++i) {
            if (!(times[i] > times[i - 1])) throw std::invalid_argument("EvalSeries: times must increase strictly");
        }
    }
};

/// J(t) = integral of (u^2/2 + ln rho) rho dx, midpoint rule.
[[nodiscard]] inline double eval_functional(std::span<const double> rho, std::span<const double> u, double dx,
                                            double floor = CostModel::kDefaultDensityFloor) {
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        s += (0.5 * u[i] * u[i] + std::log(std::max(rho[i], floor))) * rho[i];
    }
    return s * dx;
}

[[nodiscard]] inline double eval_functional(const Field& rho, const Field& u,
                                            double floor = CostModel::kDefaultDensityFloor) {
    if (!(rho.grid() == u.grid())) throw GridMismatch("eval_functional: grid mismatch");
    return eval_functional(rho.values(), u.values(), rho.grid().dx(), floor);
}

[[nodiscard]] inline EvalSeries eval_series(const MpMfgTrajectory& traj,
                                            double floor = CostModel::kDefaultDensityFloor) {
    EvalSeries out;
    const double dx = traj.rho.grid().dx();
    for (std::size_t k = 0; k < traj.rho.num_rows(); ++k) {
        out.times.push_back(static_cast<double>(k) * traj.rho.dt());
        out.values.push_back(eval_functional(traj.rho.row(k), traj.applied_u.row(k), dx, floor));
    }
    return out;
}

struct StrategyDistance {
    double l2;    ///< ||drho||_L2 + ||du||_L2 over space-time (trapezoid in t)
    double linf;  ///< ||drho||_inf + ||du||_inf
};

namespace detail {

inline void require_same_layout(const SpaceTimeField& a, const SpaceTimeField& b) {
    if (!(a.grid() == b.grid()) || a.num_rows() != b.num_rows() || std::abs(a.dt() - b.dt()) > 1e-12 * a.dt()) {
        throw GridMismatch("strategy_distance: trajectories do not share a space-time grid");
    }
}

inline StrategyDistance field_distance(const SpaceTimeField& a, const SpaceTimeField& b) {
    const std::size_t rows = a.num_rows();
    double sq = 0.0;
    double mx = 0.0;
    for (std::size_t n = 0; n < rows; ++n) {
        const double w = (rows > 1 && (n == 0 || n + 1 == rows)) ? 0.5 : 1.0;
        auto ra = a.row(n);
        auto rb = b.row(n);
        double row_sq = 0.0;
        for (std::size_t i = 0; i < ra.size(); ++i) {
            const double d = ra[i] - rb[i];
            row_sq += d * d;
            mx = std::max(mx, std::abs(d));
        }
        sq += w * row_sq;
    }
    const double dt = rows > 1 ? a.dt() : 1.0;
    return {std::sqrt(sq * a.grid().dx() * dt), mx};
}

}  // namespace detail

[[nodiscard]] inline StrategyDistance strategy_distance(const MpMfgTrajectory& a, const MpMfgTrajectory& b) {
    detail::require_same_layout(a.rho, b.rho);
    detail::require_same_layout(a.applied_u, b.applied_u);
    const auto dr = detail::field_distance(a.rho, b.rho);
    const auto du = detail::field_distance(a.applied_u, b.applied_u);
    return {dr.l2 + du.l2, dr.linf + du.linf};
}

}  // namespace mfgcov

#pragma once

/// @file mfg.hpp
/// @brief Damped Picard iteration for the coupled HJB / Fokker-Planck system on one window.
///
/// Each iteration solves the value function backward with the density frozen,
/// then the density forward under the extracted (clamped) input, and relaxes
/// both iterates by the damping factor. The residual is the raw Picard defect
/// ||V_new - V|| + ||rho_new - rho||, measured before relaxation.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mfgcov/coverage_cost.hpp"
#include "mfgcov/errors.hpp"
#include "mfgcov/fp.hpp"
#include "mfgcov/grid.hpp"
#include "mfgcov/hjb.hpp"

namespace mfgcov {

enum class NormKind { Linf, L2 };

struct MfgConfig {
    double tol = 1e-6;
    std::size_t max_iters = 500;
    double damping = 0.1;
    NormKind norm_kind = NormKind::Linf;

    bool operator==(const MfgConfig&) const = default;

    void validate() const {
        if (!(tol > 0.0)) throw std::invalid_argument("MfgConfig: tol must be > 0");
        if (max_iters == 0) throw std::invalid_argument("MfgConfig: max_iters must be > 0");
        if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("MfgConfig: damping must lie in (0, 1]");
    }
};

/// Inner step count for a window of length `horizon`.
[[nodiscard]] inline std::size_t window_steps(double horizon, std::size_t min_steps, double max_dt) {
    const double n = std::ceil(horizon / max_dt - 1e-9);
    return std::max<std::size_t>(min_steps, static_cast<std::size_t>(std::max(n, 1.0)));
}

/// Everything a window solve needs besides the iterates.
struct MfgProblem {
    Grid grid;
    double horizon;
    std::size_t num_steps;
    double sigma2;
    std::optional<Field> drift;
    CostModel cost;
    double input_bound = 1.0;
    PdeOptions options{};
    Field rho0;

    [[nodiscard]] double dt() const { return horizon / static_cast<double>(num_steps); }

    void validate() const {
        if (!(horizon > 0.0)) throw std::invalid_argument("MfgProblem: horizon must be > 0");
        if (num_steps == 0) throw std::invalid_argument("MfgProblem: num_steps must be > 0");
        if (!(sigma2 >= 0.0)) throw std::invalid_argument("MfgProblem: sigma2 must be >= 0");
        if (!(input_bound > 0.0)) throw std::invalid_argument("MfgProblem: input_bound must be > 0");
        if (!(rho0.grid() == grid)) throw std::invalid_argument("MfgProblem: rho0 grid mismatch");
        if (drift && !(drift->grid() == grid)) throw std::invalid_argument("MfgProblem: drift grid mismatch");
        cost.validate();
    }

    [[nodiscard]] HjbStepper hjb_stepper() const {
        std::optional<std::vector<double>> f;
        if (drift) f = drift->vector();
        return HjbStepper(grid, dt(), sigma2, std::move(f), cost, input_bound, options);
    }

    [[nodiscard]] FpStepper fp_stepper() const {
        std::optional<std::vector<double>> f;
        if (drift) f = drift->vector();
        return FpStepper(grid, dt(), sigma2, std::move(f), options.magnitude_cap);
    }
};

struct MfgSolution {
    SpaceTimeField V;
    SpaceTimeField rho;
    SpaceTimeField u;  ///< clamped -V_x, row by row
    std::size_t iters = 0;
    double final_residual = 0.0;
    std::vector<double> residual_history;
    FpDiagnostics fp_diagnostics;
};

/// Initial iterates; shapes must match the problem's window.
struct MfgWarmStart {
    SpaceTimeField V;
    SpaceTimeField rho;
};

namespace detail {

inline double window_distance(const SpaceTimeField& a, const SpaceTimeField& b, NormKind kind) {
    auto av = a.values();
    auto bv = b.values();
    if (kind == NormKind::Linf) return ops::max_abs_diff(av, bv);
    double sq = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) {
        const double d = av[i] - bv[i];
        sq += d * d;
    }
    return std::sqrt(sq * a.grid().dx() * a.dt());
}

inline void relax(SpaceTimeField& x, const SpaceTimeField& x_new, double theta) {
    auto xv = x.values();
    auto nv = x_new.values();
    if (theta == 1.0) {
        std::copy(nv.begin(), nv.end(), xv.begin());
        return;
    }
    for (std::size_t i = 0; i < xv.size(); ++i) xv[i] = (1.0 - theta) * xv[i] + theta * nv[i];
}

}  // namespace detail

/// Shifts a converged window forward by `shift` rows for use as the next
/// window's starting iterate. Vacated V rows are zero (the terminal value) and
/// vacated rho rows repeat the last row.
[[nodiscard]] inline MfgWarmStart shift_window(const MfgSolution& s, std::size_t shift) {
    const std::size_t rows = s.V.num_rows();
    MfgWarmStart w{SpaceTimeField(s.V.grid(), s.V.dt(), rows), SpaceTimeField(s.rho.grid(), s.rho.dt(), rows)};
    for (std::size_t n = 0; n < rows; ++n) {
        const std::size_t src = n + shift;
        if (src < rows) {
            w.V.set_row(n, s.V.row(src));
            w.rho.set_row(n, s.rho.row(src));
        } else {
            w.rho.set_row(n, s.rho.row(rows - 1));
        }
    }
    return w;
}

[[nodiscard]] inline MfgSolution solve_mfg(const MfgProblem& p, const MfgConfig& cfg,
                                           const MfgWarmStart* warm = nullptr) {
    p.validate();
    cfg.validate();

    const std::size_t rows = p.num_steps + 1;
    const double dt = p.dt();
    const Field rho0 = normalize_density(p.rho0);

    SpaceTimeField V(p.grid, dt, rows);
    SpaceTimeField rho = SpaceTimeField::constant_in_time(rho0, dt, rows);
    if (warm != nullptr) {
        if (warm->V.num_rows() != rows || warm->rho.num_rows() != rows || !(warm->V.grid() == p.grid) ||
            !(warm->rho.grid() == p.grid)) {
            throw std::invalid_argument("solve_mfg: warm start shape mismatch");
        }
        V = warm->V;
        rho = warm->rho;
        rho.set_row(0, rho0.values());
        auto terminal = V.row(rows - 1);
        std::fill(terminal.begin(), terminal.end(), 0.0);
    }

    const HjbStepper hjb = p.hjb_stepper();
    const FpStepper fp = p.fp_stepper();
    SpaceTimeField V_new(p.grid, dt, rows);
    SpaceTimeField u_new(p.grid, dt, rows);
    SpaceTimeField rho_new(p.grid, dt, rows);
    rho_new.set_row(0, rho0.values());

    MfgSolution out{V, rho, SpaceTimeField(p.grid, dt, rows), 0, 0.0, {}, {}};
    for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
        detail::backward_sweep(hjb, rho, V_new);
        for (std::size_t n = 0; n < rows; ++n) {
            ops::extract_input(static_cast<const SpaceTimeField&>(V_new).row(n), p.grid.dx(), p.input_bound,
                               u_new.row(n));
        }
        out.fp_diagnostics = detail::forward_sweep(fp, u_new, rho_new);

        const double z = detail::window_distance(V_new, V, cfg.norm_kind) +
                         detail::window_distance(rho_new, rho, cfg.norm_kind);
        detail::relax(V, V_new, cfg.damping);
        detail::relax(rho, rho_new, cfg.damping);
        out.residual_history.push_back(z);

        if (z <= cfg.tol) {
            out.V = std::move(V);
            out.rho = std::move(rho);
            out.u = extract_inputs(out.V, p.input_bound);
            out.iters = it;
            out.final_residual = z;
            return out;
        }
    }
    throw NotConverged(std::move(out.residual_history));
}

}  // namespace mfgcov

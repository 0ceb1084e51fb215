#pragma once

/// @file fp.hpp
/// @brief Forward Fokker-Planck integration in conservative finite-volume form.
///
///     d rho/dt = -d/dx((f + u) rho) + (sigma^2/2) d2 rho/dx2
///
/// Face velocities are the average of the two adjacent cell velocities and the
/// advective flux is first-order upwind; diffusion is implicit. After every
/// step tiny negatives are floored to zero and the row is rescaled to unit
/// mass. Both corrections are recorded.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfgcov/errors.hpp"
#include "mfgcov/grid.hpp"
#include "mfgcov/tridiag.hpp"

namespace mfgcov {

[[nodiscard]] inline double mass(const Field& rho) { return integrate(rho); }

/// Rescales a nonnegative field to unit mass.
[[nodiscard]] inline Field normalize_density(const Field& rho) {
    for (double v : rho.values()) {
        if (v < 0.0) throw std::invalid_argument("normalize_density: density must be nonnegative");
    }
    const double m = integrate(rho);
    if (!(m > 0.0)) throw std::invalid_argument("normalize_density: density has zero mass");
    std::vector<double> out(rho.values().begin(), rho.values().end());
    for (double& v : out) v /= m;
    return Field(rho.grid(), std::move(out));
}

struct FpStepStats {
    double undershoot = 0.0;       ///< magnitude of the most negative pre-floor value
    double mass_correction = 0.0;  ///< |mass - 1| before rescaling
};

/// Per-solve extremes of the post-step corrections.
struct FpDiagnostics {
    double max_undershoot = 0.0;
    double max_mass_correction = 0.0;

    void absorb(const FpStepStats& s) noexcept {
        max_undershoot = std::max(max_undershoot, s.undershoot);
        max_mass_correction = std::max(max_mass_correction, s.mass_correction);
    }
};

class FpStepper {
public:
    static constexpr double kNegativityTolerance = 1e-6;

    FpStepper(Grid grid, double dt, double sigma2, std::optional<std::vector<double>> drift = std::nullopt,
              double magnitude_cap = 1e6)
        : grid_(grid),
          dt_(dt),
          drift_(std::move(drift)),
          magnitude_cap_(magnitude_cap),
          diffusion_(grid, dt * 0.5 * sigma2),
          flux_(grid.size()) {
        if (!(dt > 0.0)) throw std::invalid_argument("FpStepper: dt must be positive");
        if (drift_ && drift_->size() != grid.size()) throw std::invalid_argument("FpStepper: drift size mismatch");
    }

    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }

    /// Advances rho in place by one step under cell-centered input `u`.
    FpStepStats step(std::span<double> rho, std::span<const double> u, std::size_t step_index) const {
        const std::size_t m = grid_.size();
        const double dx = grid_.dx();

        // flux_[i] lives on the face between cells i and i+1.
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t r = grid_.next(i);
            const double a_left = u[i] + (drift_ ? (*drift_)[i] : 0.0);
            const double a_right = u[r] + (drift_ ? (*drift_)[r] : 0.0);
            const double a = 0.5 * (a_left + a_right);
            flux_[i] = a > 0.0 ? a * rho[i] : a * rho[r];
        }
        const double ratio = dt_ / dx;
        // Update from the old flux array; rho[i] depends only on flux_[i-1], flux_[i].
        for (std::size_t i = 0; i < m; ++i) rho[i] -= ratio * (flux_[i] - flux_[grid_.prev(i)]);

        diffusion_.solve(rho);

        FpStepStats stats;
        double total = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double v = rho[i];
            if (!(std::abs(v) <= magnitude_cap_)) {
                throw Diverged("FP density magnitude exceeds cap at cell " + std::to_string(i), step_index);
            }
            if (v < 0.0) {
                stats.undershoot = std::max(stats.undershoot, -v);
                rho[i] = 0.0;
            }
            total += rho[i];
        }
        if (stats.undershoot > kNegativityTolerance) throw NegativeDensity(-stats.undershoot, step_index);

        total *= dx;
        stats.mass_correction = std::abs(total - 1.0);
        if (!(total > 0.0)) throw Diverged("FP density lost all mass", step_index);
        const double scale = 1.0 / total;
        for (std::size_t i = 0; i < m; ++i) rho[i] *= scale;
        return stats;
    }

private:
    Grid grid_;
    double dt_;
    std::optional<std::vector<double>> drift_;
    double magnitude_cap_;
    PeriodicDiffusionSolver diffusion_;
    mutable std::vector<double> flux_;
};

class FpProblem {
public:
    /// `input_traj` row n drives the step from tau_n to tau_{n+1}; it needs at
    /// least num_steps rows. rho0 is renormalized to unit mass here.
    FpProblem(Grid grid, double horizon, std::size_t num_steps, double sigma2, SpaceTimeField input_traj, Field rho0,
              std::optional<Field> drift = std::nullopt)
        : grid_(grid),
          horizon_(horizon),
          num_steps_(num_steps),
          sigma2_(sigma2),
          input_traj_(std::move(input_traj)),
          rho0_(normalize_density(rho0)),
          drift_(std::move(drift)) {
        if (!(horizon > 0.0)) throw std::invalid_argument("FpProblem: horizon must be > 0");
        if (num_steps == 0) throw std::invalid_argument("FpProblem: num_steps must be > 0");
        if (!(sigma2 >= 0.0)) throw std::invalid_argument("FpProblem: sigma2 must be >= 0");
        if (input_traj_.num_rows() < num_steps) throw std::invalid_argument("FpProblem: input_traj too short");
        if (!(input_traj_.grid() == grid) || !(rho0_.grid() == grid)) {
            throw std::invalid_argument("FpProblem: grid mismatch");
        }
        if (drift_ && !(drift_->grid() == grid)) throw std::invalid_argument("FpProblem: drift grid mismatch");
    }

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] std::size_t num_steps() const noexcept { return num_steps_; }
    [[nodiscard]] double sigma2() const noexcept { return sigma2_; }
    [[nodiscard]] double dt() const noexcept { return horizon_ / static_cast<double>(num_steps_); }
    [[nodiscard]] const SpaceTimeField& input_traj() const noexcept { return input_traj_; }
    [[nodiscard]] const Field& rho0() const noexcept { return rho0_; }
    [[nodiscard]] const std::optional<Field>& drift() const noexcept { return drift_; }

    [[nodiscard]] FpStepper stepper(double magnitude_cap = 1e6) const {
        std::optional<std::vector<double>> f;
        if (drift_) f = drift_->vector();
        return FpStepper(grid_, dt(), sigma2_, std::move(f), magnitude_cap);
    }

private:
    Grid grid_;
    double horizon_;
    std::size_t num_steps_;
    double sigma2_;
    SpaceTimeField input_traj_;
    Field rho0_;
    std::optional<Field> drift_;
};

struct FpSolution {
    SpaceTimeField rho;
    FpDiagnostics diagnostics;
};

namespace detail {

/// Row 0 of `rho` must already hold the initial density.
inline FpDiagnostics forward_sweep(const FpStepper& stepper, const SpaceTimeField& input, SpaceTimeField& rho) {
    FpDiagnostics diag;
    for (std::size_t n = 0; n + 1 < rho.num_rows(); ++n) {
        auto next = rho.row(n + 1);
        const SpaceTimeField& cr = rho;
        std::copy(cr.row(n).begin(), cr.row(n).end(), next.begin());
        diag.absorb(stepper.step(next, input.row(n), n));
    }
    return diag;
}

}  // namespace detail

[[nodiscard]] inline FpSolution solve_fp(const FpProblem& p) {
    SpaceTimeField rho(p.grid(), p.dt(), p.num_steps() + 1);
    rho.set_row(0, p.rho0().values());
    auto diag = detail::forward_sweep(p.stepper(), p.input_traj(), rho);
    return {std::move(rho), diag};
}

}  // namespace mfgcov

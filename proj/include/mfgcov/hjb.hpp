#pragma once

/// @file hjb.hpp
/// @brief Backward integration of the value function over one prediction window.
///
/// Solves, backward from V(., t_end) = 0,
///
///     -dV/dtau = h(rho) + f V_x - K(V_x) + (sigma^2/2) V_xx,   K(p) = p^2 / 2,
///
/// with the diffusion implicit and every other term explicit in the
/// later-time row. The optimal feedback is u = -V_x, clamped to the input
/// bound at extraction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfgcov/coverage_cost.hpp"
#include "mfgcov/errors.hpp"
#include "mfgcov/grid.hpp"
#include "mfgcov/tridiag.hpp"

namespace mfgcov {

/// Discretization of V_x inside the kinetic term K(V_x) and the drift term.
enum class HamiltonianScheme {
    Central,  ///< central difference, K(g)
    Upwind,   ///< monotone split K(max(D-V, 0)) + K(min(D+V, 0))
};

/// Where the input bound enters.
enum class InputConstraint {
    PostHoc,        ///< unconstrained Hamiltonian; clamp the extracted input
    InHamiltonian,  ///< K(p) = min over |u| <= u_max of (u^2/2 + u p), negated
};

struct PdeOptions {
    HamiltonianScheme hamiltonian = HamiltonianScheme::Central;
    InputConstraint constraint = InputConstraint::PostHoc;
    double magnitude_cap = 1e6;
    double cfl_limit = 1.0;

    bool operator==(const PdeOptions&) const = default;
};

/// Kinetic part of the Hamiltonian as a function of the value gradient.
[[nodiscard]] inline double kinetic(double p, double input_bound, InputConstraint c) noexcept {
    if (c == InputConstraint::InHamiltonian && std::abs(p) > input_bound) {
        return input_bound * std::abs(p) - 0.5 * input_bound * input_bound;
    }
    return 0.5 * p * p;
}

namespace ops {

inline void extract_input(std::span<const double> v_row, double dx, double input_bound, std::span<double> out) {
    gradient(v_row, dx, out);
    for (double& u : out) u = std::clamp(-u, -input_bound, input_bound);
}

}  // namespace ops

/// u = clamp(-V_x, -u_max, u_max).
[[nodiscard]] inline Field extract_input(const Field& v_row, double input_bound) {
    if (!(input_bound > 0.0)) throw std::invalid_argument("extract_input: input_bound must be > 0");
    std::vector<double> out(v_row.size());
    ops::extract_input(v_row.values(), v_row.grid().dx(), input_bound, out);
    return Field(v_row.grid(), std::move(out));
}

/// One backward step of the value function with fixed coefficients.
class HjbStepper {
public:
    HjbStepper(Grid grid, double dt, double sigma2, std::optional<std::vector<double>> drift, CostModel cost,
               double input_bound, PdeOptions options)
        : grid_(grid),
          dt_(dt),
          drift_(std::move(drift)),
          cost_(cost),
          input_bound_(input_bound),
          options_(options),
          diffusion_(grid, dt * 0.5 * sigma2),
          work_(grid.size()) {
        if (drift_ && drift_->size() != grid.size()) throw std::invalid_argument("HjbStepper: drift size mismatch");
    }

    [[nodiscard]] double dt() const noexcept { return dt_; }

    /// V(tau_n) from V(tau_{n+1}); rho_now is the frozen density at tau_n.
    void step(std::span<const double> v_next, std::span<const double> rho_now, std::span<double> v_out,
              std::size_t step_index) const {
        const std::size_t m = grid_.size();
        const double dx = grid_.dx();
        const double umax = input_bound_;
        const auto constraint = options_.constraint;
        double max_speed = 0.0;

        for (std::size_t i = 0; i < m; ++i) {
            const double vl = v_next[grid_.prev(i)];
            const double vc = v_next[i];
            const double vr = v_next[grid_.next(i)];
            const double f = drift_ ? (*drift_)[i] : 0.0;
            double hamiltonian;
            double speed;
            if (options_.hamiltonian == HamiltonianScheme::Central) {
                const double g = (vr - vl) / (2.0 * dx);
                hamiltonian = f * g - kinetic(g, umax, constraint);
                speed = std::abs(f) + advective_speed(g);
            } else {
                const double pm = (vc - vl) / dx;
                const double pp = (vr - vc) / dx;
                const double drift_term = std::max(f, 0.0) * pp + std::min(f, 0.0) * pm;
                hamiltonian = drift_term - kinetic(std::max(pm, 0.0), umax, constraint) -
                              kinetic(std::min(pp, 0.0), umax, constraint);
                speed = std::abs(f) + std::max(advective_speed(pm), advective_speed(pp));
            }
            max_speed = std::max(max_speed, speed);
            work_[i] = vc + dt_ * (cost_.coupling_at(rho_now[i]) + hamiltonian);
        }

        const double cfl = max_speed * dt_ / dx;
        if (cfl > options_.cfl_limit) {
            throw CflViolation(cfl, options_.cfl_limit, step_index);
        }

        diffusion_.solve(work_);
        for (std::size_t i = 0; i < m; ++i) {
            if (!(std::abs(work_[i]) <= options_.magnitude_cap)) {
                throw Diverged("HJB value magnitude exceeds cap at cell " + std::to_string(i), step_index);
            }
            v_out[i] = work_[i];
        }
    }

private:
    [[nodiscard]] double advective_speed(double p) const noexcept {
        const double a = std::abs(p);
        return options_.constraint == InputConstraint::InHamiltonian ? std::min(a, input_bound_) : a;
    }

    Grid grid_;
    double dt_;
    std::optional<std::vector<double>> drift_;
    CostModel cost_;
    double input_bound_;
    PdeOptions options_;
    PeriodicDiffusionSolver diffusion_;
    mutable std::vector<double> work_;
};

struct HjbProblem {
    Grid grid;
    double horizon;
    std::size_t num_steps;
    double sigma2;
    std::optional<Field> drift;  ///< empty means f = 0
    CostModel cost;
    SpaceTimeField rho_traj;  ///< frozen density, num_steps + 1 rows
    double input_bound = 1.0;
    PdeOptions options{};

    [[nodiscard]] double dt() const { return horizon / static_cast<double>(num_steps); }

    void validate() const {
        if (!(horizon > 0.0)) throw std::invalid_argument("HjbProblem: horizon must be > 0");
        if (num_steps == 0) throw std::invalid_argument("HjbProblem: num_steps must be > 0");
        if (!(sigma2 >= 0.0)) throw std::invalid_argument("HjbProblem: sigma2 must be >= 0");
        if (!(input_bound > 0.0)) throw std::invalid_argument("HjbProblem: input_bound must be > 0");
        if (rho_traj.num_rows() != num_steps + 1) {
            throw std::invalid_argument("HjbProblem: rho_traj must have num_steps + 1 rows");
        }
        if (!(rho_traj.grid() == grid)) throw std::invalid_argument("HjbProblem: rho_traj grid mismatch");
        if (drift && !(drift->grid() == grid)) throw std::invalid_argument("HjbProblem: drift grid mismatch");
        cost.validate();
    }

    [[nodiscard]] HjbStepper stepper() const {
        std::optional<std::vector<double>> f;
        if (drift) f = drift->vector();
        return HjbStepper(grid, dt(), sigma2, std::move(f), cost, input_bound, options);
    }
};

namespace detail {

/// Fills every row of `v` (same shape as rho); the last row is set to zero.
inline void backward_sweep(const HjbStepper& stepper, const SpaceTimeField& rho, SpaceTimeField& v) {
    const std::size_t last = v.num_rows() - 1;
    auto terminal = v.row(last);
    std::fill(terminal.begin(), terminal.end(), 0.0);
    for (std::size_t n = last; n-- > 0;) {
        const SpaceTimeField& cv = v;
        stepper.step(cv.row(n + 1), rho.row(n), v.row(n), n);
    }
}

}  // namespace detail

/// Value function on the window grid; row num_steps is the zero terminal row.
[[nodiscard]] inline SpaceTimeField solve_hjb(const HjbProblem& p) {
    p.validate();
    SpaceTimeField v(p.grid, p.dt(), p.num_steps + 1);
    detail::backward_sweep(p.stepper(), p.rho_traj, v);
    return v;
}

/// Inputs for every row of a value-function trajectory.
[[nodiscard]] inline SpaceTimeField extract_inputs(const SpaceTimeField& v, double input_bound) {
    SpaceTimeField u(v.grid(), v.dt(), v.num_rows());
    for (std::size_t n = 0; n < v.num_rows(); ++n) {
        ops::extract_input(v.row(n), v.grid().dx(), input_bound, u.row(n));
    }
    return u;
}

}  // namespace mfgcov

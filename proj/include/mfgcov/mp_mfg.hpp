#pragma once

/// @file mp_mfg.hpp
/// @brief Receding-horizon (model predictive) mean field game controller.
///
/// At every outer time t the window game on [t, t + T_pred] is solved from
/// the observed density; the first input row is held for one outer step while
/// the closed-loop density advances.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mfgcov/coverage_cost.hpp"
#include "mfgcov/errors.hpp"
#include "mfgcov/fp.hpp"
#include "mfgcov/grid.hpp"
#include "mfgcov/hjb.hpp"
#include "mfgcov/mfg.hpp"
#include "mfgcov/particles.hpp"

namespace mfgcov {

/// Source of the density that initializes each window.
enum class Observation {
    Model,      ///< closed-loop PDE density
    Particles,  ///< KDE of a particle ensemble driven by the applied inputs
};

struct ParticleLoopConfig {
    std::size_t count = 100000;
    std::uint64_t seed = 20200101;
    std::size_t substeps = 10;  ///< Euler-Maruyama steps per outer step
};

struct MpMfgConfig {
    double prediction_time = 1.0;
    double outer_dt = 0.01;    ///< spacing of the recorded trajectory
    double control_dt = 0.0;   ///< zero-order-hold length; 0 selects control_dt_ratio * prediction_time
    double control_dt_ratio = 0.02;
    double total_time = 1.0;
    MfgConfig inner{};
    double sigma2 = 0.05;
    std::optional<Field> drift;
    double density_floor = CostModel::kDefaultDensityFloor;
    double input_bound = 1.0;
    PdeOptions options{};
    std::size_t min_window_steps = 50;
    double max_inner_dt = 1e-3;
    std::size_t max_refinements = 6;  ///< window step doublings allowed on CFL violations
    bool warm_start = true;
    Observation observation = Observation::Model;
    ParticleLoopConfig particles{};

    [[nodiscard]] std::size_t outer_steps() const {
        return static_cast<std::size_t>(std::llround(total_time / outer_dt));
    }

    /// Control updates per recorded step.
    [[nodiscard]] std::size_t controls_per_record() const {
        if (control_dt > 0.0) return static_cast<std::size_t>(std::max(1LL, std::llround(outer_dt / control_dt)));
        const double ratio = outer_dt / (control_dt_ratio * prediction_time);
        return static_cast<std::size_t>(std::max(1.0, std::ceil(ratio - 1e-9)));
    }

    [[nodiscard]] double effective_control_dt() const {
        return outer_dt / static_cast<double>(controls_per_record());
    }

    /// Window rows per control step when the window grid can be aligned with
    /// the control grid, else 0.
    [[nodiscard]] std::size_t window_granule() const {
        const double q = prediction_time / effective_control_dt();
        const double r = std::round(q);
        return (r >= 1.0 && std::abs(q - r) < 1e-9 * q) ? static_cast<std::size_t>(r) : 0;
    }

    /// Initial window step count, before any CFL-driven refinement.
    [[nodiscard]] std::size_t window_num_steps() const {
        std::size_t n = window_steps(prediction_time, min_window_steps, max_inner_dt);
        if (const std::size_t g = window_granule(); g > 0) n = g * ((n + g - 1) / g);
        return n;
    }

    void validate() const {
        if (!(prediction_time > 0.0)) throw std::invalid_argument("MpMfgConfig: prediction_time must be > 0");
        if (!(outer_dt > 0.0)) throw std::invalid_argument("MpMfgConfig: outer_dt must be > 0");
        if (outer_dt > prediction_time * (1.0 + 1e-12)) {
            throw std::invalid_argument("MpMfgConfig: outer_dt must not exceed prediction_time");
        }
        if (control_dt < 0.0 || control_dt > outer_dt * (1.0 + 1e-12)) {
            throw std::invalid_argument("MpMfgConfig: control_dt must lie in [0, outer_dt]");
        }
        if (control_dt > 0.0) {
            const double c = outer_dt / control_dt;
            if (std::abs(c - std::round(c)) > 1e-9 * c) {
                throw std::invalid_argument("MpMfgConfig: outer_dt must be a multiple of control_dt");
            }
        }
        if (!(control_dt_ratio > 0.0 && control_dt_ratio <= 1.0)) {
            throw std::invalid_argument("MpMfgConfig: control_dt_ratio must lie in (0, 1]");
        }
        if (!(total_time > 0.0)) throw std::invalid_argument("MpMfgConfig: total_time must be > 0");
        const double k = total_time / outer_dt;
        if (std::llround(k) < 1 || std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k)) {
            throw std::invalid_argument("MpMfgConfig: total_time must be a positive multiple of outer_dt");
        }
        if (!(sigma2 >= 0.0)) throw std::invalid_argument("MpMfgConfig: sigma2 must be >= 0");
        if (!(input_bound > 0.0)) throw std::invalid_argument("MpMfgConfig: input_bound must be > 0");
        if (min_window_steps == 0 || !(max_inner_dt > 0.0)) {
            throw std::invalid_argument("MpMfgConfig: window discretization must be positive");
        }
        if (observation == Observation::Particles && (particles.count == 0 || particles.substeps == 0)) {
            throw std::invalid_argument("MpMfgConfig: particle loop needs count > 0 and substeps > 0");
        }
        inner.validate();
    }
};

struct WindowDiagnostics {
    std::size_t iters = 0;
    double residual = 0.0;
    std::size_t window_steps = 0;
    double max_mass_error = 0.0;  ///< over the predicted density rows
    double min_density = 0.0;
    double terminal_max_abs = 0.0;  ///< |V| on the terminal row
};

/// Closed-loop record on the outer time grid; row k is time k * outer_dt.
/// `control_u` row c is the input held on [c, c + 1) * control_u.dt(); it is
/// filled by run_mp_mfg only.
struct MpMfgTrajectory {
    SpaceTimeField rho;
    SpaceTimeField applied_u;
    std::vector<WindowDiagnostics> per_step_diagnostics;
    FpDiagnostics closed_loop;
    std::optional<SpaceTimeField> control_u{};
};

namespace detail {

inline WindowDiagnostics window_diagnostics(const MfgSolution& s) {
    WindowDiagnostics d{s.iters, s.final_residual, s.V.num_steps(), 0.0, 0.0, 0.0};
    const double dx = s.rho.grid().dx();
    d.min_density = s.rho.row(0).empty() ? 0.0 : s.rho.row(0)[0];
    for (std::size_t n = 0; n < s.rho.num_rows(); ++n) {
        const auto r = s.rho.row(n);
        d.max_mass_error = std::max(d.max_mass_error, std::abs(ops::integrate(r, dx) - 1.0));
        d.min_density = std::min(d.min_density, *std::min_element(r.begin(), r.end()));
    }
    d.terminal_max_abs = ops::max_abs(s.V.row(s.V.num_rows() - 1));
    return d;
}

}  // namespace detail

[[nodiscard]] inline MfgProblem make_window_problem(const MpMfgConfig& cfg, const Field& rho_now,
                                                    std::size_t num_steps = 0) {
    CostModel cost;
    cost.horizon_scale = cfg.prediction_time;
    cost.density_floor = cfg.density_floor;
    if (num_steps == 0) num_steps = cfg.window_num_steps();
    return MfgProblem{rho_now.grid(), cfg.prediction_time, num_steps, cfg.sigma2, cfg.drift, cost,
                      cfg.input_bound, cfg.options, rho_now};
}

/// Runs the receding-horizon loop. Each recorded step of length outer_dt is
/// split into controls_per_record() zero-order-hold control steps; each
/// control step solves one window game. Row k of the output holds the density
/// and the freshly computed input at t = k * outer_dt.
///
/// A CFL violation inside a window doubles the window's step count (at most
/// max_refinements times) and the refined resolution is kept for the rest of
/// the run.
[[nodiscard]] inline MpMfgTrajectory run_mp_mfg(const MpMfgConfig& cfg, const Field& rho0) {
    cfg.validate();
    const Grid grid = rho0.grid();
    const std::size_t records = cfg.outer_steps();
    const std::size_t controls = cfg.controls_per_record();
    const double control_dt = cfg.effective_control_dt();
    const std::size_t granule = cfg.window_granule();
    std::size_t window = cfg.window_num_steps();
    std::size_t refinements = 0;

    std::optional<std::vector<double>> f;
    if (cfg.drift) f = cfg.drift->vector();

    MpMfgTrajectory traj{SpaceTimeField(grid, cfg.outer_dt, records + 1),
                         SpaceTimeField(grid, cfg.outer_dt, records + 1), {}, {}};
    traj.per_step_diagnostics.reserve(records * controls + 1);
    traj.control_u.emplace(grid, control_dt, records * controls + 1);

    std::vector<double> rho(normalize_density(rho0).vector());
    std::optional<ParticleEnsemble> swarm;
    if (cfg.observation == Observation::Particles) {
        swarm = ParticleEnsemble::sample(Field(grid, rho), cfg.particles.count, cfg.particles.seed);
    }
    const double sigma = std::sqrt(cfg.sigma2);
    std::optional<MfgWarmStart> warm;

    const std::size_t total_controls = records * controls;
    for (std::size_t c = 0; c <= total_controls; ++c) {
        const std::size_t k = c / controls;
        const bool record = c % controls == 0;
        try {
            if (record) traj.rho.set_row(k, rho);

            std::optional<MfgSolution> sol;
            while (!sol) {
                try {
                    const MfgProblem problem = make_window_problem(cfg, Field(grid, rho), window);
                    sol = solve_mfg(problem, cfg.inner, warm ? &*warm : nullptr);
                } catch (const CflViolation&) {
                    if (refinements == cfg.max_refinements) throw;
                    ++refinements;
                    window *= 2;
                    warm.reset();
                }
            }
            traj.per_step_diagnostics.push_back(detail::window_diagnostics(*sol));
            const auto u_now = sol->u.row(0);
            if (record) traj.applied_u.set_row(k, u_now);
            traj.control_u->set_row(c, u_now);
            if (c == total_controls) break;

            const double inner_dt = cfg.prediction_time / static_cast<double>(window);
            if (cfg.warm_start && granule > 0) {
                warm = shift_window(*sol, window / granule);
            }
            if (swarm) {
                const Field u_field(grid, std::vector<double>(u_now.begin(), u_now.end()));
                const double dt = control_dt / static_cast<double>(cfg.particles.substeps);
                for (std::size_t s = 0; s < cfg.particles.substeps; ++s) swarm->advance(u_field, cfg.drift, sigma, dt);
                rho = estimate_density(*swarm, grid, DensityMethod::Kde).field.vector();
            } else {
                const auto substeps =
                    static_cast<std::size_t>(std::max(1.0, std::ceil(control_dt / inner_dt - 1e-9)));
                const FpStepper closed_loop(grid, control_dt / static_cast<double>(substeps), cfg.sigma2, f,
                                            cfg.options.magnitude_cap);
                for (std::size_t s = 0; s < substeps; ++s) {
                    traj.closed_loop.absorb(closed_loop.step(rho, u_now, c * substeps + s));
                }
            }
        } catch (SolverError& e) {
            if (!e.outer_step()) e.set_outer_step(k);
            throw;
        }
    }
    return traj;
}

/// Drives a particle ensemble sampled from rho0 with the stored control rows
/// of `traj` (zero-order hold, `substeps` Euler-Maruyama steps per control
/// row) and returns KDE estimates at the recorded times listed in `rows`.
[[nodiscard]] inline std::vector<DensityEstimate> replay_particles(const MpMfgTrajectory& traj, const Field& rho0,
                                                                   double sigma2, const std::optional<Field>& drift,
                                                                   const ParticleLoopConfig& pcfg,
                                                                   const std::vector<std::size_t>& rows) {
    if (!traj.control_u) throw std::invalid_argument("replay_particles: trajectory has no control record");
    if (pcfg.count == 0 || pcfg.substeps == 0) throw std::invalid_argument("replay_particles: empty particle loop");
    const SpaceTimeField& cu = *traj.control_u;
    const std::size_t per_record = static_cast<std::size_t>(std::llround(traj.rho.dt() / cu.dt()));
    if (!std::is_sorted(rows.begin(), rows.end()) || (!rows.empty() && rows.back() >= traj.rho.num_rows())) {
        throw std::invalid_argument("replay_particles: rows must be sorted and within the trajectory");
    }
    ParticleEnsemble swarm = ParticleEnsemble::sample(rho0, pcfg.count, pcfg.seed);
    const double sigma = std::sqrt(sigma2);
    const double dt = cu.dt() / static_cast<double>(pcfg.substeps);
    std::vector<DensityEstimate> out;
    std::size_t done = 0;
    for (std::size_t k : rows) {
        for (; done < k * per_record; ++done) {
            const Field u = cu.field(done);
            for (std::size_t s = 0; s < pcfg.substeps; ++s) swarm.advance(u, drift, sigma, dt);
        }
        out.push_back(estimate_density(swarm, rho0.grid(), DensityMethod::Kde));
    }
    return out;
}

}  // namespace mfgcov

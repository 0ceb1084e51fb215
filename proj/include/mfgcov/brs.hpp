#pragma once

/// @file brs.hpp
/// @brief Best reply strategy: the myopic input -d/dx ln rho and its closed loop.
///
/// For the log-density cost the unclamped closed loop is exactly the heat
/// equation with diffusivity (sigma^2 + 2) / 2; `linear_mode` integrates that
/// reduction directly with the same implicit stepper.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "mfgcov/coverage_cost.hpp"
#include "mfgcov/errors.hpp"
#include "mfgcov/fp.hpp"
#include "mfgcov/grid.hpp"
#include "mfgcov/mp_mfg.hpp"

namespace mfgcov {

struct BrsConfig {
    double total_time = 1.0;
    double record_dt = 0.01;  ///< spacing of the stored trajectory rows
    double dt = 2e-5;         ///< inner integration step
    double sigma2 = 0.05;
    CostModel cost{};
    double input_bound = 1.0;
    bool clamp = false;
    bool linear_mode = false;

    [[nodiscard]] std::size_t record_steps() const {
        return static_cast<std::size_t>(std::llround(total_time / record_dt));
    }

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("BrsConfig: dt must be > 0");
        if (!(record_dt >= dt)) throw std::invalid_argument("BrsConfig: record_dt must be >= dt");
        if (!(total_time > 0.0)) throw std::invalid_argument("BrsConfig: total_time must be > 0");
        const double k = total_time / record_dt;
        if (std::llround(k) < 1 || std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k)) {
            throw std::invalid_argument("BrsConfig: total_time must be a positive multiple of record_dt");
        }
        if (!(sigma2 >= 0.0)) throw std::invalid_argument("BrsConfig: sigma2 must be >= 0");
        if (!(input_bound > 0.0)) throw std::invalid_argument("BrsConfig: input_bound must be > 0");
        cost.validate();
    }

    /// Effective diffusivity of the unclamped closed loop.
    [[nodiscard]] double reduced_diffusivity() const noexcept { return 0.5 * (sigma2 + 2.0); }
};

namespace ops {

/// -rho_x / max(rho, floor), optionally clamped.
inline void brs_input(std::span<const double> rho, double dx, double floor, double bound, bool clamp,
                      std::span<double> out) {
    gradient(rho, dx, out);
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double u = -out[i] / std::max(rho[i], floor);
        out[i] = clamp ? std::clamp(u, -bound, bound) : u;
    }
}

}  // namespace ops

[[nodiscard]] inline Field brs_input(const Field& rho, const CostModel& cost, double input_bound, bool clamp) {
    std::vector<double> out(rho.size());
    ops::brs_input(rho.values(), rho.grid().dx(), cost.density_floor, input_bound, clamp, out);
    return Field(rho.grid(), std::move(out));
}

[[nodiscard]] inline MpMfgTrajectory run_brs(const BrsConfig& cfg, const Field& rho0) {
    cfg.validate();
    const Grid grid = rho0.grid();
    const std::size_t records = cfg.record_steps();
    const auto substeps = static_cast<std::size_t>(std::max(1.0, std::ceil(cfg.record_dt / cfg.dt - 1e-9)));
    const double dt = cfg.record_dt / static_cast<double>(substeps);
    const double dx = grid.dx();

    // Linear mode folds the input into the diffusion: sigma_eff^2 = sigma^2 + 2.
    const FpStepper stepper(grid, dt, cfg.linear_mode ? cfg.sigma2 + 2.0 : cfg.sigma2);

    MpMfgTrajectory traj{SpaceTimeField(grid, cfg.record_dt, records + 1),
                         SpaceTimeField(grid, cfg.record_dt, records + 1), {}, {}};
    std::vector<double> rho(normalize_density(rho0).vector());
    std::vector<double> u(grid.size(), 0.0);
    const std::vector<double> zero(grid.size(), 0.0);

    for (std::size_t k = 0; k <= records; ++k) {
        traj.rho.set_row(k, rho);
        ops::brs_input(rho, dx, cfg.cost.density_floor, cfg.input_bound, cfg.clamp, u);
        traj.applied_u.set_row(k, u);
        if (k == records) break;
        try {
            for (std::size_t s = 0; s < substeps; ++s) {
                if (cfg.linear_mode) {
                    traj.closed_loop.absorb(stepper.step(rho, zero, k * substeps + s));
                } else {
                    ops::brs_input(rho, dx, cfg.cost.density_floor, cfg.input_bound, cfg.clamp, u);
                    traj.closed_loop.absorb(stepper.step(rho, u, k * substeps + s));
                }
            }
        } catch (SolverError& e) {
            if (!e.outer_step()) e.set_outer_step(k);
            throw;
        }
    }
    return traj;
}

}  // namespace mfgcov

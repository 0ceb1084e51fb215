#pragma once

/// @file coverage_cost.hpp
/// @brief Log-density congestion cost h(x, rho) = (1/T_pred) ln rho and the running cost.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfgcov/grid.hpp"

namespace mfgcov {

enum class Coupling { LogDensity };

struct CostModel {
    static constexpr double kDefaultDensityFloor = 1e-8;

    Coupling coupling = Coupling::LogDensity;
    double horizon_scale = 1.0;  ///< prediction time; the coupling is divided by it
    double density_floor = kDefaultDensityFloor;

    void validate() const {
        if (!(horizon_scale > 0.0)) throw std::invalid_argument("CostModel: horizon_scale must be > 0");
        if (!(density_floor > 0.0) || density_floor > 1e-4) {
            throw std::invalid_argument("CostModel: density_floor must lie in (0, 1e-4]");
        }
    }

    /// ln max(rho, floor), without the 1/T_pred prefactor.
    [[nodiscard]] double log_density(double rho) const noexcept { return std::log(std::max(rho, density_floor)); }

    [[nodiscard]] double coupling_at(double rho) const noexcept { return log_density(rho) / horizon_scale; }
};

namespace ops {

inline void coupling_cost(const CostModel& model, std::span<const double> rho, std::span<double> out) {
    for (std::size_t i = 0; i < rho.size(); ++i) out[i] = model.coupling_at(rho[i]);
}

}  // namespace ops

[[nodiscard]] inline Field coupling_cost(const CostModel& model, const Field& rho) {
    model.validate();
    std::vector<double> out(rho.size());
    ops::coupling_cost(model, rho.values(), out);
    return Field(rho.grid(), std::move(out));
}

/// 0.5 u^2 + coupling, pointwise.
[[nodiscard]] inline Field running_cost(const CostModel& model, const Field& u, const Field& rho) {
    if (!(u.grid() == rho.grid())) throw std::invalid_argument("running_cost: grid mismatch");
    model.validate();
    std::vector<double> out(rho.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * u[i] * u[i] + model.coupling_at(rho[i]);
    return Field(rho.grid(), std::move(out));
}

}  // namespace mfgcov

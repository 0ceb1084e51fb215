#pragma once

/// @file tridiag.hpp
/// @brief Implicit periodic diffusion step: solves (I - c * Lap_h) y = b.
///
/// Lap_h is the periodic 3-point Laplacian, so the system is cyclic
/// tridiagonal with constant coefficients. The factorization is done once
/// per (grid, c); each solve is O(M) via Thomas + Sherman-Morrison.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "mfgcov/grid.hpp"

namespace mfgcov {

class PeriodicDiffusionSolver {
public:
    /// `coeff` is dt * diffusivity; zero gives the identity.
    PeriodicDiffusionSolver(Grid grid, double coeff) : grid_(grid), coeff_(coeff) {
        if (coeff < 0.0) throw std::invalid_argument("PeriodicDiffusionSolver: coefficient must be >= 0");
        if (coeff == 0.0) return;

        const std::size_t m = grid.size();
        const double dx = grid.dx();
        r_ = coeff / (dx * dx);
        const double diag = 1.0 + 2.0 * r_;
        const double off = -r_;

        // Sherman-Morrison split of the corner entries A[0][m-1] = A[m-1][0] = off.
        gamma_ = -diag;
        std::vector<double> b(m, diag);
        b[0] = diag - gamma_;
        b[m - 1] = diag - off * off / gamma_;

        cp_.assign(m, 0.0);
        inv_den_.assign(m, 0.0);
        inv_den_[0] = 1.0 / b[0];
        cp_[0] = off * inv_den_[0];
        for (std::size_t i = 1; i < m; ++i) {
            inv_den_[i] = 1.0 / (b[i] - off * cp_[i - 1]);
            cp_[i] = off * inv_den_[i];
        }

        std::vector<double> u(m, 0.0);
        u[0] = gamma_;
        u[m - 1] = off;
        z_.assign(m, 0.0);
        thomas(u, z_);
        denom_ = 1.0 + z_[0] + off * z_[m - 1] / gamma_;
    }

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] double coefficient() const noexcept { return coeff_; }

    /// In-place solve; `x` holds b on entry and y on exit.
    void solve(std::span<double> x) const {
        if (x.size() != grid_.size()) throw std::invalid_argument("PeriodicDiffusionSolver: size mismatch");
        if (coeff_ == 0.0) return;
        const std::size_t m = x.size();
        const double off = -r_;
        thomas(x, x);
        const double fact = (x[0] + off * x[m - 1] / gamma_) / denom_;
        for (std::size_t i = 0; i < m; ++i) x[i] -= fact * z_[i];
    }

private:
    // Solves the (non-cyclic) modified system B y = rhs; rhs and out may alias.
    void thomas(std::span<const double> rhs, std::span<double> out) const {
        const std::size_t m = grid_.size();
        const double off = -r_;
        out[0] = rhs[0] * inv_den_[0];
        for (std::size_t i = 1; i < m; ++i) out[i] = (rhs[i] - off * out[i - 1]) * inv_den_[i];
        for (std::size_t i = m - 1; i-- > 0;) out[i] -= cp_[i] * out[i + 1];
    }

    Grid grid_;
    double coeff_;
    double r_ = 0.0;
    double gamma_ = 0.0;
    double denom_ = 1.0;
    std::vector<double> cp_;
    std::vector<double> inv_den_;
    std::vector<double> z_;
};

}  // namespace mfgcov

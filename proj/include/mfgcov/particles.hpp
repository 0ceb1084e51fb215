#pragma once

/// @file particles.hpp
/// @brief N-robot Euler-Maruyama simulation on the periodic unit interval and
///        density estimation back onto the grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfgcov/grid.hpp"

namespace mfgcov {

/// Maps x into [0, 1).
[[nodiscard]] inline double wrap_unit(double x) noexcept {
    double w = x - std::floor(x);
    if (w >= 1.0) w = 0.0;
    return w;
}

enum class Interpolation { Linear, Nearest };

/// Cell-centered field evaluated at an arbitrary position, periodic.
[[nodiscard]] inline double interpolate(std::span<const double> f, double x, Interpolation mode) noexcept {
    const auto m = static_cast<std::ptrdiff_t>(f.size());
    const double dx = 1.0 / static_cast<double>(m);
    if (mode == Interpolation::Nearest) {
        auto i = static_cast<std::ptrdiff_t>(std::floor(x / dx));
        i = ((i % m) + m) % m;
        return f[static_cast<std::size_t>(i)];
    }
    const double s = x / dx - 0.5;
    const double fl = std::floor(s);
    const double w = s - fl;
    auto i0 = static_cast<std::ptrdiff_t>(fl);
    i0 = ((i0 % m) + m) % m;
    const auto i1 = (i0 + 1) % m;
    return (1.0 - w) * f[static_cast<std::size_t>(i0)] + w * f[static_cast<std::size_t>(i1)];
}

/// Robot positions plus the random stream that drives their noise. Copying an
/// ensemble copies the stream state, so copies evolve identically.
class ParticleEnsemble {
public:
    ParticleEnsemble(std::vector<double> positions, std::uint64_t seed)
        : positions_(std::move(positions)), seed_(seed), engine_(seed) {
        if (positions_.empty()) throw std::invalid_argument("ParticleEnsemble: need at least one particle");
        for (double& x : positions_) x = wrap_unit(x);
    }

    [[nodiscard]] std::size_t size() const noexcept { return positions_.size(); }
    [[nodiscard]] std::span<const double> positions() const noexcept { return positions_; }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    /// x <- wrap(x + (f(x) + u(x)) dt + sigma sqrt(dt) xi), one normal draw per
    /// particle in index order.
    void advance(const Field& u, const std::optional<Field>& drift, double sigma, double dt,
                 Interpolation mode = Interpolation::Linear) {
        if (!(dt > 0.0)) throw std::invalid_argument("ParticleEnsemble::advance: dt must be positive");
        if (drift && !(drift->grid() == u.grid())) throw std::invalid_argument("ParticleEnsemble: grid mismatch");
        const double noise = sigma * std::sqrt(dt);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (double& x : positions_) {
            double v = interpolate(u.values(), x, mode);
            if (drift) v += interpolate(drift->values(), x, mode);
            const double xi = noise != 0.0 ? normal(engine_) : 0.0;
            x = wrap_unit(x + v * dt + noise * xi);
        }
    }

    /// Draws `count` positions from a gridded density by inverse CDF; the
    /// density is treated as piecewise constant per cell.
    static ParticleEnsemble sample(const Field& rho, std::size_t count, std::uint64_t seed) {
        if (count == 0) throw std::invalid_argument("ParticleEnsemble::sample: count must be > 0");
        const Grid& g = rho.grid();
        const double dx = g.dx();
        std::vector<double> cdf(g.size() + 1, 0.0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (rho[i] < 0.0) throw std::invalid_argument("ParticleEnsemble::sample: negative density");
            cdf[i + 1] = cdf[i] + rho[i] * dx;
        }
        const double total = cdf.back();
        if (!(total > 0.0)) throw std::invalid_argument("ParticleEnsemble::sample: zero mass");

        std::mt19937_64 engine(seed);
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        std::vector<double> xs(count);
        for (double& x : xs) {
            const double target = uniform(engine) * total;
            auto it = std::upper_bound(cdf.begin() + 1, cdf.end(), target);
            auto cell = static_cast<std::size_t>(std::distance(cdf.begin() + 1, it));
            cell = std::min(cell, g.size() - 1);
            const double width = cdf[cell + 1] - cdf[cell];
            const double frac = width > 0.0 ? (target - cdf[cell]) / width : 0.5;
            x = (static_cast<double>(cell) + std::clamp(frac, 0.0, 1.0)) * dx;
        }
        // The stream used for dynamics is decorrelated from the sampling draws.
        return ParticleEnsemble(std::move(xs), seed ^ 0x9E3779B97F4A7C15ULL);
    }

    /// Every particle at x0.
    static ParticleEnsemble point_mass(double x0, std::size_t count, std::uint64_t seed) {
        return ParticleEnsemble(std::vector<double>(count, x0), seed);
    }

private:
    std::vector<double> positions_;
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// Functional form of the stepping operation; the input ensemble is untouched.
[[nodiscard]] inline ParticleEnsemble step_particles(ParticleEnsemble ens, const Field& u,
                                                     const std::optional<Field>& drift, double sigma, double dt,
                                                     Interpolation mode = Interpolation::Linear) {
    ens.advance(u, drift, sigma, dt, mode);
    return ens;
}

enum class DensityMethod { Histogram, Kde };

struct DensityEstimate {
    DensityMethod method;
    double bandwidth_or_bins;  ///< kernel bandwidth for Kde, bin count for Histogram
    Field field;
};

/// 1.06 * sample_std * N^(-1/5).
[[nodiscard]] inline double silverman_bandwidth(std::span<const double> xs) {
    const auto n = static_cast<double>(xs.size());
    if (xs.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= (n - 1.0);
    return 1.06 * std::sqrt(var) * std::pow(n, -0.2);
}

/// Histogram counts / (N dx), or a wrapped Gaussian KDE sampled at cell
/// centers and rescaled to unit mass. A nonpositive `bandwidth` selects the
/// default rule; the bandwidth is never allowed below one cell width.
[[nodiscard]] inline DensityEstimate estimate_density(const ParticleEnsemble& ens, Grid grid, DensityMethod method,
                                                      double bandwidth = 0.0) {
    const std::size_t m = grid.size();
    const double dx = grid.dx();
    const auto n = static_cast<double>(ens.size());
    std::vector<double> out(m, 0.0);

    if (method == DensityMethod::Histogram) {
        for (double x : ens.positions()) {
            auto i = static_cast<std::size_t>(x / dx);
            out[std::min(i, m - 1)] += 1.0;
        }
        for (double& v : out) v /= n * dx;
        return {method, static_cast<double>(m), Field(grid, std::move(out))};
    }

    double h = bandwidth > 0.0 ? bandwidth : silverman_bandwidth(ens.positions());
    h = std::max(h, dx);
    const double reach = 5.0 * h;
    const double norm = 1.0 / (h * std::sqrt(2.0 * std::numbers::pi));
    const double inv2h2 = 1.0 / (2.0 * h * h);
    const auto mi = static_cast<std::ptrdiff_t>(m);
    for (double x : ens.positions()) {
        const auto lo = static_cast<std::ptrdiff_t>(std::floor((x - reach) / dx));
        const auto hi = static_cast<std::ptrdiff_t>(std::ceil((x + reach) / dx));
        for (std::ptrdiff_t j = lo; j <= hi; ++j) {
            const double d = (static_cast<double>(j) + 0.5) * dx - x;
            out[static_cast<std::size_t>(((j % mi) + mi) % mi)] += norm * std::exp(-d * d * inv2h2);
        }
    }
    double total = 0.0;
    for (double v : out) total += v;
    total *= dx;
    for (double& v : out) v /= total;
    return {method, h, Field(grid, std::move(out))};
}

/// `t,i,x` rows, one per particle.
inline void write_particle_snapshot(std::ostream& os, double t, const ParticleEnsemble& ens, bool header = true) {
    if (header) os << "t,i,x\n";
    const auto xs = ens.positions();
    for (std::size_t i = 0; i < xs.size(); ++i) os << t << ',' << i << ',' << xs[i] << '\n';
}

}  // namespace mfgcov

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mfgcov/fp.hpp"
#include "oracles/spectral.hpp"

using namespace mfgcov;
using std::numbers::pi;

namespace {

FpSolution diffuse(const Field& rho0, double horizon, std::size_t steps, double sigma2) {
    const SpaceTimeField zero(rho0.grid(), horizon / static_cast<double>(steps), steps + 1);
    return solve_fp(FpProblem(rho0.grid(), horizon, steps, sigma2, zero, rho0));
}

double heat_error(int m, double t, double dt) {
    const Grid g(m);
    const auto samples = oracle::reference_gaussian(g.size());
    const auto steps = static_cast<std::size_t>(std::llround(t / dt));
    const auto sol = diffuse(Field(g, samples), t, steps, 0.05);
    const auto row = sol.rho.row(steps);
    std::vector<double> got(row.begin(), row.end());
    // compare against the oracle applied to the same normalized samples
    const auto mass = integrate(Field(g, samples));
    auto startv = samples;
    for (double& v : startv) v /= mass;
    return oracle::max_abs_diff(got, oracle::heat(startv, 0.025, t));
}

}  // namespace

TEST(Fp, UniformStaysUniformWithoutInput) {
    const Grid g(64);
    const auto sol = diffuse(Field(g, 1.0), 1.0, 200, 0.05);
    for (double v : sol.rho.values()) EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(Fp, UniformStaysUniformUnderConstantTransport) {
    const Grid g(64);
    const SpaceTimeField u(g, 0.01, 101, 0.5);
    const auto sol = solve_fp(FpProblem(g, 1.0, 100, 0.05, u, Field(g, 1.0)));
    for (double v : sol.rho.values()) EXPECT_NEAR(v, 1.0, 1e-13);
}

TEST(Fp, PureDiffusionMatchesSpectralSolution) {
    const Grid g(128);
    const auto samples = oracle::reference_gaussian(g.size());
    const auto sol = diffuse(Field(g, samples), 1.0, 2000, 0.05);
    const auto row = sol.rho.row(2000);
    const auto mass = integrate(Field(g, samples));
    auto start = samples;
    for (double& v : start) v /= mass;
    EXPECT_LE(oracle::max_abs_diff(std::vector<double>(row.begin(), row.end()), oracle::heat(start, 0.025, 1.0)), 1e-3);
}

TEST(Fp, ConservesMassUnderTransport) {
    const Grid g(128);
    const SpaceTimeField u = SpaceTimeField::constant_in_time(
        Field::sample(g, [](double x) { return 0.8 * std::sin(2 * pi * x); }), 1e-3, 1001);
    const auto sol = solve_fp(FpProblem(g, 1.0, 1000, 0.05, u, Field(g, oracle::reference_gaussian(g.size()))));
    for (std::size_t n = 0; n < sol.rho.num_rows(); ++n) {
        EXPECT_NEAR(ops::integrate(sol.rho.row(n), g.dx()), 1.0, 1e-8);
        for (double v : sol.rho.row(n)) EXPECT_GE(v, 0.0);
    }
    EXPECT_LE(sol.diagnostics.max_mass_correction, 1e-8);
}

TEST(Fp, MirrorSymmetryIsPreserved) {
    const Grid g(128);
    const SpaceTimeField u = SpaceTimeField::constant_in_time(
        Field::sample(g, [](double x) { return -std::sin(2 * pi * x); }), 1e-3, 301);
    const auto sol = solve_fp(FpProblem(g, 0.3, 300, 0.05, u, Field(g, oracle::reference_gaussian(g.size()))));
    const std::size_t m = g.size();
    for (std::size_t n = 0; n < sol.rho.num_rows(); ++n) {
        for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(sol.rho.row(n)[i], sol.rho.row(n)[m - 1 - i], 1e-12);
    }
}

TEST(Fp, OvershootingTransportRaisesNegativeDensity) {
    const Grid g(64);
    const SpaceTimeField u = SpaceTimeField::constant_in_time(
        Field::sample(g, [](double x) { return 40.0 * std::sin(2 * pi * x); }), 0.05, 3);
    try {
        (void)solve_fp(FpProblem(g, 0.1, 2, 0.0, u, Field(g, 1.0)));
        FAIL() << "expected NegativeDensity";
    } catch (const NegativeDensity& e) {
        EXPECT_LT(e.min_value(), 0.0);
    }
}

TEST(Fp, SpatialOrderIsTwoForPureDiffusion) {
    const double e64 = heat_error(64, 0.1, 1e-6);
    const double e128 = heat_error(128, 0.1, 1e-6);
    const double e256 = heat_error(256, 0.1, 1e-6);
    EXPECT_NEAR(std::log2(e64 / e128), 2.0, 0.3);
    EXPECT_NEAR(std::log2(e128 / e256), 2.0, 0.3);
}

TEST(Fp, RejectsBadInputs) {
    const Grid g(32);
    const SpaceTimeField u(g, 0.1, 5);
    EXPECT_THROW(FpProblem(g, 1.0, 10, 0.05, u, Field(g, 1.0)), std::invalid_argument);
    EXPECT_THROW(FpProblem(g, 0.4, 4, -0.1, u, Field(g, 1.0)), std::invalid_argument);
    EXPECT_THROW(FpProblem(g, 0.4, 4, 0.05, u, Field(g, 0.0)), std::invalid_argument);
    EXPECT_THROW(FpProblem(g, 0.4, 4, 0.05, u, Field(Grid(16), 1.0)), std::invalid_argument);
}

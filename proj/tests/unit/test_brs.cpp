#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mfgcov/brs.hpp"
#include "oracles/spectral.hpp"

using namespace mfgcov;
using std::numbers::pi;

namespace {

Field gaussian(Grid g) { return normalize_density(Field(g, oracle::reference_gaussian(g.size()))); }

std::vector<double> row_vec(const SpaceTimeField& f, std::size_t n) {
    const auto r = f.row(n);
    return {r.begin(), r.end()};
}

}  // namespace

TEST(BrsInput, GaussianSlopeAndClamp) {
    // -d/dx ln rho = 100 (x - 0.5); at x = 0.6 that is 10
    const Grid g(1024);
    const Field rho = gaussian(g);
    const auto i = static_cast<std::size_t>(0.6 * 1024);
    const Field free = brs_input(rho, CostModel{}, 1.0, false);
    EXPECT_NEAR(free[i], 100.0 * (g.x(i) - 0.5), 1e-2);
    EXPECT_NEAR(free[i], 10.0, 0.1);
    const Field clamped = brs_input(rho, CostModel{}, 1.0, true);
    EXPECT_EQ(clamped[i], 1.0);
    EXPECT_EQ(clamped[1024 - 1 - i], -1.0);
}

TEST(BrsInput, SinePerturbation) {
    const double eps = 0.1;
    for (int m : {64, 128}) {
        const Grid g(m);
        const Field rho = Field::sample(g, [eps](double x) { return 1.0 + eps * std::sin(2 * pi * x); });
        const Field u = brs_input(rho, CostModel{}, 1.0, false);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = g.x(i);
            const double exact = -2 * pi * eps * std::cos(2 * pi * x) / (1.0 + eps * std::sin(2 * pi * x));
            EXPECT_NEAR(u[i], exact, 5.0 * g.dx() * g.dx());
        }
    }
}

TEST(Brs, LinearModeMatchesHeatEquation) {
    const Grid g(128);
    BrsConfig c;
    c.linear_mode = true;
    const Field rho0 = gaussian(g);
    const auto traj = run_brs(c, rho0);
    for (std::size_t n : {5u, 10u, 50u}) {
        const double t = 0.01 * static_cast<double>(n);
        EXPECT_LE(oracle::max_abs_diff(row_vec(traj.rho, n), oracle::heat(rho0.vector(), 1.025, t)), 1e-3) << t;
    }
    double dev = 0.0;
    for (double v : traj.rho.row(100)) dev = std::max(dev, std::abs(v - 1.0));
    EXPECT_LE(dev, 1e-10);
}

TEST(Brs, NonlinearAgreesWithLinearWhenUnclamped) {
    const Grid g(128);
    const Field rho0 = Field::sample(g, [](double x) { return 1.0 + 0.1 * std::sin(2 * pi * x); });
    BrsConfig c;
    c.total_time = 0.2;
    const auto nonlinear = run_brs(c, rho0);
    c.linear_mode = true;
    const auto linear = run_brs(c, rho0);
    EXPECT_LE(ops::max_abs_diff(nonlinear.rho.values(), linear.rho.values()), 1e-3);
    EXPECT_LE(ops::max_abs(nonlinear.applied_u.values()), 1.0);
}

TEST(Brs, ClampedPeakDecreases) {
    const Grid g(128);
    BrsConfig c;
    c.clamp = true;
    const auto traj = run_brs(c, gaussian(g));
    double prev = INFINITY;
    for (std::size_t n = 0; n < traj.rho.num_rows(); ++n) {
        const double peak = *std::max_element(traj.rho.row(n).begin(), traj.rho.row(n).end());
        EXPECT_LE(peak, prev + 1e-12);
        prev = peak;
        EXPECT_LE(ops::max_abs(traj.applied_u.row(n)), 1.0);
        EXPECT_NEAR(ops::integrate(traj.rho.row(n), g.dx()), 1.0, 1e-8);
    }
}

TEST(Brs, UniformStaysPut) {
    const Grid g(64);
    for (bool clamp : {false, true}) {
        BrsConfig c;
        c.clamp = clamp;
        const auto traj = run_brs(c, Field(g, 1.0));
        for (double v : traj.rho.values()) EXPECT_NEAR(v, 1.0, 1e-9);
        for (double v : traj.applied_u.values()) EXPECT_LE(std::abs(v), 1e-9);
    }
}

TEST(Brs, RejectsBadConfig) {
    const Grid g(32);
    BrsConfig c;
    c.dt = 0.1;
    EXPECT_THROW((void)run_brs(c, Field(g, 1.0)), std::invalid_argument);
    c = BrsConfig{};
    c.total_time = 0.015;
    EXPECT_THROW((void)run_brs(c, Field(g, 1.0)), std::invalid_argument);
}

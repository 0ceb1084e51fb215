#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mfgcov/mfg.hpp"
#include "oracles/spectral.hpp"

using namespace mfgcov;

namespace {

MfgProblem window(const Field& rho0, double horizon, std::size_t steps) {
    CostModel cost;
    cost.horizon_scale = horizon;
    return MfgProblem{rho0.grid(), horizon, steps, 0.05, std::nullopt, cost, 1.0, PdeOptions{}, rho0};
}

Field gaussian(Grid g) { return Field(g, oracle::reference_gaussian(g.size())); }

Field mild(Grid g) {
    return Field::sample(g, [](double x) { return 1.0 + 0.3 * std::cos(2 * std::numbers::pi * x); });
}

const MfgSolution& unit_window() {
    static const MfgSolution s = solve_mfg(window(gaussian(Grid(128)), 1.0, 1000), MfgConfig{});
    return s;
}

}  // namespace

TEST(Mfg, UniformConvergesImmediately) {
    const Grid g(64);
    const auto s = solve_mfg(window(Field(g, 1.0), 1.0, 100), MfgConfig{});
    EXPECT_EQ(s.iters, 1u);
    EXPECT_LE(s.final_residual, 1e-12);  // only renormalization rounding
    for (double v : s.u.values()) EXPECT_LE(std::abs(v), 1e-10);
    for (double v : s.rho.values()) EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(Mfg, ResidualHistoryEndsBelowTolerance) {
    const auto& s = unit_window();
    ASSERT_EQ(s.residual_history.size(), s.iters);
    for (double z : s.residual_history) EXPECT_GT(z, 0.0);
    EXPECT_LE(s.residual_history.back(), MfgConfig{}.tol);
    EXPECT_EQ(s.final_residual, s.residual_history.back());
}

TEST(Mfg, PredictedDensitySpreadsMonotonically) {
    const auto& s = unit_window();
    double prev = INFINITY;
    for (std::size_t n = 0; n < s.rho.num_rows(); ++n) {
        double dev = 0.0;
        for (double v : s.rho.row(n)) dev = std::max(dev, std::abs(v - 1.0));
        EXPECT_LE(dev, prev + 1e-12) << "row " << n;
        prev = dev;
    }
    EXPECT_LT(prev, 0.05);
}

TEST(Mfg, SolutionIsSelfConsistent) {
    const auto& s = unit_window();
    const auto p = window(gaussian(Grid(128)), 1.0, 1000);
    HjbProblem h{p.grid, p.horizon, p.num_steps, p.sigma2, std::nullopt, p.cost, s.rho, p.input_bound};
    const auto v = solve_hjb(h);
    EXPECT_LE(ops::max_abs_diff(v.values(), s.V.values()), 2 * MfgConfig{}.tol);
    for (double x : s.V.row(s.V.num_rows() - 1)) EXPECT_EQ(x, 0.0);
}

TEST(Mfg, Deterministic) {
    const auto a = solve_mfg(window(mild(Grid(64)), 0.5, 100), MfgConfig{});
    const auto b = solve_mfg(window(mild(Grid(64)), 0.5, 100), MfgConfig{});
    EXPECT_EQ(a.V, b.V);
    EXPECT_EQ(a.rho, b.rho);
    EXPECT_EQ(a.residual_history, b.residual_history);
}

TEST(Mfg, FixedPointDoesNotDependOnDamping) {
    const auto p = window(mild(Grid(64)), 0.5, 100);
    MfgConfig slow;
    slow.tol = 1e-8;
    slow.max_iters = 3000;
    MfgConfig heavy = slow;
    heavy.damping = 0.05;
    const auto a = solve_mfg(p, slow);
    const auto b = solve_mfg(p, heavy);
    EXPECT_GT(b.iters, a.iters);
    EXPECT_LE(ops::max_abs_diff(a.V.values(), b.V.values()), 1e-7);
    EXPECT_LE(ops::max_abs_diff(a.rho.values(), b.rho.values()), 1e-7);
}

TEST(Mfg, WarmStartFromSolutionConvergesAtOnce) {
    const auto p = window(mild(Grid(64)), 0.5, 100);
    const auto cold = solve_mfg(p, MfgConfig{});
    const MfgWarmStart w{cold.V, cold.rho};
    const auto warm = solve_mfg(p, MfgConfig{}, &w);
    EXPECT_LE(warm.iters, 3u);
    EXPECT_LE(ops::max_abs_diff(warm.V.values(), cold.V.values()), 1e-5);
}

TEST(Mfg, IterationCapRaisesNotConverged) {
    MfgConfig cfg;
    cfg.max_iters = 3;
    try {
        (void)solve_mfg(window(gaussian(Grid(64)), 1.0, 1000), cfg);
        FAIL() << "expected NotConverged";
    } catch (const NotConverged& e) {
        EXPECT_EQ(e.residual_history().size(), 3u);
    }
}

TEST(Mfg, ShiftWindowMovesRowsAndPadsTerminal) {
    const auto s = solve_mfg(window(mild(Grid(32)), 0.5, 50), MfgConfig{});
    const auto w = shift_window(s, 5);
    for (std::size_t n = 0; n + 5 < 51; ++n) {
        EXPECT_EQ(ops::max_abs_diff(w.V.row(n), s.V.row(n + 5)), 0.0);
        EXPECT_EQ(ops::max_abs_diff(w.rho.row(n), s.rho.row(n + 5)), 0.0);
    }
    for (std::size_t n = 46; n < 51; ++n) {
        EXPECT_EQ(ops::max_abs(w.V.row(n)), 0.0);
        EXPECT_EQ(ops::max_abs_diff(w.rho.row(n), s.rho.row(50)), 0.0);
    }
}

TEST(Mfg, RejectsBadConfig) {
    MfgConfig cfg;
    cfg.damping = 0.0;
    EXPECT_THROW((void)solve_mfg(window(mild(Grid(32)), 0.5, 50), cfg), std::invalid_argument);
    cfg = MfgConfig{};
    cfg.tol = 0.0;
    EXPECT_THROW((void)solve_mfg(window(mild(Grid(32)), 0.5, 50), cfg), std::invalid_argument);
}

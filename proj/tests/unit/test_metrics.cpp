#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mfgcov/metrics.hpp"
#include "oracles/spectral.hpp"

using namespace mfgcov;

namespace {

MpMfgTrajectory constant(Grid g, double rho, double u, std::size_t rows = 101) {
    return {SpaceTimeField(g, 0.01, rows, rho), SpaceTimeField(g, 0.01, rows, u), {}, {}};
}

MpMfgTrajectory noisy(Grid g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(0.0, 2.0);
    auto t = constant(g, 0.0, 0.0, 11);
    for (double& v : t.rho.values()) v = d(rng);
    for (double& v : t.applied_u.values()) v = d(rng) - 1.0;
    return t;
}

}  // namespace

TEST(EvalFunctional, UniformValues) {
    const Grid g(64);
    EXPECT_EQ(eval_functional(Field(g, 1.0), Field(g, 0.0)), 0.0);
    EXPECT_DOUBLE_EQ(eval_functional(Field(g, 1.0), Field(g, 1.0)), 0.5);
}

TEST(EvalFunctional, GaussianEntropy) {
    // closed form for width 0.02: -1/2 ln(0.02 pi) - 1/2, tails beyond the domain are negligible
    const Grid g(128);
    const Field rho = normalize_density(Field(g, oracle::reference_gaussian(g.size())));
    const double exact = -0.5 * std::log(0.02 * std::numbers::pi) - 0.5;
    EXPECT_NEAR(exact, 0.8836, 1e-4);
    EXPECT_NEAR(eval_functional(rho, Field(g, 0.0)), exact, 1e-4);
}

TEST(EvalFunctional, SeriesFollowsRows) {
    const auto t = constant(Grid(16), 1.0, 1.0, 5);
    const auto s = eval_series(t);
    ASSERT_EQ(s.times.size(), 5u);
    EXPECT_DOUBLE_EQ(s.times[4], 0.04);
    for (double v : s.values) EXPECT_DOUBLE_EQ(v, 0.5);
    EXPECT_THROW((void)eval_functional(Field(Grid(16), 1.0), Field(Grid(32), 0.0)), GridMismatch);
}

TEST(StrategyDistance, UnitOffsetOnUnitHorizon) {
    const Grid g(32);
    const auto d = strategy_distance(constant(g, 1.0, 0.0), constant(g, 2.0, 0.0));
    EXPECT_NEAR(d.l2, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(d.linf, 1.0);
    const auto both = strategy_distance(constant(g, 1.0, 0.0), constant(g, 2.0, 0.5));
    EXPECT_NEAR(both.l2, 1.5, 1e-12);
    EXPECT_DOUBLE_EQ(both.linf, 1.5);
}

TEST(StrategyDistance, MetricAxioms) {
    const Grid g(16);
    const auto a = noisy(g, 1);
    const auto b = noisy(g, 2);
    const auto c = noisy(g, 3);
    EXPECT_EQ(strategy_distance(a, a).l2, 0.0);
    EXPECT_EQ(strategy_distance(a, a).linf, 0.0);
    EXPECT_EQ(strategy_distance(a, b).l2, strategy_distance(b, a).l2);
    EXPECT_EQ(strategy_distance(a, b).linf, strategy_distance(b, a).linf);
    EXPECT_GT(strategy_distance(a, b).l2, 0.0);
    EXPECT_LE(strategy_distance(a, c).l2, strategy_distance(a, b).l2 + strategy_distance(b, c).l2 + 1e-12);
    EXPECT_LE(strategy_distance(a, c).linf, strategy_distance(a, b).linf + strategy_distance(b, c).linf + 1e-12);
}

TEST(StrategyDistance, RejectsMismatchedLayouts) {
    EXPECT_THROW((void)strategy_distance(constant(Grid(16), 1, 0), constant(Grid(32), 1, 0)), GridMismatch);
    EXPECT_THROW((void)strategy_distance(constant(Grid(16), 1, 0, 11), constant(Grid(16), 1, 0, 12)), GridMismatch);
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mfgcov/coverage_cost.hpp"

using namespace mfgcov;

TEST(CouplingCost, UniformDensityCostsNothing) {
    const Grid g(64);
    CostModel c;
    c.horizon_scale = 0.1;
    const Field h = coupling_cost(c, Field(g, 1.0));
    for (double v : h.values()) EXPECT_EQ(v, 0.0);
}

TEST(CouplingCost, PointValues) {
    CostModel c;
    EXPECT_DOUBLE_EQ(c.coupling_at(std::exp(1.0)), 1.0);
    c.horizon_scale = 0.1;
    const double peak = 1.0 / std::sqrt(0.02 * std::numbers::pi);
    EXPECT_NEAR(c.coupling_at(peak), 13.836, 1e-3);
    // floor keeps empty cells finite
    EXPECT_DOUBLE_EQ(c.coupling_at(0.0), std::log(CostModel::kDefaultDensityFloor) / 0.1);
}

TEST(CouplingCost, MonotoneAndScalesWithHorizon) {
    CostModel a;
    CostModel b;
    b.horizon_scale = 0.25;
    double prev = -INFINITY;
    for (double r = 0.01; r < 10.0; r *= 1.3) {
        const double v = a.coupling_at(r);
        EXPECT_GT(v, prev);
        prev = v;
        EXPECT_NEAR(b.coupling_at(r), 4.0 * v, 1e-12 * std::max(1.0, std::abs(v)));
    }
}

TEST(RunningCost, PointValues) {
    const Grid g(8);
    CostModel c;
    const Field u = Field::sample(g, [](double x) { return x < 0.5 ? 0.0 : 1.0; });
    const Field r0 = running_cost(c, u, Field(g, 1.0));
    EXPECT_EQ(r0[0], 0.0);
    EXPECT_DOUBLE_EQ(r0[7], 0.5);
    const Field r1 = running_cost(c, u, Field(g, std::exp(1.0)));
    EXPECT_DOUBLE_EQ(r1[7], 1.5);
}

TEST(CostModel, RejectsBadParameters) {
    const Grid g(8);
    CostModel c;
    c.horizon_scale = 0.0;
    EXPECT_THROW(coupling_cost(c, Field(g, 1.0)), std::invalid_argument);
    c.horizon_scale = 1.0;
    c.density_floor = 1e-2;
    EXPECT_THROW(coupling_cost(c, Field(g, 1.0)), std::invalid_argument);
    EXPECT_THROW(running_cost(CostModel{}, Field(Grid(16), 0.0), Field(g, 1.0)), std::invalid_argument);
}

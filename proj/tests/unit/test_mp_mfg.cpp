#include <gtest/gtest.h>

#include <cmath>

#include "mfgcov/mp_mfg.hpp"
#include "oracles/spectral.hpp"

using namespace mfgcov;

namespace {

Field gaussian(Grid g) { return normalize_density(Field(g, oracle::reference_gaussian(g.size()))); }

MpMfgConfig short_run(double prediction_time, double total_time) {
    MpMfgConfig c;
    c.prediction_time = prediction_time;
    c.total_time = total_time;
    return c;
}

double spread(std::span<const double> row) {
    double d = 0.0;
    for (double v : row) d = std::max(d, std::abs(v - 1.0));
    return d;
}

}  // namespace

TEST(MpMfg, UniformIsAnEquilibrium) {
    const Grid g(64);
    const auto traj = run_mp_mfg(short_run(0.5, 0.1), Field(g, 1.0));
    for (double v : traj.rho.values()) EXPECT_NEAR(v, 1.0, 1e-9);
    for (double v : traj.applied_u.values()) EXPECT_LE(std::abs(v), 1e-9);
}

TEST(MpMfg, MirrorSymmetryOfTrajectory) {
    const Grid g(64);
    const auto traj = run_mp_mfg(short_run(0.1, 0.05), gaussian(g));
    const std::size_t m = g.size();
    for (std::size_t k = 0; k < traj.rho.num_rows(); ++k) {
        for (std::size_t i = 0; i < m; ++i) {
            EXPECT_NEAR(traj.rho.row(k)[i], traj.rho.row(k)[m - 1 - i], 1e-10);
            EXPECT_NEAR(traj.applied_u.row(k)[i], -traj.applied_u.row(k)[m - 1 - i], 1e-8);
        }
    }
}

TEST(MpMfg, FirstRowIsTheOpenLoopWindowInput) {
    const Grid g(64);
    MpMfgConfig c = short_run(0.1, 0.1);
    c.outer_dt = 0.1;
    c.control_dt = 0.1;
    const Field rho0 = gaussian(g);
    const auto traj = run_mp_mfg(c, rho0);
    ASSERT_EQ(traj.rho.num_rows(), 2u);
    // the run may have refined the window for CFL; solve the open-loop game at that resolution
    const auto open = solve_mfg(make_window_problem(c, rho0, traj.per_step_diagnostics.front().window_steps), c.inner);
    const auto a = traj.applied_u.row(0);
    const auto b = open.u.row(0);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(a[i], b[i]);
    EXPECT_EQ(traj.per_step_diagnostics.front().iters, open.iters);
}

TEST(MpMfg, WarmStartDoesNotChangeTheAnswer) {
    const Grid g(64);
    MpMfgConfig warm = short_run(0.1, 0.05);
    MpMfgConfig cold = warm;
    cold.warm_start = false;
    const auto a = run_mp_mfg(warm, gaussian(g));
    const auto b = run_mp_mfg(cold, gaussian(g));
    EXPECT_LE(ops::max_abs_diff(a.rho.values(), b.rho.values()), 1e-5);
    EXPECT_LE(ops::max_abs_diff(a.applied_u.values(), b.applied_u.values()), 1e-4);
    std::size_t ia = 0;
    std::size_t ib = 0;
    for (const auto& d : a.per_step_diagnostics) ia += d.iters;
    for (const auto& d : b.per_step_diagnostics) ib += d.iters;
    EXPECT_LT(ia, ib);
}

TEST(MpMfg, ShortHorizonDispersesFaster) {
    const Grid g(64);
    const auto fast = run_mp_mfg(short_run(0.01, 0.2), gaussian(g));
    const auto slow = run_mp_mfg(short_run(1.0, 0.2), gaussian(g));
    EXPECT_LT(spread(fast.rho.row(20)), spread(slow.rho.row(20)));
    EXPECT_EQ(ops::max_abs(fast.applied_u.values()), 1.0);
}

TEST(MpMfg, DiagnosticsStayPhysical) {
    const Grid g(64);
    const auto traj = run_mp_mfg(short_run(0.1, 0.05), gaussian(g));
    const MpMfgConfig c = short_run(0.1, 0.05);
    EXPECT_EQ(traj.per_step_diagnostics.size(), c.outer_steps() * c.controls_per_record() + 1);
    for (const auto& d : traj.per_step_diagnostics) {
        EXPECT_LE(d.residual, c.inner.tol);
        EXPECT_LE(d.max_mass_error, 1e-8);
        EXPECT_GE(d.min_density, 0.0);
        EXPECT_EQ(d.terminal_max_abs, 0.0);
    }
    for (std::size_t k = 0; k < traj.rho.num_rows(); ++k) EXPECT_NEAR(ops::integrate(traj.rho.row(k), g.dx()), 1.0, 1e-8);
    ASSERT_TRUE(traj.control_u.has_value());
    EXPECT_EQ(traj.control_u->num_rows(), traj.per_step_diagnostics.size());
}

TEST(MpMfg, ControlStepDefaults) {
    MpMfgConfig c;
    c.prediction_time = 0.01;
    EXPECT_EQ(c.controls_per_record(), 50u);
    EXPECT_NEAR(c.effective_control_dt(), 2e-4, 1e-18);
    EXPECT_EQ(c.window_granule(), 50u);
    EXPECT_EQ(c.window_num_steps(), 50u);
    c.prediction_time = 1.0;
    EXPECT_EQ(c.controls_per_record(), 1u);
    EXPECT_EQ(c.window_granule(), 100u);
    EXPECT_EQ(c.window_num_steps(), 1000u);
}

TEST(MpMfg, CflViolationRefinesTheWindow) {
    const Grid g(64);
    MpMfgConfig c = short_run(1.0, 0.02);
    c.min_window_steps = 10;
    c.max_inner_dt = 0.1;
    const auto traj = run_mp_mfg(c, gaussian(g));
    EXPECT_GT(traj.per_step_diagnostics.front().window_steps, c.window_num_steps());
    c.max_refinements = 0;
    EXPECT_THROW((void)run_mp_mfg(c, gaussian(g)), CflViolation);
}

TEST(MpMfg, ValidateRejectsBadTiming) {
    const Grid g(32);
    MpMfgConfig c = short_run(0.005, 1.0);
    EXPECT_THROW((void)run_mp_mfg(c, Field(g, 1.0)), std::invalid_argument);
    c = short_run(0.1, 1.0);
    c.control_dt = 0.003;
    EXPECT_THROW((void)run_mp_mfg(c, Field(g, 1.0)), std::invalid_argument);
    c = short_run(0.1, 0.015);
    EXPECT_THROW((void)run_mp_mfg(c, Field(g, 1.0)), std::invalid_argument);
}

TEST(MpMfg, ParticleReplayTracksThePde) {
    const Grid g(64);
    const Field rho0 = gaussian(g);
    const auto traj = run_mp_mfg(short_run(0.1, 0.1), rho0);
    ParticleLoopConfig p;
    p.count = 50000;
    p.substeps = 2;
    const auto est = replay_particles(traj, rho0, 0.05, std::nullopt, p, {0, 10});
    ASSERT_EQ(est.size(), 2u);
    double l1 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) l1 += std::abs(est[1].field[i] - traj.rho.row(10)[i]) * g.dx();
    EXPECT_LT(l1, 0.05);
    EXPECT_THROW((void)replay_particles(traj, rho0, 0.05, std::nullopt, p, {10, 0}), std::invalid_argument);
    EXPECT_THROW((void)replay_particles(traj, rho0, 0.05, std::nullopt, p, {11}), std::invalid_argument);
}

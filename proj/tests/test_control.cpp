#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fwnav/control.hpp"
#include "fwnav/error.hpp"
#include "fwnav/platform.hpp"
#include "loop_support.hpp"

using namespace fwnav;
using fwnav::testing::LoopOptions;
using fwnav::testing::run_hover_loop;

namespace {

VehicleState hover_state(double z) {
    VehicleState s;
    s.position = Vec3(0.0, 0.0, z);
    return s;
}

}  // namespace

TEST(SlidingSurface, Examples) {
    ControllerGains g;
    g.k_sz = 5.0;
    References r;
    r.z = 0.07;
    EXPECT_EQ(sliding_surfaces(hover_state(0.07), r, g).s_z, 0.0);
    EXPECT_NEAR(sliding_surfaces(hover_state(0.08), r, g).s_z, 0.05, 1e-12);
    VehicleState s = hover_state(0.07);
    s.rotation = rotation_from_euler(0.05, -0.02, 0.0);
    const SlidingSurfaces a = sliding_surfaces(s, r, g);
    s.omega_body = a.omega_eq;
    EXPECT_LT(sliding_surfaces(s, r, g).s_w.norm(), 1e-15);
}

TEST(SlidingSurface, LateralErrorTiltsTowardReference) {
    ControllerGains g;
    References r;
    r.xy = Vec2(0.1, 0.0);
    const SlidingSurfaces s = sliding_surfaces(hover_state(0.1), r, g);
    // Nose-down pitch accelerates forward.
    const VehicleState d{Vec3::Zero(), Vec3::Zero(), s.R_desired, Vec3::Zero()};
    EXPECT_GT(d.pitch(), 0.0);
    EXPECT_GT((s.R_desired * Vec3::UnitZ()).x(), 0.0);
}

TEST(Regressors, HoverValues) {
    const Platform pl = default_platform();
    ControllerGains g;
    const VehicleState s = hover_state(0.07);
    const SlidingSurfaces surf = sliding_surfaces(s, References{0.07}, g);
    const Regressors r = regressors(s, surf, Vec3::Zero(), 12.0, pl.vehicle, g, pl.wrench);
    EXPECT_DOUBLE_EQ(r.K_z, pl.wrench.K_V);
    EXPECT_DOUBLE_EQ(r.phi_z(0), -9.8);
    EXPECT_DOUBLE_EQ(r.phi_z(1), pl.wrench.K_V * 12.0);
    EXPECT_DOUBLE_EQ(r.phi_z(2), 1.0);
    EXPECT_EQ((r.phi_w_T.block<3, 3>(0, 3).norm()), 0.0);
}

TEST(Regressors, ExactParametersReproduceModel) {
    const Platform pl = default_platform();
    ControllerGains g;
    VehicleState s = hover_state(0.07);
    s.velocity.z() = 0.03;
    s.omega_body = Vec3(0.5, -0.3, 0.2);
    References refs{0.06};
    const SlidingSurfaces surf = sliding_surfaces(s, refs, g);
    const double u0 = 11.7, d_z = 0.004, m = pl.vehicle.mass;
    const Regressors r = regressors(s, surf, Vec3(1.0, 2.0, -1.0), u0, pl.vehicle, g, pl.wrench);
    const Eigen::Vector3d theta(m, 1.0, d_z);
    EXPECT_NEAR(r.phi_z.dot(theta), -m * (9.8 + surf.z_eq_ddot) + r.K_z * u0 + d_z, 1e-15);
}

TEST(Regressors, SingularAttitudeFaults) {
    const Platform pl = default_platform();
    ControllerGains g;
    VehicleState s = hover_state(0.07);
    s.rotation = rotation_from_euler(1.5, 0.0, 0.0);
    const SlidingSurfaces surf = sliding_surfaces(s, References{0.07}, g);
    EXPECT_THROW(regressors(s, surf, Vec3::Zero(), 12.0, pl.vehicle, g, pl.wrench), Fault);
}

TEST(ControlLaw, EquilibriumHold) {
    const Platform pl = default_platform();
    ControllerGains g;
    const VehicleState s = hover_state(0.07);
    const SlidingSurfaces surf = sliding_surfaces(s, References{0.07}, g);
    const double u0 = 11.0;
    const Regressors r = regressors(s, surf, Vec3::Zero(), u0, pl.vehicle, g, pl.wrench);
    const ControlCommand c =
        control_law(surf, r, ParamEstimates::nominal(pl.vehicle.mass, pl.wrench), u0, g, pl.wrench);
    EXPECT_NEAR(pl.wrench.K_V * c.input.V_s, pl.vehicle.weight(), 1e-12);
    EXPECT_FALSE(c.clamped);
}

TEST(ControlLaw, RobustTermFormula) {
    const Platform pl = default_platform();
    ControllerGains g;
    SlidingSurfaces surf;
    surf.s_z = 1.0;
    surf.s_w = Vec3(1.0, -2.0, 0.5);
    Regressors r;
    r.K_z = pl.wrench.K_V;
    const ParamEstimates est = ParamEstimates::nominal(pl.vehicle.mass, pl.wrench);
    const ControlCommand a = control_law(surf, r, est, 12.0, g, pl.wrench);
    EXPECT_DOUBLE_EQ(std::abs(a.u_zr), g.h_z * g.h_z / (4.0 * g.eps_z));
    for (int i = 0; i < 3; ++i)
        EXPECT_DOUBLE_EQ(a.u_wr(i), -g.h_w(i) * g.h_w(i) * surf.s_w(i) / (4.0 * g.eps_w(i)));
    g.eps_z *= 0.5;
    const ControlCommand b = control_law(surf, r, est, 12.0, g, pl.wrench);
    EXPECT_DOUBLE_EQ(b.u_zr, 2.0 * a.u_zr);
}

TEST(ControlLaw, ClampsToEnvelope) {
    const Platform pl = default_platform();
    ControllerGains g;
    SlidingSurfaces surf;
    surf.s_z = -50.0;
    surf.s_w = Vec3(500.0, 0.0, 0.0);
    Regressors r;
    r.K_z = pl.wrench.K_V;
    const ControlCommand c =
        control_law(surf, r, ParamEstimates::nominal(pl.vehicle.mass, pl.wrench), 12.0, g, pl.wrench);
    EXPECT_TRUE(c.clamped);
    EXPECT_EQ(c.input.V_s, g.V_max);
    EXPECT_EQ(std::abs(c.input.dV), g.dV_max);
}

TEST(Estimates, PinnedEntriesStayOne) {
    const Platform pl = default_platform();
    ControllerGains g;
    g.adapt = true;
    Controller ctrl(g, pl.vehicle, pl.wrench, ParamEstimates::nominal(pl.vehicle.mass, pl.wrench));
    VehicleState s = hover_state(0.1);
    s.omega_body = Vec3(0.3, -0.2, 0.1);
    for (int k = 0; k < 100; ++k) ctrl.update(k * 0.002, s, References{0.07}, 0.002);
    const ParamEstimates& e = ctrl.estimates();
    EXPECT_EQ(e.theta_z(1), 1.0);
    for (int i = 3; i < 6; ++i) EXPECT_EQ(e.theta_w(i), 1.0);
    EXPECT_NE(e.d_z(), 0.0);
}

TEST(ClosedLoop, SettlesWithBoundedDisturbance) {
    const Platform pl = default_platform();
    for (double d : {-1.0, 0.0, 1.0}) {
        LoopOptions o;
        o.d_z = d * o.gains.h_z;
        o.duration = 3.0;
        const auto log = run_hover_loop(pl, o);
        double settle = -1.0;
        for (const auto& s : log)
            if (std::abs(s.e_z) > 0.005) settle = -1.0;
            else if (settle < 0.0) settle = s.t;
        ASSERT_GE(settle, 0.0) << d;
        EXPECT_LE(settle, 2.0) << d;
    }
}

TEST(ClosedLoop, LyapunovDecreasesWithoutDisturbance) {
    const Platform pl = default_platform();
    for (const Vec3& att : {Vec3(0.0, 0.0, 0.0), Vec3(0.08, -0.05, 0.3), Vec3(-0.1, 0.1, -1.0)}) {
        LoopOptions o;
        o.euler0 = att;
        o.omega0 = Vec3(0.2, -0.1, 0.05);
        o.duration = 1.5;
        const auto log = run_hover_loop(pl, o);
        for (std::size_t k = 1; k < log.size(); ++k)
            ASSERT_LE(log[k].lyapunov, log[k - 1].lyapunov + 1e-6) << "t=" << log[k].t;
    }
}

TEST(ClosedLoop, StartingOnSurfaceStaysThere) {
    const Platform pl = default_platform();
    LoopOptions o;
    o.z0 = o.z_ref;
    o.duration = 1.0;
    for (const auto& s : run_hover_loop(pl, o)) {
        EXPECT_LT(std::abs(s.surfaces.s_z), 1e-9);
        EXPECT_LT(s.surfaces.s_w.norm(), 1e-9);
    }
}

TEST(ClosedLoop, RobustContributionNeverExceedsBound) {
    const Platform pl = default_platform();
    LoopOptions o;
    o.d_z = 0.5 * o.gains.h_z;
    o.euler0 = Vec3(0.05, 0.05, 0.0);
    const auto log = run_hover_loop(pl, o);
    const auto& g = o.gains;
    for (const auto& s : log)
        EXPECT_LE(std::abs(s.command.u_zr), g.h_z * g.h_z * std::abs(s.surfaces.s_z) / (4.0 * g.eps_z));
}

TEST(ClosedLoop, YawShiftLeavesBodyResponseUnchanged) {
    const Platform pl = default_platform();
    LoopOptions a;
    a.euler0 = Vec3(0.05, -0.03, 0.0);
    LoopOptions b = a;
    b.euler0.z() = 1.1;
    a.duration = b.duration = 1.0;
    const auto la = run_hover_loop(pl, a);
    const auto lb = run_hover_loop(pl, b);
    ASSERT_EQ(la.size(), lb.size());
    for (std::size_t k = 0; k < la.size(); ++k) {
        EXPECT_NEAR(la[k].e_z, lb[k].e_z, 1e-6);
        EXPECT_LT((la[k].omega - lb[k].omega).norm(), 1e-6);
    }
}

TEST(WingbeatAverager, RemovesStrokeRipple) {
    WingbeatAverager avg(100);
    VehicleState out;
    for (int k = 0; k < 1000; ++k) {
        VehicleState s;
        s.position.z() = 0.07 + 0.001 * std::sin(2.0 * std::numbers::pi * k / 100.0);
        out = avg.push(s);
    }
    EXPECT_NEAR(out.position.z(), 0.07, 1e-12);
    EXPECT_LE(orthonormality_error(out.rotation), 1e-12);
}

namespace {

std::vector<TrimLogEntry> hover_log(Platform pl) {
    LoopOptions o;
    o.stroke_resolved = true;
    o.z0 = o.z_ref;
    o.duration = 2.0;
    std::vector<TrimLogEntry> log;
    for (const auto& s : run_hover_loop(pl, o))
        if (s.t >= 0.5) log.push_back({s.t, s.omega, s.input});
    return log;
}

}  // namespace

TEST(TrimCalibration, SymmetricVehicleNeedsNoTrim) {
    const Platform pl = default_platform();
    const TrimResult r = trim_calibration(hover_log(pl), pl.wrench, pl.vehicle.inertia);
    ASSERT_TRUE(r.updated);
    EXPECT_LT(std::abs(r.gains.tau_x0), 0.02 * std::abs(pl.wrench.K_phi));
    EXPECT_LT(std::abs(r.gains.tau_y0), 0.02 * std::abs(pl.wrench.K_theta));
}

TEST(TrimCalibration, WeakLeftWingIdentified) {
    Platform pl = default_platform();
    pl.aero.lift_scale = {0.95, 1.0};
    const TrimResult r = trim_calibration(hover_log(pl), pl.wrench, pl.vehicle.inertia);
    ASSERT_TRUE(r.updated);
    // The weak left wing rolls the vehicle left-side down (negative roll
    // torque); the identified trim carries that bias.
    const AeroResult avg = cycle_average_aero({12, 0, 0, 0}, pl.vehicle, pl.aero);
    EXPECT_LT(r.gains.tau_x0, 0.0);
    EXPECT_NEAR(r.gains.tau_x0, avg.wrench.torque.x(), 0.1 * std::abs(avg.wrench.torque.x()));

    // With the trim installed the second identification only finds residue.
    Platform trimmed = pl;
    trimmed.wrench = r.gains;
    const TrimResult again = trim_calibration(hover_log(trimmed), trimmed.wrench, pl.vehicle.inertia);
    EXPECT_NEAR(again.gains.tau_x0, r.gains.tau_x0, 0.05 * std::abs(r.gains.tau_x0));
}

TEST(TrimCalibration, ShortLogLeavesTrimsUnchanged) {
    const Platform pl = default_platform();
    std::vector<TrimLogEntry> log{{0.0, Vec3::Zero(), {}}, {0.5, Vec3::Zero(), {}}};
    const TrimResult r = trim_calibration(log, pl.wrench, pl.vehicle.inertia);
    EXPECT_FALSE(r.updated);
    EXPECT_FALSE(r.warning.empty());
    EXPECT_EQ(r.gains.tau_x0, pl.wrench.tau_x0);
}

#pragma once

// Closed-loop hover harness shared by the controller tests and the
// acceptance binary.

#include <vector>

#include "fwnav/control.hpp"
#include "fwnav/platform.hpp"

namespace fwnav::testing {

struct LoopOptions {
    bool stroke_resolved = false;
    double z_ref = 0.5;
    double z0 = 0.55;
    Vec3 euler0 = Vec3::Zero();   // roll, pitch, yaw
    Vec3 omega0 = Vec3::Zero();
    double d_z = 0.0;             // constant vertical force, N
    Vec3 d_torque = Vec3::Zero(); // constant body torque, N m
    double duration = 2.0;
    ControllerGains gains;
};

struct LoopSample {
    double t = 0.0;
    double e_z = 0.0;
    double lyapunov = 0.0;
    SlidingSurfaces surfaces;
    ControlCommand command;
    Vec3 omega = Vec3::Zero();
    ControlInput input;
};

inline std::vector<LoopSample> run_hover_loop(const Platform& pl, const LoopOptions& o) {
    constexpr double dt = 1e-4;
    constexpr int control_every = 20;
    const VehicleParams& vp = pl.vehicle;
    Controller ctrl(o.gains, vp, pl.wrench, ParamEstimates::nominal(vp.mass, pl.wrench));
    FlightPhysics phys(pl);
    World world;
    world.arena = {-10, 10, -10, 10};
    WingbeatAverager avg(static_cast<int>(1.0 / (vp.wingbeat_hz * dt) + 0.5));

    VehicleState s;
    s.position = Vec3(0.0, 0.0, o.z0);
    s.rotation = rotation_from_euler(o.euler0.x(), o.euler0.y(), o.euler0.z());
    s.omega_body = o.omega0;
    VehicleState est = s;
    References refs;
    refs.z = o.z_ref;
    refs.psi = o.euler0.z();

    std::vector<LoopSample> out;
    ControlInput in;
    const long steps = static_cast<long>(o.duration / dt + 0.5);
    for (long k = 0; k < steps; ++k) {
        const double t = k * dt;
        if (k % control_every == 0) {
            VehicleState meas = o.stroke_resolved ? est : s;
            meas.position.z() = s.position.z();
            in = ctrl.update(t, meas, refs, dt * control_every);
            LoopSample ls;
            ls.t = t;
            ls.surfaces = ctrl.last().surfaces;
            ls.command = ctrl.last().command;
            ls.e_z = ls.surfaces.e_z;
            ls.lyapunov = 0.5 * vp.mass * ls.surfaces.s_z * ls.surfaces.s_z +
                          0.5 * ls.surfaces.s_w.dot(vp.inertia * ls.surfaces.s_w);
            ls.omega = s.omega_body;
            ls.input = in;
            out.push_back(ls);
        }
        Wrench w = o.stroke_resolved ? phys.evaluate(t, s, in, world, dt).total
                                     : control_wrench(in, pl.wrench);
        w.force += s.rotation.transpose() * Vec3(0.0, 0.0, o.d_z);
        w.torque += o.d_torque;
        s = step_rigid_body(s, w, vp, dt);
        est = avg.push(s);
    }
    return out;
}

}  // namespace fwnav::testing

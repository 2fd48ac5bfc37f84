#include "fwnav/platform.hpp"

#include <cmath>
#include <numbers>

#include "fwnav/sensing.hpp"

namespace fwnav {

namespace {

constexpr double kDragShare = 0.8;
constexpr double kEmfShare = 0.1;
// Gear products K_a N_g of the two drives; the right drive is stiffer.
constexpr std::array<double, 2> kGear{0.010, 0.0115};
constexpr double kDefaultStiffness = 13.89;  // N/m, 10% mean-current rise at 12 V, 5 mm

}  // namespace

Platform default_platform() {
    Platform p;
    const VehicleParams& v = p.vehicle;
    const double omega = 2.0 * std::numbers::pi * v.wingbeat_hz;
    const double amp = p.aero.amplitude_per_volt * p.hover_voltage;
    const double mean_sq_rate = 0.5 * amp * amp * omega * omega;
    const double mean_abs_rate = 2.0 / std::numbers::pi * amp * omega;

    p.aero.lift_coeff = v.weight() / (2.0 * mean_sq_rate);

    const GroundEffectFactors ge = p.ground.at(p.reference_clearance);
    const ThresholdEval target = threshold_at(p.hover_voltage, reference_thresholds());
    const std::array<double, 2> i_ref{target.i_L, target.i_R};

    // The left wing fixes the drag coefficient; the right wing reaches its
    // own target through the gear product and friction.
    p.aero.drag_coeff = kDragShare * i_ref[0] * kGear[0] / (ge.drag * mean_sq_rate);
    const double drag_torque = ge.drag * p.aero.drag_coeff * mean_sq_rate;

    // Back-EMF current is eps * phi_dot / (k_A omega R_a) with
    // K_a / N_g = (1 - eps) / (k_A omega).
    const double R_a = 3.0;
    const double emf_per_eps = mean_abs_rate / (p.aero.amplitude_per_volt * omega * R_a);
    const double eps = kEmfShare * i_ref[0] / emf_per_eps;
    const double ratio = (1.0 - eps) / (p.aero.amplitude_per_volt * omega);
    for (int w = 0; w < 2; ++w) {
        MotorParams& m = p.motors[w];
        m.R_a = R_a;
        m.K_a = std::sqrt(kGear[w] * ratio);
        m.N_g = kGear[w] / m.K_a;
        const double rest = i_ref[w] - drag_torque / kGear[w] - eps * emf_per_eps;
        m.tau_friction = rest * kGear[w];
    }

    p.contact.stiffness = kDefaultStiffness;
    p.contact.damping = 0.0;
    p.wrench = calibrate_wrench_gains(p.vehicle, p.aero, p.hover_voltage);
    return p;
}

double drive_voltage(const WingState& w, const Platform& p) {
    const double omega = 2.0 * std::numbers::pi * p.vehicle.wingbeat_hz;
    return w.phi_dot / (p.aero.amplitude_per_volt * omega);
}

PhysicsStep FlightPhysics::evaluate(double t, const VehicleState& state, const ControlInput& input,
                                    const World& world, double dt) {
    PhysicsStep out;
    out.wings = wing_kinematics(t, input, p_.vehicle, p_.aero);
    out.clearance = ground_clearance(state.position, world);
    const GroundEffectFactors ge = ground_effect(out.clearance / p_.vehicle.mean_chord, p_.ground);
    const Mat3& R = state.rotation;
    const Vec3 air_body = R.transpose() * (wind_at(t, state.position, world) - state.velocity);
    out.aero = aero_wrench(out.wings, air_body, ge, p_.aero);
    out.total = out.aero.wrench;

    const double length = p_.vehicle.wing_length();
    for (int i = 0; i < 2; ++i) {
        const WingState& w = out.wings[i];
        const Vec3 tip = state.position + R * (length * spar_direction(w.side, w.phi));
        if (!world.walls.empty()) {
            WingSweep sweep;
            sweep.side = w.side;
            sweep.phi_dot = w.phi_dot;
            sweep.length = length;
            sweep.root = state.position;
            sweep.tip_prev = have_prev_ ? tip_prev_[i] : tip;
            sweep.tip = tip;
            sweep.tangent = R * stroke_tangent(w.side, w.phi);
            sweep.t = t;
            sweep.dt = dt;
            out.contact[i] = wing_contact(sweep, world.walls, p_.contact);
        }
        tip_prev_[i] = tip;

        const double load = out.aero.load_torque[i] + out.contact[i].load_torque;
        const MotorOutput m =
            motor_step(drive_voltage(w, p_), w.phi_dot, load, p_.motors[i], dt, DriveMode::kinematic);
        out.armature[i] = m.i_a;
        out.current[i] = sensed_current(m.i_a);
    }
    have_prev_ = true;
    return out;
}

}  // namespace fwnav

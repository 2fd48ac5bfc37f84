#include "fwnav/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fwnav/error.hpp"

namespace fwnav {

namespace {

constexpr double kPi = std::numbers::pi;

struct Derivative {
    Vec3 dp;
    Vec3 dv;
    Mat3 dR;
    Vec3 dw;
};

Derivative rates(const VehicleState& s, const Wrench& w, const VehicleParams& p,
                 const Mat3& inertia_inv) {
    Derivative d;
    d.dp = s.velocity;
    d.dv = s.rotation * w.force / p.mass + p.gravity;
    d.dR = s.rotation * skew(s.omega_body);
    d.dw = inertia_inv * (w.torque - s.omega_body.cross(p.inertia * s.omega_body));
    return d;
}

VehicleState advance(const VehicleState& s, const Derivative& d, double h) {
    VehicleState out;
    out.position = s.position + h * d.dp;
    out.velocity = s.velocity + h * d.dv;
    out.rotation = s.rotation + h * d.dR;
    out.omega_body = s.omega_body + h * d.dw;
    return out;
}

Mat3 gram_schmidt_impl(const Mat3& R) {
    Vec3 c0 = R.col(0).normalized();
    Vec3 c1 = R.col(1) - c0.dot(R.col(1)) * c0;
    c1.normalize();
    Vec3 c2 = c0.cross(c1);
    Mat3 out;
    out.col(0) = c0;
    out.col(1) = c1;
    out.col(2) = c2;
    return out;
}

void require_finite(const Vec3& v, const char* field) {
    if (!v.allFinite()) throw Fault(field, "non-finite value");
}

struct HalfCycle {
    double phi;
    double phi_dot;
    HalfStroke half;
};

// One wingbeat starting at the forward stroke reversal: downstroke first,
// then upstroke occupying `up_fraction` of the period.
HalfCycle split_cycle_stroke(double tau, double up_fraction, double amplitude, double offset,
                             double freq) {
    const double down_fraction = 1.0 - up_fraction;
    if (tau < down_fraction) {
        const double a = kPi * tau / down_fraction;
        return {offset + amplitude * std::cos(a),
                -amplitude * kPi * freq / down_fraction * std::sin(a), HalfStroke::downstroke};
    }
    const double a = kPi * (tau - down_fraction) / up_fraction;
    return {offset - amplitude * std::cos(a), amplitude * kPi * freq / up_fraction * std::sin(a),
            HalfStroke::upstroke};
}

}  // namespace

Mat3 orthonormalize(const Mat3& R) { return gram_schmidt_impl(R); }

Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
    return m;
}

Mat3 rotation_from_euler(double roll, double pitch, double yaw) {
    return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
            Eigen::AngleAxisd(roll, Vec3::UnitX()))
        .toRotationMatrix();
}

double VehicleState::roll() const { return std::atan2(rotation(2, 1), rotation(2, 2)); }

double VehicleState::pitch() const {
    return std::asin(std::clamp(-rotation(2, 0), -1.0, 1.0));
}

double VehicleState::yaw() const { return std::atan2(rotation(1, 0), rotation(0, 0)); }

double orthonormality_error(const Mat3& R) {
    return (R.transpose() * R - Mat3::Identity()).norm();
}

VehicleState step_rigid_body(const VehicleState& state, const Wrench& wrench,
                             const VehicleParams& params, double dt) {
    if (!(dt > 0.0) || dt > 1e-4 + 1e-15) throw Fault("dt", "physics step must be in (0, 1e-4] s");
    require_finite(wrench.force, "wrench.force");
    require_finite(wrench.torque, "wrench.torque");
    require_finite(state.position, "state.position");
    require_finite(state.velocity, "state.velocity");
    require_finite(state.omega_body, "state.omega_body");
    if (!state.rotation.allFinite()) throw Fault("state.rotation", "non-finite value");

    const Mat3 inertia_inv = params.inertia.inverse();
    const Derivative k1 = rates(state, wrench, params, inertia_inv);
    const Derivative k2 = rates(advance(state, k1, 0.5 * dt), wrench, params, inertia_inv);
    const Derivative k3 = rates(advance(state, k2, 0.5 * dt), wrench, params, inertia_inv);
    const Derivative k4 = rates(advance(state, k3, dt), wrench, params, inertia_inv);

    VehicleState out;
    const double w = dt / 6.0;
    out.position = state.position + w * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
    out.velocity = state.velocity + w * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
    out.rotation = orthonormalize(state.rotation + w * (k1.dR + 2.0 * k2.dR + 2.0 * k3.dR + k4.dR));
    out.omega_body = state.omega_body + w * (k1.dw + 2.0 * k2.dw + 2.0 * k3.dw + k4.dw);
    return out;
}

std::array<double, 2> wing_voltages(const ControlInput& input) {
    return {input.V_s + 0.5 * input.dV, input.V_s - 0.5 * input.dV};
}

WingPair wing_kinematics(double t, const ControlInput& input, const VehicleParams& params,
                         const AeroParams& aero) {
    const double f = params.wingbeat_hz;
    const double beats = t * f;
    const double cycle = std::floor(beats);
    const double tau = beats - cycle;
    const double sigma = std::clamp(input.sigma, -aero.max_split, aero.max_split);
    const auto volts = wing_voltages(input);
    const double offset = aero.amplitude_per_volt * input.V_b;

    WingPair out;
    for (int i = 0; i < 2; ++i) {
        const double up_fraction = (i == 0) ? 0.5 - sigma : 0.5 + sigma;
        const double amplitude = aero.amplitude_per_volt * std::max(volts[i], 0.0);
        const HalfCycle hc = split_cycle_stroke(tau, up_fraction, amplitude, offset, f);
        out[i].side = static_cast<WingSide>(i);
        out[i].phi = hc.phi;
        out[i].phi_dot = hc.phi_dot;
        out[i].half_stroke = hc.half;
        out[i].cycle = static_cast<long>(cycle);
    }
    return out;
}

Vec3 spar_direction(WingSide side, double phi) {
    const double y = side == WingSide::left ? std::cos(phi) : -std::cos(phi);
    return {std::sin(phi), y, 0.0};
}

Vec3 stroke_tangent(WingSide side, double phi) {
    const double y = side == WingSide::left ? -std::sin(phi) : std::sin(phi);
    return {std::cos(phi), y, 0.0};
}

AeroResult aero_wrench(const WingPair& wings, const Vec3& air_velocity_body,
                       const GroundEffectFactors& ge, const AeroParams& aero) {
    AeroResult out;
    for (int i = 0; i < 2; ++i) {
        const WingState& w = wings[i];
        const Vec3 tangent = stroke_tangent(w.side, w.phi);
        const Vec3 cp = aero.r_cp * spar_direction(w.side, w.phi);
        // Blade speed relative to the air at the centre of pressure.
        const double rate = w.phi_dot - air_velocity_body.dot(tangent) / aero.r_cp;
        const double lift = ge.lift * aero.lift_scale[i] * aero.lift_coeff * rate * rate;
        const double drag_torque = ge.drag * aero.drag_coeff * rate * std::abs(rate);
        const Vec3 force = Vec3(0.0, 0.0, lift) - (drag_torque / aero.r_cp) * tangent;
        out.wrench.force += force;
        out.wrench.torque += cp.cross(force);
        out.lift[i] = lift;
        out.load_torque[i] = drag_torque;
    }
    return out;
}

Wrench control_wrench(const ControlInput& input, const WrenchGains& gains) {
    Wrench w;
    w.force = Vec3(0.0, 0.0, gains.K_V * input.V_s);
    w.torque = Vec3(gains.K_phi * input.dV + gains.tau_x0, gains.K_theta * input.V_b + gains.tau_y0,
                    gains.K_psi * input.sigma + gains.tau_z0);
    return w;
}

AeroResult cycle_average_aero(const ControlInput& input, const VehicleParams& params,
                              const AeroParams& aero, const GroundEffectFactors& ge,
                              const Vec3& air_velocity_body, int samples) {
    AeroResult acc;
    const double period = 1.0 / params.wingbeat_hz;
    for (int k = 0; k < samples; ++k) {
        const double t = (k + 0.5) * period / samples;
        const AeroResult r =
            aero_wrench(wing_kinematics(t, input, params, aero), air_velocity_body, ge, aero);
        acc.wrench.force += r.wrench.force;
        acc.wrench.torque += r.wrench.torque;
        for (int i = 0; i < 2; ++i) {
            acc.lift[i] += r.lift[i];
            acc.load_torque[i] += std::abs(r.load_torque[i]);
        }
    }
    const double inv = 1.0 / samples;
    acc.wrench.force *= inv;
    acc.wrench.torque *= inv;
    for (int i = 0; i < 2; ++i) {
        acc.lift[i] *= inv;
        acc.load_torque[i] *= inv;
    }
    return acc;
}

WrenchGains calibrate_wrench_gains(const VehicleParams& params, const AeroParams& aero,
                                   double hover_voltage) {
    const auto avg = [&](ControlInput in) {
        return cycle_average_aero(in, params, aero).wrench;
    };
    const ControlInput hover{hover_voltage, 0.0, 0.0, 0.0};
    const Wrench trim = avg(hover);

    constexpr double dv = 0.25;
    constexpr double ds = 0.01;
    WrenchGains g;
    g.K_V = trim.force.z() / hover_voltage;
    g.K_phi = (avg({hover_voltage, dv, 0.0, 0.0}).torque.x() -
               avg({hover_voltage, -dv, 0.0, 0.0}).torque.x()) / (2.0 * dv);
    g.K_theta = (avg({hover_voltage, 0.0, dv, 0.0}).torque.y() -
                 avg({hover_voltage, 0.0, -dv, 0.0}).torque.y()) / (2.0 * dv);
    g.K_psi = (avg({hover_voltage, 0.0, 0.0, ds}).torque.z() -
               avg({hover_voltage, 0.0, 0.0, -ds}).torque.z()) / (2.0 * ds);
    g.tau_x0 = trim.torque.x();
    g.tau_y0 = trim.torque.y();
    g.tau_z0 = trim.torque.z();
    return g;
}

}  // namespace fwnav

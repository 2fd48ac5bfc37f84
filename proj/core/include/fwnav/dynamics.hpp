#pragma once

#include <array>
#include <utility>

#include <Eigen/Dense>

namespace fwnav {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Rigid-body state. Position and velocity are inertial (z up), `rotation`
/// maps body to inertial, `omega_body` is the body-frame angular rate.
struct VehicleState {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    Mat3 rotation = Mat3::Identity();
    Vec3 omega_body = Vec3::Zero();

    // Z-Y-X Euler angles of `rotation`.
    double roll() const;
    double pitch() const;
    double yaw() const;
};

struct VehicleParams {
    double mass = 0.012;
    Mat3 inertia = Vec3(1.6e-5, 1.4e-5, 0.9e-5).asDiagonal();
    Vec3 gravity = Vec3(0.0, 0.0, -9.8);
    double wingspan = 0.17;
    double mean_chord = 0.0212;
    double wingbeat_hz = 34.0;

    double wing_length() const { return 0.5 * wingspan; }
    double weight() const { return mass * -gravity.z(); }
};

/// Motor excitation: drive amplitude, left/right differential, stroke bias,
/// split-cycle parameter.
struct ControlInput {
    double V_s = 0.0;
    double dV = 0.0;
    double V_b = 0.0;
    double sigma = 0.0;
};

enum class WingSide { left = 0, right = 1 };
enum class HalfStroke { upstroke, downstroke };

struct WingState {
    WingSide side = WingSide::left;
    double phi = 0.0;      // stroke angle, rad, positive toward body +x
    double phi_dot = 0.0;  // rad/s
    HalfStroke half_stroke = HalfStroke::downstroke;
    long cycle = 0;        // wingbeat index, floor(t * f)
};

using WingPair = std::array<WingState, 2>;

/// Quasi-steady wing model constants. Lift per wing is
/// G_L * lift_coeff * phi_dot_eff^2; the drag torque about the stroke axis is
/// G_D * drag_coeff * phi_dot_eff * |phi_dot_eff|.
struct AeroParams {
    double amplitude_per_volt = 1.0 / 12.0;  // rad/V
    double r_cp = 0.05;                      // spanwise centre of pressure, m
    double lift_coeff = 0.0;                 // N s^2
    double drag_coeff = 0.0;                 // N m s^2
    double max_split = 0.25;                 // |sigma| limit
    std::array<double, 2> lift_scale{1.0, 1.0};  // per-wing efficiency (left, right)
};

struct Wrench {
    Vec3 force = Vec3::Zero();   // body frame
    Vec3 torque = Vec3::Zero();  // body frame
};

struct GroundEffectFactors {
    double lift = 1.0;  // G_L
    double drag = 1.0;  // G_D
};

struct AeroResult {
    Wrench wrench;
    std::array<double, 2> lift{0.0, 0.0};
    // Aerodynamic torque each wing drive has to supply, signed with the
    // stroke velocity (positive values oppose positive phi_dot).
    std::array<double, 2> load_torque{0.0, 0.0};
};

struct WrenchGains {
    double K_V = 0.0;
    double K_phi = 0.0;
    double K_theta = 0.0;
    double K_psi = 0.0;
    double tau_x0 = 0.0;
    double tau_y0 = 0.0;
    double tau_z0 = 0.0;
};

/// Advance one RK4 step of the rigid-body equations and re-orthonormalise the
/// rotation. Throws Fault on non-finite inputs or dt outside (0, 1e-4].
VehicleState step_rigid_body(const VehicleState& state, const Wrench& wrench,
                             const VehicleParams& params, double dt);

/// Gram-Schmidt on the columns of R.
Mat3 orthonormalize(const Mat3& R);

/// Frobenius norm of R^T R - I.
double orthonormality_error(const Mat3& R);

/// Per-wing excitation voltage, left then right.
std::array<double, 2> wing_voltages(const ControlInput& input);

/// Stroke kinematics at time t. Each half-stroke is a half cosine; the
/// upstroke of the right wing occupies a fraction 0.5 + sigma of the
/// wingbeat and the left wing is mirrored (0.5 - sigma), so sigma produces a
/// yaw moment without a net roll.
WingPair wing_kinematics(double t, const ControlInput& input, const VehicleParams& params,
                         const AeroParams& aero);

/// Unit spar direction and stroke tangent of a wing in the body frame.
Vec3 spar_direction(WingSide side, double phi);
Vec3 stroke_tangent(WingSide side, double phi);

/// Quasi-steady wrench. `air_velocity_body` is the wind relative to the
/// vehicle, expressed in the body frame.
AeroResult aero_wrench(const WingPair& wings, const Vec3& air_velocity_body,
                       const GroundEffectFactors& ge, const AeroParams& aero);

/// Linear excitation-to-wrench map.
Wrench control_wrench(const ControlInput& input, const WrenchGains& gains);

/// Average of aero_wrench over one wingbeat at fixed excitation.
AeroResult cycle_average_aero(const ControlInput& input, const VehicleParams& params,
                              const AeroParams& aero, const GroundEffectFactors& ge = {},
                              const Vec3& air_velocity_body = Vec3::Zero(), int samples = 2000);

/// Fit WrenchGains by central differences of the cycle-averaged model about
/// hover at `hover_voltage`. K_V is the secant F_z(V_hover) / V_hover.
WrenchGains calibrate_wrench_gains(const VehicleParams& params, const AeroParams& aero,
                                   double hover_voltage);

Mat3 skew(const Vec3& v);
Mat3 rotation_from_euler(double roll, double pitch, double yaw);

}  // namespace fwnav

#pragma once

#include <deque>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "fwnav/dynamics.hpp"

namespace fwnav {

struct ControllerGains {
    // Altitude sliding surface and control terms.
    double k_sz = 10.0;      // 1/s
    double k_zl = 0.05;      // N s/m
    double h_z = 0.01;       // N, uncertainty bound
    double eps_z = 1.0e-4;   // robust-term accuracy
    double K_u = 0.0;        // thrust effectiveness; 0 means "use K_V"

    // Angular sliding surface and control terms.
    Vec3 k_wl = Vec3(3.0e-4, 3.0e-4, 2.0e-4);
    Vec3 h_w = Vec3(1.0e-4, 1.0e-4, 1.0e-4);
    Vec3 eps_w = Vec3(5.0e-5, 5.0e-5, 5.0e-5);

    // Cascade producing omega_eq: lateral error -> tilt -> attitude error.
    double k_pos = 3.0;      // 1/s^2
    double k_vel = 3.0;      // 1/s
    Vec3 k_att = Vec3(12.0, 12.0, 6.0);  // 1/s
    double max_tilt = 0.25;  // rad

    // Optional projection-type adaptation of the lumped disturbances.
    bool adapt = false;
    double gamma_z = 0.5;
    Vec3 gamma_w = Vec3(2.0e-4, 2.0e-4, 2.0e-4);
    double d_z_max = 0.03;
    Vec3 d_w_max = Vec3(5e-4, 5e-4, 5e-4);

    // Actuator envelope.
    double V_min = 0.0;
    double V_max = 15.0;
    double dV_max = 3.0;
    double V_b_max = 3.0;
    double sigma_max = 0.2;
};

/// Model parameter vectors. theta_z = [m, 1, d_z];
/// theta_w = [tau_x0, tau_y0, tau_z0, 1, 1, 1, d_phi, d_theta, d_psi].
struct ParamEstimates {
    Eigen::Vector3d theta_z = Eigen::Vector3d(0.0, 1.0, 0.0);
    Eigen::Matrix<double, 9, 1> theta_w = (Eigen::Matrix<double, 9, 1>() << 0, 0, 0, 1, 1, 1, 0, 0, 0).finished();

    static ParamEstimates nominal(double mass, const WrenchGains& gains);
    double mass() const { return theta_z(0); }
    double d_z() const { return theta_z(2); }
    Vec3 trims() const { return theta_w.head<3>(); }
    Vec3 d_w() const { return theta_w.tail<3>(); }
};

struct References {
    double z = 0.0;
    double z_dot = 0.0;
    double z_ddot = 0.0;
    Vec2 xy = Vec2::Zero();
    Vec2 xy_dot = Vec2::Zero();
    Vec2 xy_ddot = Vec2::Zero();
    double psi = 0.0;
};

struct SlidingSurfaces {
    double e_z = 0.0;
    double e_z_dot = 0.0;
    double s_z = 0.0;
    double z_eq_ddot = 0.0;
    Vec3 s_w = Vec3::Zero();
    Vec3 omega_eq = Vec3::Zero();
    Vec3 attitude_error = Vec3::Zero();
    Mat3 R_desired = Mat3::Identity();
};

/// Desired attitude from the lateral cascade and the resulting omega_eq.
SlidingSurfaces sliding_surfaces(const VehicleState& state, const References& refs,
                                 const ControllerGains& gains);

struct Regressors {
    Eigen::Vector3d phi_z = Eigen::Vector3d::Zero();
    Eigen::Matrix<double, 3, 9> phi_w_T = Eigen::Matrix<double, 3, 9>::Zero();
    double K_z = 0.0;
};

/// Thrust-effectiveness guard: |cos(roll) cos(pitch)| must exceed this.
inline constexpr double kSingularityGuard = 0.1;

/// Regressors of the altitude and angular error dynamics. `u_0` is the
/// nominal thrust input of the previous control period. Throws Fault when the
/// attitude is past the singularity guard.
Regressors regressors(const VehicleState& state, const SlidingSurfaces& surfaces,
                      const Vec3& omega_eq_dot, double u_0, const VehicleParams& params,
                      const ControllerGains& gains, const WrenchGains& wrench);

struct ControlCommand {
    ControlInput input;
    double u_zm = 0.0, u_zl = 0.0, u_zr = 0.0;
    Vec3 u_wm = Vec3::Zero(), u_wl = Vec3::Zero(), u_wr = Vec3::Zero();
    bool clamped = false;
};

/// K_z u_z = -Phi_z^T Theta_z - k_zl s_z - h_z^2 s_z / (4 eps_z), and the
/// componentwise angular analogue, mapped back to excitation through the
/// inverse of the linear wrench map. The applied drive is V_s = u_0 + u_z.
ControlCommand control_law(const SlidingSurfaces& surfaces, const Regressors& regs,
                           const ParamEstimates& estimates, double u_0,
                           const ControllerGains& gains, const WrenchGains& wrench);

struct ControlRecord {
    double t = 0.0;
    SlidingSurfaces surfaces;
    ControlCommand command;
    bool singular = false;
};

/// Stateful controller advanced at the control rate.
class Controller {
public:
    Controller(ControllerGains gains, VehicleParams params, WrenchGains wrench,
               ParamEstimates estimates);

    ControlInput update(double t, const VehicleState& state, const References& refs, double dt);

    const ControlRecord& last() const { return last_; }
    int clamp_count() const { return clamp_count_; }
    int singular_count() const { return singular_count_; }
    const ParamEstimates& estimates() const { return estimates_; }
    void set_estimates(const ParamEstimates& e) { estimates_ = e; }
    const WrenchGains& wrench_gains() const { return wrench_; }
    void set_wrench_gains(const WrenchGains& w) { wrench_ = w; }
    const ControllerGains& gains() const { return gains_; }
    void set_nominal_input(double u_0) { u_0_ = u_0; }

private:
    ControllerGains gains_;
    VehicleParams params_;
    WrenchGains wrench_;
    ParamEstimates estimates_;
    double u_0_ = 0.0;
    Vec3 prev_omega_eq_ = Vec3::Zero();
    bool has_prev_ = false;
    ControlRecord last_;
    int clamp_count_ = 0;
    int singular_count_ = 0;
};

/// Moving average of the state over exactly one wingbeat window; removes the
/// stroke-synchronous vibration before it reaches the controller.
class WingbeatAverager {
public:
    explicit WingbeatAverager(int window);
    VehicleState push(const VehicleState& s);
    bool full() const { return static_cast<int>(buf_.size()) == window_; }

private:
    int window_;
    std::deque<VehicleState> buf_;
    Vec3 sum_p_ = Vec3::Zero(), sum_v_ = Vec3::Zero(), sum_w_ = Vec3::Zero();
    Mat3 sum_R_ = Mat3::Zero();
};

struct TrimLogEntry {
    double t = 0.0;
    Vec3 omega = Vec3::Zero();
    ControlInput input;
};

struct TrimResult {
    WrenchGains gains;   // input gains with the identified trims
    bool updated = false;
    std::string warning;
};

/// Identify the trim torques from near-hover logs: the mean of
/// I w_dot + w x I w - K_w u over the log. Needs at least `min_duration`
/// seconds; otherwise the trims are returned unchanged with a warning.
TrimResult trim_calibration(std::span<const TrimLogEntry> log, const WrenchGains& gains,
                            const Mat3& inertia, double min_duration = 1.0);

}  // namespace fwnav

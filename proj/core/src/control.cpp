#include "fwnav/control.hpp"

#include <algorithm>
#include <cmath>

#include "fwnav/error.hpp"

namespace fwnav {

namespace {

Vec3 vee(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

double thrust_tilt(const VehicleState& s) { return std::cos(s.roll()) * std::cos(s.pitch()); }

Regressors regressors_unchecked(const VehicleState& state, const SlidingSurfaces& surf,
                                const Vec3& omega_eq_dot, double u_0, const VehicleParams& params,
                                const ControllerGains& gains, const WrenchGains& wrench) {
    Regressors r;
    const double K_u = gains.K_u > 0.0 ? gains.K_u : wrench.K_V;
    r.K_z = K_u * thrust_tilt(state);
    const double g = -params.gravity.z();
    r.phi_z << -(g + surf.z_eq_ddot), r.K_z * u_0, 1.0;

    const Vec3& w = state.omega_body;
    const Vec3 gyro = w.cross(params.inertia * w) + params.inertia * omega_eq_dot;
    r.phi_w_T.setZero();
    r.phi_w_T.block<3, 3>(0, 0) = Mat3::Identity();
    r.phi_w_T.block<3, 3>(0, 3) = -gyro.asDiagonal().toDenseMatrix();
    r.phi_w_T.block<3, 3>(0, 6) = Mat3::Identity();
    return r;
}

}  // namespace

ParamEstimates ParamEstimates::nominal(double mass, const WrenchGains& gains) {
    ParamEstimates e;
    e.theta_z << mass, 1.0, 0.0;
    e.theta_w << gains.tau_x0, gains.tau_y0, gains.tau_z0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0;
    return e;
}

SlidingSurfaces sliding_surfaces(const VehicleState& state, const References& refs,
                                 const ControllerGains& gains) {
    SlidingSurfaces s;
    s.e_z = state.position.z() - refs.z;
    s.e_z_dot = state.velocity.z() - refs.z_dot;
    s.s_z = s.e_z_dot + gains.k_sz * s.e_z;
    s.z_eq_ddot = refs.z_ddot - gains.k_sz * s.e_z_dot;

    constexpr double g = 9.8;
    const Vec2 e_xy = state.position.head<2>() - refs.xy;
    const Vec2 e_v = state.velocity.head<2>() - refs.xy_dot;
    Vec2 a = refs.xy_ddot - gains.k_pos * e_xy - gains.k_vel * e_v;
    const double a_max = g * std::tan(gains.max_tilt);
    if (a.norm() > a_max) a *= a_max / a.norm();
    const double c = std::cos(refs.psi), sn = std::sin(refs.psi);
    const Vec2 a_h(c * a.x() + sn * a.y(), -sn * a.x() + c * a.y());
    const double pitch_d = std::atan(a_h.x() / g);
    const double roll_d = -std::atan(a_h.y() / g);
    s.R_desired = rotation_from_euler(roll_d, pitch_d, refs.psi);

    const Mat3& R = state.rotation;
    s.attitude_error = 0.5 * vee(s.R_desired.transpose() * R - R.transpose() * s.R_desired);
    s.omega_eq = -gains.k_att.cwiseProduct(s.attitude_error);
    s.s_w = state.omega_body - s.omega_eq;
    return s;
}

Regressors regressors(const VehicleState& state, const SlidingSurfaces& surf,
                      const Vec3& omega_eq_dot, double u_0, const VehicleParams& params,
                      const ControllerGains& gains, const WrenchGains& wrench) {
    if (std::abs(thrust_tilt(state)) <= kSingularityGuard)
        throw Fault("state.rotation", "attitude beyond thrust singularity guard");
    return regressors_unchecked(state, surf, omega_eq_dot, u_0, params, gains, wrench);
}

ControlCommand control_law(const SlidingSurfaces& surf, const Regressors& regs,
                           const ParamEstimates& est, double u_0, const ControllerGains& gains,
                           const WrenchGains& wrench) {
    ControlCommand cmd;
    cmd.u_zm = -regs.phi_z.dot(est.theta_z);
    cmd.u_zl = -gains.k_zl * surf.s_z;
    cmd.u_zr = -gains.h_z * gains.h_z * surf.s_z / (4.0 * gains.eps_z);
    const double u_z = (cmd.u_zm + cmd.u_zl + cmd.u_zr) / regs.K_z;

    cmd.u_wm = -regs.phi_w_T * est.theta_w;
    cmd.u_wl = -gains.k_wl.cwiseProduct(surf.s_w);
    cmd.u_wr = -gains.h_w.cwiseProduct(gains.h_w).cwiseProduct(surf.s_w).cwiseQuotient(4.0 * gains.eps_w);
    const Vec3 torque = cmd.u_wm + cmd.u_wl + cmd.u_wr;
    const Vec3 K(wrench.K_phi, wrench.K_theta, wrench.K_psi);
    const Vec3 u_w = torque.cwiseQuotient(K);

    const auto clamp = [&](double v, double lo, double hi) {
        const double c = std::clamp(v, lo, hi);
        if (c != v) cmd.clamped = true;
        return c;
    };
    cmd.input.V_s = clamp(u_0 + u_z, gains.V_min, gains.V_max);
    cmd.input.dV = clamp(u_w.x(), -gains.dV_max, gains.dV_max);
    cmd.input.V_b = clamp(u_w.y(), -gains.V_b_max, gains.V_b_max);
    cmd.input.sigma = clamp(u_w.z(), -gains.sigma_max, gains.sigma_max);
    return cmd;
}

Controller::Controller(ControllerGains gains, VehicleParams params, WrenchGains wrench,
                       ParamEstimates estimates)
    : gains_(std::move(gains)), params_(params), wrench_(wrench), estimates_(estimates) {
    u_0_ = params_.weight() / wrench_.K_V;
}

ControlInput Controller::update(double t, const VehicleState& state, const References& refs,
                                double dt) {
    ControlRecord rec;
    rec.t = t;
    rec.surfaces = sliding_surfaces(state, refs, gains_);
    const Vec3 omega_eq_dot =
        has_prev_ ? Vec3((rec.surfaces.omega_eq - prev_omega_eq_) / dt) : Vec3::Zero();
    prev_omega_eq_ = rec.surfaces.omega_eq;
    has_prev_ = true;

    rec.singular = std::abs(thrust_tilt(state)) <= kSingularityGuard;
    const Regressors regs = regressors_unchecked(state, rec.surfaces, omega_eq_dot, u_0_, params_,
                                                 gains_, wrench_);
    rec.command = control_law(rec.surfaces, regs, estimates_, u_0_, gains_, wrench_);
    if (rec.singular) {
        // Hold the last feasible thrust; attitude channels stay active.
        rec.command.input.V_s = u_0_;
        ++singular_count_;
    }
    if (rec.command.clamped) ++clamp_count_;

    if (gains_.adapt) {
        const double dz = estimates_.theta_z(2) + gains_.gamma_z * rec.surfaces.s_z * dt;
        estimates_.theta_z(2) = std::clamp(dz, -gains_.d_z_max, gains_.d_z_max);
        for (int i = 0; i < 3; ++i) {
            const double dw = estimates_.theta_w(6 + i) + gains_.gamma_w(i) * rec.surfaces.s_w(i) * dt;
            estimates_.theta_w(6 + i) = std::clamp(dw, -gains_.d_w_max(i), gains_.d_w_max(i));
        }
    }
    u_0_ = rec.command.input.V_s;
    last_ = rec;
    return rec.command.input;
}

WingbeatAverager::WingbeatAverager(int window) : window_(std::max(window, 1)) {}

VehicleState WingbeatAverager::push(const VehicleState& s) {
    buf_.push_back(s);
    sum_p_ += s.position;
    sum_v_ += s.velocity;
    sum_w_ += s.omega_body;
    sum_R_ += s.rotation;
    if (static_cast<int>(buf_.size()) > window_) {
        const VehicleState& old = buf_.front();
        sum_p_ -= old.position;
        sum_v_ -= old.velocity;
        sum_w_ -= old.omega_body;
        sum_R_ -= old.rotation;
        buf_.pop_front();
    }
    const double inv = 1.0 / static_cast<double>(buf_.size());
    VehicleState out;
    out.position = sum_p_ * inv;
    out.velocity = sum_v_ * inv;
    out.omega_body = sum_w_ * inv;
    out.rotation = orthonormalize(sum_R_ * inv);
    return out;
}

TrimResult trim_calibration(std::span<const TrimLogEntry> log, const WrenchGains& gains,
                            const Mat3& inertia, double min_duration) {
    TrimResult out;
    out.gains = gains;
    if (log.size() < 2 || log.back().t - log.front().t < min_duration) {
        out.warning = "insufficient hover data; trims unchanged";
        return out;
    }
    Vec3 acc = Vec3::Zero();
    for (std::size_t k = 0; k + 1 < log.size(); ++k) {
        const double dt = log[k + 1].t - log[k].t;
        const Vec3& w = log[k].omega;
        const Vec3 w_dot = (log[k + 1].omega - w) / dt;
        const Vec3 total = inertia * w_dot + w.cross(inertia * w);
        const ControlInput& u = log[k].input;
        const Vec3 commanded(gains.K_phi * u.dV, gains.K_theta * u.V_b, gains.K_psi * u.sigma);
        acc += total - commanded;
    }
    acc /= static_cast<double>(log.size() - 1);
    out.gains.tau_x0 = acc.x();
    out.gains.tau_y0 = acc.y();
    out.gains.tau_z0 = acc.z();
    out.updated = true;
    return out;
}

}  // namespace fwnav

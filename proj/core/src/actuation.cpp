#include "fwnav/actuation.hpp"

#include <cmath>

#include "fwnav/error.hpp"

namespace fwnav {

namespace {

double sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

MotorOutput motor_step(double V_inst, double phi_dot, double tau_load, const MotorParams& p,
                       double dt, DriveMode mode) {
    if (!(dt > 0.0)) throw Fault("dt", "must be positive");
    const double i_emf = (V_inst - p.K_a * (phi_dot / p.N_g)) / p.R_a;
    const double gear = p.K_a * p.N_g;
    const double tau_total = tau_load + p.tau_friction * sign(phi_dot);
    MotorOutput out;
    if (mode == DriveMode::kinematic) {
        out.i_a = i_emf + tau_total / gear;
        out.phi_ddot = gear * i_emf / p.J_d;
    } else {
        out.i_a = i_emf;
        out.phi_ddot = (gear * i_emf - tau_total) / p.J_d;
    }
    return out;
}

double wing_rate_from_current(double V_inst, double i_a, const MotorParams& p) {
    return (V_inst - i_a * p.R_a) * p.N_g / p.K_a;
}

CurrentSample CurrentSampler::sample(double t, double i_L, double i_R) {
    CurrentSample s{t, i_L, i_R};
    if (sigma_ > 0.0) {
        s.i_L += sigma_ * normal_(rng_);
        s.i_R += sigma_ * normal_(rng_);
    }
    return s;
}

std::vector<CurrentSample> sample_currents(const CurrentTrace& trace, double t_start, double t_end,
                                           double noise_sigma, std::uint64_t seed) {
    if (!(t_end > t_start)) throw Fault("t_end", "must exceed t_start");
    CurrentSampler sampler(noise_sigma, seed);
    std::vector<CurrentSample> out;
    const double period = 1.0 / kSampleRateHz;
    for (long k = 0;; ++k) {
        const double t = t_start + static_cast<double>(k) * period;
        if (t >= t_end) break;
        const auto i = trace(t);
        out.push_back(sampler.sample(t, i[0], i[1]));
    }
    return out;
}

}  // namespace fwnav

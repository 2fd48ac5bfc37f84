#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace fwnav {

/// Brushed DC wing drive. Back-EMF follows K_a * phi_dot / N_g; the load
/// current uses K_a * N_g.
struct MotorParams {
    double R_a = 3.0;            // ohm
    double K_a = 1.0e-3;         // N m / A
    double N_g = 10.0;
    double J_d = 2.0e-8;         // kg m^2, reflected to the wing
    double R_sense = 0.4;        // ohm
    double tau_friction = 0.0;   // Coulomb friction at the wing, N m
};

enum class DriveMode {
    kinematic,  // stroke prescribed, load torque shows up as extra current
    dynamic,    // armature current only, load decelerates the drivetrain
};

struct MotorOutput {
    double i_a = 0.0;        // A, signed
    double phi_ddot = 0.0;   // rad/s^2
};

MotorOutput motor_step(double V_inst, double phi_dot, double tau_load, const MotorParams& params,
                       double dt, DriveMode mode = DriveMode::kinematic);

/// Wing speed implied by a measured armature current (inverse of the
/// back-EMF relation with no load term).
double wing_rate_from_current(double V_inst, double i_a, const MotorParams& params);

/// Current through the low-side sense resistor of the H-bridge.
inline double sensed_current(double i_a) { return i_a < 0.0 ? -i_a : i_a; }

struct CurrentSample {
    double t = 0.0;
    double i_L = 0.0;
    double i_R = 0.0;
};

inline constexpr double kSampleRateHz = 2000.0;

using CurrentTrace = std::function<std::array<double, 2>(double t)>;

/// Uniform 2 kHz sampling on [t_start, t_end) with additive Gaussian noise.
std::vector<CurrentSample> sample_currents(const CurrentTrace& trace, double t_start, double t_end,
                                           double noise_sigma, std::uint64_t seed);

/// Streaming counterpart of sample_currents used inside the simulator.
class CurrentSampler {
public:
    CurrentSampler(double noise_sigma, std::uint64_t seed) : sigma_(noise_sigma), rng_(seed) {}

    CurrentSample sample(double t, double i_L, double i_R);

private:
    double sigma_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace fwnav

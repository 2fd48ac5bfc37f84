#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fwnav/platform.hpp"
#include "fwnav/sensing.hpp"

namespace fwnav {

/// Clamped vehicle: wings flap at a fixed position and clearance, nothing
/// else moves. Walls are given in the vehicle frame (vehicle at the origin).
struct StandOptions {
    double clearance = 3.3;  // D / c
    ControlInput input{12.0, 0.0, 0.0, 0.0};
    int beats = 3;
    int settle_beats = 1;
    double noise_sigma = 0.0;  // A
    std::uint64_t seed = 0;
    double cutoff_hz = 200.0;
    std::vector<WallPanel> walls;
};

struct StandResult {
    StrokeStats stats;                 // over the measured beats
    std::vector<StrokeStats> per_beat;
    std::array<double, 2> lift{0.0, 0.0};  // cycle-mean lift per wing, N
    std::vector<CurrentSample> samples;    // filtered
    std::vector<PhaseTag> tags;
};

StandResult run_stand(const Platform& p, const StandOptions& opt);

/// Panel that only the wing half-stroke(s) of `dir` reach, `penetration`
/// metres deep at stroke reversal.
WallPanel stand_wall(Direction dir, const Platform& p, double V_s, double penetration);

/// Relative change of the cycle-mean current of each wing caused by `walls`.
std::array<double, 2> contact_rise(const Platform& p, const std::vector<WallPanel>& walls,
                                   double V_s = 12.0);

/// Bisect the contact stiffness until the mean of the two wings' cycle-mean
/// current rise against a front wall equals `target`.
double calibrate_contact_stiffness(const Platform& p, double target = 0.10,
                                   double penetration = 0.005, double V_s = 12.0);

/// d(i / i_ref)/dD at the reference clearance, averaged over both wings, 1/m.
double relative_current_slope(const Platform& p, double V_s = 12.0);

/// Threshold lines from stand runs at the reference clearance.
ThresholdModel stand_thresholds(const Platform& p, const std::vector<double>& voltages,
                                int datasets = 1, int beats = 2, double noise_sigma = 0.0,
                                std::uint64_t seed = 0);

struct GroundEffectSweepOptions {
    std::vector<double> voltages{10.0, 11.0, 12.0, 13.0, 14.0, 15.0};
    double fine_min = 1.5, fine_max = 5.0, fine_step = 0.01;
    double coarse_max = 15.0, coarse_step = 0.5;
    int datasets = 20;
    int beats = 3;
    double noise_rel = 0.02;  // of the reference current
    std::uint64_t seed = 1;
};

struct GroundEffectSweep {
    std::vector<double> voltages;
    std::vector<double> clearances;                  // D / c
    std::vector<std::vector<double>> lift;           // [voltage][clearance], N
    std::vector<std::vector<double>> current_L, current_R;
    std::vector<double> lift_peak;                   // D / c of max lift per voltage
    std::vector<double> current_min;                 // D / c of min mean current per voltage
    std::vector<CalibrationPoint> points;
    ThresholdModel thresholds;
    double rel_slope = 0.0;
};

GroundEffectSweep ground_effect_sweep(const Platform& p, const GroundEffectSweepOptions& opt = {});

struct CollisionBoundSweep {
    std::vector<double> voltages;
    // Elevated half-stroke mean per channel (L-up, L-down, R-up, R-down)
    // against the matching angled wall, and the free-flight value.
    std::vector<std::array<double, 4>> bound;
    std::vector<std::array<double, 4>> free;
    std::array<double, 4> slope{}, intercept{}, r2{};
};

CollisionBoundSweep collision_bound_sweep(const Platform& p,
                                          std::vector<double> voltages = {10, 11, 12, 13, 14, 15},
                                          double penetration = 0.005);

}  // namespace fwnav

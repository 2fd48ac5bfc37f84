#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fwnav/actuation.hpp"
#include "fwnav/dynamics.hpp"

namespace fwnav {

/// First-order low-pass from the bilinear transform with a prewarped corner,
/// so the -3 dB point lands exactly on `cutoff_hz`.
class LowPassFilter {
public:
    explicit LowPassFilter(double cutoff_hz = 200.0, double sample_hz = kSampleRateHz);

    double step(double x);
    void reset(double value);
    // |H| at frequency f.
    double gain(double f) const;

private:
    double b_ = 0.0;
    double a_ = 0.0;
    double x_prev_ = 0.0;
    double y_prev_ = 0.0;
    bool primed_ = false;
    double k_ = 0.0;
    double fs_ = kSampleRateHz;
};

/// Filter both channels of a uniformly sampled stream.
std::vector<CurrentSample> lowpass(std::span<const CurrentSample> samples,
                                   double cutoff_hz = 200.0);

/// Wingbeat index and half-stroke flag of each wing at one sample instant.
struct PhaseTag {
    long cycle = 0;
    double phase = 0.0;  // fraction of the wingbeat elapsed, [0, 1)
    std::array<HalfStroke, 2> half{HalfStroke::downstroke, HalfStroke::downstroke};
};

struct ChannelStats {
    double mean = 0.0;
    double up = 0.0;
    double down = 0.0;
};

struct StrokeStats {
    std::array<ChannelStats, 2> wing;  // left, right
    int wingbeats = 0;
    long last_cycle = -1;
};

/// Cycle and half-stroke means over the last `window` complete wingbeats.
/// Cycles cut by the start or end of the stream are ignored. Throws Fault when
/// no complete wingbeat is available.
StrokeStats stroke_stats(std::span<const CurrentSample> samples, std::span<const PhaseTag> phases,
                         int window);

/// Accumulates samples of one wingbeat at a time and emits StrokeStats as
/// soon as a wingbeat closes.
class StrokeAccumulator {
public:
    std::optional<StrokeStats> push(const CurrentSample& s, const PhaseTag& tag);

private:
    long cycle_ = -1;
    bool first_ = false;
    std::array<double, 2> sum_{}, up_{}, down_{};
    std::array<int, 2> n_up_{}, n_down_{};
    int n_ = 0;
    void clear();
};

/// Linear current threshold i = slope * V_s + intercept for each wing,
/// evaluated at the reference clearance.
struct ThresholdModel {
    double slope_L = 0.0;
    double intercept_L = 0.0;
    double slope_R = 0.0;
    double intercept_R = 0.0;
    double V_min = 10.0;
    double V_max = 15.0;
    double r2_L = 1.0;
    double r2_R = 1.0;
};

/// Coefficients reported for the hardware platform.
ThresholdModel reference_thresholds();

struct ThresholdEval {
    double i_L = 0.0;
    double i_R = 0.0;
    bool extrapolated = false;
};

ThresholdEval threshold_at(double V_s, const ThresholdModel& model);

struct CalibrationPoint {
    double V_s = 0.0;
    StrokeStats stats;
};

/// Per-wing least-squares line through the cycle means. Throws Fault when
/// fewer than two distinct voltages are supplied.
ThresholdModel calibrate_thresholds(std::span<const CalibrationPoint> runs);

enum class Band { below_band, in_band, above_band };

struct Deadband {
    double lower = 0.75;
    double upper = 1.00;
};

struct ClearanceFeedback {
    Band band = Band::in_band;
    std::array<Band, 2> wing_band{Band::in_band, Band::in_band};
    std::array<double, 2> excess{0.0, 0.0};  // A
    std::array<double, 2> ratio{1.0, 1.0};   // mean current / threshold
    double mean_excess() const { return 0.5 * (excess[0] + excess[1]); }
};

ClearanceFeedback clearance_feedback(const StrokeStats& stats, double V_s,
                                     const ThresholdModel& model, const Deadband& band = {});

enum class Signature { none, L_up, L_down, R_up, R_down, both_up, both_down, unclassified };
enum class Direction { unset, front, back, front_left, back_left, front_right, back_right };

// Elevated half-stroke channels as a bit mask.
enum Channel : unsigned { kLeftUp = 1u, kLeftDown = 2u, kRightUp = 4u, kRightDown = 8u };

struct CollisionEvent {
    double t = 0.0;
    Signature signature = Signature::none;
    Direction direction = Direction::unset;
    unsigned channels = 0;  // raw elevated set
    bool gust_possible = false;
    Vec3 position = Vec3::Zero();
    double heading = 0.0;
};

const char* to_string(Signature s);
const char* to_string(Direction d);
const char* to_string(Band b);

/// Bearing of a collision direction in the body frame, rad, counter-clockwise
/// from +x (left is positive).
double direction_bearing(Direction d);

/// Which channels exceed (1 + rel_threshold) * baseline, and the resulting
/// signature. Returns nullopt when nothing is elevated. Position and heading
/// are left for the caller.
std::optional<CollisionEvent> detect_collision(const StrokeStats& stats,
                                               const StrokeStats& baseline,
                                               double rel_threshold = 0.10);

/// Streaming detector: rolling collision-free baseline, frozen while a
/// pattern is elevated, and a persistence requirement before an event fires.
class CollisionDetector {
public:
    struct Params {
        int baseline_beats = 10;
        int debounce_beats = 2;
        double rel_threshold = 0.10;
        int max_frozen_beats = 40;  // re-baseline after this long elevated
    };

    CollisionDetector() : CollisionDetector(Params{}) {}
    explicit CollisionDetector(Params p) : params_(p) {}

    /// Feed one wingbeat of stats. Returns an event on the wingbeat where the
    /// same signature has persisted for `debounce_beats`.
    std::optional<CollisionEvent> update(const StrokeStats& beat, double t);

    bool baseline_ready() const { return static_cast<int>(history_.size()) >= params_.baseline_beats; }
    StrokeStats baseline() const;
    // Signature of the most recent wingbeat (none if nothing elevated).
    Signature current_signature() const { return last_signature_; }
    void reset();

private:
    Params params_;
    std::deque<StrokeStats> history_;
    Signature pending_ = Signature::none;
    int streak_ = 0;
    int frozen_ = 0;
    bool fired_ = false;
    Signature last_signature_ = Signature::none;
};

}  // namespace fwnav

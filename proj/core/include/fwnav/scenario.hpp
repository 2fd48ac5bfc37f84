#pragma once

#include <string>
#include <vector>

#include "fwnav/config.hpp"
#include "fwnav/traces.hpp"

namespace fwnav {

struct Metric {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    std::string op;  // "<=" or ">="
    bool pass = false;
};

struct RunReport {
    std::string name;
    std::string run_id;
    std::uint64_t seed = 0;
    bool success = false;     // reached the goal without abort or fault
    bool aborted = false;
    std::string fault;
    double mission_time = 0.0;
    double map_rms = 0.0;
    int terrain_samples = 0;
    int collision_count = 0;
    int clamp_count = 0;
    int avoid_cycles = 0;
    int gusts_rejected = 0;
    double obstacle_max_error = 0.0;
    double final_error = 0.0;
    double dead_reckon_time = 0.0;
    double max_penetration = 0.0;  // deepest wingtip penetration, m
    double wall_clock = 0.0;  // not written to files
    std::vector<Metric> metrics;

    bool all_pass() const;
};

struct ControlSample {
    double t = 0.0;
    double e_z = 0.0;
    double s_z = 0.0;
    Vec3 s_w = Vec3::Zero();
    double lyapunov = 0.0;
    bool clamped = false;
};

struct RunResult {
    RunReport report;
    MapEstimate map;
    std::vector<StateRow> states;
    std::vector<CurrentRow> currents;
    std::vector<EventRow> events;
    std::vector<ControlSample> control;
    ThresholdModel thresholds;
    double rel_slope = 0.0;
    std::vector<WallPanel> walls;
};

/// Physics at 10 kHz, control and navigation references at 500 Hz, current
/// sampling at 2 kHz, wingbeat statistics once per wingbeat.
RunResult run_scenario(const ScenarioConfig& cfg);

/// Key = value report text (no wall-clock entries, so reruns compare equal).
std::string report_text(const RunReport& r);

/// Output directory: the config value, else $FWNAV_OUT/<run_id>, else
/// out/<run_id>.
std::string output_dir(const ScenarioConfig& cfg);

/// Write states/currents/events/map/walls CSV, report.txt and SVG plots.
void write_run(const RunResult& r, const std::string& dir);

/// Regenerate the SVG plots of a trace directory.
void replay_plots(const std::string& dir);

}  // namespace fwnav

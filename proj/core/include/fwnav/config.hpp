#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fwnav/control.hpp"
#include "fwnav/environment.hpp"
#include "fwnav/navigation.hpp"
#include "fwnav/platform.hpp"
#include "fwnav/sensing.hpp"

namespace fwnav {

struct ConfigError {
    std::string path;     // e.g. "wall[1].z_top"
    std::string message;
    int line = 0;
};

class ConfigErrors : public std::runtime_error {
public:
    explicit ConfigErrors(std::vector<ConfigError> errors);
    const std::vector<ConfigError>& errors() const { return errors_; }

private:
    std::vector<ConfigError> errors_;
};

enum class Dim { none, length, angle, time, voltage, current, frequency, speed };

/// Parse "<number> [unit]" and convert to SI. Throws std::invalid_argument
/// when the number is malformed or the unit does not fit `dim`.
double parse_quantity(const std::string& text, Dim dim);

/// Line-oriented key/value text with [section] headers and [[name]] array
/// entries. '#' starts a comment.
struct ConfigTable {
    std::string name;   // section name; array entries get "name[i]"
    std::map<std::string, std::pair<std::string, int>> values;  // key -> (raw text, line)
};

struct ConfigDocument {
    std::vector<ConfigTable> tables;
    const ConfigTable* find(const std::string& name) const;
    std::vector<const ConfigTable*> array(const std::string& name) const;
};

ConfigDocument parse_config_text(const std::string& text);

enum class PlantMode { stroke_resolved, averaged };
enum class StateFilter { wingbeat, none };

struct Zone {
    double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
    bool contains(const Vec2& p) const {
        return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
    }
};

struct SensingConfig {
    double noise_sigma = 0.0;    // A, absolute
    double noise_rel = 0.0;      // fraction of the reference threshold current
    double cutoff_hz = 200.0;
    Deadband deadband;
    bool calibrate = true;       // fit thresholds on the stand before flight
    ThresholdModel thresholds = reference_thresholds();
    CollisionDetector::Params detector;
    std::optional<double> rel_slope;  // clearance inversion slope, 1/m
};

struct MetricLimits {
    std::optional<double> map_rms_max;         // m
    std::optional<int> min_collisions;
    std::optional<int> max_avoid_cycles;
    std::optional<double> obstacle_tolerance;  // m, max distance from a wall
    double goal_tolerance = 0.05;              // m
    std::optional<double> max_runtime;         // s wall clock
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::string run_id;
    std::uint64_t seed = 1;
    double duration = 30.0;
    std::string output_dir;
    PlantMode plant = PlantMode::stroke_resolved;
    StateFilter state_filter = StateFilter::wingbeat;

    World world;
    std::vector<Zone> denied_zones;
    double dr_bias = 0.0;        // m/s, dead-reckoning velocity bias magnitude
    double waypoint_jitter = 0.0;  // m, per-seed lateral jitter of interior waypoints

    Vec3 start = Vec3(0.0, 0.0, 0.07);
    double z_ref0 = 0.07;
    Vec3 disturbance = Vec3::Zero();  // constant world force, N

    Platform platform = default_platform();
    ControllerGains gains;
    NavParams nav;
    SensingConfig sensing;
    MetricLimits limits;
    double trace_rate = 100.0;  // Hz of states.csv
    bool write_traces = true;
};

/// Parse and validate a scenario. Collects every problem and throws
/// ConfigErrors when there are any.
ScenarioConfig load_config_text(const std::string& text);
ScenarioConfig load_config_file(const std::string& path);

}  // namespace fwnav

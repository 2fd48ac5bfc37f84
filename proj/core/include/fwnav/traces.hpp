#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fwnav/navigation.hpp"

namespace fwnav {

struct StateRow {
    double t = 0.0;
    double x = 0.0, y = 0.0, z = 0.0;
    double vx = 0.0, vy = 0.0, vz = 0.0;
    double roll = 0.0, pitch = 0.0, yaw = 0.0;
    double x_ref = 0.0, y_ref = 0.0, z_ref = 0.0;
    double V_s = 0.0, dV = 0.0, V_b = 0.0, sigma = 0.0;
    double est_x = 0.0, est_y = 0.0;
    double clearance = 0.0;
    double terrain = 0.0;  // true terrain height under the vehicle
    std::string mode;
    int denied = 0;
};

struct CurrentRow {
    double t = 0.0;
    double raw_L = 0.0, raw_R = 0.0;
    double i_L = 0.0, i_R = 0.0;   // filtered
    double thr_L = 0.0, thr_R = 0.0;
};

struct EventRow {
    double t = 0.0;
    std::string kind;    // collision, mode, gust, fault, ...
    std::string detail;
    double x = 0.0, y = 0.0;
    double heading = 0.0;
    std::string signature;
    std::string direction;
};

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

void write_states_csv(std::ostream& os, const std::vector<StateRow>& rows);
void write_currents_csv(std::ostream& os, const std::vector<CurrentRow>& rows);
void write_events_csv(std::ostream& os, const std::vector<EventRow>& rows);
void write_map_csv(std::ostream& os, const MapEstimate& map);
void write_walls_csv(std::ostream& os, const std::vector<WallPanel>& walls);

std::vector<StateRow> read_states_csv(std::istream& is);
std::vector<CurrentRow> read_currents_csv(std::istream& is);
std::vector<EventRow> read_events_csv(std::istream& is);
MapEstimate read_map_csv(std::istream& is);
std::vector<WallPanel> read_walls_csv(std::istream& is);

}  // namespace fwnav

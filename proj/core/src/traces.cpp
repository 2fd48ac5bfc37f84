#include "fwnav/traces.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fwnav {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double num(const std::string& s) { return s.empty() ? 0.0 : std::stod(s); }

template <class Row, class Fill>
std::vector<Row> read_rows(std::istream& is, std::size_t columns, Fill fill) {
    std::vector<Row> rows;
    std::string line;
    if (!std::getline(is, line)) return rows;  // header
    int n = 1;
    while (std::getline(is, line)) {
        ++n;
        if (line.empty()) continue;
        const auto c = split(line);
        if (c.size() != columns)
            throw std::runtime_error("trace line " + std::to_string(n) + ": expected " +
                                     std::to_string(columns) + " columns");
        Row r;
        fill(r, c);
        rows.push_back(std::move(r));
    }
    return rows;
}

Signature signature_from(const std::string& s) {
    for (Signature v : {Signature::none, Signature::L_up, Signature::L_down, Signature::R_up,
                        Signature::R_down, Signature::both_up, Signature::both_down,
                        Signature::unclassified})
        if (s == to_string(v)) return v;
    return Signature::none;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_states_csv(std::ostream& os, const std::vector<StateRow>& rows) {
    os << "t,x,y,z,vx,vy,vz,roll,pitch,yaw,x_ref,y_ref,z_ref,V_s,dV,V_b,sigma,est_x,est_y,"
          "clearance,terrain,mode,denied\n";
    for (const auto& r : rows) {
        for (double v : {r.t, r.x, r.y, r.z, r.vx, r.vy, r.vz, r.roll, r.pitch, r.yaw, r.x_ref,
                         r.y_ref, r.z_ref, r.V_s, r.dV, r.V_b, r.sigma, r.est_x, r.est_y,
                         r.clearance, r.terrain})
            os << format_double(v) << ',';
        os << r.mode << ',' << r.denied << '\n';
    }
}

void write_currents_csv(std::ostream& os, const std::vector<CurrentRow>& rows) {
    os << "t,raw_L,raw_R,i_L,i_R,thr_L,thr_R\n";
    for (const auto& r : rows) {
        os << format_double(r.t) << ',' << format_double(r.raw_L) << ',' << format_double(r.raw_R)
           << ',' << format_double(r.i_L) << ',' << format_double(r.i_R) << ','
           << format_double(r.thr_L) << ',' << format_double(r.thr_R) << '\n';
    }
}

void write_events_csv(std::ostream& os, const std::vector<EventRow>& rows) {
    os << "t,kind,detail,x,y,heading,signature,direction\n";
    for (const auto& r : rows) {
        os << format_double(r.t) << ',' << r.kind << ',' << r.detail << ',' << format_double(r.x)
           << ',' << format_double(r.y) << ',' << format_double(r.heading) << ',' << r.signature
           << ',' << r.direction << '\n';
    }
}

void write_map_csv(std::ostream& os, const MapEstimate& map) {
    os << "kind,x,y,value,heading,signature,run_id\n";
    for (const auto& s : map.terrain) {
        os << "terrain," << format_double(s.x) << ',' << format_double(s.y) << ','
           << format_double(s.h) << ",0,," << map.run_id << '\n';
    }
    for (const auto& p : map.obstacles) {
        os << "obstacle," << format_double(p.x) << ',' << format_double(p.y) << ','
           << format_double(direction_bearing(p.direction)) << ',' << format_double(p.heading)
           << ',' << to_string(p.signature) << ',' << map.run_id << '\n';
    }
}

void write_walls_csv(std::ostream& os, const std::vector<WallPanel>& walls) {
    os << "ax,ay,bx,by,z_bottom,z_top\n";
    for (const auto& w : walls) {
        os << format_double(w.a.x()) << ',' << format_double(w.a.y()) << ','
           << format_double(w.b.x()) << ',' << format_double(w.b.y()) << ','
           << format_double(w.z_bottom) << ',' << format_double(w.z_top) << '\n';
    }
}

std::vector<StateRow> read_states_csv(std::istream& is) {
    return read_rows<StateRow>(is, 23, [](StateRow& r, const std::vector<std::string>& c) {
        double* f[] = {&r.t, &r.x, &r.y, &r.z, &r.vx, &r.vy, &r.vz, &r.roll, &r.pitch, &r.yaw, &r.x_ref,
                       &r.y_ref, &r.z_ref, &r.V_s, &r.dV, &r.V_b, &r.sigma, &r.est_x, &r.est_y,
                       &r.clearance, &r.terrain};
        for (std::size_t i = 0; i < 21; ++i) *f[i] = num(c[i]);
        r.mode = c[21];
        r.denied = std::stoi(c[22]);
    });
}

std::vector<CurrentRow> read_currents_csv(std::istream& is) {
    return read_rows<CurrentRow>(is, 7, [](CurrentRow& r, const std::vector<std::string>& c) {
        r.t = num(c[0]);
        r.raw_L = num(c[1]);
        r.raw_R = num(c[2]);
        r.i_L = num(c[3]);
        r.i_R = num(c[4]);
        r.thr_L = num(c[5]);
        r.thr_R = num(c[6]);
    });
}

std::vector<EventRow> read_events_csv(std::istream& is) {
    return read_rows<EventRow>(is, 8, [](EventRow& r, const std::vector<std::string>& c) {
        r.t = num(c[0]);
        r.kind = c[1];
        r.detail = c[2];
        r.x = num(c[3]);
        r.y = num(c[4]);
        r.heading = num(c[5]);
        r.signature = c[6];
        r.direction = c[7];
    });
}

MapEstimate read_map_csv(std::istream& is) {
    struct Row {
        std::vector<std::string> c;
    };
    MapEstimate map;
    const auto rows = read_rows<Row>(is, 7, [](Row& r, const std::vector<std::string>& c) { r.c = c; });
    for (const auto& row : rows) {
        const auto& c = row.c;
        map.run_id = c[6];
        if (c[0] == "terrain") {
            map.terrain.push_back({num(c[1]), num(c[2]), num(c[3])});
        } else if (c[0] == "obstacle") {
            ObstaclePoint p;
            p.x = num(c[1]);
            p.y = num(c[2]);
            p.heading = num(c[4]);
            p.signature = signature_from(c[5]);
            const double b = num(c[3]);
            for (Direction d : {Direction::front, Direction::back, Direction::front_left,
                                Direction::back_left, Direction::front_right, Direction::back_right})
                if (std::abs(direction_bearing(d) - b) < 1e-9) p.direction = d;
            map.obstacles.push_back(p);
        }
    }
    return map;
}

std::vector<WallPanel> read_walls_csv(std::istream& is) {
    return read_rows<WallPanel>(is, 6, [](WallPanel& w, const std::vector<std::string>& c) {
        w.a = Vec2(num(c[0]), num(c[1]));
        w.b = Vec2(num(c[2]), num(c[3]));
        w.z_bottom = num(c[4]);
        w.z_top = num(c[5]);
    });
}

}  // namespace fwnav

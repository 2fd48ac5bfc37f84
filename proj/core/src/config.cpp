#include "fwnav/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace fwnav {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string join(const std::vector<ConfigError>& errors) {
    std::ostringstream os;
    os << errors.size() << " configuration error(s)";
    for (const auto& e : errors) {
        os << "\n  " << e.path;
        if (e.line > 0) os << " (line " << e.line << ")";
        os << ": " << e.message;
    }
    return os.str();
}

struct UnitDef {
    const char* name;
    Dim dim;
    double factor;
};

constexpr double kDeg = std::numbers::pi / 180.0;

const UnitDef kUnits[] = {
    {"m", Dim::length, 1.0},       {"cm", Dim::length, 0.01},     {"mm", Dim::length, 0.001},
    {"ft", Dim::length, 0.3048},   {"in", Dim::length, 0.0254},   {"deg", Dim::angle, kDeg},
    {"rad", Dim::angle, 1.0},      {"s", Dim::time, 1.0},         {"ms", Dim::time, 0.001},
    {"V", Dim::voltage, 1.0},      {"mV", Dim::voltage, 0.001},   {"A", Dim::current, 1.0},
    {"mA", Dim::current, 0.001},   {"Hz", Dim::frequency, 1.0},   {"kHz", Dim::frequency, 1000.0},
    {"m/s", Dim::speed, 1.0},      {"cm/s", Dim::speed, 0.01},    {"mm/s", Dim::speed, 0.001},
};

// Reads typed values out of one table and remembers which keys were used.
class Reader {
public:
    Reader(const ConfigTable* table, std::vector<ConfigError>& errors)
        : t_(table), errors_(errors) {}

    bool has(const std::string& key) const { return t_ && t_->values.count(key); }

    template <class T>
    void num(const std::string& key, T& out, Dim dim = Dim::none) {
        if (!has(key)) return;
        used_.insert(key);
        const auto& [raw, line] = t_->values.at(key);
        try {
            const double v = parse_quantity(raw, dim);
            if constexpr (std::is_integral_v<T>) {
                if (v != static_cast<double>(static_cast<long long>(v)))
                    throw std::invalid_argument("expected an integer");
                out = static_cast<T>(v);
            } else {
                out = v;
            }
        } catch (const std::exception& e) {
            fail(key, e.what(), line);
        }
    }

    void opt(const std::string& key, std::optional<double>& out, Dim dim = Dim::none) {
        if (!has(key)) return;
        double v = 0.0;
        num(key, v, dim);
        out = v;
    }

    void opt_int(const std::string& key, std::optional<int>& out) {
        if (!has(key)) return;
        int v = 0;
        num(key, v);
        out = v;
    }

    void flag(const std::string& key, bool& out) {
        if (!has(key)) return;
        const std::string v = text(key);
        if (v == "true" || v == "yes" || v == "on") out = true;
        else if (v == "false" || v == "no" || v == "off") out = false;
        else fail(key, "expected true or false", line(key));
    }

    std::string text(const std::string& key) {
        used_.insert(key);
        std::string v = trim(t_->values.at(key).first);
        if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
        return v;
    }

    int line(const std::string& key) const { return t_->values.at(key).second; }

    std::string path(const std::string& key) const { return t_->name + "." + key; }

    void fail(const std::string& key, const std::string& msg, int line = 0) {
        errors_.push_back({path(key), msg, line});
    }

    void require(const std::string& key) {
        if (!has(key)) errors_.push_back({path(key), "missing required key", 0});
    }

    void finish() {
        if (!t_) return;
        for (const auto& [k, v] : t_->values)
            if (!used_.count(k)) errors_.push_back({path(k), "unknown key", v.second});
    }

private:
    const ConfigTable* t_;
    std::vector<ConfigError>& errors_;
    std::set<std::string> used_;
};

}  // namespace

ConfigErrors::ConfigErrors(std::vector<ConfigError> errors)
    : std::runtime_error(join(errors)), errors_(std::move(errors)) {}

double parse_quantity(const std::string& raw, Dim dim) {
    const std::string s = trim(raw);
    double value = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (begin != end && *begin == '+') ++begin;
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr == begin)
        throw std::invalid_argument("malformed number '" + s + "'");
    const std::string unit = trim(std::string(res.ptr, end));
    if (unit.empty()) return value;
    for (const UnitDef& u : kUnits) {
        if (unit != u.name) continue;
        if (u.dim != dim) throw std::invalid_argument("unit '" + unit + "' does not fit this field");
        return value * u.factor;
    }
    throw std::invalid_argument("unknown unit '" + unit + "'");
}

const ConfigTable* ConfigDocument::find(const std::string& name) const {
    for (const auto& t : tables)
        if (t.name == name) return &t;
    return nullptr;
}

std::vector<const ConfigTable*> ConfigDocument::array(const std::string& name) const {
    std::vector<const ConfigTable*> out;
    const std::string prefix = name + "[";
    for (const auto& t : tables)
        if (t.name.rfind(prefix, 0) == 0) out.push_back(&t);
    return out;
}

ConfigDocument parse_config_text(const std::string& text) {
    ConfigDocument doc;
    std::vector<ConfigError> errors;
    std::map<std::string, int> counts;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    doc.tables.push_back({"", {}});
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            if (line[i] == '#' && !quoted) {
                line.resize(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.rfind("[[", 0) == 0) {
            if (line.size() < 5 || line.substr(line.size() - 2) != "]]") {
                errors.push_back({"line " + std::to_string(line_no), "malformed array header", line_no});
                continue;
            }
            const std::string name = trim(line.substr(2, line.size() - 4));
            doc.tables.push_back({name + "[" + std::to_string(counts[name]++) + "]", {}});
        } else if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back({"line " + std::to_string(line_no), "malformed section header", line_no});
                continue;
            }
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (doc.find(name)) {
                errors.push_back({name, "duplicate section", line_no});
                continue;
            }
            doc.tables.push_back({name, {}});
        } else {
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                errors.push_back({"line " + std::to_string(line_no), "expected key = value", line_no});
                continue;
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            auto& table = doc.tables.back();
            if (key.empty()) {
                errors.push_back({table.name, "empty key", line_no});
            } else if (table.values.count(key)) {
                errors.push_back({table.name + "." + key, "duplicate key", line_no});
            } else {
                table.values[key] = {value, line_no};
            }
        }
    }
    if (!doc.tables.front().values.empty()) {
        for (const auto& [k, v] : doc.tables.front().values)
            errors.push_back({k, "key outside any section", v.second});
    }
    doc.tables.erase(doc.tables.begin());
    if (!errors.empty()) throw ConfigErrors(std::move(errors));
    return doc;
}

ScenarioConfig load_config_text(const std::string& text) {
    const ConfigDocument doc = parse_config_text(text);
    std::vector<ConfigError> errors;
    ScenarioConfig c;

    static const std::set<std::string> known = {
        "scenario", "start",    "arena",   "navigation", "sensing", "controller",
        "vehicle",  "disturbance", "metrics", "terrain", "wall", "gust", "denied", "waypoint"};
    for (const auto& t : doc.tables) {
        const std::string base = t.name.substr(0, t.name.find('['));
        if (!known.count(base)) errors.push_back({t.name, "unknown section", 0});
    }

    {
        Reader r(doc.find("scenario"), errors);
        if (r.has("name")) c.name = r.text("name");
        if (r.has("run_id")) c.run_id = r.text("run_id");
        r.num("seed", c.seed);
        r.num("duration", c.duration, Dim::time);
        if (r.has("output_dir")) c.output_dir = r.text("output_dir");
        if (r.has("plant")) {
            const std::string p = r.text("plant");
            if (p == "stroke_resolved") c.plant = PlantMode::stroke_resolved;
            else if (p == "averaged") c.plant = PlantMode::averaged;
            else r.fail("plant", "expected stroke_resolved or averaged", r.line("plant"));
        }
        if (r.has("state_filter")) {
            const std::string p = r.text("state_filter");
            if (p == "wingbeat") c.state_filter = StateFilter::wingbeat;
            else if (p == "none") c.state_filter = StateFilter::none;
            else r.fail("state_filter", "expected wingbeat or none", r.line("state_filter"));
        }
        r.num("trace_rate", c.trace_rate, Dim::frequency);
        r.flag("write_traces", c.write_traces);
        r.finish();
        if (!(c.duration > 0.0)) errors.push_back({"scenario.duration", "must be positive", 0});
        if (!(c.trace_rate > 0.0)) errors.push_back({"scenario.trace_rate", "must be positive", 0});
    }
    if (c.run_id.empty()) c.run_id = c.name + "-" + std::to_string(c.seed);

    {
        Reader r(doc.find("arena"), errors);
        ArenaBounds& a = c.world.arena;
        r.num("x_min", a.x_min, Dim::length);
        r.num("x_max", a.x_max, Dim::length);
        r.num("y_min", a.y_min, Dim::length);
        r.num("y_max", a.y_max, Dim::length);
        r.num("floor", c.world.floor, Dim::length);
        r.finish();
        if (!(a.x_max > a.x_min) || !(a.y_max > a.y_min))
            errors.push_back({"arena", "bounds must have positive extent", 0});
    }

    double heading = 0.0;
    {
        Reader r(doc.find("start"), errors);
        r.num("x", c.start.x(), Dim::length);
        r.num("y", c.start.y(), Dim::length);
        r.num("z", c.start.z(), Dim::length);
        c.z_ref0 = c.start.z();
        r.num("z_ref", c.z_ref0, Dim::length);
        r.num("heading", heading, Dim::angle);
        r.finish();
        if (!c.world.arena.contains(c.start.x(), c.start.y()))
            errors.push_back({"start", "start position outside the arena", 0});
    }
    c.nav.heading = heading;

    const auto terrains = doc.array("terrain");
    for (const ConfigTable* t : terrains) {
        Reader r(t, errors);
        TerrainFeature f;
        double dir = 0.0;
        r.num("origin_x", f.origin.x(), Dim::length);
        r.num("origin_y", f.origin.y(), Dim::length);
        r.num("direction", dir, Dim::angle);
        f.direction = Vec2(std::cos(dir), std::sin(dir));
        r.num("x_min", f.x_min, Dim::length);
        r.num("x_max", f.x_max, Dim::length);
        r.num("y_min", f.y_min, Dim::length);
        r.num("y_max", f.y_max, Dim::length);
        r.require("profile");
        if (r.has("profile")) {
            // "s:h, s:h, ..." with optional units on each number.
            std::stringstream ss(r.text("profile"));
            std::string item;
            while (std::getline(ss, item, ',')) {
                const auto colon = item.find(':');
                if (colon == std::string::npos) {
                    r.fail("profile", "expected s:h pairs", r.line("profile"));
                    break;
                }
                try {
                    f.profile.emplace_back(parse_quantity(item.substr(0, colon), Dim::length),
                                           parse_quantity(item.substr(colon + 1), Dim::length));
                } catch (const std::exception& e) {
                    r.fail("profile", e.what(), r.line("profile"));
                    break;
                }
            }
            for (std::size_t i = 1; i < f.profile.size(); ++i)
                if (!(f.profile[i].x() > f.profile[i - 1].x()))
                    r.fail("profile", "stations must increase", r.line("profile"));
            if (f.profile.empty()) r.fail("profile", "empty profile", r.line("profile"));
        }
        r.finish();
        c.world.terrain.push_back(f);
    }

    for (const ConfigTable* t : doc.array("wall")) {
        Reader r(t, errors);
        WallPanel w;
        for (const char* k : {"ax", "ay", "bx", "by", "z_top"}) r.require(k);
        r.num("ax", w.a.x(), Dim::length);
        r.num("ay", w.a.y(), Dim::length);
        r.num("bx", w.b.x(), Dim::length);
        r.num("by", w.b.y(), Dim::length);
        r.num("z_bottom", w.z_bottom, Dim::length);
        r.num("z_top", w.z_top, Dim::length);
        r.finish();
        if ((w.a - w.b).norm() < 1e-9) errors.push_back({t->name, "panel endpoints coincide", 0});
        if (!(w.z_top > w.z_bottom)) errors.push_back({t->name + ".z_top", "must exceed z_bottom", 0});
        c.world.walls.push_back(w);
    }

    for (const ConfigTable* t : doc.array("gust")) {
        Reader r(t, errors);
        Gust g;
        r.num("t_start", g.t_start, Dim::time);
        r.num("t_end", g.t_end, Dim::time);
        r.num("wx", g.wind.x(), Dim::speed);
        r.num("wy", g.wind.y(), Dim::speed);
        r.num("wz", g.wind.z(), Dim::speed);
        r.finish();
        if (!(g.t_end > g.t_start)) errors.push_back({t->name + ".t_end", "must exceed t_start", 0});
        c.world.gusts.push_back(g);
    }

    for (const ConfigTable* t : doc.array("denied")) {
        Reader r(t, errors);
        Zone z;
        r.num("x_min", z.x_min, Dim::length);
        r.num("x_max", z.x_max, Dim::length);
        r.num("y_min", z.y_min, Dim::length);
        r.num("y_max", z.y_max, Dim::length);
        r.finish();
        if (!(z.x_max > z.x_min) || !(z.y_max > z.y_min))
            errors.push_back({t->name, "zone must have positive extent", 0});
        c.denied_zones.push_back(z);
    }

    c.nav.route.clear();
    c.nav.route.push_back(c.start.head<2>());
    for (const ConfigTable* t : doc.array("waypoint")) {
        Reader r(t, errors);
        Vec2 p = Vec2::Zero();
        r.require("x");
        r.require("y");
        r.num("x", p.x(), Dim::length);
        r.num("y", p.y(), Dim::length);
        r.finish();
        if (!c.world.arena.contains(p.x(), p.y()))
            errors.push_back({t->name, "waypoint outside the arena", 0});
        c.nav.route.push_back(p);
    }
    if (c.nav.route.size() < 2) errors.push_back({"waypoint", "at least one waypoint is required", 0});
    for (std::size_t i = 1; i < c.nav.route.size(); ++i)
        if ((c.nav.route[i] - c.nav.route[i - 1]).norm() < 1e-6)
            errors.push_back({"waypoint", "consecutive waypoints coincide", 0});

    {
        Reader r(doc.find("navigation"), errors);
        NavParams& n = c.nav;
        r.num("cruise_speed", n.cruise_speed, Dim::speed);
        r.num("K_zhat", n.K_zhat);
        r.num("max_dz_per_beat", n.max_dz_per_beat, Dim::length);
        r.num("z_ref_min", n.z_ref_min, Dim::length);
        r.num("z_ref_max", n.z_ref_max, Dim::length);
        r.num("retreat_distance", n.retreat_distance, Dim::length);
        r.num("shift_step", n.shift_step, Dim::length);
        r.num("resume_margin", n.resume_margin, Dim::length);
        r.num("arrive_tolerance", n.arrive_tolerance, Dim::length);
        r.num("hold_tolerance", n.hold_tolerance, Dim::length);
        r.num("lead_limit", n.lead_limit, Dim::length);
        r.num("max_tilt_error", n.max_tilt_error, Dim::angle);
        r.num("settle_beats", n.settle_beats);
        r.num("search_timeout", n.search_timeout, Dim::time);
        r.num("lateral_limit", n.lateral_limit, Dim::length);
        r.num("max_avoid_cycles", n.max_avoid_cycles);
        r.num("dr_bias", c.dr_bias, Dim::speed);
        r.num("waypoint_jitter", c.waypoint_jitter, Dim::length);
        r.finish();
        if (!(n.cruise_speed > 0.0)) errors.push_back({"navigation.cruise_speed", "must be positive", 0});
        if (!(n.retreat_distance > 0.0))
            errors.push_back({"navigation.retreat_distance", "must be positive", 0});
        if (!(n.shift_step > 0.0)) errors.push_back({"navigation.shift_step", "must be positive", 0});
        if (!(n.z_ref_max > n.z_ref_min)) errors.push_back({"navigation.z_ref_max", "must exceed z_ref_min", 0});
    }

    {
        Reader r(doc.find("sensing"), errors);
        SensingConfig& s = c.sensing;
        r.num("noise_sigma", s.noise_sigma, Dim::current);
        r.num("noise_rel", s.noise_rel);
        r.num("cutoff", s.cutoff_hz, Dim::frequency);
        r.num("deadband_lower", s.deadband.lower);
        r.num("deadband_upper", s.deadband.upper);
        if (r.has("thresholds")) {
            const std::string v = r.text("thresholds");
            if (v == "calibrate") s.calibrate = true;
            else if (v == "reference") s.calibrate = false;
            else if (v == "manual") s.calibrate = false;
            else r.fail("thresholds", "expected calibrate, reference or manual", r.line("thresholds"));
        }
        r.num("slope_L", s.thresholds.slope_L);
        r.num("intercept_L", s.thresholds.intercept_L, Dim::current);
        r.num("slope_R", s.thresholds.slope_R);
        r.num("intercept_R", s.thresholds.intercept_R, Dim::current);
        r.num("baseline_beats", s.detector.baseline_beats);
        r.num("debounce_beats", s.detector.debounce_beats);
        r.num("rel_threshold", s.detector.rel_threshold);
        r.num("max_frozen_beats", s.detector.max_frozen_beats);
        r.opt("rel_slope", s.rel_slope);
        r.finish();
        if (s.noise_sigma < 0.0 || s.noise_rel < 0.0)
            errors.push_back({"sensing.noise_sigma", "must be non-negative", 0});
        if (!(s.cutoff_hz > 0.0 && s.cutoff_hz < 0.5 * kSampleRateHz))
            errors.push_back({"sensing.cutoff", "must lie in (0, 1000) Hz", 0});
        if (!(s.deadband.upper > s.deadband.lower && s.deadband.lower > 0.0))
            errors.push_back({"sensing.deadband_upper", "dead-band must satisfy 0 < lower < upper", 0});
        if (s.detector.baseline_beats < 1 || s.detector.debounce_beats < 1)
            errors.push_back({"sensing.baseline_beats", "detector windows must be positive", 0});
    }

    {
        Reader r(doc.find("controller"), errors);
        ControllerGains& g = c.gains;
        r.num("k_sz", g.k_sz);
        r.num("k_zl", g.k_zl);
        r.num("h_z", g.h_z);
        r.num("eps_z", g.eps_z);
        r.num("K_u", g.K_u);
        r.num("k_pos", g.k_pos);
        r.num("k_vel", g.k_vel);
        r.num("k_att_roll", g.k_att.x());
        r.num("k_att_pitch", g.k_att.y());
        r.num("k_att_yaw", g.k_att.z());
        r.num("max_tilt", g.max_tilt, Dim::angle);
        r.flag("adapt", g.adapt);
        r.num("V_max", g.V_max, Dim::voltage);
        r.finish();
        if (!(g.eps_z > 0.0)) errors.push_back({"controller.eps_z", "must be positive", 0});
    }

    {
        Reader r(doc.find("vehicle"), errors);
        r.num("mass", c.platform.vehicle.mass);
        r.num("contact_stiffness", c.platform.contact.stiffness);
        r.num("contact_damping", c.platform.contact.damping);
        r.finish();
        if (!(c.platform.vehicle.mass > 0.0)) errors.push_back({"vehicle.mass", "must be positive", 0});
    }

    {
        Reader r(doc.find("disturbance"), errors);
        r.num("fx", c.disturbance.x());
        r.num("fy", c.disturbance.y());
        r.num("fz", c.disturbance.z());
        r.finish();
    }

    {
        Reader r(doc.find("metrics"), errors);
        MetricLimits& m = c.limits;
        r.opt("map_rms_max", m.map_rms_max, Dim::length);
        r.opt_int("min_collisions", m.min_collisions);
        r.opt_int("max_avoid_cycles", m.max_avoid_cycles);
        r.opt("obstacle_tolerance", m.obstacle_tolerance, Dim::length);
        r.num("goal_tolerance", m.goal_tolerance, Dim::length);
        r.opt("max_runtime", m.max_runtime, Dim::time);
        r.finish();
    }

    if (!errors.empty()) throw ConfigErrors(std::move(errors));
    return c;
}

ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigErrors({{path, "cannot open file", 0}});
    std::stringstream ss;
    ss << in.rdbuf();
    return load_config_text(ss.str());
}

}  // namespace fwnav

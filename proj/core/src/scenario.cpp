#include "fwnav/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "fwnav/calibration.hpp"
#include "fwnav/error.hpp"
#include "fwnav/svg.hpp"

namespace fwnav {

namespace {

constexpr double kDt = 1e-4;
constexpr int kControlEvery = 20;  // 500 Hz
constexpr int kSampleEvery = 5;    // 2 kHz

Metric make_metric(std::string name, double value, double limit, const std::string& op) {
    const bool pass = op == "<=" ? value <= limit : value >= limit;
    return {std::move(name), value, limit, op, pass};
}

double nearest_wall(const std::vector<WallPanel>& walls, const Vec2& p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& w : walls) best = std::min(best, distance_to_panel(w, p));
    return best;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

}  // namespace

bool RunReport::all_pass() const {
    for (const auto& m : metrics)
        if (!m.pass) return false;
    return true;
}

RunResult run_scenario(const ScenarioConfig& cfg) {
    const auto wall_start = std::chrono::steady_clock::now();
    RunResult res;
    RunReport& rep = res.report;
    rep.name = cfg.name;
    rep.run_id = cfg.run_id;
    rep.seed = cfg.seed;
    res.map.run_id = cfg.run_id;
    res.map.seed = cfg.seed;
    res.walls = cfg.world.walls;

    const Platform& P = cfg.platform;
    const VehicleParams& veh = P.vehicle;
    std::mt19937_64 rng(cfg.seed);

    res.thresholds = cfg.sensing.calibrate
                         ? stand_thresholds(P, {10.0, 11.0, 12.0, 13.0, 14.0, 15.0})
                         : cfg.sensing.thresholds;
    res.rel_slope = cfg.sensing.rel_slope ? *cfg.sensing.rel_slope : relative_current_slope(P);
    ClearanceInversion inv;
    inv.ref_clearance = P.reference_clearance * veh.mean_chord;
    inv.rel_slope = res.rel_slope;

    const ThresholdEval ref12 = threshold_at(12.0, res.thresholds);
    const double sigma = cfg.sensing.noise_sigma + cfg.sensing.noise_rel * 0.5 * (ref12.i_L + ref12.i_R);

    NavParams nav_p = cfg.nav;
    if (cfg.waypoint_jitter > 0.0) {
        std::uniform_real_distribution<double> u(-cfg.waypoint_jitter, cfg.waypoint_jitter);
        for (std::size_t i = 1; i + 1 < nav_p.route.size(); ++i) {
            nav_p.route[i].x() += u(rng);
            nav_p.route[i].y() += u(rng);
        }
    }
    Vec2 dr_bias = Vec2::Zero();
    if (cfg.dr_bias > 0.0) {
        std::uniform_real_distribution<double> a(-std::numbers::pi, std::numbers::pi);
        const double ang = a(rng);
        dr_bias = cfg.dr_bias * Vec2(std::cos(ang), std::sin(ang));
    }
    const Vec2 goal = nav_p.route.back();

    VehicleState state;
    state.position = cfg.start;
    state.rotation = rotation_from_euler(0.0, 0.0, cfg.nav.heading);
    VehicleState est = state;

    Controller ctrl(cfg.gains, veh, P.wrench, ParamEstimates::nominal(veh.mass, P.wrench));
    const double hover_V = veh.weight() / P.wrench.K_V;
    ctrl.set_nominal_input(hover_V);
    ControlInput input{hover_V, 0.0, 0.0, 0.0};

    Navigator nav(nav_p, cfg.z_ref0);
    FlightPhysics physics(P);
    CurrentSampler sampler(sigma, cfg.seed * 0x9E3779B97F4A7C15ull + 17);
    std::array<LowPassFilter, 2> lpf{LowPassFilter(cfg.sensing.cutoff_hz),
                                     LowPassFilter(cfg.sensing.cutoff_hz)};
    StrokeAccumulator acc;
    CollisionDetector detector(cfg.sensing.detector);
    WingbeatAverager averager(static_cast<int>(std::lround(1.0 / (veh.wingbeat_hz * kDt))));

    DeadReckonPose dr;
    bool in_denied = false;
    double v_sum = 0.0;
    int v_n = 0;
    const double dt_c = kControlEvery * kDt;
    const long steps = std::lround(cfg.duration / kDt);
    const long trace_every = std::max<long>(1, std::lround(1.0 / (cfg.trace_rate * kDt)));
    PhysicsStep out;
    std::vector<double> terrain_err;

    const auto add_event = [&](double t, std::string kind, std::string detail, const Vec2& xy,
                               double heading, std::string sig = "", std::string dir = "") {
        res.events.push_back({t, std::move(kind), std::move(detail), xy.x(), xy.y(), heading,
                              std::move(sig), std::move(dir)});
    };
    std::size_t seen_modes = 0;
    Vec2 est_xy = state.position.head<2>();

    long k = 0;
    try {
        for (; k < steps; ++k) {
            const double t = k * kDt;
            if (k % kControlEvery == 0) {
                VehicleState s = cfg.state_filter == StateFilter::wingbeat ? est : state;
                s.position.z() = state.position.z();
                bool denied = false;
                for (const Zone& z : cfg.denied_zones) denied = denied || z.contains(state.position.head<2>());
                if (denied) {
                    const double psi = s.yaw();
                    if (!in_denied) {
                        dr = {s.position.x(), s.position.y(), psi, 0};
                        in_denied = true;
                        add_event(t, "dead_reckoning", "enter", s.position.head<2>(), psi);
                    }
                    const Vec2 v_world = s.velocity.head<2>();
                    const Vec2 v_body(std::cos(psi) * v_world.x() + std::sin(psi) * v_world.y(),
                                      -std::sin(psi) * v_world.x() + std::cos(psi) * v_world.y());
                    dr = dead_reckon(dr, psi, (v_body + dr_bias) * dt_c);
                    s.position.x() = dr.x;
                    s.position.y() = dr.y;
                    rep.dead_reckon_time += dt_c;
                } else if (in_denied) {
                    in_denied = false;
                    add_event(t, "dead_reckoning", "exit", state.position.head<2>(), s.yaw());
                }
                est_xy = s.position.head<2>();
                const References refs = nav.update(t, s.position.head<2>(), dt_c);
                input = ctrl.update(t, s, refs, dt_c);

                const ControlRecord& rec = ctrl.last();
                ControlSample cs;
                cs.t = t;
                cs.e_z = rec.surfaces.e_z;
                cs.s_z = rec.surfaces.s_z;
                cs.s_w = rec.surfaces.s_w;
                cs.lyapunov = 0.5 * veh.mass * cs.s_z * cs.s_z +
                              0.5 * cs.s_w.dot(veh.inertia * cs.s_w);
                cs.clamped = rec.command.clamped;
                res.control.push_back(cs);

                if (k % trace_every == 0 && cfg.write_traces) {
                    StateRow row;
                    row.t = t;
                    row.x = state.position.x();
                    row.y = state.position.y();
                    row.z = state.position.z();
                    row.vx = state.velocity.x();
                    row.vy = state.velocity.y();
                    row.vz = state.velocity.z();
                    row.roll = state.roll();
                    row.pitch = state.pitch();
                    row.yaw = state.yaw();
                    row.x_ref = refs.xy.x();
                    row.y_ref = refs.xy.y();
                    row.z_ref = refs.z;
                    row.V_s = input.V_s;
                    row.dV = input.dV;
                    row.V_b = input.V_b;
                    row.sigma = input.sigma;
                    row.est_x = s.position.x();
                    row.est_y = s.position.y();
                    row.terrain = cfg.world.terrain_height(state.position.x(), state.position.y());
                    row.clearance = state.position.z() - row.terrain;
                    row.mode = to_string(nav.mode());
                    row.denied = in_denied ? 1 : 0;
                    res.states.push_back(std::move(row));
                }
                if (nav.mode() == NavMode::done) break;
            }

            out = physics.evaluate(t, state, input, cfg.world, kDt);
            Wrench w = cfg.plant == PlantMode::stroke_resolved ? out.total
                                                                : control_wrench(input, P.wrench);
            w.force += state.rotation.transpose() * cfg.disturbance;
            state = step_rigid_body(state, w, veh, kDt);
            for (const ContactResult& c : out.contact)
                if (c.event) rep.max_penetration = std::max(rep.max_penetration, c.event->penetration);
            est = averager.push(state);

            if (k % kSampleEvery != 0) continue;
            const CurrentSample raw = sampler.sample(t, out.current[0], out.current[1]);
            CurrentSample f = raw;
            f.i_L = lpf[0].step(raw.i_L);
            f.i_R = lpf[1].step(raw.i_R);
            const double cyc = t * veh.wingbeat_hz;
            const long cycle = static_cast<long>(std::floor(cyc));
            const PhaseTag tag{cycle, cyc - cycle, {out.wings[0].half_stroke, out.wings[1].half_stroke}};
            v_sum += input.V_s;
            ++v_n;
            if (cfg.write_traces) {
                const ThresholdEval thr = threshold_at(input.V_s, res.thresholds);
                res.currents.push_back({t, raw.i_L, raw.i_R, f.i_L, f.i_R, thr.i_L, thr.i_R});
            }
            const auto beat = acc.push(f, tag);
            if (!beat) continue;

            const double V_mean = v_sum / v_n;
            v_sum = 0.0;
            v_n = 0;
            auto ev = detector.update(*beat, t);
            const ClearanceFeedback fb =
                clearance_feedback(*beat, V_mean, res.thresholds, cfg.sensing.deadband);
            const ControlRecord& rec = ctrl.last();
            BeatObservation obs;
            obs.t = t;
            obs.feedback = fb;
            obs.elevated = detector.current_signature();
            obs.tilt_error = rec.surfaces.attitude_error.head<2>().norm();
            const Vec3 pos(est_xy.x(), est_xy.y(), state.position.z());
            const double heading = state.yaw();
            if (ev) {
                ev->position = pos;
                ev->heading = heading;
                obs.event = ev;
                ++rep.collision_count;
            }
            const NavMode mode_before = nav.mode();
            const bool accepted = nav.on_wingbeat(obs, est_xy);
            if (ev) {
                std::string detail = accepted ? "avoid" : "ignored";
                if (ev->gust_possible) detail += "+gust_possible";
                if (accepted) {
                    const ObstaclePoint& o = update_map(res.map, *ev, pos, heading, veh.wing_length());
                    rep.obstacle_max_error =
                        std::max(rep.obstacle_max_error, nearest_wall(cfg.world.walls, Vec2(o.x, o.y)));
                }
                add_event(t, "collision", detail, est_xy, heading, to_string(ev->signature),
                          to_string(ev->direction));
            }
            const bool following = mode_before == NavMode::cruise || mode_before == NavMode::resume;
            if (following && obs.elevated == Signature::none && obs.tilt_error <= cfg.nav.max_tilt_error &&
                detector.baseline_ready()) {
                const TerrainSample& s = update_map(res.map, fb, pos, inv);
                const double e = s.h - cfg.world.terrain_height(s.x, s.y);
                terrain_err.push_back(e);
            }
            for (; seen_modes < nav.history().size(); ++seen_modes) {
                const ModeChange& m = nav.history()[seen_modes];
                add_event(m.t, "mode", std::string(to_string(m.from)) + "->" + to_string(m.to), est_xy,
                          heading);
            }
        }
    } catch (const Fault& f) {
        rep.fault = f.what();
        add_event(k * kDt, "fault", f.field(), state.position.head<2>(), state.yaw());
    }

    rep.mission_time = k * kDt;
    rep.aborted = nav.aborted();
    rep.final_error = (state.position.head<2>() - goal).norm();
    rep.success = rep.fault.empty() && !rep.aborted && nav.mode() == NavMode::done &&
                  rep.final_error <= cfg.limits.goal_tolerance;
    rep.clamp_count = ctrl.clamp_count();
    rep.avoid_cycles = nav.avoid_cycles();
    rep.gusts_rejected = nav.gusts_rejected();
    rep.terrain_samples = static_cast<int>(terrain_err.size());
    double ss = 0.0;
    for (double e : terrain_err) ss += e * e;
    rep.map_rms = terrain_err.empty() ? 0.0 : std::sqrt(ss / terrain_err.size());

    rep.metrics.push_back(make_metric("success", rep.success ? 1.0 : 0.0, 1.0, ">="));
    const MetricLimits& lim = cfg.limits;
    if (lim.map_rms_max) {
        rep.metrics.push_back(make_metric("map_rms", rep.map_rms, *lim.map_rms_max, "<="));
        rep.metrics.push_back(make_metric("terrain_samples", rep.terrain_samples, 1.0, ">="));
    }
    if (lim.min_collisions)
        rep.metrics.push_back(make_metric("collisions", rep.collision_count, *lim.min_collisions, ">="));
    if (lim.max_avoid_cycles)
        rep.metrics.push_back(make_metric("avoid_cycles", rep.avoid_cycles, *lim.max_avoid_cycles, "<="));
    if (lim.obstacle_tolerance)
        rep.metrics.push_back(
            make_metric("obstacle_max_error", rep.obstacle_max_error, *lim.obstacle_tolerance, "<="));

    rep.wall_clock =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    if (lim.max_runtime)
        rep.metrics.push_back(make_metric("runtime", rep.wall_clock, *lim.max_runtime, "<="));
    return res;
}

std::string report_text(const RunReport& r) {
    std::ostringstream os;
    os << "name = " << r.name << '\n'
       << "run_id = " << r.run_id << '\n'
       << "seed = " << r.seed << '\n'
       << "success = " << (r.success ? "true" : "false") << '\n'
       << "aborted = " << (r.aborted ? "true" : "false") << '\n'
       << "fault = \"" << r.fault << "\"\n"
       << "mission_time = " << format_double(r.mission_time) << '\n'
       << "map_rms = " << format_double(r.map_rms) << '\n'
       << "terrain_samples = " << r.terrain_samples << '\n'
       << "collision_count = " << r.collision_count << '\n'
       << "clamp_count = " << r.clamp_count << '\n'
       << "avoid_cycles = " << r.avoid_cycles << '\n'
       << "gusts_rejected = " << r.gusts_rejected << '\n'
       << "obstacle_max_error = " << format_double(r.obstacle_max_error) << '\n'
       << "final_error = " << format_double(r.final_error) << '\n'
       << "dead_reckon_time = " << format_double(r.dead_reckon_time) << '\n'
       << "max_penetration = " << format_double(r.max_penetration) << '\n';
    for (const auto& m : r.metrics) {
        if (m.name == "runtime") continue;
        os << "metric." << m.name << " = " << format_double(m.value) << " " << m.op << " "
           << format_double(m.limit) << (m.pass ? " pass" : " FAIL") << '\n';
    }
    return os.str();
}

std::string output_dir(const ScenarioConfig& cfg) {
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    const char* root = std::getenv("FWNAV_OUT");
    const std::filesystem::path base = root && *root ? root : "out";
    return (base / cfg.run_id).string();
}

void write_run(const RunResult& r, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path d(dir);
    {
        std::ostringstream os;
        write_states_csv(os, r.states);
        write_file(d / "states.csv", os.str());
    }
    {
        std::ostringstream os;
        write_currents_csv(os, r.currents);
        write_file(d / "currents.csv", os.str());
    }
    {
        std::ostringstream os;
        write_events_csv(os, r.events);
        write_file(d / "events.csv", os.str());
    }
    {
        std::ostringstream os;
        write_map_csv(os, r.map);
        write_file(d / "map.csv", os.str());
    }
    {
        std::ostringstream os;
        write_walls_csv(os, r.walls);
        write_file(d / "walls.csv", os.str());
    }
    write_file(d / "report.txt", report_text(r.report));
    write_file(d / "currents.svg", plot_currents(r.currents, r.events));
    write_file(d / "trajectory.svg", plot_trajectory(r.states, r.walls));
    write_file(d / "profile.svg", plot_profile(r.states));
    write_file(d / "map.svg", plot_map(r.map, r.states, r.walls));
}

void replay_plots(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path d(dir);
    const auto open = [&](const char* name) {
        std::ifstream in(d / name);
        if (!in) throw std::runtime_error("missing trace file " + (d / name).string());
        return in;
    };
    auto s_in = open("states.csv");
    auto c_in = open("currents.csv");
    auto e_in = open("events.csv");
    auto m_in = open("map.csv");
    auto w_in = open("walls.csv");
    const auto states = read_states_csv(s_in);
    const auto currents = read_currents_csv(c_in);
    const auto events = read_events_csv(e_in);
    const auto map = read_map_csv(m_in);
    const auto walls = read_walls_csv(w_in);
    write_file(d / "currents.svg", plot_currents(currents, events));
    write_file(d / "trajectory.svg", plot_trajectory(states, walls));
    write_file(d / "profile.svg", plot_profile(states));
    write_file(d / "map.svg", plot_map(map, states, walls));
}

}  // namespace fwnav

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "fwnav/calibration.hpp"
#include "fwnav/config.hpp"
#include "fwnav/navigation.hpp"
#include "fwnav/scenario.hpp"
#include "loop_support.hpp"

using namespace fwnav;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void check(bool ok, const char* fmt, auto... args) {
        char buf[256];
        std::snprintf(buf, sizeof buf, fmt, args...);
        if (!detail.empty()) detail += "; ";
        detail += buf;
        if (!ok) {
            detail += " [x]";
            pass = false;
        }
    }
};

int failures = 0;

void report(int n, const char* title, const Verdict& v) {
    std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", n, title, v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failures;
}

ScenarioConfig scenario(const char* name) {
    ScenarioConfig c = load_config_file(std::string(FWNAV_SCENARIO_DIR) + "/" + name);
    c.write_traces = false;
    return c;
}

double penetration_limit(const ScenarioConfig& c) { return 0.2 * c.platform.vehicle.wing_length(); }

Verdict ramp() {
    Verdict v;
    const ScenarioConfig c = scenario("ramp.cfg");
    const RunReport r = run_scenario(c).report;
    v.check(r.success, "reached goal=%d", int(r.success));
    v.check(r.map_rms <= 0.02, "terrain RMS %.4f m (<= 0.02)", r.map_rms);
    v.check(r.wall_clock < 60.0, "runtime %.1f s (< 60)", r.wall_clock);
    v.check(r.max_penetration < penetration_limit(c), "max penetration %.4f m", r.max_penetration);
    return v;
}

Verdict ground_effect() {
    Verdict v;
    const GroundEffectSweep s = ground_effect_sweep(default_platform());
    double lift_dev = 0.0, cur_dev = 0.0;
    for (std::size_t k = 0; k < s.voltages.size(); ++k) {
        lift_dev = std::max(lift_dev, std::abs(s.lift_peak[k] - 3.3));
        cur_dev = std::max(cur_dev, std::abs(s.current_min[k] - 2.3));
    }
    v.check(lift_dev <= 0.05, "lift peak within %.3f of D/c=3.3", lift_dev);
    v.check(cur_dev <= 0.05, "current minimum within %.3f of D/c=2.3", cur_dev);
    const ThresholdModel& m = s.thresholds;
    v.check(m.r2_L >= 0.99 && m.r2_R >= 0.99, "R2 %.4f / %.4f", m.r2_L, m.r2_R);
    const ThresholdEval e = threshold_at(12.0, m);
    v.check(std::abs(e.i_L / 0.242 - 1.0) <= 0.10, "i_L(12 V) %.4f A", e.i_L);
    v.check(std::abs(e.i_R / 0.205 - 1.0) <= 0.10, "i_R(12 V) %.4f A", e.i_R);
    return v;
}

Verdict collision_signature() {
    Verdict v;
    Platform pl = default_platform();
    pl.contact.stiffness = calibrate_contact_stiffness(pl);
    const auto rise = contact_rise(pl, {stand_wall(Direction::front, pl, 12.0, 0.005)});
    const double mean_rise = 0.5 * (rise[0] + rise[1]);
    v.check(std::abs(mean_rise - 0.10) <= 0.01, "k_c %.2f N/m gives rise %.2f%%", pl.contact.stiffness,
            100.0 * mean_rise);

    constexpr std::array dirs{Direction::front,      Direction::back,      Direction::front_left,
                              Direction::back_left,  Direction::front_right, Direction::back_right};
    StandOptions free_opt;
    free_opt.beats = 10;
    const StandResult free = run_stand(pl, free_opt);
    int clean = 0;
    for (Direction d : dirs) {
        StandOptions o;
        o.walls = {stand_wall(d, pl, 12.0, 0.005)};
        const auto ev = detect_collision(run_stand(pl, o).stats, free.stats);
        clean += ev && ev->direction == d;
    }
    v.check(clean == 6, "noise-free %d/6", clean);

    const double sigma = 0.02 * 0.5 * (free.stats.wing[0].mean + free.stats.wing[1].mean);
    constexpr int trials = 1000;
    int hits = 0;
    for (int j = 0; j < trials; ++j) {
        const Direction d = dirs[j % 6];
        StandOptions base = free_opt;
        base.noise_sigma = sigma;
        base.seed = 1000 + 2 * j;
        StandOptions hit;
        hit.walls = {stand_wall(d, pl, 12.0, 0.005)};
        hit.noise_sigma = sigma;
        hit.seed = 1001 + 2 * j;
        const auto ev = detect_collision(run_stand(pl, hit).stats, run_stand(pl, base).stats);
        hits += ev && ev->direction == d;
    }
    v.check(hits >= 950, "noisy %d/%d", hits, trials);
    return v;
}

Verdict wall() {
    Verdict v;
    const ScenarioConfig c = scenario("wall.cfg");
    const RunReport r = run_scenario(c).report;
    v.check(r.success, "reached goal=%d (final error %.3f m)", int(r.success), r.final_error);
    v.check(r.collision_count >= 1, "%d collisions", r.collision_count);
    v.check(r.avoid_cycles <= 10, "%d retreat/shift cycles", r.avoid_cycles);
    v.check(r.obstacle_max_error <= 0.085, "worst obstacle point %.4f m off the panel", r.obstacle_max_error);
    v.check(r.max_penetration < penetration_limit(c), "max penetration %.4f m", r.max_penetration);
    return v;
}

Verdict corridor() {
    Verdict v;
    const ScenarioConfig base = scenario("corridor.cfg");
    int ok = 0, denied_ok = 0;
    double worst_pen = 0.0;
    std::vector<MapEstimate> maps;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        ScenarioConfig c = base;
        c.seed = seed;
        RunResult res = run_scenario(c);
        ok += res.report.success && res.report.all_pass();
        denied_ok += res.report.dead_reckon_time > 0.0;
        worst_pen = std::max(worst_pen, res.report.max_penetration);
        if (seed <= 4) maps.push_back(std::move(res.map));
    }
    v.check(ok >= 19, "success %d/20", ok);
    v.check(denied_ok == 20, "dead reckoning used in %d/20", denied_ok);
    std::size_t best_single = 0;
    for (const MapEstimate& m : maps)
        best_single = std::max(best_single, distinct_obstacle_points(std::span(&m, 1)));
    const std::size_t uni = distinct_obstacle_points(maps);
    v.check(uni > best_single, "union of 4 runs %zu points vs best single %zu", uni, best_single);
    v.check(worst_pen < penetration_limit(base), "max penetration %.4f m", worst_pen);
    return v;
}

Verdict controller() {
    using namespace fwnav::testing;
    Verdict v;
    const Platform pl = default_platform();
    double worst_settle = 0.0;
    bool settled = true;
    for (double d : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        LoopOptions o;
        o.z0 = o.z_ref + 0.05;
        o.d_z = d * o.gains.h_z;
        o.duration = 3.0;
        double settle = -1.0;
        for (const LoopSample& s : run_hover_loop(pl, o))
            if (std::abs(s.e_z) > 0.005) settle = -1.0;
            else if (settle < 0.0) settle = s.t;
        settled = settled && settle >= 0.0;
        worst_settle = std::max(worst_settle, settle);
    }
    v.check(settled && worst_settle <= 2.0, "settles in %.3f s", worst_settle);

    int rises = 0, samples = 0;
    for (const Vec3& att : {Vec3(0.0, 0.0, 0.0), Vec3(0.08, -0.05, 0.3), Vec3(-0.1, 0.1, -1.0)}) {
        LoopOptions o;
        o.z0 = o.z_ref + 0.05;
        o.euler0 = att;
        o.omega0 = Vec3(0.2, -0.1, 0.05);
        o.duration = 1.5;
        const auto log = run_hover_loop(pl, o);
        for (std::size_t k = 1; k < log.size(); ++k, ++samples)
            rises += log[k].lyapunov > log[k - 1].lyapunov;
    }
    v.check(rises == 0, "Lyapunov rose in %d of %d periods", rises, samples);

    double worst = 0.0;
    LoopOptions o;
    o.d_z = 0.7 * o.gains.h_z;
    o.euler0 = Vec3(0.05, -0.04, 0.2);
    const ControllerGains& g = o.gains;
    for (const LoopSample& s : run_hover_loop(pl, o)) {
        if (s.command.clamped) continue;
        worst = std::max(worst, std::abs(s.command.u_zr + g.h_z * g.h_z * s.surfaces.s_z / (4.0 * g.eps_z)));
        for (int i = 0; i < 3; ++i)
            worst = std::max(worst, std::abs(s.command.u_wr(i) + g.h_w(i) * g.h_w(i) * s.surfaces.s_w(i) /
                                                                     (4.0 * g.eps_w(i))));
    }
    v.check(worst == 0.0, "robust-term audit max deviation %.3g", worst);
    return v;
}

Verdict numerics() {
    Verdict v;
    const Platform pl = default_platform();
    VehicleState s;
    s.omega_body = Vec3(3.0, -2.0, 5.0);
    Wrench w;
    w.torque = Vec3(1e-6, -2e-6, 5e-7);
    w.force = Vec3(0.0, 0.0, pl.vehicle.weight());
    double worst = 0.0;
    for (int k = 0; k < 1'000'000; ++k) {
        s = step_rigid_body(s, w, pl.vehicle, 1e-4);
        worst = std::max(worst, orthonormality_error(s.rotation));
        if (std::abs(s.omega_body.norm()) > 50.0) s.omega_body *= 0.5;
    }
    v.check(worst <= 1e-9, "orthonormality %.2e over 1e6 steps", worst);

    DeadReckonPose p;
    long double rx = 0.0L, ry = 0.0L;
    for (int k = 0; k < 10000; ++k) {
        const double psi = 0.0007 * k - 1.0;
        const Vec2 d(1e-3 * (1.0 + 0.3 * std::cos(0.013 * k)), -3e-4);
        p = dead_reckon(p, psi, d);
        const long double c = std::cos(static_cast<long double>(psi)), sn = std::sin(static_cast<long double>(psi));
        rx += c * d.x() - sn * d.y();
        ry += sn * d.x() + c * d.y();
    }
    const double dr = std::hypot(p.x - static_cast<double>(rx), p.y - static_cast<double>(ry));
    v.check(dr <= 1e-9, "dead-reckoning error %.2e over 1e4 steps", dr);

    ScenarioConfig c = scenario("wall.cfg");
    c.duration = 4.0;
    const RunResult a = run_scenario(c), b = run_scenario(c);
    const bool same = report_text(a.report) == report_text(b.report) && a.states.size() == b.states.size() &&
                      std::equal(a.currents.begin(), a.currents.end(), b.currents.begin(),
                                 [](const CurrentRow& x, const CurrentRow& y) {
                                     return x.t == y.t && x.raw_L == y.raw_L && x.raw_R == y.raw_R;
                                 });
    v.check(same, "fixed-seed reruns identical=%d", int(same));
    return v;
}

Verdict signal_chain() {
    Verdict v;
    const LowPassFilter f;
    v.check(std::abs(f.gain(0.0) - 1.0) < 1e-12, "DC gain %.6f", f.gain(0.0));
    v.check(std::abs(f.gain(200.0) * std::sqrt(2.0) - 1.0) <= 0.02, "200 Hz gain %.4f", f.gain(200.0));
    v.check(f.gain(34.0) >= 0.98, "34 Hz gain %.4f", f.gain(34.0));

    const ThresholdModel m = reference_thresholds();
    const ThresholdEval thr = threshold_at(12.0, m);
    auto dz = [&](double r) {
        StrokeStats st;
        st.wing[0].mean = r * thr.i_L;
        st.wing[1].mean = r * thr.i_R;
        return terrain_feedforward(clearance_feedback(st, 12.0, m), 0.2).delta_z;
    };
    int nonzero = 0;
    for (int k = 0; k <= 10000; ++k) nonzero += dz(0.75 + 0.25 * k / 10000.0) != 0.0;
    double jump = 0.0;
    for (double edge : {0.75, 1.0}) jump = std::max({jump, std::abs(dz(edge + 1e-9)), std::abs(dz(edge - 1e-9))});
    v.check(nonzero == 0, "%d nonzero outputs inside the band", nonzero);
    v.check(jump < 1e-9, "edge step %.2e", jump);
    return v;
}

}  // namespace

int main() {
    report(1, "ramp terrain following", ramp());
    report(2, "ground-effect calibration", ground_effect());
    report(3, "collision signature", collision_signature());
    report(4, "wall bypass", wall());
    report(5, "corridor traversal", corridor());
    report(6, "controller properties", controller());
    report(7, "numerical hygiene", numerics());
    report(8, "signal chain", signal_chain());
    return failures == 0 ? 0 : 1;
}

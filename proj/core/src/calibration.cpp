#include "fwnav/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fwnav/error.hpp"

namespace fwnav {

namespace {

constexpr double kPhysicsDt = 1e-4;
constexpr int kSampleEvery = 5;  // physics steps per current sample

StrokeStats average(const std::vector<StrokeStats>& beats) {
    StrokeStats out;
    for (const auto& b : beats) {
        for (int w = 0; w < 2; ++w) {
            out.wing[w].mean += b.wing[w].mean;
            out.wing[w].up += b.wing[w].up;
            out.wing[w].down += b.wing[w].down;
        }
        out.last_cycle = b.last_cycle;
    }
    const double inv = beats.empty() ? 0.0 : 1.0 / static_cast<double>(beats.size());
    for (auto& c : out.wing) {
        c.mean *= inv;
        c.up *= inv;
        c.down *= inv;
    }
    out.wingbeats = static_cast<int>(beats.size());
    return out;
}

struct LineFit {
    double slope = 0.0, intercept = 0.0, r2 = 1.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LineFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    const double mean = sy / n;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.slope * x[i] + f.intercept);
        ss_res += r * r;
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

}  // namespace

StandResult run_stand(const Platform& p, const StandOptions& opt) {
    if (opt.beats < 1) throw Fault("stand.beats", "must be at least one");
    World world;
    world.walls = opt.walls;
    VehicleState state;
    state.position = Vec3(0.0, 0.0, opt.clearance * p.vehicle.mean_chord);

    FlightPhysics physics(p);
    CurrentSampler sampler(opt.noise_sigma, opt.seed);
    std::array<LowPassFilter, 2> filters{LowPassFilter(opt.cutoff_hz), LowPassFilter(opt.cutoff_hz)};
    StrokeAccumulator acc;
    StandResult out;

    const double f = p.vehicle.wingbeat_hz;
    const int total_beats = opt.beats + opt.settle_beats;
    const long steps = std::lround(total_beats / f / kPhysicsDt) + kSampleEvery;
    std::array<double, 2> lift_sum{0.0, 0.0};
    long lift_n = 0;
    for (long k = 0; k < steps; ++k) {
        const double t = k * kPhysicsDt;
        const PhysicsStep s = physics.evaluate(t, state, opt.input, world, kPhysicsDt);
        const double cycle_pos = t * f;
        const long cycle = static_cast<long>(std::floor(cycle_pos));
        if (cycle >= opt.settle_beats && cycle < total_beats) {
            lift_sum[0] += s.aero.lift[0];
            lift_sum[1] += s.aero.lift[1];
            ++lift_n;
        }
        if (k % kSampleEvery != 0) continue;
        CurrentSample raw = sampler.sample(t, s.current[0], s.current[1]);
        raw.i_L = filters[0].step(raw.i_L);
        raw.i_R = filters[1].step(raw.i_R);
        PhaseTag tag{cycle, cycle_pos - cycle, {s.wings[0].half_stroke, s.wings[1].half_stroke}};
        out.samples.push_back(raw);
        out.tags.push_back(tag);
        if (auto beat = acc.push(raw, tag); beat && beat->last_cycle >= opt.settle_beats)
            out.per_beat.push_back(*beat);
    }
    if (out.per_beat.size() > static_cast<std::size_t>(opt.beats))
        out.per_beat.resize(opt.beats);
    if (out.per_beat.empty()) throw Fault("stand.beats", "no complete wingbeat recorded");
    out.stats = average(out.per_beat);
    for (int w = 0; w < 2; ++w) out.lift[w] = lift_n ? lift_sum[w] / lift_n : 0.0;
    return out;
}

WallPanel stand_wall(Direction dir, const Platform& p, double V_s, double penetration) {
    if (dir == Direction::unset) throw Fault("direction", "unset direction has no wall");
    const double amp = p.aero.amplitude_per_volt * V_s;
    const double len = p.vehicle.wing_length();
    const bool front = dir == Direction::front || dir == Direction::front_left ||
                       dir == Direction::front_right;
    const double x = (len * std::sin(amp) - penetration) * (front ? 1.0 : -1.0);
    // Full-width panels catch both wings; half panels only one side.
    double y0 = -0.3, y1 = 0.3;
    if (dir == Direction::front_left || dir == Direction::back_left) y0 = 0.005;
    if (dir == Direction::front_right || dir == Direction::back_right) y1 = -0.005;
    WallPanel w;
    w.a = Vec2(x, y0);
    w.b = Vec2(x, y1);
    w.z_bottom = 0.0;
    w.z_top = 1.0;
    return w;
}

std::array<double, 2> contact_rise(const Platform& p, const std::vector<WallPanel>& walls, double V_s) {
    StandOptions free;
    free.input.V_s = V_s;
    free.beats = 2;
    StandOptions hit = free;
    hit.walls = walls;
    const StrokeStats a = run_stand(p, free).stats;
    const StrokeStats b = run_stand(p, hit).stats;
    return {b.wing[0].mean / a.wing[0].mean - 1.0, b.wing[1].mean / a.wing[1].mean - 1.0};
}

double calibrate_contact_stiffness(const Platform& base, double target, double penetration,
                                   double V_s) {
    Platform p = base;
    const std::vector<WallPanel> walls{stand_wall(Direction::front, p, V_s, penetration)};
    const auto rise = [&](double k) {
        p.contact.stiffness = k;
        const auto r = contact_rise(p, walls, V_s);
        return 0.5 * (r[0] + r[1]);
    };
    double lo = 0.0, hi = 10.0;
    while (rise(hi) < target) {
        hi *= 2.0;
        if (hi > 1e7) throw Fault("contact.stiffness", "target rise unreachable");
    }
    for (int i = 0; i < 40; ++i) {
        const double mid = 0.5 * (lo + hi);
        (rise(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double relative_current_slope(const Platform& p, double V_s) {
    const double h = 0.1;
    const auto mean_at = [&](double D) {
        StandOptions o;
        o.clearance = D;
        o.input.V_s = V_s;
        o.beats = 1;
        return run_stand(p, o).stats;
    };
    const StrokeStats ref = mean_at(p.reference_clearance);
    const StrokeStats hi = mean_at(p.reference_clearance + h);
    const StrokeStats lo = mean_at(p.reference_clearance - h);
    double slope = 0.0;
    for (int w = 0; w < 2; ++w)
        slope += (hi.wing[w].mean - lo.wing[w].mean) / (2.0 * h * p.vehicle.mean_chord) / ref.wing[w].mean;
    return 0.5 * slope;
}

ThresholdModel stand_thresholds(const Platform& p, const std::vector<double>& voltages, int datasets,
                                int beats, double noise_sigma, std::uint64_t seed) {
    std::vector<CalibrationPoint> pts;
    std::uint64_t s = seed;
    for (double V : voltages) {
        for (int d = 0; d < datasets; ++d) {
            StandOptions o;
            o.clearance = p.reference_clearance;
            o.input.V_s = V;
            o.beats = beats;
            o.noise_sigma = noise_sigma;
            o.seed = s++;
            pts.push_back({V, run_stand(p, o).stats});
        }
    }
    ThresholdModel m = calibrate_thresholds(pts);
    m.V_min = *std::min_element(voltages.begin(), voltages.end());
    m.V_max = *std::max_element(voltages.begin(), voltages.end());
    return m;
}

GroundEffectSweep ground_effect_sweep(const Platform& p, const GroundEffectSweepOptions& opt) {
    GroundEffectSweep out;
    out.voltages = opt.voltages;
    for (double D = opt.coarse_max; D > opt.fine_max + 1e-9; D -= opt.coarse_step) out.clearances.push_back(D);
    const int fine_n = static_cast<int>(std::lround((opt.fine_max - opt.fine_min) / opt.fine_step));
    for (int k = fine_n; k >= 0; --k) out.clearances.push_back(opt.fine_min + k * opt.fine_step);

    for (double V : opt.voltages) {
        std::vector<double> lift, iL, iR;
        for (double D : out.clearances) {
            StandOptions o;
            o.clearance = D;
            o.input.V_s = V;
            o.beats = 1;
            const StandResult r = run_stand(p, o);
            lift.push_back(r.lift[0] + r.lift[1]);
            iL.push_back(r.stats.wing[0].mean);
            iR.push_back(r.stats.wing[1].mean);
        }
        const auto imax = std::max_element(lift.begin(), lift.end()) - lift.begin();
        std::size_t imin = 0;
        for (std::size_t k = 1; k < iL.size(); ++k)
            if (iL[k] + iR[k] < iL[imin] + iR[imin]) imin = k;
        out.lift_peak.push_back(out.clearances[imax]);
        out.current_min.push_back(out.clearances[imin]);
        out.lift.push_back(std::move(lift));
        out.current_L.push_back(std::move(iL));
        out.current_R.push_back(std::move(iR));
    }

    const ThresholdEval ref = threshold_at(12.0, reference_thresholds());
    const double sigma = opt.noise_rel * 0.5 * (ref.i_L + ref.i_R);
    std::uint64_t seed = opt.seed;
    for (double V : opt.voltages) {
        for (int d = 0; d < opt.datasets; ++d) {
            StandOptions o;
            o.clearance = p.reference_clearance;
            o.input.V_s = V;
            o.beats = opt.beats;
            o.noise_sigma = sigma;
            o.seed = seed++;
            out.points.push_back({V, run_stand(p, o).stats});
        }
    }
    out.thresholds = calibrate_thresholds(out.points);
    out.thresholds.V_min = *std::min_element(opt.voltages.begin(), opt.voltages.end());
    out.thresholds.V_max = *std::max_element(opt.voltages.begin(), opt.voltages.end());
    out.rel_slope = relative_current_slope(p);
    return out;
}

CollisionBoundSweep collision_bound_sweep(const Platform& p, std::vector<double> voltages,
                                          double penetration) {
    CollisionBoundSweep out;
    out.voltages = voltages;
    const Direction dirs[4] = {Direction::front_left, Direction::back_left, Direction::front_right,
                               Direction::back_right};
    const auto channel = [](const StrokeStats& s, int c) {
        const ChannelStats& w = s.wing[c / 2];
        return c % 2 == 0 ? w.up : w.down;
    };
    for (double V : voltages) {
        StandOptions o;
        o.input.V_s = V;
        o.beats = 2;
        const StrokeStats free = run_stand(p, o).stats;
        std::array<double, 4> b{}, f{};
        for (int c = 0; c < 4; ++c) {
            StandOptions hit = o;
            hit.walls = {stand_wall(dirs[c], p, V, penetration)};
            b[c] = channel(run_stand(p, hit).stats, c);
            f[c] = channel(free, c);
        }
        out.bound.push_back(b);
        out.free.push_back(f);
    }
    for (int c = 0; c < 4; ++c) {
        std::vector<double> y;
        for (const auto& b : out.bound) y.push_back(b[c]);
        const LineFit fit = fit_line(voltages, y);
        out.slope[c] = fit.slope;
        out.intercept[c] = fit.intercept;
        out.r2[c] = fit.r2;
    }
    return out;
}

}  // namespace fwnav

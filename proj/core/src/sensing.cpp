#include "fwnav/sensing.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <set>

#include "fwnav/error.hpp"

namespace fwnav {

LowPassFilter::LowPassFilter(double cutoff_hz, double sample_hz) {
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * sample_hz))
        throw Fault("cutoff_hz", "must lie in (0, Nyquist)");
    fs_ = sample_hz;
    k_ = std::tan(std::numbers::pi * cutoff_hz / sample_hz);
    b_ = k_ / (1.0 + k_);
    a_ = (k_ - 1.0) / (k_ + 1.0);
}

double LowPassFilter::step(double x) {
    if (!primed_) reset(x);
    const double y = b_ * (x + x_prev_) - a_ * y_prev_;
    x_prev_ = x;
    y_prev_ = y;
    return y;
}

void LowPassFilter::reset(double value) {
    x_prev_ = value;
    y_prev_ = value;
    primed_ = true;
}

double LowPassFilter::gain(double f) const {
    const std::complex<double> z_inv = std::polar(1.0, -2.0 * std::numbers::pi * f / fs_);
    return std::abs(b_ * (1.0 + z_inv) / (1.0 + a_ * z_inv));
}

std::vector<CurrentSample> lowpass(std::span<const CurrentSample> samples, double cutoff_hz) {
    std::vector<CurrentSample> out;
    out.reserve(samples.size());
    if (samples.empty()) return out;
    double fs = kSampleRateHz;
    if (samples.size() > 1) fs = 1.0 / (samples[1].t - samples[0].t);
    LowPassFilter left(cutoff_hz, fs), right(cutoff_hz, fs);
    for (const auto& s : samples) out.push_back({s.t, left.step(s.i_L), right.step(s.i_R)});
    return out;
}

namespace {

struct CycleAccum {
    std::array<double, 2> sum{}, up{}, down{};
    std::array<int, 2> n_up{}, n_down{};
    int n = 0;
    double first_phase = 1.0;
    double last_phase = 0.0;
    double first_t = 0.0;
    double last_t = 0.0;

    void add(const CurrentSample& s, const PhaseTag& tag) {
        if (n == 0) {
            first_phase = tag.phase;
            first_t = s.t;
        }
        last_phase = tag.phase;
        last_t = s.t;
        const std::array<double, 2> v{s.i_L, s.i_R};
        for (int w = 0; w < 2; ++w) {
            sum[w] += v[w];
            if (tag.half[w] == HalfStroke::upstroke) {
                up[w] += v[w];
                ++n_up[w];
            } else {
                down[w] += v[w];
                ++n_down[w];
            }
        }
        ++n;
    }
};

ChannelStats channel(const CycleAccum& c, int w) {
    ChannelStats st;
    st.mean = c.sum[w] / c.n;
    st.up = c.n_up[w] ? c.up[w] / c.n_up[w] : st.mean;
    st.down = c.n_down[w] ? c.down[w] / c.n_down[w] : st.mean;
    return st;
}

}  // namespace

StrokeStats stroke_stats(std::span<const CurrentSample> samples, std::span<const PhaseTag> phases,
                         int window) {
    if (samples.size() != phases.size()) throw Fault("phases", "must match samples in length");
    if (window < 1) throw Fault("window", "must be at least one wingbeat");
    std::map<long, CycleAccum> cycles;
    for (std::size_t k = 0; k < samples.size(); ++k) cycles[phases[k].cycle].add(samples[k], phases[k]);

    // Sampling interval and wingbeat period inferred from the stream.
    double ts = 1.0 / kSampleRateHz;
    double period = 0.0;
    for (std::size_t k = 1; k < samples.size(); ++k) {
        if (phases[k].cycle == phases[k - 1].cycle && phases[k].phase > phases[k - 1].phase) {
            ts = samples[k].t - samples[k - 1].t;
            period = ts / (phases[k].phase - phases[k - 1].phase);
            break;
        }
    }

    std::vector<const CycleAccum*> complete;
    std::vector<long> ids;
    for (const auto& [id, c] : cycles) {
        if (period <= 0.0) break;
        const double tol = ts * (1.0 + 1e-9);
        if (c.first_phase * period <= tol && (1.0 - c.last_phase) * period <= tol) {
            complete.push_back(&c);
            ids.push_back(id);
        }
    }
    if (complete.empty()) throw Fault("window", "no complete wingbeat in the stream");

    const std::size_t use = std::min<std::size_t>(window, complete.size());
    CycleAccum total;
    for (std::size_t k = complete.size() - use; k < complete.size(); ++k) {
        const CycleAccum& c = *complete[k];
        for (int w = 0; w < 2; ++w) {
            total.sum[w] += c.sum[w];
            total.up[w] += c.up[w];
            total.down[w] += c.down[w];
            total.n_up[w] += c.n_up[w];
            total.n_down[w] += c.n_down[w];
        }
        total.n += c.n;
    }
    StrokeStats out;
    out.wing = {channel(total, 0), channel(total, 1)};
    out.wingbeats = static_cast<int>(use);
    out.last_cycle = ids.back();
    return out;
}

void StrokeAccumulator::clear() {
    sum_ = {};
    up_ = {};
    down_ = {};
    n_up_ = {};
    n_down_ = {};
    n_ = 0;
}

std::optional<StrokeStats> StrokeAccumulator::push(const CurrentSample& s, const PhaseTag& tag) {
    std::optional<StrokeStats> out;
    if (tag.cycle != cycle_) {
        if (!first_ && n_ > 0) {
            StrokeStats st;
            for (int w = 0; w < 2; ++w) {
                st.wing[w].mean = sum_[w] / n_;
                st.wing[w].up = n_up_[w] ? up_[w] / n_up_[w] : st.wing[w].mean;
                st.wing[w].down = n_down_[w] ? down_[w] / n_down_[w] : st.wing[w].mean;
            }
            st.wingbeats = 1;
            st.last_cycle = cycle_;
            out = st;
        }
        // Joining mid-wingbeat leaves the first cycle partial.
        first_ = (cycle_ == -1) && tag.phase > 0.02;
        cycle_ = tag.cycle;
        clear();
    }
    const std::array<double, 2> v{s.i_L, s.i_R};
    for (int w = 0; w < 2; ++w) {
        sum_[w] += v[w];
        if (tag.half[w] == HalfStroke::upstroke) {
            up_[w] += v[w];
            ++n_up_[w];
        } else {
            down_[w] += v[w];
            ++n_down_[w];
        }
    }
    ++n_;
    return out;
}

ThresholdModel reference_thresholds() {
    ThresholdModel m;
    m.slope_L = 0.015;
    m.intercept_L = 0.062;
    m.slope_R = 0.014;
    m.intercept_R = 0.037;
    return m;
}

ThresholdEval threshold_at(double V_s, const ThresholdModel& m) {
    ThresholdEval e;
    e.i_L = m.slope_L * V_s + m.intercept_L;
    e.i_R = m.slope_R * V_s + m.intercept_R;
    e.extrapolated = V_s < m.V_min || V_s > m.V_max;
    return e;
}

ThresholdModel calibrate_thresholds(std::span<const CalibrationPoint> runs) {
    std::set<double> distinct;
    for (const auto& r : runs) distinct.insert(r.V_s);
    if (distinct.size() < 2) throw Fault("calibration", "need at least two distinct voltages");

    const auto fit = [&](int w, double& slope, double& intercept, double& r2) {
        const double n = static_cast<double>(runs.size());
        double sx = 0, sy = 0;
        for (const auto& r : runs) {
            sx += r.V_s;
            sy += r.stats.wing[w].mean;
        }
        const double mx = sx / n, my = sy / n;
        double sxx = 0, sxy = 0, syy = 0;
        for (const auto& r : runs) {
            const double dx = r.V_s - mx, dy = r.stats.wing[w].mean - my;
            sxx += dx * dx;
            sxy += dx * dy;
            syy += dy * dy;
        }
        slope = sxy / sxx;
        intercept = my - slope * mx;
        double ss_res = 0;
        for (const auto& r : runs) {
            const double e = r.stats.wing[w].mean - (slope * r.V_s + intercept);
            ss_res += e * e;
        }
        r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    };
    ThresholdModel m;
    fit(0, m.slope_L, m.intercept_L, m.r2_L);
    fit(1, m.slope_R, m.intercept_R, m.r2_R);
    m.V_min = *distinct.begin();
    m.V_max = *distinct.rbegin();
    return m;
}

ClearanceFeedback clearance_feedback(const StrokeStats& stats, double V_s,
                                     const ThresholdModel& model, const Deadband& band) {
    const ThresholdEval thr = threshold_at(V_s, model);
    const std::array<double, 2> limit{thr.i_L, thr.i_R};
    ClearanceFeedback fb;
    for (int w = 0; w < 2; ++w) {
        const double i = stats.wing[w].mean;
        fb.ratio[w] = i / limit[w];
        if (i > band.upper * limit[w]) {
            fb.wing_band[w] = Band::above_band;
            fb.excess[w] = i - band.upper * limit[w];
        } else if (i < band.lower * limit[w]) {
            fb.wing_band[w] = Band::below_band;
            fb.excess[w] = i - band.lower * limit[w];
        } else {
            fb.wing_band[w] = Band::in_band;
            fb.excess[w] = 0.0;
        }
    }
    if (fb.wing_band[0] == Band::in_band && fb.wing_band[1] == Band::in_band) {
        fb.band = Band::in_band;
    } else {
        fb.band = fb.mean_excess() > 0.0 ? Band::above_band : Band::below_band;
    }
    return fb;
}

const char* to_string(Signature s) {
    switch (s) {
        case Signature::none: return "none";
        case Signature::L_up: return "L-up";
        case Signature::L_down: return "L-down";
        case Signature::R_up: return "R-up";
        case Signature::R_down: return "R-down";
        case Signature::both_up: return "both-up";
        case Signature::both_down: return "both-down";
        case Signature::unclassified: return "unclassified";
    }
    return "?";
}

const char* to_string(Direction d) {
    switch (d) {
        case Direction::unset: return "unset";
        case Direction::front: return "front";
        case Direction::back: return "back";
        case Direction::front_left: return "front-left";
        case Direction::back_left: return "back-left";
        case Direction::front_right: return "front-right";
        case Direction::back_right: return "back-right";
    }
    return "?";
}

const char* to_string(Band b) {
    switch (b) {
        case Band::below_band: return "below_band";
        case Band::in_band: return "in_band";
        case Band::above_band: return "above_band";
    }
    return "?";
}

double direction_bearing(Direction d) {
    constexpr double q = std::numbers::pi / 4.0;
    switch (d) {
        case Direction::front: return 0.0;
        case Direction::front_left: return q;
        case Direction::back_left: return 3.0 * q;
        case Direction::back: return std::numbers::pi;
        case Direction::back_right: return -3.0 * q;
        case Direction::front_right: return -q;
        case Direction::unset: break;
    }
    return 0.0;
}

std::optional<CollisionEvent> detect_collision(const StrokeStats& stats,
                                               const StrokeStats& baseline,
                                               double rel_threshold) {
    const auto rel = [](double v, double base) { return base > 0.0 ? v / base - 1.0 : 0.0; };
    const double lu = rel(stats.wing[0].up, baseline.wing[0].up);
    const double ld = rel(stats.wing[0].down, baseline.wing[0].down);
    const double ru = rel(stats.wing[1].up, baseline.wing[1].up);
    const double rd = rel(stats.wing[1].down, baseline.wing[1].down);

    unsigned mask = 0;
    if (lu > rel_threshold) mask |= kLeftUp;
    if (ld > rel_threshold) mask |= kLeftDown;
    if (ru > rel_threshold) mask |= kRightUp;
    if (rd > rel_threshold) mask |= kRightDown;
    if (mask == 0) return std::nullopt;

    CollisionEvent ev;
    ev.channels = mask;
    switch (mask) {
        case kLeftUp | kRightUp:
            ev.signature = Signature::both_up;
            ev.direction = Direction::front;
            ev.gust_possible = true;
            break;
        case kLeftDown | kRightDown:
            ev.signature = Signature::both_down;
            ev.direction = Direction::back;
            ev.gust_possible = true;
            break;
        case kLeftUp: ev.signature = Signature::L_up; break;
        case kLeftDown: ev.signature = Signature::L_down; break;
        case kRightUp: ev.signature = Signature::R_up; break;
        case kRightDown: ev.signature = Signature::R_down; break;
        // A flank contact can load both halves of one wing; the dominant
        // half decides the quadrant.
        case kLeftUp | kLeftDown: ev.signature = lu >= ld ? Signature::L_up : Signature::L_down; break;
        case kRightUp | kRightDown: ev.signature = ru >= rd ? Signature::R_up : Signature::R_down; break;
        default: ev.signature = Signature::unclassified; break;
    }
    switch (ev.signature) {
        case Signature::L_up: ev.direction = Direction::front_left; break;
        case Signature::L_down: ev.direction = Direction::back_left; break;
        case Signature::R_up: ev.direction = Direction::front_right; break;
        case Signature::R_down: ev.direction = Direction::back_right; break;
        default: break;
    }
    return ev;
}

StrokeStats CollisionDetector::baseline() const {
    StrokeStats b;
    if (history_.empty()) return b;
    for (const auto& s : history_) {
        for (int w = 0; w < 2; ++w) {
            b.wing[w].mean += s.wing[w].mean;
            b.wing[w].up += s.wing[w].up;
            b.wing[w].down += s.wing[w].down;
        }
    }
    const double inv = 1.0 / static_cast<double>(history_.size());
    for (int w = 0; w < 2; ++w) {
        b.wing[w].mean *= inv;
        b.wing[w].up *= inv;
        b.wing[w].down *= inv;
    }
    b.wingbeats = static_cast<int>(history_.size());
    b.last_cycle = history_.back().last_cycle;
    return b;
}

void CollisionDetector::reset() {
    history_.clear();
    pending_ = Signature::none;
    streak_ = 0;
    frozen_ = 0;
    fired_ = false;
    last_signature_ = Signature::none;
}

std::optional<CollisionEvent> CollisionDetector::update(const StrokeStats& beat, double t) {
    const auto remember = [&] {
        history_.push_back(beat);
        while (static_cast<int>(history_.size()) > params_.baseline_beats) history_.pop_front();
    };
    if (!baseline_ready()) {
        remember();
        return std::nullopt;
    }
    auto ev = detect_collision(beat, baseline(), params_.rel_threshold);
    if (!ev) {
        last_signature_ = Signature::none;
        pending_ = Signature::none;
        streak_ = 0;
        frozen_ = 0;
        fired_ = false;
        remember();
        return std::nullopt;
    }
    last_signature_ = ev->signature;
    if (++frozen_ > params_.max_frozen_beats) {
        // A level shift that never clears is not a contact; start over.
        reset();
        remember();
        return std::nullopt;
    }
    if (ev->signature == pending_) {
        ++streak_;
    } else {
        pending_ = ev->signature;
        streak_ = 1;
        fired_ = false;
    }
    if (streak_ >= params_.debounce_beats && !fired_) {
        fired_ = true;
        ev->t = t;
        return ev;
    }
    return std::nullopt;
}

}  // namespace fwnav

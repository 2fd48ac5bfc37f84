#include "fwnav/navigation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "fwnav/error.hpp"

namespace fwnav {

DeadReckonPose dead_reckon(const DeadReckonPose& prev, double psi, const Vec2& p_b) {
    const double c = std::cos(psi), s = std::sin(psi);
    DeadReckonPose out;
    out.x = c * p_b.x() - s * p_b.y() + prev.x;
    out.y = s * p_b.x() + c * p_b.y() + prev.y;
    out.psi = psi;
    out.k = prev.k + 1;
    return out;
}

FeedforwardResult terrain_feedforward(const ClearanceFeedback& fb, double K_zhat, double tilt_error,
                                      double max_tilt_error) {
    FeedforwardResult r;
    if (std::abs(tilt_error) > max_tilt_error) {
        r.flagged = true;
        return r;
    }
    if (fb.band == Band::in_band) return r;
    r.delta_z = -K_zhat * fb.mean_excess();
    return r;
}

const char* to_string(NavMode m) {
    switch (m) {
        case NavMode::search_ground: return "search_ground";
        case NavMode::cruise: return "cruise";
        case NavMode::retreat: return "retreat";
        case NavMode::shift: return "shift";
        case NavMode::resume: return "resume";
        case NavMode::done: return "done";
    }
    return "?";
}

bool transition_allowed(NavMode from, NavMode to) {
    using M = NavMode;
    if (to == M::done) return from != M::done;
    switch (from) {
        case M::search_ground: return to == M::cruise;
        case M::cruise: return to == M::retreat || to == M::resume;
        case M::retreat: return to == M::shift || to == M::cruise;
        case M::shift: return to == M::cruise || to == M::retreat;
        case M::resume: return to == M::cruise || to == M::retreat;
        case M::done: return false;
    }
    return false;
}

Navigator::Navigator(NavParams params, double z_ref0) : p_(std::move(params)) {
    if (p_.route.size() < 2) throw Fault("navigation.route", "needs at least two waypoints");
    if (!(p_.cruise_speed > 0.0)) throw Fault("navigation.cruise_speed", "must be positive");
    state_.K_zhat = p_.K_zhat;
    state_.retreat_budget = p_.retreat_distance;
    state_.z_ref = std::clamp(z_ref0, p_.z_ref_min, p_.z_ref_max);
    carrot_ = p_.route.front();
}

void Navigator::set_mode(NavMode m, double t) {
    if (m == state_.mode) return;
    if (!transition_allowed(state_.mode, m))
        throw Fault("navigation.mode", std::string("illegal transition ") + to_string(state_.mode) +
                                           " -> " + to_string(m));
    history_.push_back({t, state_.mode, m});
    state_.mode = m;
    leg_speed_ = 0.0;
}

Vec2 Navigator::segment_dir() const {
    const Vec2 d = p_.route[state_.segment + 1] - p_.route[state_.segment];
    return d.normalized();
}

Vec2 Navigator::segment_left() const {
    const Vec2 d = segment_dir();
    return Vec2(-d.y(), d.x());
}

double Navigator::along_route(const Vec2& xy) const {
    return (xy - p_.route[state_.segment]).dot(segment_dir());
}

Vec2 Navigator::route_point(double s, double offset) const {
    return p_.route[state_.segment] + s * segment_dir() + offset * segment_left();
}

bool Navigator::step_toward(const Vec2& goal, double dt) {
    const Vec2 d = goal - carrot_;
    // Ramp up from rest so a reversal does not jerk the stroke plane.
    leg_speed_ = std::min(p_.cruise_speed, leg_speed_ + p_.max_accel * dt);
    const double step = leg_speed_ * dt;
    if (d.norm() <= step) {
        carrot_ = goal;
        return true;
    }
    carrot_ += d.normalized() * step;
    return false;
}

bool Navigator::on_wingbeat(const BeatObservation& obs, const Vec2& xy) {
    t_ = obs.t;
    if (state_.mode == NavMode::done) return false;

    // Contact-loaded currents say nothing about clearance.
    if (obs.feedback && obs.elevated == Signature::none) {
        const FeedforwardResult ff =
            terrain_feedforward(*obs.feedback, state_.K_zhat, obs.tilt_error, p_.max_tilt_error);
        if (ff.flagged) ++flagged_;
        const double dz = std::clamp(ff.delta_z, -p_.max_dz_per_beat, p_.max_dz_per_beat);
        state_.z_ref = std::clamp(state_.z_ref + dz, p_.z_ref_min, p_.z_ref_max);
    }

    if (state_.mode == NavMode::search_ground) {
        if (search_start_ < 0.0) search_start_ = obs.t;
        const bool in_band = obs.feedback && obs.feedback->band == Band::in_band;
        in_band_streak_ = in_band ? in_band_streak_ + 1 : 0;
        if (in_band_streak_ >= p_.settle_beats || obs.t - search_start_ >= p_.search_timeout)
            set_mode(NavMode::cruise, obs.t);
        return false;
    }

    const bool can_react = state_.mode == NavMode::cruise || state_.mode == NavMode::shift ||
                           state_.mode == NavMode::resume;
    if (obs.event && can_react) {
        const CollisionEvent& ev = *obs.event;
        ++avoid_cycles_;
        if (avoid_cycles_ > p_.max_avoid_cycles) {
            aborted_ = true;
            set_mode(NavMode::done, obs.t);
            return false;
        }
        const double bearing = ev.heading + direction_bearing(ev.direction);
        const Vec2 dir(std::cos(bearing), std::sin(bearing));
        const bool same_obstacle = state_.shift_offset != 0.0;
        // Move away from contacts that lie off to one side of the route.
        const double lateral = dir.dot(segment_left());
        if (std::abs(lateral) > 0.3) {
            shift_side_ = lateral > 0.0 ? -1 : 1;
        } else if (!same_obstacle) {
            shift_side_ = encounters_ % 2 == 0 ? 1 : -1;
            ++encounters_;
        }
        gust_probe_ = ev.signature == Signature::both_up && ev.gust_possible;
        const Vec2 obstacle = xy + p_.wing_length * dir;
        s_clear_ = along_route(obstacle) + p_.wing_length + p_.resume_margin;
        goal_ = xy - state_.retreat_budget * dir;
        carrot_ = xy;
        set_mode(NavMode::retreat, obs.t);
        return true;
    }

    if (state_.mode == NavMode::retreat && (xy - goal_).norm() < p_.hold_tolerance &&
        carrot_ == goal_) {
        if (gust_probe_ && obs.elevated == Signature::both_up) {
            // Still elevated away from the contact point: wind, not a wall.
            ++gusts_;
            gust_probe_ = false;
            set_mode(NavMode::cruise, obs.t);
            cruise_s_ = along_route(carrot_);
            return false;
        }
        gust_probe_ = false;
        goal_ = carrot_ + shift_side_ * p_.shift_step * segment_left();
        state_.shift_offset = (goal_ - p_.route[state_.segment]).dot(segment_left());
        if (std::abs(state_.shift_offset) > p_.lateral_limit) {
            aborted_ = true;
            set_mode(NavMode::done, obs.t);
            return false;
        }
        set_mode(NavMode::shift, obs.t);
    } else if (state_.mode == NavMode::shift && (xy - goal_).norm() < p_.hold_tolerance &&
               carrot_ == goal_) {
        set_mode(NavMode::cruise, obs.t);
        cruise_s_ = along_route(carrot_);
    }
    return false;
}

References Navigator::update(double t, const Vec2& xy, double dt) {
    const Vec2 before = carrot_;
    const double seg_len = (p_.route[state_.segment + 1] - p_.route[state_.segment]).norm();
    switch (state_.mode) {
        case NavMode::search_ground:
        case NavMode::done: break;
        case NavMode::retreat:
        case NavMode::shift: step_toward(goal_, dt); break;
        case NavMode::cruise:
        case NavMode::resume: {
            if (state_.mode == NavMode::cruise && state_.shift_offset != 0.0 &&
                (along_route(xy) > s_clear_ || cruise_s_ >= seg_len))
                set_mode(NavMode::resume, t);
            if (state_.mode == NavMode::resume) {
                const double step = p_.cruise_speed * dt;
                const double o = state_.shift_offset;
                state_.shift_offset = std::abs(o) <= step ? 0.0 : o - std::copysign(step, o);
                if (state_.shift_offset == 0.0) set_mode(NavMode::cruise, t);
            }
            // Do not let the reference run away from a blocked vehicle, nor
            // stay far ahead after a position fix moves it back.
            if ((carrot_ - xy).norm() < p_.lead_limit)
                cruise_s_ = std::min(cruise_s_ + p_.cruise_speed * dt, seg_len);
            cruise_s_ = std::min(cruise_s_, std::max(0.0, along_route(xy) + p_.lead_limit));
            carrot_ = route_point(cruise_s_, state_.shift_offset);
            const Vec2 end = route_point(seg_len, state_.shift_offset);
            if (cruise_s_ >= seg_len && state_.shift_offset == 0.0 &&
                (xy - end).norm() < p_.arrive_tolerance) {
                if (state_.segment + 2 >= p_.route.size()) {
                    set_mode(NavMode::done, t);
                } else {
                    ++state_.segment;
                    state_.shift_offset = 0.0;
                    if (state_.mode == NavMode::resume) set_mode(NavMode::cruise, t);
                    cruise_s_ = std::max(0.0, along_route(carrot_));
                    carrot_ = route_point(cruise_s_, 0.0);
                }
            }
            break;
        }
    }
    carrot_vel_ = dt > 0.0 ? Vec2((carrot_ - before) / dt) : Vec2::Zero();
    if (carrot_vel_.norm() > 2.0 * p_.cruise_speed) carrot_vel_ = Vec2::Zero();

    References r;
    r.z = state_.z_ref;
    r.xy = carrot_;
    r.xy_dot = carrot_vel_;
    r.psi = p_.heading;
    return r;
}

double ClearanceInversion::clearance(double ratio) const {
    return std::clamp(ref_clearance + (ratio - 1.0) / rel_slope, min_clearance, max_clearance);
}

const TerrainSample& update_map(MapEstimate& map, const ClearanceFeedback& fb, const Vec3& position,
                                const ClearanceInversion& inv) {
    const double ratio = 0.5 * (fb.ratio[0] + fb.ratio[1]);
    map.terrain.push_back({position.x(), position.y(), position.z() - inv.clearance(ratio)});
    return map.terrain.back();
}

const ObstaclePoint& update_map(MapEstimate& map, const CollisionEvent& ev, const Vec3& position,
                                double heading, double wing_length) {
    const double b = heading + direction_bearing(ev.direction);
    ObstaclePoint p;
    p.x = position.x() + wing_length * std::cos(b);
    p.y = position.y() + wing_length * std::sin(b);
    p.heading = heading;
    p.signature = ev.signature;
    p.direction = ev.direction;
    map.obstacles.push_back(p);
    return map.obstacles.back();
}

std::size_t distinct_obstacle_points(std::span<const MapEstimate> maps, double grid) {
    std::set<std::pair<long, long>> cells;
    for (const MapEstimate& m : maps)
        for (const ObstaclePoint& p : m.obstacles)
            cells.emplace(std::lround(p.x / grid), std::lround(p.y / grid));
    return cells.size();
}

}  // namespace fwnav

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fwnav/control.hpp"
#include "fwnav/environment.hpp"
#include "fwnav/sensing.hpp"

namespace fwnav {

/// Planar pose propagated from body-frame displacements.
struct DeadReckonPose {
    double x = 0.0;
    double y = 0.0;
    double psi = 0.0;
    long k = 0;
};

/// [x_k, y_k, 1]^T = [[Rot(psi), (x_{k-1}, y_{k-1})^T], [0, 1]] [x_b, y_b, 1]^T.
DeadReckonPose dead_reckon(const DeadReckonPose& prev, double psi, const Vec2& p_b);

struct FeedforwardResult {
    double delta_z = 0.0;  // m
    bool flagged = false;  // attitude error too large for a valid reading
};

/// Altitude-reference increment from the clearance band: -K_zhat times the
/// mean excess of the two wings, zero inside the band. High current means the
/// vehicle is above the target clearance, so it descends.
FeedforwardResult terrain_feedforward(const ClearanceFeedback& fb, double K_zhat,
                                      double tilt_error = 0.0, double max_tilt_error = 0.15);

enum class NavMode { search_ground, cruise, retreat, shift, resume, done };

const char* to_string(NavMode m);

/// Allowed mode transitions.
bool transition_allowed(NavMode from, NavMode to);

struct NavParams {
    std::vector<Vec2> route;       // waypoints, m; the first is the start
    double cruise_speed = 0.05;    // m/s
    double heading = 0.0;          // held yaw reference, rad
    double K_zhat = 0.2;           // m/A
    double max_dz_per_beat = 0.002;
    double z_ref_min = 0.02;
    double z_ref_max = 0.6;
    double retreat_distance = 0.10;
    double shift_step = 0.08;
    double resume_margin = 0.02;
    double wing_length = 0.085;
    double arrive_tolerance = 0.02;
    double hold_tolerance = 0.012;
    double lead_limit = 0.04;      // max reference lead over the vehicle, m
    double max_accel = 0.1;        // reference acceleration on retreat and shift legs, m/s^2
    double max_tilt_error = 0.15;
    int settle_beats = 5;          // consecutive in-band beats ending ground search
    double search_timeout = 3.0;   // s
    double lateral_limit = 0.6;    // |shift offset| before the mission aborts
    int max_avoid_cycles = 20;
};

struct NavState {
    NavMode mode = NavMode::search_ground;
    std::size_t segment = 0;
    double shift_offset = 0.0;  // signed lateral offset from the route, m (left positive)
    double retreat_budget = 0.0;
    double K_zhat = 0.2;
    double z_ref = 0.0;
};

/// What the navigator sees once per wingbeat.
struct BeatObservation {
    double t = 0.0;
    std::optional<ClearanceFeedback> feedback;
    std::optional<CollisionEvent> event;
    Signature elevated = Signature::none;  // pattern of the current beat
    double tilt_error = 0.0;
};

struct ModeChange {
    double t = 0.0;
    NavMode from = NavMode::search_ground;
    NavMode to = NavMode::search_ground;
};

/// Waypoint follower with terrain feedforward and the retreat/shift bypass
/// strategy. The reference point moves at cruise speed toward the active
/// goal; the vehicle tracks it through the controller.
class Navigator {
public:
    Navigator(NavParams params, double z_ref0);

    /// Per-wingbeat update. Returns true when an event started a retreat.
    bool on_wingbeat(const BeatObservation& obs, const Vec2& xy);

    /// Per-control-period reference.
    References update(double t, const Vec2& xy, double dt);

    const NavState& state() const { return state_; }
    NavMode mode() const { return state_.mode; }
    bool aborted() const { return aborted_; }
    int avoid_cycles() const { return avoid_cycles_; }
    int gusts_rejected() const { return gusts_; }
    int flagged_beats() const { return flagged_; }
    const std::vector<ModeChange>& history() const { return history_; }
    double along_route(const Vec2& xy) const;

private:
    void set_mode(NavMode m, double t);
    Vec2 segment_dir() const;
    Vec2 segment_left() const;
    Vec2 route_point(double s, double offset) const;
    bool step_toward(const Vec2& goal, double dt);

    NavParams p_;
    NavState state_;
    Vec2 carrot_;
    Vec2 carrot_vel_ = Vec2::Zero();
    Vec2 goal_ = Vec2::Zero();
    double t_ = 0.0;
    double leg_speed_ = 0.0;
    double search_start_ = -1.0;
    int in_band_streak_ = 0;
    bool aborted_ = false;
    int avoid_cycles_ = 0;
    int gusts_ = 0;
    int flagged_ = 0;
    int encounters_ = 0;
    int shift_side_ = 1;
    bool gust_probe_ = false;
    double cruise_s_ = 0.0;
    double s_clear_ = 0.0;  // along-route coordinate beyond which the obstacle is bypassed
    std::vector<ModeChange> history_;
};

struct TerrainSample {
    double x = 0.0, y = 0.0, h = 0.0;
};

struct ObstaclePoint {
    double x = 0.0, y = 0.0;
    double heading = 0.0;
    Signature signature = Signature::none;
    Direction direction = Direction::unset;
};

struct MapEstimate {
    std::vector<TerrainSample> terrain;
    std::vector<ObstaclePoint> obstacles;
    std::string run_id;
    std::uint64_t seed = 0;
};

/// Linearised current-to-clearance inversion about the reference clearance:
/// D = D_ref + (ratio - 1) / rel_slope.
struct ClearanceInversion {
    double ref_clearance = 0.06996;  // m
    double rel_slope = 10.0;         // 1/m, d(i/i_ref)/dD at D_ref
    double min_clearance = 0.03;
    double max_clearance = 0.12;

    double clearance(double ratio) const;
};

/// Terrain sample h = P_z - D from the mean threshold ratio.
const TerrainSample& update_map(MapEstimate& map, const ClearanceFeedback& fb, const Vec3& position,
                                const ClearanceInversion& inv);

/// Obstacle point one wing length from the vehicle along the contact bearing.
const ObstaclePoint& update_map(MapEstimate& map, const CollisionEvent& ev, const Vec3& position,
                                double heading, double wing_length);

/// Number of distinct obstacle points after rounding to `grid` metres, over
/// the union of the given maps.
std::size_t distinct_obstacle_points(std::span<const MapEstimate> maps, double grid = 0.01);

}  // namespace fwnav

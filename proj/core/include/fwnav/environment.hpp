#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fwnav/dynamics.hpp"

namespace fwnav {

/// Height profile h(s) along a horizontal direction, linear between knots and
/// held constant beyond them, added to the floor inside an axis-aligned
/// region. A ramp is two knots; a plateau with ramps is four.
struct TerrainFeature {
    Vec2 origin = Vec2::Zero();
    Vec2 direction = Vec2::UnitX();
    std::vector<Vec2> profile;  // (s, height) pairs, s increasing
    double x_min = -1e9, x_max = 1e9, y_min = -1e9, y_max = 1e9;

    double height(double x, double y) const;
};

struct WallPanel {
    Vec2 a = Vec2::Zero();
    Vec2 b = Vec2::Zero();
    double z_bottom = 0.0;
    double z_top = 0.0;
};

struct Gust {
    double t_start = 0.0;
    double t_end = 0.0;
    Vec3 wind = Vec3::Zero();
};

struct ArenaBounds {
    double x_min = -2.0, x_max = 2.0, y_min = -2.0, y_max = 2.0;
    bool contains(double x, double y) const {
        return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
    }
};

struct World {
    ArenaBounds arena;
    double floor = 0.0;
    std::vector<TerrainFeature> terrain;
    std::vector<WallPanel> walls;
    std::vector<Gust> gusts;

    double terrain_height(double x, double y) const;
};

/// Ground-effect multipliers against normalised clearance D / c, with
/// Fritsch-Carlson monotone cubic interpolation between control points and
/// G = 1 beyond the last point.
class GroundEffectCurve {
public:
    struct Point {
        double clearance;  // D / c
        double lift;       // G_L
        double drag;       // G_D
    };

    GroundEffectCurve();
    explicit GroundEffectCurve(std::vector<Point> points);

    GroundEffectFactors at(double clearance_over_chord) const;
    const std::vector<Point>& points() const { return points_; }

private:
    std::vector<Point> points_;
    std::vector<double> xs_, lifts_, drags_;
    std::vector<double> lift_slopes_;
    std::vector<double> drag_slopes_;
};

/// D = P_z - h(P_x, P_y), clamped at 0. Throws Fault outside the arena.
double ground_clearance(const Vec3& position, const World& world);

GroundEffectFactors ground_effect(double clearance_over_chord, const GroundEffectCurve& curve);

struct ContactModel {
    double stiffness = 0.0;        // k_c, N/m at the wingtip
    double damping = 0.0;          // c_c, N s/m
    double receding_ratio = 0.1;   // load retained while the wing backs out
    double friction = 0.3;         // tip sliding friction coefficient
};

struct ContactEvent {
    WingSide wing = WingSide::left;
    HalfStroke half_stroke = HalfStroke::upstroke;
    Vec3 contact_point = Vec3::Zero();
    double penetration = 0.0;
    double t = 0.0;
};

/// Spar sweep of one wing over one physics step, in world coordinates.
struct WingSweep {
    WingSide side = WingSide::left;
    double phi_dot = 0.0;
    double length = 0.0;  // wing length, m
    Vec3 root = Vec3::Zero();
    Vec3 tip_prev = Vec3::Zero();
    Vec3 tip = Vec3::Zero();
    Vec3 tangent = Vec3::UnitX();  // unit stroke direction (increasing phi), world frame
    double t = 0.0;
    double dt = 1e-4;
};

struct ContactResult {
    std::optional<ContactEvent> event;
    double load_torque = 0.0;       // torque the drive must add, positive opposes +phi_dot
};

struct PanelPenetration {
    double depth = 0.0;         // shortest move that frees the spar, m
    Vec3 push = Vec3::UnitX();  // unit direction of that move
};

/// Penetration of a spar (root -> tip) through one panel, or nullopt when the
/// spar does not cross the panel inside its extent. Near a free edge or the
/// top, the spar is freed sideways or upward rather than back through the
/// face, whichever is shorter.
std::optional<PanelPenetration> panel_penetration(const WallPanel& panel, const Vec3& root,
                                                  const Vec3& tip);

ContactResult wing_contact(const WingSweep& sweep, std::span<const WallPanel> walls,
                           const ContactModel& model);

Vec3 wind_at(double t, const Vec3& position, const World& world);

/// Perpendicular distance from a point to the panel plane (ignores extent).
double distance_to_panel_plane(const WallPanel& panel, const Vec2& point);
/// Distance to the panel segment in the horizontal plane.
double distance_to_panel(const WallPanel& panel, const Vec2& point);

}  // namespace fwnav

#include "fwnav/environment.hpp"

#include <algorithm>
#include <cmath>

#include "fwnav/error.hpp"

namespace fwnav {

double TerrainFeature::height(double x, double y) const {
    if (x < x_min || x > x_max || y < y_min || y > y_max || profile.empty()) return 0.0;
    const double s = direction.dot(Vec2(x, y) - origin);
    if (s <= profile.front().x()) return profile.front().y();
    if (s >= profile.back().x()) return profile.back().y();
    for (std::size_t k = 1; k < profile.size(); ++k) {
        if (s <= profile[k].x()) {
            const Vec2& p0 = profile[k - 1];
            const Vec2& p1 = profile[k];
            const double u = (s - p0.x()) / (p1.x() - p0.x());
            return p0.y() + u * (p1.y() - p0.y());
        }
    }
    return profile.back().y();
}

double World::terrain_height(double x, double y) const {
    double h = floor;
    for (const auto& f : terrain) h += f.height(x, y);
    return h;
}

namespace {

// Fritsch-Carlson tangents for monotone piecewise cubic Hermite interpolation.
std::vector<double> monotone_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> m(n, 0.0);
    if (n < 2) return m;
    std::vector<double> d(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) d[k] = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (d[k - 1] * d[k] <= 0.0) {
            m[k] = 0.0;
        } else {
            const double h0 = x[k] - x[k - 1];
            const double h1 = x[k + 1] - x[k];
            const double w1 = 2.0 * h1 + h0;
            const double w2 = h1 + 2.0 * h0;
            m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
        }
    }
    // The curve is held flat beyond both end knots.
    m[0] = 0.0;
    m[n - 1] = 0.0;
    return m;
}

double hermite(const std::vector<double>& x, const std::vector<double>& y,
               const std::vector<double>& m, double q) {
    auto it = std::upper_bound(x.begin(), x.end(), q);
    std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - x.begin() - 1, 0));
    k = std::min(k, x.size() - 2);
    const double h = x[k + 1] - x[k];
    const double t = (q - x[k]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y[k] + (t3 - 2 * t2 + t) * h * m[k] +
           (-2 * t3 + 3 * t2) * y[k + 1] + (t3 - t2) * h * m[k + 1];
}

}  // namespace

GroundEffectCurve::GroundEffectCurve()
    : GroundEffectCurve({{1.5, 1.02, 0.56},
                         {2.3, 1.06, 0.50},
                         {3.3, 1.10, 0.85},
                         {4.0, 1.05, 0.93},
                         {10.0, 1.00, 1.00}}) {}

GroundEffectCurve::GroundEffectCurve(std::vector<Point> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw Fault("ground_effect.points", "need at least two points");
    std::sort(points_.begin(), points_.end(),
              [](const Point& a, const Point& b) { return a.clearance < b.clearance; });
    for (std::size_t k = 1; k < points_.size(); ++k) {
        if (!(points_[k].clearance > points_[k - 1].clearance))
            throw Fault("ground_effect.points", "clearances must be distinct");
    }
    for (const auto& p : points_) {
        if (!(p.lift > 0.0) || !(p.drag > 0.0))
            throw Fault("ground_effect.points", "multipliers must be positive");
    }
    for (const auto& p : points_) {
        xs_.push_back(p.clearance);
        lifts_.push_back(p.lift);
        drags_.push_back(p.drag);
    }
    lift_slopes_ = monotone_slopes(xs_, lifts_);
    drag_slopes_ = monotone_slopes(xs_, drags_);
}

GroundEffectFactors GroundEffectCurve::at(double q) const {
    if (q <= points_.front().clearance) return {points_.front().lift, points_.front().drag};
    if (q >= points_.back().clearance) return {points_.back().lift, points_.back().drag};
    return {hermite(xs_, lifts_, lift_slopes_, q), hermite(xs_, drags_, drag_slopes_, q)};
}

double ground_clearance(const Vec3& position, const World& world) {
    if (!world.arena.contains(position.x(), position.y()))
        throw Fault("position", "outside arena bounds");
    return std::max(0.0, position.z() - world.terrain_height(position.x(), position.y()));
}

GroundEffectFactors ground_effect(double clearance_over_chord, const GroundEffectCurve& curve) {
    if (clearance_over_chord < 0.0) throw Fault("clearance", "must be non-negative");
    return curve.at(clearance_over_chord);
}

namespace {

// Unit normal of the panel line, and the panel length.
std::pair<Vec2, double> panel_frame(const WallPanel& panel) {
    const Vec2 along = panel.b - panel.a;
    const double len = along.norm();
    return {Vec2(-along.y(), along.x()) / len, len};
}

}  // namespace

double distance_to_panel_plane(const WallPanel& panel, const Vec2& point) {
    const auto [n, len] = panel_frame(panel);
    (void)len;
    return std::abs(n.dot(point - panel.a));
}

double distance_to_panel(const WallPanel& panel, const Vec2& point) {
    const Vec2 ab = panel.b - panel.a;
    const double u = std::clamp(ab.dot(point - panel.a) / ab.squaredNorm(), 0.0, 1.0);
    return (panel.a + u * ab - point).norm();
}

std::optional<PanelPenetration> panel_penetration(const WallPanel& panel, const Vec3& root,
                                                  const Vec3& tip) {
    auto [normal, len] = panel_frame(panel);
    const Vec2 r = root.head<2>();
    const Vec2 p = tip.head<2>();
    double sd_root = normal.dot(r - panel.a);
    double sd_tip = normal.dot(p - panel.a);
    if (sd_root < 0.0) {
        sd_root = -sd_root;
        sd_tip = -sd_tip;
        normal = -normal;
    }
    if (sd_tip >= 0.0) return std::nullopt;
    const double s = sd_root / (sd_root - sd_tip);
    const Vec3 cross = root + s * (tip - root);
    const Vec2 dir = (panel.b - panel.a) / len;
    const double along = dir.dot(cross.head<2>() - panel.a);
    if (along < 0.0 || along > len) return std::nullopt;
    if (cross.z() < panel.z_bottom || cross.z() > panel.z_top) return std::nullopt;

    PanelPenetration out{-sd_tip, Vec3(normal.x(), normal.y(), 0.0)};
    const auto consider = [&](double d, const Vec3& push) {
        if (d < out.depth) out = {d, push};
    };
    consider(along, Vec3(-dir.x(), -dir.y(), 0.0));
    consider(len - along, Vec3(dir.x(), dir.y(), 0.0));
    consider(panel.z_top - cross.z(), Vec3::UnitZ());
    // A panel standing on the floor cannot be passed underneath.
    if (panel.z_bottom > 0.0) consider(cross.z() - panel.z_bottom, -Vec3::UnitZ());
    return out;
}

ContactResult wing_contact(const WingSweep& sweep, std::span<const WallPanel> walls,
                           const ContactModel& model) {
    ContactResult out;
    double deepest = 0.0;
    const double stroke = (sweep.phi_dot > 0.0) - (sweep.phi_dot < 0.0);
    for (const auto& panel : walls) {
        const auto pen = panel_penetration(panel, sweep.root, sweep.tip);
        if (!pen) continue;
        const auto prev = panel_penetration(panel, sweep.root, sweep.tip_prev);
        const double rate = (pen->depth - (prev ? prev->depth : 0.0)) / sweep.dt;
        double force = model.stiffness * pen->depth + model.damping * std::max(rate, 0.0);
        if (rate < 0.0) force *= model.receding_ratio;

        const Vec3& n = pen->push;
        // Push on the tip projected on the stroke direction, plus sliding
        // friction at the tip.
        const double load = force * sweep.length * (model.friction * stroke - n.dot(sweep.tangent));
        // A receding wing is not pushed along by the wall.
        out.load_torque += stroke * std::max(0.0, stroke * load);

        if (pen->depth > deepest) {
            deepest = pen->depth;
            // Label the contact by the half-stroke that drove the wing in.
            const HalfStroke half =
                n.dot(sweep.tangent) < 0.0 ? HalfStroke::upstroke : HalfStroke::downstroke;
            out.event = ContactEvent{sweep.side, half, sweep.tip, pen->depth, sweep.t};
        }
    }
    return out;
}

Vec3 wind_at(double t, const Vec3& /*position*/, const World& world) {
    Vec3 w = Vec3::Zero();
    for (const auto& g : world.gusts) {
        if (t >= g.t_start && t < g.t_end) w += g.wind;
    }
    return w;
}

}  // namespace fwnav

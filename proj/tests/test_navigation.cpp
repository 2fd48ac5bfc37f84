#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fwnav/error.hpp"
#include "fwnav/navigation.hpp"

using namespace fwnav;

namespace {

constexpr double kPi = std::numbers::pi;

ClearanceFeedback in_band() { return {}; }

CollisionEvent event_at(Direction d, Signature sig, double heading = 0.0) {
    CollisionEvent ev;
    ev.signature = sig;
    ev.direction = d;
    ev.heading = heading;
    ev.gust_possible = sig == Signature::both_up;
    return ev;
}

// Vehicle that tracks the reference exactly; beats every 1/34 s.
struct PerfectTracker {
    Navigator nav;
    Vec2 xy;
    double t = 0.0;
    static constexpr double dt = 0.005;
    double next_beat = 0.0;
    std::vector<References> refs;
    Vec2 event_xy = Vec2::Zero();

    PerfectTracker(NavParams p) : nav(p, 0.07), xy(p.route.front()) {}

    // Advances one control step; `ev` is delivered on the next beat only.
    void step(std::optional<CollisionEvent>* ev = nullptr, Signature elevated = Signature::none) {
        if (t >= next_beat) {
            BeatObservation o;
            o.t = t;
            o.feedback = in_band();
            o.elevated = elevated;
            if (ev && *ev) {
                o.event = **ev;
                event_xy = xy;
                ev->reset();
            }
            nav.on_wingbeat(o, xy);
            next_beat += 1.0 / 34.0;
        }
        const References r = nav.update(t, xy, dt);
        refs.push_back(r);
        xy = r.xy;
        t += dt;
    }

    void run_until(NavMode m, double limit = 60.0) {
        while (nav.mode() != m && t < limit) step();
    }
};

NavParams straight_route() {
    NavParams p;
    p.route = {Vec2(0.0, 0.0), Vec2(1.0, 0.0)};
    p.cruise_speed = 0.05;
    return p;
}

}  // namespace

TEST(DeadReckoning, QuarterTurnExample) {
    DeadReckonPose p{2.0, 3.0, 0.0, 7};
    const DeadReckonPose q = dead_reckon(p, kPi / 2.0, Vec2(1.0, 0.0));
    EXPECT_NEAR(q.x, 2.0, 1e-15);
    EXPECT_NEAR(q.y, 4.0, 1e-15);
    EXPECT_EQ(q.psi, kPi / 2.0);
    EXPECT_EQ(q.k, 8);
}

TEST(DeadReckoning, IdentityStep) {
    DeadReckonPose p{0.4, -0.2, 0.3, 0};
    const DeadReckonPose q = dead_reckon(p, 1.1, Vec2::Zero());
    EXPECT_EQ(q.x, p.x);
    EXPECT_EQ(q.y, p.y);
}

TEST(DeadReckoning, InverseStepReturnsHome) {
    DeadReckonPose p{0.13, 0.77, 0.0, 0};
    for (double psi : {-2.5, -0.1, 0.0, 0.9, 3.0}) {
        const Vec2 d(0.0123, -0.0456);
        const DeadReckonPose back = dead_reckon(dead_reckon(p, psi, d), psi, -d);
        EXPECT_NEAR(back.x, p.x, 1e-12);
        EXPECT_NEAR(back.y, p.y, 1e-12);
    }
}

TEST(DeadReckoning, TenThousandStepsMatchClosedForm) {
    DeadReckonPose p;
    long double rx = 0.0L, ry = 0.0L;
    for (int k = 0; k < 10000; ++k) {
        const double psi = 0.001 * k;
        const Vec2 d(1e-3 * (1.0 + 0.5 * std::sin(0.01 * k)), 2e-4);
        p = dead_reckon(p, psi, d);
        const long double c = std::cos(static_cast<long double>(psi));
        const long double s = std::sin(static_cast<long double>(psi));
        rx += c * d.x() - s * d.y();
        ry += s * d.x() + c * d.y();
    }
    EXPECT_NEAR(p.x, static_cast<double>(rx), 1e-9);
    EXPECT_NEAR(p.y, static_cast<double>(ry), 1e-9);
    EXPECT_EQ(p.k, 10000);
}

TEST(Feedforward, InBandGivesZero) {
    const FeedforwardResult r = terrain_feedforward(in_band(), 0.2);
    EXPECT_EQ(r.delta_z, 0.0);
    EXPECT_FALSE(r.flagged);
}

TEST(Feedforward, ExcessScaledByGain) {
    ClearanceFeedback fb;
    fb.band = Band::above_band;
    fb.excess = {0.05, 0.05};
    EXPECT_NEAR(terrain_feedforward(fb, 0.2).delta_z, -0.01, 1e-15);
    fb.band = Band::below_band;
    fb.excess = {-0.05, -0.05};
    EXPECT_NEAR(terrain_feedforward(fb, 0.2).delta_z, 0.01, 1e-15);
}

TEST(Feedforward, LargeTiltFlagsAndHolds) {
    ClearanceFeedback fb;
    fb.band = Band::above_band;
    fb.excess = {0.05, 0.05};
    const FeedforwardResult r = terrain_feedforward(fb, 0.2, 0.2, 0.15);
    EXPECT_TRUE(r.flagged);
    EXPECT_EQ(r.delta_z, 0.0);
}

TEST(Feedforward, ZeroInDeadbandAndContinuousAtEdges) {
    const ThresholdModel m = reference_thresholds();
    const ThresholdEval thr = threshold_at(12.0, m);
    auto dz = [&](double r) {
        StrokeStats s;
        s.wing[0].mean = r * thr.i_L;
        s.wing[1].mean = r * thr.i_R;
        return terrain_feedforward(clearance_feedback(s, 12.0, m), 0.2).delta_z;
    };
    for (double r = 0.75; r <= 1.0; r += 0.0025) EXPECT_EQ(dz(r), 0.0) << r;
    for (double edge : {0.75, 1.0}) {
        EXPECT_NEAR(dz(edge + 1e-9), 0.0, 1e-9);
        EXPECT_NEAR(dz(edge - 1e-9), 0.0, 1e-9);
    }
    EXPECT_LT(dz(1.2), 0.0);
    EXPECT_GT(dz(0.5), 0.0);
}

TEST(ModeGraph, Transitions) {
    using M = NavMode;
    EXPECT_TRUE(transition_allowed(M::search_ground, M::cruise));
    EXPECT_TRUE(transition_allowed(M::cruise, M::retreat));
    EXPECT_TRUE(transition_allowed(M::retreat, M::shift));
    EXPECT_TRUE(transition_allowed(M::shift, M::cruise));
    EXPECT_TRUE(transition_allowed(M::cruise, M::resume));
    EXPECT_TRUE(transition_allowed(M::resume, M::cruise));
    EXPECT_TRUE(transition_allowed(M::shift, M::retreat));
    for (M m : {M::search_ground, M::cruise, M::retreat, M::shift, M::resume})
        EXPECT_TRUE(transition_allowed(m, M::done));
    EXPECT_FALSE(transition_allowed(M::search_ground, M::retreat));
    EXPECT_FALSE(transition_allowed(M::retreat, M::resume));
    EXPECT_FALSE(transition_allowed(M::cruise, M::shift));
    EXPECT_FALSE(transition_allowed(M::done, M::cruise));
    EXPECT_FALSE(transition_allowed(M::done, M::done));
}

TEST(Navigator, RejectsShortRoute) {
    NavParams p;
    p.route = {Vec2::Zero()};
    EXPECT_THROW(Navigator(p, 0.07), Fault);
}

TEST(Navigator, NoEventFollowsRoute) {
    PerfectTracker v(straight_route());
    v.run_until(NavMode::done);
    ASSERT_EQ(v.nav.mode(), NavMode::done);
    EXPECT_FALSE(v.nav.aborted());
    for (const References& r : v.refs) EXPECT_EQ(r.xy.y(), 0.0);
    ASSERT_EQ(v.nav.history().size(), 2u);
    EXPECT_EQ(v.nav.history()[0].to, NavMode::cruise);
    EXPECT_EQ(v.nav.history()[1].to, NavMode::done);
    // Roughly one metre at 5 cm/s.
    EXPECT_NEAR(v.t, 20.0, 1.0);
}

TEST(Navigator, FrontEventRetreatsThenShiftsSideways) {
    const NavParams p = straight_route();
    PerfectTracker v(p);
    v.run_until(NavMode::cruise);
    while (v.xy.x() < 0.3) v.step();
    std::optional<CollisionEvent> ev = event_at(Direction::front, Signature::both_up);
    while (ev) v.step(&ev);
    ASSERT_EQ(v.nav.mode(), NavMode::retreat);
    const Vec2 at_event = v.event_xy;

    Vec2 last = v.xy;
    while (v.nav.mode() == NavMode::retreat) {
        last = v.xy;
        v.step();
    }
    EXPECT_NEAR(last.x(), at_event.x() - p.retreat_distance, 1e-12);
    EXPECT_NEAR(last.y(), at_event.y(), 1e-12);
    ASSERT_EQ(v.nav.mode(), NavMode::shift);

    Vec2 shifted = v.xy;
    while (v.nav.mode() == NavMode::shift) {
        shifted = v.xy;
        EXPECT_NEAR(shifted.x(), last.x(), 1e-12);
        v.step();
    }
    EXPECT_NEAR(std::abs(shifted.y()), p.shift_step, 1e-12);
    EXPECT_NEAR(std::abs(v.nav.state().shift_offset), p.shift_step, 1e-12);
    EXPECT_EQ(v.nav.mode(), NavMode::cruise);

    v.run_until(NavMode::done);
    EXPECT_FALSE(v.nav.aborted());
    EXPECT_EQ(v.nav.state().shift_offset, 0.0);
    EXPECT_EQ(v.nav.avoid_cycles(), 1);
}

TEST(Navigator, FlankContactShiftsAway) {
    for (auto [dir, sig, sign] : {std::tuple{Direction::front_left, Signature::L_up, -1.0},
                                  std::tuple{Direction::front_right, Signature::R_up, 1.0}}) {
        PerfectTracker v(straight_route());
        v.run_until(NavMode::cruise);
        while (v.xy.x() < 0.3) v.step();
        std::optional<CollisionEvent> ev = event_at(dir, sig);
        while (ev) v.step(&ev);
        v.run_until(NavMode::cruise);
        EXPECT_GT(sign * v.nav.state().shift_offset, 0.0) << to_string(dir);
    }
}

TEST(Navigator, PersistentFrontalElevationIsAGust) {
    PerfectTracker v(straight_route());
    v.run_until(NavMode::cruise);
    while (v.xy.x() < 0.3) v.step();
    std::optional<CollisionEvent> ev = event_at(Direction::front, Signature::both_up);
    while (ev) v.step(&ev);
    while (v.nav.mode() == NavMode::retreat && v.t < 30.0) v.step(nullptr, Signature::both_up);
    EXPECT_EQ(v.nav.mode(), NavMode::cruise);
    EXPECT_EQ(v.nav.gusts_rejected(), 1);
    EXPECT_EQ(v.nav.state().shift_offset, 0.0);
}

TEST(Navigator, RepeatedContactsAbort) {
    NavParams p = straight_route();
    p.max_avoid_cycles = 3;
    PerfectTracker v(p);
    v.run_until(NavMode::cruise);
    for (int k = 0; k < 4 && v.nav.mode() != NavMode::done; ++k) {
        std::optional<CollisionEvent> ev = event_at(Direction::front_left, Signature::L_up);
        while (ev) v.step(&ev);
        v.run_until(NavMode::cruise);
    }
    EXPECT_EQ(v.nav.mode(), NavMode::done);
    EXPECT_TRUE(v.nav.aborted());
}

TEST(Mapping, ObstaclePointAlongBearing) {
    MapEstimate m;
    const ObstaclePoint& a =
        update_map(m, event_at(Direction::front, Signature::both_up), Vec3(1.0, 2.0, 0.5), kPi / 2.0, 0.085);
    EXPECT_NEAR(a.x, 1.0, 1e-15);
    EXPECT_NEAR(a.y, 2.085, 1e-15);
    const ObstaclePoint& b =
        update_map(m, event_at(Direction::front_left, Signature::L_up), Vec3(0.0, 0.0, 0.5), 0.0, 0.1);
    EXPECT_NEAR(b.x, 0.1 * std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(b.y, 0.1 * std::sqrt(0.5), 1e-15);
    EXPECT_EQ(b.direction, Direction::front_left);
    EXPECT_EQ(m.obstacles.size(), 2u);
}

TEST(Mapping, TerrainAtReferenceRatio) {
    MapEstimate m;
    ClearanceInversion inv;
    const TerrainSample& s = update_map(m, in_band(), Vec3(0.2, 0.1, inv.ref_clearance), inv);
    EXPECT_NEAR(s.h, 0.0, 1e-15);
    ClearanceFeedback high;
    high.ratio = {1.1, 1.1};
    // Higher current means more clearance, so lower terrain.
    EXPECT_LT(update_map(m, high, Vec3(0.2, 0.1, inv.ref_clearance), inv).h, 0.0);
}

TEST(Mapping, InversionClamped) {
    ClearanceInversion inv;
    EXPECT_EQ(inv.clearance(100.0), inv.max_clearance);
    EXPECT_EQ(inv.clearance(-100.0), inv.min_clearance);
}

TEST(Mapping, DistinctPointsOverUnion) {
    std::vector<MapEstimate> maps(2);
    maps[0].obstacles = {{0.100, 0.2}, {0.1004, 0.2}, {0.3, 0.3}};
    maps[1].obstacles = {{0.3, 0.3}, {0.5, 0.1}};
    EXPECT_EQ(distinct_obstacle_points(std::span(maps).first(1)), 2u);
    EXPECT_EQ(distinct_obstacle_points(std::span(maps).last(1)), 2u);
    EXPECT_EQ(distinct_obstacle_points(maps), 3u);
}

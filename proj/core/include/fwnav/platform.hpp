#pragma once

#include <array>
#include <optional>

#include "fwnav/actuation.hpp"
#include "fwnav/dynamics.hpp"
#include "fwnav/environment.hpp"

namespace fwnav {

/// Every physical constant of the simulated vehicle.
struct Platform {
    VehicleParams vehicle;
    AeroParams aero;
    std::array<MotorParams, 2> motors;  // left, right
    ContactModel contact;
    GroundEffectCurve ground;
    WrenchGains wrench;
    double hover_voltage = 12.0;
    double reference_clearance = 3.3;  // D / c of the current threshold
};

/// Default vehicle: hovers at 12 V out of ground effect, and at 12 V and the
/// reference clearance draws the per-wing mean currents given by
/// reference_thresholds() (drag, back-EMF and friction shares 80/10/10).
Platform default_platform();

/// Drive voltage that keeps the wing on its prescribed stroke.
double drive_voltage(const WingState& w, const Platform& p);

struct PhysicsStep {
    WingPair wings;
    AeroResult aero;
    std::array<ContactResult, 2> contact;
    std::array<double, 2> current{0.0, 0.0};  // sensed, A
    std::array<double, 2> armature{0.0, 0.0}; // signed, A
    Wrench total;                             // body frame, aero plus contact
    double clearance = 0.0;                   // m
};

/// Wing, aero, contact and drive evaluation for one physics step. Keeps the
/// previous wingtip positions for the swept contact test.
class FlightPhysics {
public:
    explicit FlightPhysics(const Platform& p) : p_(p) {}

    PhysicsStep evaluate(double t, const VehicleState& state, const ControlInput& input,
                         const World& world, double dt);
    void reset() { have_prev_ = false; }

private:
    const Platform& p_;
    std::array<Vec3, 2> tip_prev_{Vec3::Zero(), Vec3::Zero()};
    bool have_prev_ = false;
};

}  // namespace fwnav

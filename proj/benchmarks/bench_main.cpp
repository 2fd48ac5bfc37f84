#include <benchmark/benchmark.h>

#include <string>

#include "fwnav/config.hpp"
#include "fwnav/dynamics.hpp"
#include "fwnav/navigation.hpp"
#include "fwnav/platform.hpp"
#include "fwnav/scenario.hpp"
#include "fwnav/sensing.hpp"

using namespace fwnav;

static void BM_RigidBodyStep(benchmark::State& st) {
    const Platform pl = default_platform();
    VehicleState s;
    s.position = Vec3(0.0, 0.0, 0.1);
    s.omega_body = Vec3(0.3, -0.2, 0.1);
    Wrench w;
    w.force = Vec3(0.0, 0.0, pl.vehicle.mass * 9.81);
    w.torque = Vec3(1e-7, -2e-7, 5e-8);
    for (auto _ : st) {
        s = step_rigid_body(s, w, pl.vehicle, 1e-4);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_RigidBodyStep);

static void BM_FlightPhysics(benchmark::State& st) {
    const Platform pl = default_platform();
    FlightPhysics phys(pl);
    World world;
    world.arena = {-1, 1, -1, 1};
    VehicleState s;
    s.position = Vec3(0.0, 0.0, 0.05);
    ControlInput in;
    double t = 0.0;
    for (auto _ : st) {
        benchmark::DoNotOptimize(phys.evaluate(t, s, in, world, 1e-4));
        t += 1e-4;
    }
}
BENCHMARK(BM_FlightPhysics);

static void BM_LowPass(benchmark::State& st) {
    LowPassFilter f;
    double x = 0.0;
    for (auto _ : st) {
        x += 1e-3;
        benchmark::DoNotOptimize(f.step(x));
    }
}
BENCHMARK(BM_LowPass);

static void BM_DeadReckon(benchmark::State& st) {
    DeadReckonPose p;
    for (auto _ : st) {
        p = dead_reckon(p, 0.01, Vec2(1e-4, 2e-5));
        benchmark::DoNotOptimize(p);
    }
}
BENCHMARK(BM_DeadReckon);

static void BM_WallScenario(benchmark::State& st) {
    ScenarioConfig c = load_config_file(std::string(FWNAV_SCENARIO_DIR) + "/wall.cfg");
    for (auto _ : st) benchmark::DoNotOptimize(run_scenario(c));
}
BENCHMARK(BM_WallScenario)->Unit(benchmark::kMillisecond)->Iterations(3);
BENCHMARK_MAIN();

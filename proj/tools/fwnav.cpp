#include <glob.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "fwnav/calibration.hpp"
#include "fwnav/scenario.hpp"
#include "fwnav/svg.hpp"

namespace fs = std::filesystem;
using namespace fwnav;

namespace {

void print_report(const RunReport& r) {
    std::cout << report_text(r);
    std::printf("wall_clock = %.2f s\n", r.wall_clock);
}

int run_one(ScenarioConfig cfg, const std::string& out_override) {
    if (!out_override.empty()) cfg.output_dir = out_override;
    const RunResult res = run_scenario(cfg);
    const std::string dir = output_dir(cfg);
    write_run(res, dir);
    print_report(res.report);
    std::cout << "output = " << dir << '\n';
    return res.report.all_pass() ? 0 : 1;
}

void save(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

int calibrate(const std::string& kind, const ScenarioConfig& cfg, const std::string& out_override) {
    const fs::path dir = out_override.empty() ? fs::path(output_dir(cfg)) : fs::path(out_override);
    fs::create_directories(dir);
    const Platform& p = cfg.platform;
    if (kind == "ground_effect_sweep") {
        GroundEffectSweepOptions opt;
        opt.seed = cfg.seed;
        const GroundEffectSweep s = ground_effect_sweep(p, opt);
        std::ostringstream csv;
        csv << "V_s,clearance_over_chord,lift,i_L,i_R\n";
        for (std::size_t v = 0; v < s.voltages.size(); ++v)
            for (std::size_t d = 0; d < s.clearances.size(); ++d)
                csv << format_double(s.voltages[v]) << ',' << format_double(s.clearances[d]) << ','
                    << format_double(s.lift[v][d]) << ',' << format_double(s.current_L[v][d]) << ','
                    << format_double(s.current_R[v][d]) << '\n';
        save(dir / "ground_effect.csv", csv.str());

        std::ostringstream t;
        const ThresholdModel& m = s.thresholds;
        const ThresholdEval e12 = threshold_at(12.0, m);
        t << "slope_L = " << format_double(m.slope_L) << "\nintercept_L = " << format_double(m.intercept_L)
          << "\nslope_R = " << format_double(m.slope_R) << "\nintercept_R = " << format_double(m.intercept_R)
          << "\nr2_L = " << format_double(m.r2_L) << "\nr2_R = " << format_double(m.r2_R)
          << "\ni_L_12V = " << format_double(e12.i_L) << "\ni_R_12V = " << format_double(e12.i_R)
          << "\nrel_slope = " << format_double(s.rel_slope) << '\n';
        for (std::size_t v = 0; v < s.voltages.size(); ++v)
            t << "peaks." << format_double(s.voltages[v]) << "V = lift_max_at "
              << format_double(s.lift_peak[v]) << " current_min_at " << format_double(s.current_min[v]) << '\n';
        save(dir / "thresholds.txt", t.str());
        std::cout << t.str();

        SvgPlot lift("Cycle-mean lift vs clearance", "D / c", "lift [N]");
        SvgPlot cur("Cycle-mean current vs clearance (left + right)", "D / c", "current [A]");
        const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
        for (std::size_t v = 0; v < s.voltages.size(); ++v) {
            std::vector<double> sum;
            for (std::size_t d = 0; d < s.clearances.size(); ++d)
                sum.push_back(s.current_L[v][d] + s.current_R[v][d]);
            const std::string label = format_double(s.voltages[v]) + " V";
            lift.line(s.clearances, s.lift[v], colors[v % 6], label);
            cur.line(s.clearances, sum, colors[v % 6], label);
        }
        save(dir / "ground_effect_lift.svg", lift.render());
        save(dir / "ground_effect_current.svg", cur.render());
        return 0;
    }
    if (kind == "collision_bound_sweep") {
        const CollisionBoundSweep s = collision_bound_sweep(p);
        const char* names[] = {"L_up", "L_down", "R_up", "R_down"};
        std::ostringstream csv;
        csv << "V_s,channel,bound,free\n";
        for (std::size_t v = 0; v < s.voltages.size(); ++v)
            for (int c = 0; c < 4; ++c)
                csv << format_double(s.voltages[v]) << ',' << names[c] << ',' << format_double(s.bound[v][c])
                    << ',' << format_double(s.free[v][c]) << '\n';
        save(dir / "collision_bounds.csv", csv.str());
        SvgPlot plot("Half-stroke collision current vs voltage", "V_s [V]", "current [A]");
        const char* colors[] = {"#1f77b4", "#aec7e8", "#d62728", "#ff9896"};
        for (int c = 0; c < 4; ++c) {
            std::vector<double> y;
            for (const auto& b : s.bound) y.push_back(b[c]);
            plot.line(s.voltages, y, colors[c], names[c]);
            std::cout << names[c] << ": slope " << format_double(s.slope[c]) << " A/V, intercept "
                      << format_double(s.intercept[c]) << " A, r2 " << format_double(s.r2[c]) << '\n';
        }
        save(dir / "collision_bounds.svg", plot.render());
        return 0;
    }
    if (kind == "contact_stiffness") {
        const double k = calibrate_contact_stiffness(p);
        std::cout << "contact_stiffness = " << format_double(k) << '\n';
        save(dir / "contact_stiffness.txt", "contact_stiffness = " + format_double(k) + "\n");
        return 0;
    }
    std::cerr << "unknown calibration kind: " << kind << '\n';
    return 2;
}

std::vector<std::string> expand_glob(const std::string& pattern) {
    std::vector<std::string> out;
    glob_t g{};
    if (::glob(pattern.c_str(), 0, nullptr, &g) == 0)
        for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
    globfree(&g);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flapping-wing navigation simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string out;
    app.add_option("-o,--out", out, "Output directory (overrides the config and FWNAV_OUT)");

    std::string config;
    auto* run = app.add_subcommand("run", "Run one scenario");
    run->add_option("config", config, "Scenario file")->required();
    std::uint64_t seed = 0;
    run->add_option("--seed", seed, "Override the scenario seed");

    std::string kind;
    auto* cal = app.add_subcommand("calibrate", "Run a calibration protocol on the stand");
    cal->add_option("kind", kind, "ground_effect_sweep | collision_bound_sweep | contact_stiffness")
        ->required();
    cal->add_option("config", config, "Scenario file providing the vehicle")->required();

    std::string trace_dir;
    auto* replay = app.add_subcommand("replay", "Regenerate plots from a trace directory");
    replay->add_option("trace-dir", trace_dir)->required()->check(CLI::ExistingDirectory);

    std::string pattern, seeds = "1..1";
    auto* batch = app.add_subcommand("batch", "Run every matching scenario for a seed range");
    batch->add_option("config-glob", pattern)->required();
    batch->add_option("--seeds", seeds, "Inclusive seed range a..b");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            ScenarioConfig cfg = load_config_file(config);
            if (run->count("--seed")) {
                cfg.seed = seed;
                cfg.run_id = cfg.name + "-" + std::to_string(seed);
                cfg.output_dir.clear();
            }
            return run_one(cfg, out);
        }
        if (*cal) return calibrate(kind, load_config_file(config), out);
        if (*replay) {
            replay_plots(trace_dir);
            std::cout << "plots regenerated in " << trace_dir << '\n';
            return 0;
        }
        if (*batch) {
            const auto dots = seeds.find("..");
            if (dots == std::string::npos) throw std::invalid_argument("--seeds expects a..b");
            const std::uint64_t a = std::stoull(seeds.substr(0, dots));
            const std::uint64_t b = std::stoull(seeds.substr(dots + 2));
            const auto files = expand_glob(pattern);
            if (files.empty()) throw std::invalid_argument("no config matches " + pattern);
            int failures = 0, total = 0;
            for (const auto& f : files) {
                for (std::uint64_t s = a; s <= b; ++s) {
                    ScenarioConfig cfg = load_config_file(f);
                    cfg.seed = s;
                    cfg.run_id = cfg.name + "-" + std::to_string(s);
                    cfg.output_dir = out.empty() ? "" : (fs::path(out) / cfg.run_id).string();
                    const RunResult res = run_scenario(cfg);
                    write_run(res, output_dir(cfg));
                    ++total;
                    const bool ok = res.report.all_pass();
                    failures += ok ? 0 : 1;
                    std::printf("%-24s %s  t=%.1fs collisions=%d map_rms=%.4f\n", cfg.run_id.c_str(),
                                ok ? "PASS" : "FAIL", res.report.mission_time,
                                res.report.collision_count, res.report.map_rms);
                }
            }
            std::printf("%d/%d runs passed\n", total - failures, total);
            return failures == 0 ? 0 : 1;
        }
    } catch (const ConfigErrors& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

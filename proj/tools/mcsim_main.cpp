#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "mcsim/scenario.hpp"
#include "mcsim/sim.hpp"
#include "mcsim/trace_io.hpp"

namespace {

using namespace mcsim;

int status_code(RunStatus s) {
    switch (s) {
        case RunStatus::Completed: return 0;
        case RunStatus::Collision: return 2;
        case RunStatus::Timeout: return 3;
    }
    return 1;
}

Density parse_density(const std::string& s) {
    if (s == "moderate") return Density::Moderate;
    if (s == "heavy") return Density::Heavy;
    throw ScenarioError({"density: expected moderate or heavy, got '" + s +
                         "'"});
}

Profile parse_profile(const std::string& s) {
    if (s == "flat") return Profile::Flat;
    if (s == "rolling") return Profile::Rolling;
    throw ScenarioError({"profile: expected flat or rolling, got '" + s +
                         "'"});
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

void apply_workers(int workers) {
    if (workers <= 0) {
        if (const char* env = std::getenv("MCSIM_WORKERS"))
            workers = std::atoi(env);
    }
#ifdef _OPENMP
    if (workers > 0) omp_set_num_threads(workers);
#else
    (void)workers;
#endif
}

// shared scenario source flags
struct SourceOpts {
    std::string file;
    std::string gen;
    double km = 12.0;
    std::string density = "moderate";
    std::string profile = "rolling";
    std::uint64_t seed = 1;
    bool seed_set = false;
};

void add_source_flags(CLI::App* cmd, SourceOpts& o) {
    auto* f = cmd->add_option("--scenario", o.file, "scenario file to load");
    auto* g = cmd->add_option(
        "--gen", o.gen, "built-in generator: simple_overtake or highway");
    f->excludes(g);
    g->excludes(f);
    cmd->add_option("--km", o.km, "highway generator: route length, km");
    cmd->add_option("--density", o.density,
                    "highway generator: moderate or heavy");
    cmd->add_option("--profile", o.profile,
                    "highway generator: rolling or flat");
    cmd->add_option("--seed", o.seed, "override the scenario seed")
        ->each([&](const std::string&) { o.seed_set = true; });
}

Scenario load_scenario(const SourceOpts& o) {
    Scenario sc;
    if (!o.file.empty()) {
        sc = parse_scenario_file(o.file);
        if (o.seed_set) sc.seed = o.seed;
    } else if (o.gen == "simple_overtake") {
        sc = gen_simple_overtake();
        if (o.seed_set) sc.seed = o.seed;
    } else if (o.gen == "highway") {
        sc = gen_highway(o.km, parse_density(o.density), o.seed,
                         parse_profile(o.profile));
    } else if (o.gen.empty()) {
        throw ScenarioError({"one of --scenario or --gen is required"});
    } else {
        throw ScenarioError(
            {"gen: expected simple_overtake or highway, got '" + o.gen +
             "'"});
    }
    return sc;
}

int cmd_run(const SourceOpts& src, const std::string& controller,
            const std::string& trace_path, const std::string& summary_path) {
    Scenario sc = load_scenario(src);
    ControllerType ctrl = ControllerType::MultiCruise;
    if (!controller.empty()) {
        if (controller == "multicruise") ctrl = ControllerType::MultiCruise;
        else if (controller == "lane_following")
            ctrl = ControllerType::LaneFollowing;
        else
            throw ScenarioError({"controller: expected multicruise or "
                                 "lane_following, got '" +
                                 controller + "'"});
    } else if (sc.ego.controller) {
        ctrl = *sc.ego.controller;
    }

    SimTrace tr = run_scenario(sc, ctrl);
    if (!trace_path.empty()) {
        std::ostringstream os;
        write_trace_csv(tr, os);
        write_file(trace_path, os.str());
    }
    std::string summary = summary_json(tr.summary);
    if (!summary_path.empty())
        write_file(summary_path, summary + "\n");
    else
        std::cout << summary << "\n";
    return status_code(tr.summary.status);
}

int cmd_compare(const SourceOpts& src, const std::string& report_path,
                const std::string& fuel_csv_path,
                const std::string& trace_mc_path,
                const std::string& trace_lf_path) {
    Scenario sc = load_scenario(src);
    SimTrace mc = run_scenario(sc, ControllerType::MultiCruise);
    SimTrace lf = run_scenario(sc, ControllerType::LaneFollowing);
    CompareReport rep =
        make_compare_report(sc.name, sc.seed, mc.summary, lf.summary);

    auto dump_trace = [](const SimTrace& t, const std::string& path) {
        if (path.empty()) return;
        std::ostringstream os;
        write_trace_csv(t, os);
        write_file(path, os.str());
    };
    dump_trace(mc, trace_mc_path);
    dump_trace(lf, trace_lf_path);
    if (!fuel_csv_path.empty()) {
        std::ostringstream os;
        write_fuel_rate_csv(mc, lf, os);
        write_file(fuel_csv_path, os.str());
    }
    std::string report = compare_report_json(rep);
    if (!report_path.empty())
        write_file(report_path, report + "\n");
    else
        std::cout << report << "\n";

    for (RunStatus bad : {RunStatus::Collision, RunStatus::Timeout})
        if (mc.summary.status == bad || lf.summary.status == bad)
            return status_code(bad);
    return 0;
}

int cmd_batch(double km, const std::string& density,
              const std::string& profile, int seeds, std::uint64_t seed_base,
              int workers, const std::string& report_path) {
    if (seeds < 1) throw ScenarioError({"seeds: must be >= 1"});
    Density dens = parse_density(density);
    Profile prof = parse_profile(profile);
    apply_workers(workers);

    std::vector<CompareReport> rows(static_cast<std::size_t>(seeds));
    std::vector<std::string> errors(static_cast<std::size_t>(seeds));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int i = 0; i < seeds; ++i) {
        std::uint64_t seed = seed_base + static_cast<std::uint64_t>(i);
        try {
            Scenario sc = gen_highway(km, dens, seed, prof);
            SimTrace mc = run_scenario(sc, ControllerType::MultiCruise);
            SimTrace lf = run_scenario(sc, ControllerType::LaneFollowing);
            rows[static_cast<std::size_t>(i)] = make_compare_report(
                sc.name, seed, mc.summary, lf.summary);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what();
        }
    }
    for (int i = 0; i < seeds; ++i) {
        if (!errors[static_cast<std::size_t>(i)].empty()) {
            std::cerr << "seed " << seed_base + static_cast<std::uint64_t>(i)
                      << ": " << errors[static_cast<std::size_t>(i)] << "\n";
            return 1;
        }
    }

    BatchAggregate agg = aggregate_batch(rows);
    char desc[160];
    std::snprintf(desc, sizeof desc,
                  "highway %gkm %s %s, seeds [%llu, %llu)", km,
                  to_string(dens), to_string(prof),
                  static_cast<unsigned long long>(seed_base),
                  static_cast<unsigned long long>(
                      seed_base + static_cast<std::uint64_t>(seeds)));
    std::string report = batch_report_json(rows, agg, desc);
    if (!report_path.empty())
        write_file(report_path, report + "\n");
    else
        std::cout << report << "\n";
    return 0;
}

int cmd_gen(const SourceOpts& src, const std::string& out_path) {
    if (src.gen.empty())
        throw ScenarioError({"gen: --gen is required (simple_overtake or "
                             "highway)"});
    Scenario sc = load_scenario(src);
    std::string text = serialize_scenario(sc);
    if (!out_path.empty())
        write_file(out_path, text);
    else
        std::cout << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "mcsim: deterministic highway traffic simulation with "
        "energy-oriented lane selection"};
    app.require_subcommand(1);

    SourceOpts run_src;
    std::string run_controller, run_trace, run_summary;
    CLI::App* run = app.add_subcommand(
        "run", "simulate one scenario with one ego controller");
    add_source_flags(run, run_src);
    run->add_option("--controller", run_controller,
                    "multicruise or lane_following (default: scenario "
                    "setting, else multicruise)");
    run->add_option("--trace", run_trace, "write the per-step ego CSV here");
    run->add_option("--summary", run_summary,
                    "write the summary JSON here instead of stdout");

    SourceOpts cmp_src;
    std::string cmp_report, cmp_fuel_csv, cmp_trace_mc, cmp_trace_lf;
    CLI::App* cmp = app.add_subcommand(
        "compare",
        "run the same scenario under multicruise and lane_following");
    add_source_flags(cmp, cmp_src);
    cmp->add_option("--report", cmp_report,
                    "write the paired report JSON here instead of stdout");
    cmp->add_option("--fuel-csv", cmp_fuel_csv,
                    "write the aligned fuel-rate CSV here");
    cmp->add_option("--trace-multicruise", cmp_trace_mc,
                    "write the multicruise per-step CSV here");
    cmp->add_option("--trace-lane-following", cmp_trace_lf,
                    "write the lane_following per-step CSV here");

    double batch_km = 12.0;
    std::string batch_density = "moderate", batch_profile = "rolling";
    int batch_seeds = 20, batch_workers = 0;
    std::uint64_t batch_seed_base = 1;
    std::string batch_report;
    CLI::App* batch = app.add_subcommand(
        "batch", "paired runs over a range of generated highway seeds");
    batch->add_option("--km", batch_km, "route length, km");
    batch->add_option("--density", batch_density, "moderate or heavy");
    batch->add_option("--profile", batch_profile, "rolling or flat");
    batch->add_option("--seeds", batch_seeds, "number of seeds to run");
    batch->add_option("--seed-base", batch_seed_base, "first seed");
    batch->add_option("--workers", batch_workers,
                      "worker threads (default: MCSIM_WORKERS env, else all)");
    batch->add_option("--report", batch_report,
                      "write the batch report JSON here instead of stdout");

    SourceOpts gen_src;
    std::string gen_out;
    CLI::App* gen = app.add_subcommand(
        "gen", "emit a built-in scenario in the canonical text format");
    add_source_flags(gen, gen_src);
    gen->add_option("-o,--out", gen_out, "output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        if (app.got_subcommand(run))
            return cmd_run(run_src, run_controller, run_trace, run_summary);
        if (app.got_subcommand(cmp))
            return cmd_compare(cmp_src, cmp_report, cmp_fuel_csv,
                               cmp_trace_mc, cmp_trace_lf);
        if (app.got_subcommand(batch))
            return cmd_batch(batch_km, batch_density, batch_profile,
                             batch_seeds, batch_seed_base, batch_workers,
                             batch_report);
        if (app.got_subcommand(gen)) return cmd_gen(gen_src, gen_out);
    } catch (const ScenarioError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

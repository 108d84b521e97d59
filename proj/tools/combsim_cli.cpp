// combsim command line: run, sweep, validate and report.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "combsim/report.hpp"
#include "combsim/runner.hpp"
#include "combsim/scenario.hpp"

using namespace combsim;

namespace {

int fail(const std::string& message, const std::string& field) {
    std::cerr << nlohmann::json{{"error", message}, {"field", field}}.dump() << '\n';
    return 2;
}

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    int threads = 0;
    bool full = false;
};

Scenario load(const Options& o) {
    if (o.config.empty()) throw Error("no config given", "config");
    Scenario s = load_scenario(o.config);
    if (o.seed) s.seeds = {*o.seed};
    if (o.full) apply_full_scale(s);
    s.validate();
    return s;
}

int threads_of(const Options& o) {
    if (o.threads > 0) return o.threads;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::string out_dir(const Options& o, const Scenario& s) {
    if (!o.out.empty()) return o.out;
    if (const char* env = std::getenv("COMBSIM_OUT_DIR"); env && *env) return env;
    return "runs/" + s.name;
}

int execute(const Scenario& s, const Options& o) {
    const int threads = threads_of(o);
    const auto result = run_scenario(s, threads);
    const auto dir = out_dir(o, s);
    write_run(dir, s, result, {threads, o.full, utc_timestamp()});
    std::cout << nlohmann::json{{"status", "ok"}, {"out", dir}, {"out_of_lock_samples", result.out_of_lock_samples}}.dump()
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coherent comb interconnect simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    Options o;
    std::string run_dir;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config,--config", o.config, "Scenario JSON file");
        sub->add_option("--seed", o.seed, "Replace the scenario's seed list with one seed");
        sub->add_option("--out", o.out, "Output directory (default $COMBSIM_OUT_DIR or runs/<name>)");
        sub->add_option("--threads", o.threads, "Worker threads (default: hardware concurrency)")->check(CLI::NonNegativeNumber);
        sub->add_flag("--full", o.full, "21 Gbaud and all twenty data channels");
    };
    auto* run = app.add_subcommand("run", "Run a scenario");
    add_common(run);
    auto* sweep = app.add_subcommand("sweep", "Sweep the CPE skip factor for every coherence mode");
    add_common(sweep);
    auto* validate = app.add_subcommand("validate", "Check a scenario and print the resolved config");
    add_common(validate);
    auto* report = app.add_subcommand("report", "Summarize a run directory");
    report->add_option("run-dir", run_dir, "Directory written by run or sweep")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(e.what(), "args");
    }

    try {
        if (*run) return execute(load(o), o);
        if (*sweep) {
            Scenario s = load(o);
            s.experiment = Experiment::CpeSweep;
            if (s.sweep.modes.empty())
                s.sweep.modes = {CoherenceMode::LockedCombs, CoherenceMode::UnlockedCombs,
                                 CoherenceMode::IndependentLasers};
            s.validate();
            return execute(s, o);
        }
        if (*validate) {
            std::cout << scenario_to_json(load(o)).dump(2) << '\n';
            return 0;
        }
        if (*report) {
            std::cout << summarize_run(run_dir).dump(2) << '\n';
            return 0;
        }
    } catch (const Error& e) {
        return fail(e.what(), e.field());
    } catch (const nlohmann::json::exception& e) {
        return fail(e.what(), "config");
    } catch (const std::exception& e) {
        return fail(e.what(), "");
    }
    return 1;
}

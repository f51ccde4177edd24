// bgp — command-line harness: `simulate` runs the biased process and writes
// trace CSVs, `ode` solves the coupled system for one K, `sweep` maps t_c
// over a K grid (optionally with simulation columns), and `verify-coupling`
// runs the exact small-scale checks. Every command writes a manifest
// sufficient to reproduce its outputs byte for byte.
//
// Exit codes: 0 success, 1 usage error, 2 numerical or verification failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bgp/critical.hpp"
#include "bgp/io.hpp"
#include "bgp/parallel.hpp"
#include "bgp/process.hpp"
#include "bgp/version.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string seed_path(const std::string& out, int k, int seeds) {
    if (seeds == 1) return out;
    const std::filesystem::path p(out);
    std::filesystem::path stem = p;
    stem.replace_extension();
    return stem.string() + ".seed" + std::to_string(k) +
           p.extension().string();
}

unsigned default_jobs() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

struct SimulateOptions {
    std::uint32_t n = 1000;
    double bias = 1.0;
    std::string mode = "exact";
    std::uint64_t seed = 1;
    int seeds = 1;
    double t_max = 1.0;
    std::uint64_t stride = 0;
    std::string out = "trace.csv";
    unsigned jobs = default_jobs();
};

int run_simulate(const SimulateOptions& opt) {
    const auto start = Clock::now();
    bgp::ProcessConfig config;
    config.n = opt.n;
    config.bias = opt.bias;
    config.mode = bgp::process_mode_from_string(opt.mode);
    config.seed = opt.seed;
    config.t_max = opt.t_max;
    config.stride = opt.stride;
    config.validate();
    if (opt.seeds < 1) throw std::invalid_argument("--seeds must be >= 1");

    std::vector<bgp::ProcessTrace> traces(opt.seeds);
    bgp::parallel_for(opt.seeds, opt.jobs, [&](std::size_t k) {
        bgp::ProcessConfig cfg = config;
        cfg.seed = config.seed + k;
        traces[k] = bgp::run(cfg);
    });

    bgp::RunManifest manifest;
    manifest.command = "simulate";
    manifest.config = {{"n", opt.n},       {"K", opt.bias},
                       {"mode", opt.mode}, {"seed", opt.seed},
                       {"seeds", opt.seeds}, {"t_max", opt.t_max},
                       {"stride", traces.front().stride}, {"out", opt.out},
                       {"jobs", opt.jobs}};
    for (int k = 0; k < opt.seeds; ++k) {
        const std::string path = seed_path(opt.out, k, opt.seeds);
        bgp::write_text_file(path, bgp::trace_csv(traces[k]));
        bgp::write_text_file(path + ".meta.json",
                             bgp::trace_sidecar(traces[k]).dump(2) + "\n");
        manifest.outputs.push_back(path);
        manifest.outputs.push_back(path + ".meta.json");
        manifest.seeds.push_back(config.seed + k);
        std::printf("%s: %zu rows, final t = %s\n", path.c_str(),
                    traces[k].rows.size(),
                    bgp::format_double(traces[k].rows.back().t).c_str());
    }
    manifest.duration_seconds = seconds_since(start);
    bgp::write_manifest(manifest, opt.out + ".manifest.json");
    return 0;
}

struct OdeOptions {
    double bias = 1.0;
    bgp::SolverConfig solver;
    std::string out = "ode.csv";
};

int run_ode(const OdeOptions& opt) {
    const auto start = Clock::now();
    opt.solver.validate();
    if (!(opt.bias >= 0.0)) throw std::invalid_argument("--K must be >= 0");

    std::string csv;
    nlohmann::json sidecar;
    if (opt.bias == 0.0) {
        csv = bgp::closed_form_k0_csv(opt.solver.z_switch);
        sidecar = bgp::closed_form_k0_sidecar(opt.solver);
        std::printf("K = 0: closed form, t_c = 1.5\n");
    } else {
        const bgp::OdeSolution solution = bgp::solve_coupled(opt.bias, opt.solver);
        csv = bgp::ode_csv(solution);
        sidecar = bgp::ode_sidecar(solution);
        std::printf("K = %s: t_c = %s, bracket [%s, %s]\n",
                    bgp::format_double(opt.bias).c_str(),
                    bgp::format_double(*solution.blowup_time).c_str(),
                    bgp::format_double(solution.bracket_lo).c_str(),
                    bgp::format_double(solution.bracket_hi).c_str());
    }
    bgp::write_text_file(opt.out, csv);
    bgp::write_text_file(opt.out + ".meta.json", sidecar.dump(2) + "\n");

    bgp::RunManifest manifest;
    manifest.command = "ode";
    manifest.config = {{"K", opt.bias},
                       {"rtol", opt.solver.rtol},
                       {"atol", opt.solver.atol},
                       {"z_switch", opt.solver.z_switch},
                       {"t_ceiling", opt.solver.t_ceiling},
                       {"out", opt.out}};
    manifest.outputs = {opt.out, opt.out + ".meta.json"};
    manifest.duration_seconds = seconds_since(start);
    bgp::write_manifest(manifest, opt.out + ".manifest.json");
    return 0;
}

struct SweepOptions {
    double k_min = 0.0, k_max = 0.0, k_step = 0.0;
    std::vector<double> k_list;
    bgp::SolverConfig solver;
    bool with_simulation = false;
    std::uint32_t n = 100000;
    int seeds = 10;
    double alpha = 0.01;
    double t_max = 0.0;
    std::uint64_t seed = 1;
    std::string out = "sweep.csv";
    unsigned jobs = default_jobs();
};

int run_sweep(const SweepOptions& opt) {
    const auto start = Clock::now();
    std::vector<double> grid = opt.k_list;
    if (grid.empty()) {
        if (!(opt.k_step > 0.0))
            throw std::invalid_argument("need --k-list or --k-min/--k-max/--k-step");
        for (int i = 0;; ++i) {
            const double k = opt.k_min + i * opt.k_step;
            if (k > opt.k_max + 1e-12) break;
            grid.push_back(k);
        }
    }
    if (grid.empty()) throw std::invalid_argument("empty K grid");

    // Solve the grid in parallel, then assemble through sweep() so the
    // monotonicity assertion still runs on the full report.
    std::vector<bgp::SweepRow> rows(grid.size());
    bgp::parallel_for(grid.size(), opt.jobs, [&](std::size_t i) {
        bgp::SweepReport one = bgp::sweep({grid[i]}, opt.solver);
        rows[i] = std::move(one.rows.front());
    });
    bgp::SweepReport report;
    report.rows = std::move(rows);
    const bgp::SweepRow* prev = nullptr;
    for (const bgp::SweepRow& row : report.rows) {
        if (row.status != "ok") continue;
        if (prev && !(row.estimate.t_c < prev->estimate.t_c))
            throw std::runtime_error("critical time failed to decrease at K = " +
                                     std::to_string(row.estimate.bias));
        prev = &row;
    }

    std::vector<bgp::SimOdeComparison> comparisons;
    if (opt.with_simulation) {
        comparisons.resize(grid.size());
        bgp::parallel_for(grid.size(), opt.jobs, [&](std::size_t i) {
            comparisons[i] = bgp::compare_simulation_vs_ode(
                grid[i], opt.n, opt.seeds, opt.alpha, opt.solver, opt.t_max,
                opt.seed);
        });
    }

    bgp::write_text_file(
        opt.out,
        bgp::sweep_csv(report, opt.with_simulation ? &comparisons : nullptr));

    bgp::RunManifest manifest;
    manifest.command = "sweep";
    manifest.config = {{"k_grid", grid},   {"rtol", opt.solver.rtol},
                       {"atol", opt.solver.atol}, {"simulate", opt.with_simulation},
                       {"n", opt.n},       {"seeds", opt.seeds},
                       {"alpha", opt.alpha}, {"t_max", opt.t_max},
                       {"seed", opt.seed}, {"out", opt.out},
                       {"jobs", opt.jobs}};
    if (opt.with_simulation)
        for (int k = 0; k < opt.seeds; ++k)
            manifest.seeds.push_back(opt.seed + static_cast<std::uint64_t>(k));
    manifest.outputs = {opt.out};
    manifest.duration_seconds = seconds_since(start);
    bgp::write_manifest(manifest, opt.out + ".manifest.json");
    std::printf("%zu rows -> %s\n", report.rows.size(), opt.out.c_str());
    return 0;
}

struct VerifyOptions {
    std::string flow_file;
    int n = 4;
    std::string bias = "1";
    int t = 1;
    std::string property;
    std::string out;
};

int run_verify(const VerifyOptions& opt) {
    const auto start = Clock::now();
    nlohmann::json report;
    bool pass = false;

    if (!opt.flow_file.empty()) {
        std::ifstream in(opt.flow_file);
        if (!in) throw std::invalid_argument("cannot read " + opt.flow_file);
        nlohmann::json problem_json;
        in >> problem_json;
        const bgp::CouplingProblem problem =
            bgp::coupling_problem_from_json(problem_json);
        const bgp::CouplingPlan plan = bgp::build_coupling(problem);
        report = bgp::coupling_plan_to_json(plan, problem);
        report["check"] = "flow-coupling";
        pass = plan.feasible;
    } else {
        if (opt.property.empty())
            throw std::invalid_argument("need --flow or --property");
        const bgp::GraphPredicate predicate = bgp::parse_predicate(opt.property);
        const bgp::Rational bias = bgp::rational_from_string(opt.bias);
        const bgp::DominationReport dom =
            bgp::verify_domination(opt.n, bias, opt.t, predicate);
        report = {{"check", "domination"},
                  {"n", opt.n},
                  {"K", bgp::rational_to_string(bias)},
                  {"t", opt.t},
                  {"property", predicate.name},
                  {"stretch_M", dom.stretch},
                  {"pr_biased_t", bgp::rational_to_string(dom.p_biased_t)},
                  {"pr_uniform_Mt", bgp::rational_to_string(dom.p_uniform_stretched)},
                  {"pr_uniform_t", bgp::rational_to_string(dom.p_uniform_t)},
                  {"pr_biased_Mt", bgp::rational_to_string(dom.p_biased_stretched)},
                  {"biased_le_uniform", dom.biased_below_uniform},
                  {"uniform_le_biased", dom.uniform_below_biased}};
        pass = dom.holds();
    }
    report["pass"] = pass;
    const std::string text = report.dump(2) + "\n";
    if (!opt.out.empty()) {
        bgp::write_text_file(opt.out, text);
        bgp::RunManifest manifest;
        manifest.command = "verify-coupling";
        manifest.config = {{"flow", opt.flow_file}, {"n", opt.n},
                           {"K", opt.bias},         {"t", opt.t},
                           {"property", opt.property}, {"out", opt.out}};
        manifest.outputs = {opt.out};
        manifest.duration_seconds = seconds_since(start);
        bgp::write_manifest(manifest, opt.out + ".manifest.json");
    }
    std::fputs(text.c_str(), stdout);
    std::printf("%s\n", pass ? "PASS" : "FAIL");
    return pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"biased graph process toolkit"};
    app.set_version_flag("--version", bgp::kVersion);
    app.require_subcommand(1);

    SimulateOptions sim;
    CLI::App* simulate = app.add_subcommand("simulate", "run the biased process");
    simulate->set_config("--config");
    simulate->add_option("--n", sim.n, "vertex count")->capture_default_str();
    simulate->add_option("--K", sim.bias, "bias weight K")->capture_default_str();
    simulate->add_option("--mode", sim.mode, "exact|approximate")
        ->check(CLI::IsMember({"exact", "approximate"}))
        ->capture_default_str();
    simulate->add_option("--seed", sim.seed, "base RNG seed")
        ->envname("BGP_SEED")
        ->capture_default_str();
    simulate->add_option("--seeds", sim.seeds, "number of consecutive seeds")
        ->capture_default_str();
    simulate->add_option("--t-max", sim.t_max, "scaled-time horizon")
        ->capture_default_str();
    simulate->add_option("--stride", sim.stride, "steps per trace row (0: n/200)")
        ->capture_default_str();
    simulate->add_option("--out", sim.out, "trace CSV path")->capture_default_str();
    simulate->add_option("--jobs", sim.jobs, "parallel workers")
        ->capture_default_str();

    OdeOptions ode;
    CLI::App* ode_cmd = app.add_subcommand("ode", "solve the coupled system");
    ode_cmd->set_config("--config");
    ode_cmd->add_option("--K", ode.bias, "bias weight K")->capture_default_str();
    ode_cmd->add_option("--rtol", ode.solver.rtol)->capture_default_str();
    ode_cmd->add_option("--atol", ode.solver.atol)->capture_default_str();
    ode_cmd->add_option("--z-switch", ode.solver.z_switch)->capture_default_str();
    ode_cmd->add_option("--t-ceiling", ode.solver.t_ceiling)->capture_default_str();
    ode_cmd->add_option("--out", ode.out, "solution CSV path")->capture_default_str();

    SweepOptions swp;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "map t_c over a K grid");
    sweep_cmd->set_config("--config");
    sweep_cmd->add_option("--k-min", swp.k_min)->capture_default_str();
    sweep_cmd->add_option("--k-max", swp.k_max)->capture_default_str();
    sweep_cmd->add_option("--k-step", swp.k_step)->capture_default_str();
    sweep_cmd->add_option("--k-list", swp.k_list, "explicit K grid")
        ->delimiter(',');
    sweep_cmd->add_option("--rtol", swp.solver.rtol)->capture_default_str();
    sweep_cmd->add_option("--atol", swp.solver.atol)->capture_default_str();
    sweep_cmd->add_flag("--simulate", swp.with_simulation,
                        "add simulation columns");
    sweep_cmd->add_option("--n", swp.n, "simulation size")->capture_default_str();
    sweep_cmd->add_option("--seeds", swp.seeds)->capture_default_str();
    sweep_cmd->add_option("--alpha", swp.alpha, "threshold fraction")
        ->capture_default_str();
    sweep_cmd->add_option("--t-max", swp.t_max, "simulation horizon (0: auto)")
        ->capture_default_str();
    sweep_cmd->add_option("--seed", swp.seed, "base RNG seed")
        ->envname("BGP_SEED")
        ->capture_default_str();
    sweep_cmd->add_option("--out", swp.out)->capture_default_str();
    sweep_cmd->add_option("--jobs", swp.jobs)->capture_default_str();

    VerifyOptions ver;
    CLI::App* verify =
        app.add_subcommand("verify-coupling", "exact coupling/domination checks");
    verify->set_config("--config");
    verify->add_option("--flow", ver.flow_file, "CouplingProblem JSON path");
    verify->add_option("--n", ver.n, "vertex count (domination)")
        ->capture_default_str();
    verify->add_option("--K", ver.bias, "bias as a rational, e.g. 1/3")
        ->capture_default_str();
    verify->add_option("--t", ver.t, "biased step count")->capture_default_str();
    verify->add_option("--property", ver.property,
                       "contains-edge:u,v | min-component-size:k | "
                       "edge-count-at-least:k");
    verify->add_option("--out", ver.out, "report JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (simulate->parsed()) return run_simulate(sim);
        if (ode_cmd->parsed()) return run_ode(ode);
        if (sweep_cmd->parsed()) return run_sweep(swp);
        if (verify->parsed()) return run_verify(ver);
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

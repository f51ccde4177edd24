#include "bgp/critical.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bgp {

CriticalTimeEstimate critical_time(double bias, const SolverConfig& cfg) {
    if (!(bias >= 0.0)) throw std::invalid_argument("K must be >= 0");
    CriticalTimeEstimate est;
    est.bias = bias;
    if (bias == 0.0) {
        est.t_c = kClosedFormTc0;
        est.method = TcMethod::closed_form;
        est.uncertainty = 0.0;
        est.meta = "z = 1/(3/2 - t) past t = 1";
        return est;
    }
    if (bias == 1.0) {
        est.t_c = 1.0;
        est.method = TcMethod::closed_form;
        est.uncertainty = 0.0;
        est.meta = "z = 1/(1 - t)";
        return est;
    }
    const OdeSolution sol = solve_coupled(bias, cfg);
    est.t_c = *sol.blowup_time;
    est.method = TcMethod::ode;
    est.uncertainty = 0.5 * (sol.bracket_hi - sol.bracket_lo);
    est.meta = "bracket [" + std::to_string(sol.bracket_lo) + ", " +
               std::to_string(sol.bracket_hi) + "] rtol=" +
               std::to_string(cfg.rtol);
    return est;
}

double asymptotic_tc(double bias) {
    if (!(bias > 0.0)) throw std::invalid_argument("asymptote requires K > 0");
    return 4.0 / std::sqrt(3.0 * bias);
}

SweepReport sweep(const std::vector<double>& bias_grid,
                  const SolverConfig& cfg) {
    for (std::size_t i = 0; i + 1 < bias_grid.size(); ++i) {
        if (!(bias_grid[i] < bias_grid[i + 1]))
            throw std::invalid_argument("bias grid must be strictly increasing");
    }
    if (!bias_grid.empty() && !(bias_grid.front() >= 0.0))
        throw std::invalid_argument("bias grid must be non-negative");

    SweepReport report;
    report.rows.reserve(bias_grid.size());
    for (const double k : bias_grid) {
        SweepRow row;
        row.estimate.bias = k;
        try {
            row.estimate = critical_time(k, cfg);
            if (k > 0.0) {
                row.asymptotic = asymptotic_tc(k);
                row.ratio = row.estimate.t_c / row.asymptotic;
            } else {
                row.asymptotic = std::numeric_limits<double>::quiet_NaN();
                row.ratio = std::numeric_limits<double>::quiet_NaN();
            }
        } catch (const std::exception& e) {
            row.status = std::string("error: ") + e.what();
        }
        report.rows.push_back(std::move(row));
    }

    const SweepRow* prev = nullptr;
    for (const SweepRow& row : report.rows) {
        if (row.status != "ok") continue;
        if (prev && !(row.estimate.t_c < prev->estimate.t_c)) {
            throw std::runtime_error(
                "critical time failed to decrease strictly between K = " +
                std::to_string(prev->estimate.bias) + " and K = " +
                std::to_string(row.estimate.bias));
        }
        prev = &row;
    }
    return report;
}

SimOdeComparison compare_simulation_vs_ode(double bias, std::uint32_t n,
                                           int seeds, double alpha,
                                           const SolverConfig& cfg,
                                           double t_max,
                                           std::uint64_t base_seed) {
    if (n < 1000) throw std::invalid_argument("comparison requires n >= 10^3");
    SimOdeComparison cmp;
    cmp.bias = bias;
    cmp.n = n;
    cmp.seeds = seeds;
    cmp.alpha = alpha;
    cmp.ode = critical_time(bias, cfg);

    ProcessConfig pc;
    pc.n = n;
    pc.bias = bias;
    pc.mode = ProcessMode::exact;
    pc.seed = base_seed;
    pc.t_max = t_max > 0.0 ? t_max : cmp.ode.t_c * 1.5 + 0.5;

    try {
        cmp.simulation = estimate_tc_by_threshold(pc, alpha, seeds);
    } catch (const threshold_not_reached&) {
        // Large K at moderate n: the absolute threshold misfires; fall back
        // to the largest-component derivative rule over the full trace.
        std::vector<double> hits;
        for (int k = 0; k < seeds; ++k) {
            ProcessConfig pck = pc;
            pck.seed = pc.seed + static_cast<std::uint64_t>(k);
            const ProcessTrace trace = run(pck);
            const auto hit = estimate_tc_from_derivative(trace);
            if (!hit)
                throw threshold_not_reached(
                    "derivative rule found no growth burst either (seed " +
                    std::to_string(pck.seed) + ")");
            hits.push_back(*hit);
        }
        double mean = 0.0;
        for (const double h : hits) mean += h;
        mean /= hits.size();
        double var = 0.0;
        for (const double h : hits) var += (h - mean) * (h - mean);
        cmp.simulation.bias = bias;
        cmp.simulation.t_c = mean;
        cmp.simulation.method = TcMethod::simulation;
        cmp.simulation.uncertainty =
            hits.size() > 1 ? std::sqrt(var / (hits.size() - 1.0) / hits.size())
                            : 0.0;
        cmp.simulation.meta = "derivative rule, n=" + std::to_string(n);
        cmp.derivative_rule_used = true;
    }
    cmp.difference = cmp.simulation.t_c - cmp.ode.t_c;
    return cmp;
}

}  // namespace bgp

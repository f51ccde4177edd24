// critical.hpp — the critical time t_c(K): closed forms at K = 0 and K = 1,
// ODE blowup elsewhere, K-sweeps with the 4/sqrt(3K) asymptote, and
// simulation/ODE cross-validation.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bgp/ode.hpp"
#include "bgp/process.hpp"

namespace bgp {

/// t_c(K): exactly 3/2 at K = 0 and 1 at K = 1, otherwise the bracketed
/// blowup time of the coupled ODE system.
CriticalTimeEstimate critical_time(double bias, const SolverConfig& cfg = {});

/// Leading-order law 4 / sqrt(3 K); K > 0.
double asymptotic_tc(double bias);

struct SweepRow {
    CriticalTimeEstimate estimate;
    double asymptotic = 0.0;  ///< 4/sqrt(3K); NaN at K = 0
    double ratio = 0.0;       ///< t_c * sqrt(3K) / 4; NaN at K = 0
    std::string status = "ok";
};

struct SweepReport {
    std::vector<SweepRow> rows;
};

/// One estimate per grid point, in order. The grid must be strictly
/// increasing with K >= 0 (K = 0 admitted as the closed-form row). Rows whose
/// solve fails carry the error in `status` instead of being dropped; the
/// successful ODE-path rows are verified to decrease strictly.
SweepReport sweep(const std::vector<double>& bias_grid,
                  const SolverConfig& cfg = {});

struct SimOdeComparison {
    double bias = 0.0;
    std::uint32_t n = 0;
    int seeds = 0;
    double alpha = 0.0;
    CriticalTimeEstimate simulation;
    CriticalTimeEstimate ode;
    double difference = 0.0;          ///< simulation - ode
    bool derivative_rule_used = false;
};

/// Runs the threshold estimator against the ODE value. When the absolute
/// alpha-threshold is never met the largest-component derivative rule takes
/// over and the record is flagged. t_max <= 0 selects a horizon slightly past
/// the ODE t_c.
SimOdeComparison compare_simulation_vs_ode(double bias, std::uint32_t n,
                                           int seeds, double alpha,
                                           const SolverConfig& cfg = {},
                                           double t_max = 0.0,
                                           std::uint64_t base_seed = 1);

}  // namespace bgp

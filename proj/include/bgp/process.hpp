// process.hpp — the biased random graph process: a weight of 1 on missing
// edges joining two isolated vertices, a weight of K on every other missing
// edge, uniform once fewer than two isolated vertices remain. Exact stepping
// draws one missing edge per step; approximate stepping draws ordered vertex
// pairs and skips loops and duplicates. Observables (isolation ratio,
// susceptibility, largest component) are maintained incrementally in integer
// arithmetic so they can be re-verified by full recounts.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bgp/rng.hpp"

namespace bgp {

/// Raised when a missing edge is requested from a complete graph.
struct graph_complete_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a threshold estimator never meets its target by t_max.
struct threshold_not_reached : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ProcessMode { exact, approximate };

const char* to_string(ProcessMode mode);
ProcessMode process_mode_from_string(const std::string& name);

/// Parameters of one simulation run.
struct ProcessConfig {
    std::uint32_t n = 0;      ///< vertex count, 2 <= n <= 2^31
    double bias = 1.0;        ///< weight K on edges that are not iso-iso; K >= 0
    ProcessMode mode = ProcessMode::exact;
    std::uint64_t seed = 1;
    double t_max = 1.0;       ///< horizon in scaled time (n/2 steps per time unit)
    std::uint64_t stride = 0; ///< steps per trace row; 0 selects n/200

    void validate() const;  // throws std::invalid_argument
};

/// Evolving partition of n vertices plus the edge registry.
///
/// Components live in a union-by-size forest. Two dense membership arrays
/// (isolated / connected vertices) support O(1) category draws. The
/// susceptibility sum Sigma |C|^2 and the largest component size are updated
/// on every merge, never recomputed.
class GraphState {
public:
    explicit GraphState(std::uint32_t n, std::uint64_t edge_capacity_hint = 0);

    std::uint32_t vertex_count() const { return n_; }
    std::uint64_t pair_count() const {
        return static_cast<std::uint64_t>(n_) * (n_ - 1) / 2;
    }
    std::uint64_t edges_added() const { return edges_added_; }
    std::uint64_t edge_registry_size() const { return edges_.size(); }
    std::uint64_t missing_edge_count() const { return pair_count() - edges_added_; }
    bool complete() const { return edges_added_ == pair_count(); }

    std::uint64_t isolated_count() const { return iso_.size(); }
    std::uint64_t susceptibility_sum() const { return susceptibility_sum_; }
    std::uint64_t largest_component() const { return largest_; }

    double isolation_ratio() const {
        return static_cast<double>(iso_.size()) / n_;
    }
    double susceptibility() const {
        return static_cast<double>(susceptibility_sum_) / n_;
    }
    double largest_fraction() const {
        return static_cast<double>(largest_) / n_;
    }

    std::uint32_t find(std::uint32_t v) const;
    std::uint64_t component_size(std::uint32_t v) const { return size_[find(v)]; }
    bool is_isolated(std::uint32_t v) const { return iso_flag_[v] != 0; }
    bool has_edge(std::uint32_t u, std::uint32_t v) const;

    /// Inserts the missing edge {u, v} and merges the two components if they
    /// differ. Throws std::invalid_argument on a loop or duplicate edge.
    void apply_edge(std::uint32_t u, std::uint32_t v);

    const std::vector<std::uint32_t>& isolated_vertices() const { return iso_; }
    const std::vector<std::uint32_t>& connected_vertices() const { return noniso_; }

    // Recounts from the forest alone; the incremental counters must agree
    // exactly with these.
    std::uint64_t recount_susceptibility_sum() const;
    std::uint64_t recount_isolated_count() const;
    std::uint64_t recount_largest_component() const;
    std::vector<std::uint64_t> component_size_list() const;

private:
    void make_connected(std::uint32_t v);

    std::uint32_t n_;
    mutable std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> size_;
    std::vector<std::uint32_t> iso_;      // isolated vertices, dense
    std::vector<std::uint32_t> noniso_;   // connected vertices, dense
    std::vector<std::uint32_t> slot_;     // index of v inside its membership array
    std::vector<std::uint8_t> iso_flag_;
    std::unordered_set<std::uint64_t> edges_;
    std::uint64_t edges_added_ = 0;
    std::uint64_t susceptibility_sum_;
    std::uint64_t largest_ = 1;
};

GraphState new_state(const ProcessConfig& config);

/// Draws one missing edge with the biased-process law: a specific iso-iso
/// edge has probability 1/(r + K s), any other specific missing edge
/// K/(r + K s), where r counts missing iso-iso edges and s the remainder.
/// Uniform over all missing edges once fewer than two isolated vertices
/// remain. Throws graph_complete_error when no edge is missing.
std::pair<std::uint32_t, std::uint32_t>
sample_next_edge_exact(const GraphState& state, double bias, Rng& rng);

/// Draws one ordered vertex pair out of n^2 with weight 1 when both
/// endpoints are isolated and weight K otherwise. Does not modify the state.
std::pair<std::uint32_t, std::uint32_t>
sample_approximate_pair(const GraphState& state, double bias, Rng& rng);

struct ApproxStep {
    std::uint32_t u = 0;
    std::uint32_t v = 0;
    bool added = false;
};

/// One step of the approximate process: sample an ordered pair; loops and
/// already-present edges consume the step without adding an edge.
ApproxStep step_approximate(GraphState& state, double bias, Rng& rng);

struct TraceRow {
    double t;              ///< scaled time 2*step/n
    double isolation;      ///< I
    double susceptibility; ///< S
    double largest;        ///< largest component as a fraction of n
    std::uint64_t edges;   ///< edges actually present
};

struct ProcessTrace {
    ProcessConfig config;
    std::uint64_t stride = 0;
    std::string rng_name = kRngName;
    std::vector<TraceRow> rows;
};

/// Runs floor(t_max * n / 2) steps and samples the observables every
/// `stride` steps. Exact mode stops early, without error, if the graph
/// completes. Identical (config, seed) gives an identical trace.
ProcessTrace run(const ProcessConfig& config);

enum class TcMethod { ode, closed_form, simulation };

const char* to_string(TcMethod method);

struct CriticalTimeEstimate {
    double bias = 0.0;
    double t_c = 0.0;
    TcMethod method = TcMethod::ode;
    double uncertainty = 0.0;  ///< bracket half-width or sample std error
    std::string meta;
};

/// Minimal scaled time at which the largest component reaches alpha*n,
/// checked at every merge, averaged over `seeds` consecutive seeds starting
/// from config.seed. Throws threshold_not_reached when a run ends below the
/// threshold.
CriticalTimeEstimate estimate_tc_by_threshold(const ProcessConfig& config,
                                              double alpha, int seeds = 10);

/// Fallback estimator for regimes where the absolute threshold misfires:
/// first trace time where dLmax/dt exceeds 5x the running median of the
/// earlier derivatives. Returns nothing when no such point exists.
std::optional<double> estimate_tc_from_derivative(const ProcessTrace& trace);

}  // namespace bgp

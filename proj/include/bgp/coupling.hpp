// coupling.hpp — exact small-scale verification machinery: the flow-based
// coupling of two distributions constrained to a relation, Hall-type
// feasibility conditions, exhaustive enumeration of tiny graph processes,
// and stochastic-domination checks between the biased and uniform processes.
// Everything here computes in exact rationals; no floating point.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bgp/rational.hpp"

namespace bgp {

/// Two finite label sets with marginal distributions and an admissible
/// relation; the question is whether a joint distribution supported on the
/// relation has these marginals.
struct CouplingProblem {
    std::vector<std::string> u_labels;
    std::vector<std::string> v_labels;
    std::vector<std::pair<int, int>> relation;  // (u index, v index)
    std::vector<Rational> mu;
    std::vector<Rational> nu;

    void validate() const;  // exact sums to 1, indices in range, masses >= 0
};

struct CouplingPlan {
    bool feasible = false;
    std::vector<std::vector<Rational>> phi;  // |U| x |V| joint table
    std::vector<int> violating_cut;          // U indices; nonempty iff infeasible
};

/// Max-flow construction: source->U with capacity mu, U->V along the
/// relation with unbounded capacity, V->sink with capacity nu, scaled to a
/// common denominator so the flow is integral. Feasible iff the marginal
/// condition mu(A) <= nu(N(A)) holds for every A; otherwise the returned cut
/// violates it exactly.
CouplingPlan build_coupling(const CouplingProblem& problem);

/// The specialized condition for coupling one weighted draw against M
/// uniform draws: pr_a <= 1 - C(x_size - a_size, m) / C(x_size, m),
/// evaluated exactly.
bool check_hall_inequality(int x_size, int a_size, int m, const Rational& pr_a);

enum class EnumMode { biased, uniform };

/// Exact distribution of a graph process on n <= 6 vertices after a fixed
/// number of steps, as edge-bitmask -> probability. The complete graph is
/// absorbing, so step counts past completion are allowed.
struct ExactProcessDistribution {
    int n = 0;
    std::uint32_t steps = 0;
    EnumMode mode = EnumMode::biased;
    Rational bias;
    std::uint32_t initial_mask = 0;
    std::map<std::uint32_t, Rational> prob;

    Rational probability_of(const std::function<bool(std::uint32_t, int)>& predicate) const;
};

ExactProcessDistribution enumerate_process(int n, const Rational& bias,
                                           std::uint32_t steps, EnumMode mode,
                                           std::uint32_t initial_mask = 0);

/// Pushes a distribution through one exact step; enumerate_process(T) equals
/// enumerate_process(T-1) advanced once.
ExactProcessDistribution advance_one_step(const ExactProcessDistribution& dist);

// --- edge-bitmask helpers (n <= 6) ---

int pair_index(int n, int u, int v);
std::vector<std::pair<int, int>> edge_list(int n);
std::vector<int> component_sizes_of_mask(std::uint32_t mask, int n);

/// Named monotone-increasing graph property.
struct GraphPredicate {
    std::string name;
    std::function<bool(std::uint32_t mask, int n)> test;
};

GraphPredicate predicate_contains_edge(int u, int v);
GraphPredicate predicate_min_component_size(int size);
GraphPredicate predicate_edge_count_at_least(int count);
GraphPredicate predicate_always_true();

/// Parses "contains-edge:0,1", "min-component-size:3",
/// "edge-count-at-least:2".
GraphPredicate parse_predicate(const std::string& spec);

struct DominationReport {
    long stretch = 0;  // M = ceil(max(K, 1/K))
    Rational p_biased_t;
    Rational p_uniform_stretched;  // uniform after M*t steps
    Rational p_uniform_t;
    Rational p_biased_stretched;   // biased after M*t steps
    bool biased_below_uniform = false;   // Pr[biased^t] <= Pr[uniform^{Mt}]
    bool uniform_below_biased = false;   // Pr[uniform^t] <= Pr[biased^{Mt}]

    bool holds() const { return biased_below_uniform && uniform_below_biased; }
};

/// Exhaustively checks both domination inequalities for a monotone property
/// on n <= 5 vertices. The property is first verified monotone increasing by
/// an up-closure sweep; a violation throws with a witnessing pair of masks.
DominationReport verify_domination(int n, const Rational& bias, int t,
                                   const GraphPredicate& property);

}  // namespace bgp

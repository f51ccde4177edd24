#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "bgp/process.hpp"

using namespace bgp;

namespace {

using Edge = std::pair<std::uint32_t, std::uint32_t>;

Edge canonical(Edge e) {
    if (e.first > e.second) std::swap(e.first, e.second);
    return e;
}

// Independent oracle: per-edge probabilities straight from the weight law,
// by enumerating the missing edges of a concrete state.
std::map<Edge, double> expected_edge_probabilities(const GraphState& state,
                                                   double bias) {
    std::map<Edge, double> weight;
    double total = 0.0;
    const bool uniform = state.isolated_count() < 2;
    for (std::uint32_t u = 0; u + 1 < state.vertex_count(); ++u) {
        for (std::uint32_t v = u + 1; v < state.vertex_count(); ++v) {
            if (state.has_edge(u, v)) continue;
            const bool iso_iso = state.is_isolated(u) && state.is_isolated(v);
            const double w = uniform ? 1.0 : (iso_iso ? 1.0 : bias);
            if (w == 0.0) continue;
            weight[{u, v}] = w;
            total += w;
        }
    }
    for (auto& [e, w] : weight) w /= total;
    return weight;
}

// Exact one-step drift of the isolation ratio under the approximate law.
double exact_mean_delta_isolation(const GraphState& state, double bias) {
    const double n = state.vertex_count();
    const double iso = state.isolation_ratio();
    const double mass = iso * iso + bias * (1.0 - iso * iso);
    return (-2.0 / n) * (iso * (iso - 1.0 / n)) / mass +
           (-1.0 / n) * (2.0 * iso * (1.0 - iso) * bias) / mass;
}

// Exact one-step drift of the susceptibility, including the finite-size
// correction from loops, within-component pairs, and iso-iso reweighting.
double exact_mean_delta_susceptibility(const GraphState& state, double bias) {
    const double n = state.vertex_count();
    const double iso = state.isolation_ratio();
    const double susc = state.susceptibility();
    const double mass = iso * iso + (1.0 - iso * iso) * bias;
    double quartic = 0.0;
    for (const std::uint64_t s : state.component_size_list())
        quartic += static_cast<double>(s) * s * s * s;
    quartic /= n * n;
    const double correction = (bias * quartic + (1.0 - bias) * iso / n) / mass;
    return (2.0 / n) *
           ((1.0 - bias) * iso * iso / mass + bias * susc * susc / mass -
            correction);
}

void check_recounts(const GraphState& state) {
    CHECK(state.recount_susceptibility_sum() == state.susceptibility_sum());
    CHECK(state.recount_isolated_count() == state.isolated_count());
    CHECK(state.recount_largest_component() == state.largest_component());
}

// One-step deltas for a sampled ordered pair, classified against the state
// the pair was drawn from (the state itself is left untouched).
struct StepEffect {
    double d_isolation = 0.0;
    double d_susceptibility = 0.0;
};

StepEffect classify_pair(const GraphState& state, std::uint32_t u,
                         std::uint32_t v) {
    StepEffect effect;
    if (u == v || state.has_edge(u, v)) return effect;
    const double n = state.vertex_count();
    effect.d_isolation =
        -(static_cast<double>(state.is_isolated(u)) +
          static_cast<double>(state.is_isolated(v))) /
        n;
    if (state.find(u) != state.find(v)) {
        effect.d_susceptibility = 2.0 *
                                  static_cast<double>(state.component_size(u)) *
                                  static_cast<double>(state.component_size(v)) /
                                  n;
    }
    return effect;
}

}  // namespace

TEST_CASE("new state: edgeless observables") {
    ProcessConfig cfg;
    cfg.n = 10;
    const GraphState state = new_state(cfg);
    CHECK(state.isolation_ratio() == 1.0);
    CHECK(state.susceptibility() == 1.0);
    CHECK(state.largest_component() == 1);
    CHECK(state.isolated_count() == 10);
    CHECK(state.edges_added() == 0);

    cfg.n = 2;
    CHECK(new_state(cfg).isolated_count() == 2);
}

TEST_CASE("new state: allocation at n = 10^6 stays O(n)") {
    ProcessConfig cfg;
    cfg.n = 1000000;
    cfg.t_max = 2.0;
    const GraphState state = new_state(cfg);
    CHECK(state.isolated_count() == 1000000);
    CHECK(state.susceptibility_sum() == 1000000);
}

TEST_CASE("config validation rejects bad inputs") {
    ProcessConfig cfg;
    cfg.n = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.n = 0;
    CHECK_THROWS_AS(new_state(cfg), std::invalid_argument);
    cfg.n = 10;
    cfg.bias = -0.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.bias = 1.0;
    cfg.t_max = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK_THROWS_AS(process_mode_from_string("both"), std::invalid_argument);
}

TEST_CASE("apply_edge bookkeeping") {
    GraphState state(10);
    state.apply_edge(0, 1);
    state.apply_edge(2, 3);
    state.apply_edge(3, 4);
    // components {0,1}, {2,3,4}, five singletons
    CHECK(state.susceptibility_sum() == 4 + 9 + 5);
    CHECK(state.isolated_count() == 5);
    CHECK(state.largest_component() == 3);

    SUBCASE("merging sizes 2 and 3 raises S by 2*2*3/n") {
        const double before = state.susceptibility();
        state.apply_edge(1, 2);
        CHECK(state.susceptibility() - before == doctest::Approx(1.2).epsilon(1e-15));
        CHECK(state.largest_component() == 5);
        check_recounts(state);
    }
    SUBCASE("internal edge leaves S and isolation unchanged") {
        const auto s_before = state.susceptibility_sum();
        const auto iso_before = state.isolated_count();
        state.apply_edge(2, 4);
        CHECK(state.susceptibility_sum() == s_before);
        CHECK(state.isolated_count() == iso_before);
        CHECK(state.edges_added() == 4);
        check_recounts(state);
    }
    SUBCASE("joining two isolated vertices moves S*n by exactly 2") {
        const auto s_before = state.susceptibility_sum();
        state.apply_edge(5, 6);
        CHECK(state.susceptibility_sum() == s_before + 2);
        CHECK(state.isolated_count() == 3);
        check_recounts(state);
    }
    SUBCASE("loops and duplicates are rejected") {
        CHECK_THROWS_AS(state.apply_edge(7, 7), std::invalid_argument);
        CHECK_THROWS_AS(state.apply_edge(2, 3), std::invalid_argument);
        CHECK_THROWS_AS(state.apply_edge(3, 2), std::invalid_argument);
        CHECK_THROWS_AS(state.apply_edge(0, 10), std::invalid_argument);
    }
}

TEST_CASE("exact sampling matches the weight law") {
    Rng rng(12345);

    SUBCASE("two symmetric choices after one edge") {
        GraphState state(3);
        state.apply_edge(0, 1);
        int hits_02 = 0;
        const int reps = 200000;
        for (int i = 0; i < reps; ++i) {
            const auto e = canonical(sample_next_edge_exact(state, 2.0, rng));
            if (e == Edge{0, 2}) ++hits_02;
            else REQUIRE(e == Edge{1, 2});
        }
        const double freq = static_cast<double>(hits_02) / reps;
        CHECK(std::abs(freq - 0.5) < 3.0 * std::sqrt(0.25 / reps));
    }

    SUBCASE("edgeless graph is uniform for any K") {
        GraphState state(4);
        std::map<Edge, int> hits;
        const int reps = 240000;
        for (int i = 0; i < reps; ++i)
            ++hits[canonical(sample_next_edge_exact(state, 5.0, rng))];
        CHECK(hits.size() == 6);
        for (const auto& [e, count] : hits) {
            const double freq = static_cast<double>(count) / reps;
            CHECK(std::abs(freq - 1.0 / 6.0) <
                  3.0 * std::sqrt((1.0 / 6.0) * (5.0 / 6.0) / reps));
        }
    }

    SUBCASE("n = 4, K = 3 after one edge: the 1/13 vs 3/13 split") {
        GraphState state(4);
        state.apply_edge(0, 1);
        const auto expected = expected_edge_probabilities(state, 3.0);
        CHECK(expected.at({2, 3}) == doctest::Approx(1.0 / 13.0).epsilon(1e-12));
        CHECK(expected.at({0, 2}) == doctest::Approx(3.0 / 13.0).epsilon(1e-12));
        std::map<Edge, int> hits;
        const int reps = 1000000;
        for (int i = 0; i < reps; ++i)
            ++hits[canonical(sample_next_edge_exact(state, 3.0, rng))];
        for (const auto& [e, p] : expected) {
            const double freq = static_cast<double>(hits[e]) / reps;
            CHECK(std::abs(freq - p) < 3.0 * std::sqrt(p * (1.0 - p) / reps));
        }
    }

    SUBCASE("K = 0 pairs isolated vertices while it can") {
        GraphState state(4);
        state.apply_edge(0, 1);
        for (int i = 0; i < 2000; ++i) {
            const auto e = canonical(sample_next_edge_exact(state, 0.0, rng));
            CHECK(e == Edge{2, 3});
        }
    }

    SUBCASE("fewer than two isolated vertices: uniform over missing") {
        GraphState state(4);
        state.apply_edge(0, 1);
        state.apply_edge(1, 2);
        state.apply_edge(2, 3);
        const auto expected = expected_edge_probabilities(state, 7.0);
        CHECK(expected.size() == 3);
        std::map<Edge, int> hits;
        const int reps = 300000;
        for (int i = 0; i < reps; ++i)
            ++hits[canonical(sample_next_edge_exact(state, 7.0, rng))];
        for (const auto& [e, p] : expected) {
            CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
            const double freq = static_cast<double>(hits[e]) / reps;
            CHECK(std::abs(freq - p) < 3.0 * std::sqrt(p * (1.0 - p) / reps));
        }
    }

    SUBCASE("complete graph raises graph_complete_error") {
        GraphState state(3);
        state.apply_edge(0, 1);
        state.apply_edge(0, 2);
        state.apply_edge(1, 2);
        CHECK(state.complete());
        CHECK_THROWS_AS(sample_next_edge_exact(state, 1.0, rng),
                        graph_complete_error);
    }
}

TEST_CASE("approximate stepping") {
    Rng rng(777);

    SUBCASE("n = 2 edgeless: half the steps add the edge") {
        int added = 0;
        const int reps = 100000;
        for (int i = 0; i < reps; ++i) {
            GraphState state(2);
            if (step_approximate(state, 1.5, rng).added) ++added;
        }
        const double freq = static_cast<double>(added) / reps;
        CHECK(std::abs(freq - 0.5) < 3.0 * std::sqrt(0.25 / reps));
    }

    SUBCASE("K = 0 edgeless: first added edge is uniform over all pairs") {
        std::map<Edge, int> hits;
        const int reps = 120000;
        for (int i = 0; i < reps; ++i) {
            GraphState state(4);
            ApproxStep step;
            do {
                step = step_approximate(state, 0.0, rng);
            } while (!step.added);
            ++hits[canonical({step.u, step.v})];
        }
        CHECK(hits.size() == 6);
        for (const auto& [e, count] : hits) {
            const double freq = static_cast<double>(count) / reps;
            CHECK(std::abs(freq - 1.0 / 6.0) <
                  3.0 * std::sqrt((1.0 / 6.0) * (5.0 / 6.0) / reps));
        }
    }

    SUBCASE("skip probability obeys the (C+1)/n bound early on") {
        const std::uint32_t n = 1000;
        const int steps_per_run = 50;  // C = 2*50/n = 0.1
        const int runs = 2000;
        std::int64_t skipped = 0;
        for (int r = 0; r < runs; ++r) {
            GraphState state(n);
            for (int j = 0; j < steps_per_run; ++j)
                if (!step_approximate(state, 1.0, rng).added) ++skipped;
        }
        const double total = static_cast<double>(runs) * steps_per_run;
        const double freq = static_cast<double>(skipped) / total;
        const double bound = (0.1 + 1.0) / n;
        const double noise = 3.0 * std::sqrt(bound * (1.0 - bound) / total);
        CHECK(freq <= bound + noise);
    }

    SUBCASE("frozen K = 0 state consumes steps without effect") {
        GraphState state(2);
        state.apply_edge(0, 1);
        CHECK(state.isolated_count() == 0);
        const ApproxStep step = step_approximate(state, 0.0, rng);
        CHECK_FALSE(step.added);
        CHECK(state.edges_added() == 1);
    }
}

TEST_CASE("drift of I and S matches the exact one-step expectations") {
    // Reachable state: 120 pair components plus a few merged clumps on
    // n = 1000, stepped with K = 2.
    GraphState state(1000);
    for (std::uint32_t i = 0; i < 120; ++i) state.apply_edge(2 * i, 2 * i + 1);
    state.apply_edge(0, 2);
    state.apply_edge(4, 6);
    state.apply_edge(4, 8);
    check_recounts(state);

    const double bias = 2.0;
    const double want_di = exact_mean_delta_isolation(state, bias);
    const double want_ds = exact_mean_delta_susceptibility(state, bias);

    Rng rng(20240901);
    const int reps = 1000000;
    double sum_di = 0.0, sum_di2 = 0.0, sum_ds = 0.0, sum_ds2 = 0.0;
    for (int i = 0; i < reps; ++i) {
        const auto [u, v] = sample_approximate_pair(state, bias, rng);
        const StepEffect effect = classify_pair(state, u, v);
        sum_di += effect.d_isolation;
        sum_di2 += effect.d_isolation * effect.d_isolation;
        sum_ds += effect.d_susceptibility;
        sum_ds2 += effect.d_susceptibility * effect.d_susceptibility;
    }
    const double mean_di = sum_di / reps;
    const double se_di =
        std::sqrt((sum_di2 / reps - mean_di * mean_di) / (reps - 1.0));
    const double mean_ds = sum_ds / reps;
    const double se_ds =
        std::sqrt((sum_ds2 / reps - mean_ds * mean_ds) / (reps - 1.0));
    CHECK(std::abs(mean_di - want_di) < 3.0 * se_di);
    CHECK(std::abs(mean_ds - want_ds) < 3.0 * se_ds);
}

TEST_CASE("run: K = 0 dynamics are exact up to rounding") {
    ProcessConfig cfg;
    cfg.n = 10000;
    cfg.bias = 0.0;
    cfg.seed = 42;
    cfg.t_max = 1.0;
    const ProcessTrace trace = run(cfg);
    for (const TraceRow& row : trace.rows) {
        CHECK(std::abs(row.isolation - (1.0 - row.t)) <= 2.0 / cfg.n);
        CHECK(std::abs(row.susceptibility - (1.0 + row.t)) <= 2.0 / cfg.n);
    }
    CHECK(trace.rows.back().t == doctest::Approx(1.0));
}

TEST_CASE("run: K = 1 susceptibility tracks 1/(1-t)") {
    ProcessConfig cfg;
    cfg.n = 100000;
    cfg.bias = 1.0;
    cfg.seed = 3;
    cfg.t_max = 0.5;
    const ProcessTrace trace = run(cfg);
    CHECK(std::abs(trace.rows.back().susceptibility - 2.0) < 0.05);
}

TEST_CASE("run: trace invariants and determinism") {
    for (const ProcessMode mode : {ProcessMode::exact, ProcessMode::approximate}) {
        ProcessConfig cfg;
        cfg.n = 5000;
        cfg.bias = 1.7;
        cfg.mode = mode;
        cfg.seed = 99;
        cfg.t_max = 1.5;
        const ProcessTrace a = run(cfg);
        const ProcessTrace b = run(cfg);
        REQUIRE(a.rows.size() == b.rows.size());
        for (std::size_t i = 0; i < a.rows.size(); ++i) {
            CHECK(a.rows[i].t == b.rows[i].t);
            CHECK(a.rows[i].isolation == b.rows[i].isolation);
            CHECK(a.rows[i].susceptibility == b.rows[i].susceptibility);
            CHECK(a.rows[i].largest == b.rows[i].largest);
        }
        for (std::size_t i = 1; i < a.rows.size(); ++i) {
            CHECK(a.rows[i].t > a.rows[i - 1].t);
            CHECK(a.rows[i].isolation <= a.rows[i - 1].isolation);
            CHECK(a.rows[i].susceptibility >= a.rows[i - 1].susceptibility);
        }
        for (const TraceRow& row : a.rows) {
            CHECK(row.isolation >= 0.0);
            CHECK(row.isolation <= 1.0);
            CHECK(row.susceptibility >= 1.0);
        }
    }
}

TEST_CASE("run: tiny graph completes without error") {
    ProcessConfig cfg;
    cfg.n = 2;
    cfg.bias = 1.0;
    cfg.t_max = 10.0;
    const ProcessTrace trace = run(cfg);
    CHECK(trace.rows.back().t == doctest::Approx(1.0));  // one edge, t = 2/2... on n=2
    CHECK(trace.rows.back().largest == 1.0);
}

TEST_CASE("run: zero horizon leaves the initial row only") {
    ProcessConfig cfg;
    cfg.n = 100;
    cfg.t_max = 0.0;
    const ProcessTrace trace = run(cfg);
    REQUIRE(trace.rows.size() == 1);
    CHECK(trace.rows.front().t == 0.0);
}

TEST_CASE("incremental observables equal full recounts along runs") {
    struct Combo {
        std::uint32_t n;
        double bias;
        ProcessMode mode;
        std::uint64_t steps;
    };
    for (const Combo combo : {Combo{300, 0.7, ProcessMode::exact, 2000},
                              Combo{257, 3.0, ProcessMode::approximate, 4000},
                              Combo{64, 1.3, ProcessMode::exact, 2016}}) {
        GraphState state(combo.n);
        Rng rng(combo.n);
        for (std::uint64_t step = 0; step < combo.steps; ++step) {
            if (combo.mode == ProcessMode::exact) {
                if (state.complete()) break;
                const auto [u, v] = sample_next_edge_exact(state, combo.bias, rng);
                state.apply_edge(u, v);
            } else {
                step_approximate(state, combo.bias, rng);
            }
            if (step % 97 == 0) check_recounts(state);
        }
        check_recounts(state);
        CHECK(state.edge_registry_size() == state.edges_added());
    }
}

TEST_CASE("simulated isolation stays inside the exponential envelope") {
    for (const double bias : {0.5, 2.0}) {
        ProcessConfig cfg;
        cfg.n = 100000;
        cfg.bias = bias;
        cfg.seed = 11;
        cfg.t_max = 2.0;
        const ProcessTrace trace = run(cfg);
        const double lo_rate = 1.0 / std::min(1.0, bias);
        const double hi_rate = 1.0 / std::max(1.0, bias);
        for (const TraceRow& row : trace.rows) {
            CHECK(row.isolation >= std::exp(-row.t * lo_rate) - 0.02);
            CHECK(row.isolation <= std::exp(-row.t * hi_rate) + 0.02);
        }
    }
}

TEST_CASE("threshold estimator") {
    SUBCASE("alpha near 1/n fires at the first merge") {
        ProcessConfig cfg;
        cfg.n = 10000;
        cfg.bias = 1.0;
        cfg.seed = 5;
        cfg.t_max = 0.5;
        const auto est = estimate_tc_by_threshold(cfg, 1.0 / cfg.n, 3);
        CHECK(est.t_c == doctest::Approx(2.0 / cfg.n).epsilon(1e-12));
        CHECK(est.method == TcMethod::simulation);
    }
    SUBCASE("K = 0 on 10^5 vertices lands near 3/2") {
        ProcessConfig cfg;
        cfg.n = 100000;
        cfg.bias = 0.0;
        cfg.seed = 1;
        cfg.t_max = 2.0;
        const auto est = estimate_tc_by_threshold(cfg, 0.01, 3);
        CHECK(std::abs(est.t_c - 1.5) < 0.1);
        CHECK(est.uncertainty >= 0.0);
    }
    SUBCASE("unreachable threshold throws") {
        ProcessConfig cfg;
        cfg.n = 1000;
        cfg.bias = 1.0;
        cfg.t_max = 0.05;
        CHECK_THROWS_AS(estimate_tc_by_threshold(cfg, 0.9, 1),
                        threshold_not_reached);
    }
    SUBCASE("alpha outside (0,1) is rejected") {
        ProcessConfig cfg;
        cfg.n = 1000;
        CHECK_THROWS_AS(estimate_tc_by_threshold(cfg, 0.0, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS(estimate_tc_by_threshold(cfg, 1.0, 1),
                        std::invalid_argument);
    }
}

TEST_CASE("derivative rule finds the growth burst near the transition") {
    ProcessConfig cfg;
    cfg.n = 20000;
    cfg.bias = 1.0;
    cfg.seed = 8;
    cfg.t_max = 1.6;
    const ProcessTrace trace = run(cfg);
    const auto hit = estimate_tc_from_derivative(trace);
    REQUIRE(hit.has_value());
    CHECK(*hit > 0.7);
    CHECK(*hit < 1.4);
}

#include "bgp/process.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace bgp {

namespace {

constexpr std::uint32_t kMaxVertices = 1u << 31;

// Below this acceptance probability, rejection sampling over vertex pairs is
// abandoned in favour of enumerating the admissible missing edges. Never
// reached at the constant-t timescale.
constexpr double kRejectionGuard = 1e-3;

std::uint64_t edge_key(std::uint32_t u, std::uint32_t v) {
    if (u > v) std::swap(u, v);
    return (static_cast<std::uint64_t>(u) << 32) | v;
}

}  // namespace

const char* to_string(ProcessMode mode) {
    return mode == ProcessMode::exact ? "exact" : "approximate";
}

ProcessMode process_mode_from_string(const std::string& name) {
    if (name == "exact") return ProcessMode::exact;
    if (name == "approximate") return ProcessMode::approximate;
    throw std::invalid_argument("unknown process mode: " + name);
}

const char* to_string(TcMethod method) {
    switch (method) {
        case TcMethod::ode: return "ode";
        case TcMethod::closed_form: return "closed-form";
        case TcMethod::simulation: return "simulation";
    }
    return "?";
}

void ProcessConfig::validate() const {
    if (n < 2) throw std::invalid_argument("process requires n >= 2");
    if (n > kMaxVertices) throw std::invalid_argument("n exceeds 2^31");
    if (!(bias >= 0.0)) throw std::invalid_argument("bias K must be >= 0");
    if (!(t_max >= 0.0)) throw std::invalid_argument("t_max must be >= 0");
}

GraphState::GraphState(std::uint32_t n, std::uint64_t edge_capacity_hint)
    : n_(n),
      parent_(n),
      size_(n, 1),
      iso_(n),
      slot_(n),
      iso_flag_(n, 1),
      susceptibility_sum_(n) {
    if (n < 2) throw std::invalid_argument("GraphState requires n >= 2");
    for (std::uint32_t v = 0; v < n; ++v) {
        parent_[v] = v;
        iso_[v] = v;
        slot_[v] = v;
    }
    noniso_.reserve(n);
    if (edge_capacity_hint > 0) {
        edges_.reserve(static_cast<std::size_t>(
            std::min<std::uint64_t>(edge_capacity_hint, pair_count())));
    }
}

std::uint32_t GraphState::find(std::uint32_t v) const {
    std::uint32_t root = v;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[v] != root) {
        const std::uint32_t next = parent_[v];
        parent_[v] = root;
        v = next;
    }
    return root;
}

bool GraphState::has_edge(std::uint32_t u, std::uint32_t v) const {
    return edges_.count(edge_key(u, v)) != 0;
}

void GraphState::make_connected(std::uint32_t v) {
    if (!iso_flag_[v]) return;
    const std::uint32_t pos = slot_[v];
    const std::uint32_t last = iso_.back();
    iso_[pos] = last;
    slot_[last] = pos;
    iso_.pop_back();
    slot_[v] = static_cast<std::uint32_t>(noniso_.size());
    noniso_.push_back(v);
    iso_flag_[v] = 0;
}

void GraphState::apply_edge(std::uint32_t u, std::uint32_t v) {
    if (u >= n_ || v >= n_) throw std::invalid_argument("vertex out of range");
    if (u == v) throw std::invalid_argument("loop edges are not allowed");
    if (!edges_.insert(edge_key(u, v)).second)
        throw std::invalid_argument("edge already present");
    ++edges_added_;
    make_connected(u);
    make_connected(v);
    std::uint32_t ru = find(u);
    std::uint32_t rv = find(v);
    if (ru == rv) return;  // internal edge: component structure unchanged
    if (size_[ru] < size_[rv]) std::swap(ru, rv);
    susceptibility_sum_ +=
        2ull * static_cast<std::uint64_t>(size_[ru]) * size_[rv];
    size_[ru] += size_[rv];
    parent_[rv] = ru;
    largest_ = std::max<std::uint64_t>(largest_, size_[ru]);
}

std::vector<std::uint64_t> GraphState::component_size_list() const {
    std::vector<std::uint64_t> sizes;
    sizes.reserve(n_);
    for (std::uint32_t v = 0; v < n_; ++v) {
        if (find(v) == v) sizes.push_back(size_[v]);
    }
    return sizes;
}

std::uint64_t GraphState::recount_susceptibility_sum() const {
    std::uint64_t total = 0;
    for (const std::uint64_t s : component_size_list()) total += s * s;
    return total;
}

std::uint64_t GraphState::recount_isolated_count() const {
    std::uint64_t total = 0;
    for (const std::uint64_t s : component_size_list()) total += (s == 1);
    return total;
}

std::uint64_t GraphState::recount_largest_component() const {
    std::uint64_t best = 0;
    for (const std::uint64_t s : component_size_list()) best = std::max(best, s);
    return best;
}

GraphState new_state(const ProcessConfig& config) {
    config.validate();
    const double expected_edges = config.t_max * config.n / 2.0 + 16.0;
    return GraphState(config.n, static_cast<std::uint64_t>(expected_edges));
}

namespace {

std::pair<std::uint32_t, std::uint32_t> uniform_vertex_pair(std::uint32_t n,
                                                            Rng& rng) {
    const std::uint64_t u = uniform_below(rng, n);
    std::uint64_t v = uniform_below(rng, n - 1);
    if (v >= u) ++v;
    return {static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v)};
}

std::pair<std::uint32_t, std::uint32_t> sample_iso_pair(const GraphState& state,
                                                        Rng& rng) {
    const auto& iso = state.isolated_vertices();
    const std::uint64_t m = iso.size();
    const std::uint64_t i = uniform_below(rng, m);
    std::uint64_t j = uniform_below(rng, m - 1);
    if (j >= i) ++j;
    return {iso[i], iso[j]};
}

template <class Admissible>
std::pair<std::uint32_t, std::uint32_t> enumerate_and_pick(
    const GraphState& state, Rng& rng, Admissible&& admissible) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> candidates;
    const std::uint32_t n = state.vertex_count();
    for (std::uint32_t u = 0; u + 1 < n; ++u) {
        for (std::uint32_t v = u + 1; v < n; ++v) {
            if (admissible(u, v)) candidates.emplace_back(u, v);
        }
    }
    if (candidates.empty())
        throw graph_complete_error("no admissible missing edge");
    return candidates[uniform_below(rng, candidates.size())];
}

// Uniform over all missing edges.
std::pair<std::uint32_t, std::uint32_t> sample_uniform_missing(
    const GraphState& state, Rng& rng) {
    const double accept = static_cast<double>(state.missing_edge_count()) /
                          static_cast<double>(state.pair_count());
    if (accept >= kRejectionGuard) {
        for (;;) {
            const auto [u, v] = uniform_vertex_pair(state.vertex_count(), rng);
            if (!state.has_edge(u, v)) return {u, v};
        }
    }
    return enumerate_and_pick(state, rng, [&](std::uint32_t u, std::uint32_t v) {
        return !state.has_edge(u, v);
    });
}

// Uniform over missing edges with at least one non-isolated endpoint.
std::pair<std::uint32_t, std::uint32_t> sample_other_missing(
    const GraphState& state, Rng& rng, std::uint64_t count) {
    const double accept = static_cast<double>(count) /
                          static_cast<double>(state.pair_count());
    if (accept >= kRejectionGuard) {
        for (;;) {
            const auto [u, v] = uniform_vertex_pair(state.vertex_count(), rng);
            if (state.is_isolated(u) && state.is_isolated(v)) continue;
            if (!state.has_edge(u, v)) return {u, v};
        }
    }
    return enumerate_and_pick(state, rng, [&](std::uint32_t u, std::uint32_t v) {
        return !(state.is_isolated(u) && state.is_isolated(v)) &&
               !state.has_edge(u, v);
    });
}

}  // namespace

std::pair<std::uint32_t, std::uint32_t>
sample_next_edge_exact(const GraphState& state, double bias, Rng& rng) {
    if (state.complete())
        throw graph_complete_error("graph is complete; no missing edge");
    const std::uint64_t iso = state.isolated_count();
    if (iso < 2) return sample_uniform_missing(state, rng);
    const std::uint64_t r = iso * (iso - 1) / 2;
    const std::uint64_t s = state.missing_edge_count() - r;
    if (bias == 0.0 || s == 0) return sample_iso_pair(state, rng);
    const double p_iso = static_cast<double>(r) /
                         (static_cast<double>(r) + bias * static_cast<double>(s));
    if (uniform_unit(rng) < p_iso) return sample_iso_pair(state, rng);
    return sample_other_missing(state, rng, s);
}

std::pair<std::uint32_t, std::uint32_t>
sample_approximate_pair(const GraphState& state, double bias, Rng& rng) {
    const std::uint64_t n = state.vertex_count();
    const std::uint64_t iso = state.isolated_count();
    const std::uint64_t non = n - iso;
    const double w_iso = static_cast<double>(iso) * static_cast<double>(iso);
    const double w_other =
        bias * (static_cast<double>(n) * static_cast<double>(n) - w_iso);
    if (w_iso + w_other <= 0.0)
        throw std::domain_error("approximate pair distribution has zero mass");
    const bool pick_iso =
        w_other == 0.0 ||
        (w_iso > 0.0 && uniform_unit(rng) * (w_iso + w_other) < w_iso);
    if (pick_iso) {
        const auto& list = state.isolated_vertices();
        return {list[uniform_below(rng, iso)], list[uniform_below(rng, iso)]};
    }
    // Not-both-isolated, split by the first endpoint's class:
    // (connected u, any v) has non*n ordered pairs, (isolated u, connected v)
    // has iso*non.
    const std::uint64_t first_connected = non * n;
    const std::uint64_t first_isolated = iso * non;
    const auto& conn = state.connected_vertices();
    if (uniform_below(rng, first_connected + first_isolated) < first_connected) {
        return {conn[uniform_below(rng, non)],
                static_cast<std::uint32_t>(uniform_below(rng, n))};
    }
    const auto& isolist = state.isolated_vertices();
    return {isolist[uniform_below(rng, iso)], conn[uniform_below(rng, non)]};
}

ApproxStep step_approximate(GraphState& state, double bias, Rng& rng) {
    if (bias == 0.0 && state.isolated_count() == 0) {
        // Every pair has weight zero; the process is frozen and the step is
        // consumed without effect.
        return {0, 0, false};
    }
    const auto [u, v] = sample_approximate_pair(state, bias, rng);
    if (u == v || state.has_edge(u, v)) return {u, v, false};
    state.apply_edge(u, v);
    return {u, v, true};
}

namespace {

// Shared driver for run() and the threshold estimators. on_merge (when set)
// is called after every step that merged two components and may stop the run.
void run_core(const ProcessConfig& config, ProcessTrace* trace,
              const std::function<bool(std::uint64_t, const GraphState&)>& on_merge) {
    config.validate();
    GraphState state = new_state(config);
    Rng rng(config.seed);
    const std::uint64_t target = static_cast<std::uint64_t>(
        config.t_max * static_cast<double>(config.n) / 2.0);
    const std::uint64_t stride =
        config.stride ? config.stride
                      : std::max<std::uint64_t>(1, config.n / 200);
    const double n = static_cast<double>(config.n);

    auto record = [&](std::uint64_t step) {
        trace->rows.push_back({2.0 * static_cast<double>(step) / n,
                               state.isolation_ratio(), state.susceptibility(),
                               state.largest_fraction(), state.edges_added()});
    };
    if (trace) {
        trace->config = config;
        trace->stride = stride;
        trace->rng_name = kRngName;
        record(0);
    }

    std::uint64_t step = 0;
    bool stopped = false;
    while (step < target && !stopped) {
        std::uint64_t susceptibility_before = state.susceptibility_sum();
        if (config.mode == ProcessMode::exact) {
            if (state.complete()) break;
            const auto [u, v] = sample_next_edge_exact(state, config.bias, rng);
            state.apply_edge(u, v);
        } else {
            step_approximate(state, config.bias, rng);
        }
        ++step;
        if (on_merge && state.susceptibility_sum() != susceptibility_before) {
            stopped = on_merge(step, state);
        }
        if (trace && step % stride == 0) record(step);
    }
    if (trace && step % stride != 0) record(step);
}

}  // namespace

ProcessTrace run(const ProcessConfig& config) {
    ProcessTrace trace;
    run_core(config, &trace, nullptr);
    return trace;
}

CriticalTimeEstimate estimate_tc_by_threshold(const ProcessConfig& config,
                                              double alpha, int seeds) {
    config.validate();
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie in (0, 1)");
    if (seeds < 1) throw std::invalid_argument("need at least one seed");
    const double threshold = alpha * static_cast<double>(config.n);

    std::vector<double> hits;
    hits.reserve(seeds);
    for (int k = 0; k < seeds; ++k) {
        ProcessConfig cfg = config;
        cfg.seed = config.seed + static_cast<std::uint64_t>(k);
        std::optional<double> hit;
        run_core(cfg, nullptr,
                 [&](std::uint64_t step, const GraphState& state) {
                     if (static_cast<double>(state.largest_component()) >=
                         threshold) {
                         hit = 2.0 * static_cast<double>(step) / cfg.n;
                         return true;
                     }
                     return false;
                 });
        if (!hit) {
            throw threshold_not_reached(
                "largest component never reached alpha*n by t_max (seed " +
                std::to_string(cfg.seed) + ")");
        }
        hits.push_back(*hit);
    }

    double mean = 0.0;
    for (const double h : hits) mean += h;
    mean /= hits.size();
    double var = 0.0;
    for (const double h : hits) var += (h - mean) * (h - mean);
    const double stderr_mean =
        hits.size() > 1 ? std::sqrt(var / (hits.size() - 1.0) / hits.size())
                        : 0.0;

    CriticalTimeEstimate estimate;
    estimate.bias = config.bias;
    estimate.t_c = mean;
    estimate.method = TcMethod::simulation;
    estimate.uncertainty = stderr_mean;
    estimate.meta = "n=" + std::to_string(config.n) +
                    " seeds=" + std::to_string(seeds) +
                    " base_seed=" + std::to_string(config.seed) +
                    " alpha=" + std::to_string(alpha) + " rng=" + kRngName;
    return estimate;
}

std::optional<double> estimate_tc_from_derivative(const ProcessTrace& trace) {
    // Warm up the running median over a handful of rows before testing; a
    // zero median (flat early growth) cannot anchor the 5x rule.
    constexpr std::size_t kWarmup = 8;
    std::vector<double> sorted;
    for (std::size_t i = 1; i < trace.rows.size(); ++i) {
        const double dt = trace.rows[i].t - trace.rows[i - 1].t;
        if (dt <= 0.0) continue;
        const double d = (trace.rows[i].largest - trace.rows[i - 1].largest) / dt;
        if (sorted.size() >= kWarmup) {
            const double median = sorted[sorted.size() / 2];
            if (median > 0.0 && d > 5.0 * median) return trace.rows[i].t;
        }
        sorted.insert(std::upper_bound(sorted.begin(), sorted.end(), d), d);
    }
    return std::nullopt;
}

}  // namespace bgp

#include "bgp/coupling.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <stdexcept>

namespace bgp {

void CouplingProblem::validate() const {
    if (u_labels.empty() || v_labels.empty())
        throw std::invalid_argument("coupling problem needs nonempty U and V");
    if (mu.size() != u_labels.size() || nu.size() != v_labels.size())
        throw std::invalid_argument("marginal size does not match label set");
    Rational total_mu = 0, total_nu = 0;
    for (const Rational& m : mu) {
        if (m < 0) throw std::invalid_argument("mu has a negative mass");
        total_mu += m;
    }
    for (const Rational& m : nu) {
        if (m < 0) throw std::invalid_argument("nu has a negative mass");
        total_nu += m;
    }
    if (total_mu != 1 || total_nu != 1)
        throw std::invalid_argument("marginals must sum to exactly 1");
    for (const auto& [u, v] : relation) {
        if (u < 0 || v < 0 || u >= static_cast<int>(u_labels.size()) ||
            v >= static_cast<int>(v_labels.size()))
            throw std::invalid_argument("relation index out of range");
    }
}

namespace {

// Edmonds-Karp on a dense residual matrix of exact big integers. The node
// count here is at most 2 + |U| + |V|, so simplicity wins.
struct ExactMaxFlow {
    explicit ExactMaxFlow(int nodes)
        : n(nodes), cap(nodes, std::vector<BigInt>(nodes, 0)) {}

    void add(int from, int to, const BigInt& capacity) {
        cap[from][to] += capacity;
    }

    BigInt run(int source, int sink) {
        BigInt total = 0;
        for (;;) {
            std::vector<int> parent(n, -1);
            parent[source] = source;
            std::deque<int> queue{source};
            while (!queue.empty() && parent[sink] == -1) {
                const int at = queue.front();
                queue.pop_front();
                for (int next = 0; next < n; ++next) {
                    if (parent[next] == -1 && cap[at][next] > 0) {
                        parent[next] = at;
                        queue.push_back(next);
                    }
                }
            }
            if (parent[sink] == -1) return total;
            BigInt bottleneck = -1;
            for (int at = sink; at != source; at = parent[at]) {
                const BigInt& c = cap[parent[at]][at];
                if (bottleneck < 0 || c < bottleneck) bottleneck = c;
            }
            for (int at = sink; at != source; at = parent[at]) {
                cap[parent[at]][at] -= bottleneck;
                cap[at][parent[at]] += bottleneck;
            }
            total += bottleneck;
        }
    }

    std::vector<bool> source_side(int source) const {
        std::vector<bool> seen(n, false);
        seen[source] = true;
        std::deque<int> queue{source};
        while (!queue.empty()) {
            const int at = queue.front();
            queue.pop_front();
            for (int next = 0; next < n; ++next) {
                if (!seen[next] && cap[at][next] > 0) {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
        return seen;
    }

    int n;
    std::vector<std::vector<BigInt>> cap;
};

}  // namespace

CouplingPlan build_coupling(const CouplingProblem& problem) {
    problem.validate();
    const int nu_count = static_cast<int>(problem.u_labels.size());
    const int nv_count = static_cast<int>(problem.v_labels.size());

    // Scale both marginals to one common denominator; the flow is then
    // integral and the resulting joint table exact.
    BigInt denom = 1;
    for (const Rational& m : problem.mu)
        mpz_lcm(denom.get_mpz_t(), denom.get_mpz_t(),
                m.get_den().get_mpz_t());
    for (const Rational& m : problem.nu)
        mpz_lcm(denom.get_mpz_t(), denom.get_mpz_t(),
                m.get_den().get_mpz_t());

    const int source = 0;
    const int sink = nu_count + nv_count + 1;
    ExactMaxFlow net(sink + 1);
    auto u_node = [&](int i) { return 1 + i; };
    auto v_node = [&](int j) { return 1 + nu_count + j; };

    auto scaled = [&](const Rational& m) {
        return BigInt(m.get_num() * (denom / m.get_den()));
    };
    for (int i = 0; i < nu_count; ++i) net.add(source, u_node(i), scaled(problem.mu[i]));
    for (int j = 0; j < nv_count; ++j) net.add(v_node(j), sink, scaled(problem.nu[j]));
    for (const auto& [i, j] : problem.relation) net.add(u_node(i), v_node(j), denom);

    const BigInt flow = net.run(source, sink);
    CouplingPlan plan;
    if (flow == denom) {
        plan.feasible = true;
        plan.phi.assign(nu_count, std::vector<Rational>(nv_count, Rational(0)));
        for (const auto& [i, j] : problem.relation) {
            // Flow along (u, v) equals the residual gained on the back edge.
            const BigInt& sent = net.cap[v_node(j)][u_node(i)];
            if (sent > 0) {
                Rational p(sent, denom);
                p.canonicalize();
                plan.phi[i][j] = p;
            }
        }
        return plan;
    }
    // Min cut: U labels still reachable from the source in the residual
    // network form a set A with mu(A) > nu(N(A)).
    const std::vector<bool> reachable = net.source_side(source);
    for (int i = 0; i < nu_count; ++i)
        if (reachable[u_node(i)]) plan.violating_cut.push_back(i);
    return plan;
}

bool check_hall_inequality(int x_size, int a_size, int m, const Rational& pr_a) {
    if (a_size < 0 || a_size > x_size || m < 1)
        throw std::invalid_argument("invalid hall-inequality arguments");
    const BigInt total = binomial(static_cast<unsigned long>(x_size),
                                  static_cast<unsigned long>(m));
    if (total == 0) return pr_a <= 1;  // m exceeds |X|: every draw covers X
    const BigInt avoid = binomial(static_cast<unsigned long>(x_size - a_size),
                                  static_cast<unsigned long>(m));
    Rational rhs = Rational(1) - Rational(avoid, total);
    rhs.canonicalize();
    return pr_a <= rhs;
}

int pair_index(int n, int u, int v) {
    if (u > v) std::swap(u, v);
    if (u < 0 || v >= n || u == v)
        throw std::invalid_argument("bad vertex pair");
    // Edges ordered (0,1),(0,2),...,(0,n-1),(1,2),...
    return u * (2 * n - u - 1) / 2 + (v - u - 1);
}

std::vector<std::pair<int, int>> edge_list(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) edges.emplace_back(u, v);
    return edges;
}

std::vector<int> component_sizes_of_mask(std::uint32_t mask, int n) {
    std::array<int, 8> parent{};
    for (int v = 0; v < n; ++v) parent[v] = v;
    std::function<int(int)> find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    const auto edges = edge_list(n);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (mask & (1u << e)) parent[find(edges[e].first)] = find(edges[e].second);
    }
    std::array<int, 8> size{};
    for (int v = 0; v < n; ++v) ++size[find(v)];
    std::vector<int> sizes;
    for (int v = 0; v < n; ++v)
        if (find(v) == v) sizes.push_back(size[v]);
    return sizes;
}

Rational ExactProcessDistribution::probability_of(
    const std::function<bool(std::uint32_t, int)>& predicate) const {
    Rational total = 0;
    for (const auto& [mask, p] : prob)
        if (predicate(mask, n)) total += p;
    return total;
}

namespace {

struct MaskContext {
    int n = 0;
    int edge_count = 0;
    std::vector<std::pair<int, int>> edges;
    std::array<std::uint32_t, 8> incident{};  // edge bits touching each vertex
};

MaskContext make_context(int n) {
    MaskContext ctx;
    ctx.n = n;
    ctx.edges = edge_list(n);
    ctx.edge_count = static_cast<int>(ctx.edges.size());
    for (int e = 0; e < ctx.edge_count; ++e) {
        ctx.incident[ctx.edges[e].first] |= 1u << e;
        ctx.incident[ctx.edges[e].second] |= 1u << e;
    }
    return ctx;
}

int isolated_in_mask(const MaskContext& ctx, std::uint32_t mask) {
    int count = 0;
    for (int v = 0; v < ctx.n; ++v)
        if ((mask & ctx.incident[v]) == 0) ++count;
    return count;
}

// One exact step of the process from a fixed graph: (successor mask,
// transition probability) pairs. The complete graph absorbs.
void push_successors(const MaskContext& ctx, EnumMode mode, const Rational& bias,
                     std::uint32_t mask, const Rational& p,
                     std::map<std::uint32_t, Rational>& out) {
    const std::uint32_t full = (1u << ctx.edge_count) - 1;
    const std::uint32_t missing = full & ~mask;
    if (missing == 0) {
        out[mask] += p;
        return;
    }
    const int missing_count = __builtin_popcount(missing);
    const int iso = isolated_in_mask(ctx, mask);

    auto is_iso_iso = [&](int e) {
        return (mask & ctx.incident[ctx.edges[e].first]) == 0 &&
               (mask & ctx.incident[ctx.edges[e].second]) == 0;
    };

    if (mode == EnumMode::uniform || iso < 2) {
        const Rational each = p / missing_count;
        for (int e = 0; e < ctx.edge_count; ++e)
            if (missing & (1u << e)) out[mask | (1u << e)] += each;
        return;
    }
    const long iso_pairs = static_cast<long>(iso) * (iso - 1) / 2;
    const Rational denom =
        Rational(iso_pairs) + bias * Rational(missing_count - iso_pairs);
    for (int e = 0; e < ctx.edge_count; ++e) {
        if (!(missing & (1u << e))) continue;
        const Rational weight = is_iso_iso(e) ? Rational(1) : bias;
        if (weight == 0) continue;
        out[mask | (1u << e)] += p * weight / denom;
    }
}

}  // namespace

ExactProcessDistribution enumerate_process(int n, const Rational& bias,
                                           std::uint32_t steps, EnumMode mode,
                                           std::uint32_t initial_mask) {
    if (n < 2 || n > 6)
        throw std::invalid_argument("exact enumeration supports 2 <= n <= 6");
    if (bias < 0) throw std::invalid_argument("bias must be >= 0");
    const MaskContext ctx = make_context(n);
    if (initial_mask >= (1u << ctx.edge_count))
        throw std::invalid_argument("initial mask out of range");

    ExactProcessDistribution dist;
    dist.n = n;
    dist.steps = steps;
    dist.mode = mode;
    dist.bias = bias;
    dist.initial_mask = initial_mask;
    dist.prob[initial_mask] = 1;
    for (std::uint32_t s = 0; s < steps; ++s) {
        std::map<std::uint32_t, Rational> next;
        for (const auto& [mask, p] : dist.prob)
            push_successors(ctx, mode, bias, mask, p, next);
        dist.prob = std::move(next);
    }
    return dist;
}

ExactProcessDistribution advance_one_step(const ExactProcessDistribution& dist) {
    const MaskContext ctx = make_context(dist.n);
    ExactProcessDistribution next = dist;
    next.steps = dist.steps + 1;
    next.prob.clear();
    for (const auto& [mask, p] : dist.prob)
        push_successors(ctx, dist.mode, dist.bias, mask, p, next.prob);
    return next;
}

GraphPredicate predicate_contains_edge(int u, int v) {
    return {"contains-edge:" + std::to_string(u) + "," + std::to_string(v),
            [u, v](std::uint32_t mask, int n) {
                return (mask & (1u << pair_index(n, u, v))) != 0;
            }};
}

GraphPredicate predicate_min_component_size(int size) {
    return {"min-component-size:" + std::to_string(size),
            [size](std::uint32_t mask, int n) {
                const auto sizes = component_sizes_of_mask(mask, n);
                return *std::max_element(sizes.begin(), sizes.end()) >= size;
            }};
}

GraphPredicate predicate_edge_count_at_least(int count) {
    return {"edge-count-at-least:" + std::to_string(count),
            [count](std::uint32_t mask, int) {
                return __builtin_popcount(mask) >= count;
            }};
}

GraphPredicate predicate_always_true() {
    return {"always-true", [](std::uint32_t, int) { return true; }};
}

GraphPredicate parse_predicate(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const std::string args =
        colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (name == "contains-edge") {
        const auto comma = args.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("contains-edge needs u,v");
        return predicate_contains_edge(std::stoi(args.substr(0, comma)),
                                       std::stoi(args.substr(comma + 1)));
    }
    if (name == "min-component-size")
        return predicate_min_component_size(std::stoi(args));
    if (name == "edge-count-at-least")
        return predicate_edge_count_at_least(std::stoi(args));
    if (name == "always-true") return predicate_always_true();
    throw std::invalid_argument("unknown property: " + spec);
}

DominationReport verify_domination(int n, const Rational& bias, int t,
                                   const GraphPredicate& property) {
    if (n < 2 || n > 5)
        throw std::invalid_argument("domination check supports 2 <= n <= 5");
    if (!(bias > 0))
        throw std::invalid_argument("domination requires K > 0");
    if (t < 0) throw std::invalid_argument("step count must be >= 0");

    const MaskContext ctx = make_context(n);
    const std::uint32_t mask_count = 1u << ctx.edge_count;
    // Up-closure sweep: adding any edge may not destroy the property.
    for (std::uint32_t mask = 0; mask < mask_count; ++mask) {
        if (!property.test(mask, n)) continue;
        for (int e = 0; e < ctx.edge_count; ++e) {
            const std::uint32_t super = mask | (1u << e);
            if (super != mask && !property.test(super, n)) {
                throw std::invalid_argument(
                    "property " + property.name +
                    " is not monotone increasing: holds on mask " +
                    std::to_string(mask) + " but not on its supergraph " +
                    std::to_string(super));
            }
        }
    }

    const Rational inverse = Rational(1) / bias;
    const Rational ratio = bias > 1 ? bias : inverse;
    DominationReport report;
    report.stretch = ceil_to_long(ratio);
    const auto stretched =
        static_cast<std::uint32_t>(report.stretch) * static_cast<std::uint32_t>(t);

    const auto biased_t = enumerate_process(n, bias, t, EnumMode::biased);
    const auto biased_mt = enumerate_process(n, bias, stretched, EnumMode::biased);
    const auto uniform_t = enumerate_process(n, bias, t, EnumMode::uniform);
    const auto uniform_mt =
        enumerate_process(n, bias, stretched, EnumMode::uniform);

    report.p_biased_t = biased_t.probability_of(property.test);
    report.p_uniform_stretched = uniform_mt.probability_of(property.test);
    report.p_uniform_t = uniform_t.probability_of(property.test);
    report.p_biased_stretched = biased_mt.probability_of(property.test);
    report.biased_below_uniform =
        report.p_biased_t <= report.p_uniform_stretched;
    report.uniform_below_biased =
        report.p_uniform_t <= report.p_biased_stretched;
    return report;
}

}  // namespace bgp

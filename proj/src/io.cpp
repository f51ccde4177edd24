#include "bgp/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "bgp/version.hpp"

namespace bgp {

std::string format_double(double v) {
    char buf[40];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot move " + tmp + " into place");
}

std::string trace_csv(const ProcessTrace& trace) {
    std::string out = "t,I,S,Lmax\n";
    for (const TraceRow& row : trace.rows) {
        out += format_double(row.t);
        out += ',';
        out += format_double(row.isolation);
        out += ',';
        out += format_double(row.susceptibility);
        out += ',';
        out += format_double(row.largest);
        out += '\n';
    }
    return out;
}

nlohmann::json trace_sidecar(const ProcessTrace& trace) {
    return {{"n", trace.config.n},
            {"K", trace.config.bias},
            {"mode", to_string(trace.config.mode)},
            {"seed", trace.config.seed},
            {"stride", trace.stride},
            {"rng", trace.rng_name}};
}

std::string ode_csv(const OdeSolution& solution) {
    std::string out = "t,y,z\n";
    for (const OdePoint& p : solution.grid) {
        out += format_double(p.t);
        out += ',';
        out += format_double(p.y);
        out += ',';
        out += format_double(p.z);
        out += '\n';
    }
    return out;
}

nlohmann::json ode_sidecar(const OdeSolution& solution) {
    return {{"K", solution.bias},
            {"t_c", solution.blowup_time ? nlohmann::json(*solution.blowup_time)
                                         : nlohmann::json()},
            {"bracket_lo", solution.bracket_lo},
            {"bracket_hi", solution.bracket_hi},
            {"rtol", solution.rtol},
            {"atol", solution.atol}};
}

std::string closed_form_k0_csv(double z_cap) {
    std::string out = "t,y,z\n";
    for (double t = 0.0; t < kClosedFormTc0; t += kOdeGridStride) {
        const auto [y, z] = closed_form_k0(t);
        if (z > z_cap) break;
        out += format_double(t);
        out += ',';
        out += format_double(y);
        out += ',';
        out += format_double(z);
        out += '\n';
    }
    return out;
}

nlohmann::json closed_form_k0_sidecar(const SolverConfig& cfg) {
    return {{"K", 0.0},       {"t_c", kClosedFormTc0}, {"bracket_lo", kClosedFormTc0},
            {"bracket_hi", kClosedFormTc0}, {"rtol", cfg.rtol}, {"atol", cfg.atol}};
}

std::string sweep_csv(const SweepReport& report,
                      const std::vector<SimOdeComparison>* simulation) {
    std::string out = "K,tc,method,uncertainty,asymptotic,ratio,status";
    if (simulation) out += ",sim_tc,sim_stderr,sim_minus_ode,derivative_rule";
    out += '\n';
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const SweepRow& row = report.rows[i];
        out += format_double(row.estimate.bias);
        out += ',';
        if (row.status == "ok") {
            out += format_double(row.estimate.t_c);
            out += ',';
            out += to_string(row.estimate.method);
            out += ',';
            out += format_double(row.estimate.uncertainty);
            out += ',';
            out += format_double(row.asymptotic);
            out += ',';
            out += format_double(row.ratio);
        } else {
            out += ",,,,";
        }
        out += ',';
        out += row.status;
        if (simulation) {
            const SimOdeComparison& cmp = (*simulation)[i];
            out += ',';
            out += format_double(cmp.simulation.t_c);
            out += ',';
            out += format_double(cmp.simulation.uncertainty);
            out += ',';
            out += format_double(cmp.difference);
            out += ',';
            out += cmp.derivative_rule_used ? "1" : "0";
        }
        out += '\n';
    }
    return out;
}

nlohmann::json comparison_json(const SimOdeComparison& comparison) {
    return {{"K", comparison.bias},
            {"n", comparison.n},
            {"seeds", comparison.seeds},
            {"alpha", comparison.alpha},
            {"sim_tc", comparison.simulation.t_c},
            {"sim_stderr", comparison.simulation.uncertainty},
            {"ode_tc", comparison.ode.t_c},
            {"ode_method", to_string(comparison.ode.method)},
            {"ode_uncertainty", comparison.ode.uncertainty},
            {"difference", comparison.difference},
            {"derivative_rule_used", comparison.derivative_rule_used}};
}

nlohmann::json coupling_problem_to_json(const CouplingProblem& problem) {
    nlohmann::json j;
    j["U"] = problem.u_labels;
    j["V"] = problem.v_labels;
    nlohmann::json rel = nlohmann::json::array();
    for (const auto& [u, v] : problem.relation)
        rel.push_back({problem.u_labels.at(u), problem.v_labels.at(v)});
    j["R"] = rel;
    nlohmann::json mu = nlohmann::json::array(), nu = nlohmann::json::array();
    for (const Rational& m : problem.mu) mu.push_back(rational_to_string(m));
    for (const Rational& m : problem.nu) nu.push_back(rational_to_string(m));
    j["mu"] = mu;
    j["nu"] = nu;
    return j;
}

CouplingProblem coupling_problem_from_json(const nlohmann::json& j) {
    CouplingProblem problem;
    problem.u_labels = j.at("U").get<std::vector<std::string>>();
    problem.v_labels = j.at("V").get<std::vector<std::string>>();
    auto index_of = [](const std::vector<std::string>& labels,
                       const std::string& needle) {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == needle) return static_cast<int>(i);
        throw std::invalid_argument("unknown label in relation: " + needle);
    };
    for (const auto& pair : j.at("R")) {
        problem.relation.emplace_back(
            index_of(problem.u_labels, pair.at(0).get<std::string>()),
            index_of(problem.v_labels, pair.at(1).get<std::string>()));
    }
    for (const auto& m : j.at("mu"))
        problem.mu.push_back(rational_from_string(m.get<std::string>()));
    for (const auto& m : j.at("nu"))
        problem.nu.push_back(rational_from_string(m.get<std::string>()));
    problem.validate();
    return problem;
}

nlohmann::json coupling_plan_to_json(const CouplingPlan& plan,
                                     const CouplingProblem& problem) {
    nlohmann::json j;
    j["feasible"] = plan.feasible;
    if (plan.feasible) {
        nlohmann::json phi = nlohmann::json::array();
        for (std::size_t i = 0; i < plan.phi.size(); ++i) {
            for (std::size_t k = 0; k < plan.phi[i].size(); ++k) {
                if (plan.phi[i][k] != 0) {
                    phi.push_back({problem.u_labels[i], problem.v_labels[k],
                                   rational_to_string(plan.phi[i][k])});
                }
            }
        }
        j["phi"] = phi;
    } else {
        nlohmann::json cut = nlohmann::json::array();
        for (const int i : plan.violating_cut)
            cut.push_back(problem.u_labels.at(i));
        j["violating_cut"] = cut;
    }
    return j;
}

nlohmann::json RunManifest::to_json() const {
    return {{"command", command},
            {"version", kVersion},
            {"config", config},
            {"rng", {{"name", kRngName}, {"seeds", seeds}}},
            {"outputs", outputs},
            {"duration_seconds", duration_seconds}};
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    write_text_file(path, manifest.to_json().dump(2) + "\n");
}

}  // namespace bgp

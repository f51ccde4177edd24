// io.hpp — file formats: trace/solution/sweep CSVs, JSON sidecars, and the
// run manifest. All writes go through a temp-file rename so failed runs never
// leave partial outputs behind.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bgp/coupling.hpp"
#include "bgp/critical.hpp"
#include "bgp/ode.hpp"
#include "bgp/process.hpp"

namespace bgp {

/// Shortest decimal form of v that parses back to exactly v.
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);

std::string trace_csv(const ProcessTrace& trace);   // header t,I,S,Lmax
nlohmann::json trace_sidecar(const ProcessTrace& trace);

std::string ode_csv(const OdeSolution& solution);   // header t,y,z
nlohmann::json ode_sidecar(const OdeSolution& solution);

/// K = 0 closed-form export on the uniform grid, while z stays below z_cap.
std::string closed_form_k0_csv(double z_cap);
nlohmann::json closed_form_k0_sidecar(const SolverConfig& cfg);

std::string sweep_csv(const SweepReport& report,
                      const std::vector<SimOdeComparison>* simulation = nullptr);

nlohmann::json comparison_json(const SimOdeComparison& comparison);

nlohmann::json coupling_problem_to_json(const CouplingProblem& problem);
CouplingProblem coupling_problem_from_json(const nlohmann::json& j);
nlohmann::json coupling_plan_to_json(const CouplingPlan& plan,
                                     const CouplingProblem& problem);

struct RunManifest {
    std::string command;
    nlohmann::json config;  // every option, defaults materialized
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> outputs;
    double duration_seconds = 0.0;

    nlohmann::json to_json() const;
};

void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace bgp

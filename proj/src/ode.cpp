#include "bgp/ode.hpp"

#include <algorithm>
#include <cmath>

namespace bgp {

void SolverConfig::validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0))
        throw std::invalid_argument("tolerances must be positive");
    if (!(z_switch > 1.0))
        throw std::invalid_argument("z_switch must exceed 1");
    if (!(t_ceiling > 0.0))
        throw std::invalid_argument("t_ceiling must be positive");
}

double coefficient_c(double y, double bias) {
    return bias / (y * y + (1.0 - y * y) * bias);
}

std::pair<double, double> closed_form_k0(double t) {
    if (!(t >= 0.0) || t >= kClosedFormTc0)
        throw std::domain_error("K=0 closed form is defined on [0, 3/2)");
    const double y = std::max(0.0, 1.0 - t);
    const double z = t <= 1.0 ? 1.0 + t : 1.0 / (kClosedFormTc0 - t);
    return {y, z};
}

namespace {

// Merge the uniform output grid with the accepted step boundaries, capped at
// t_limit.
std::vector<double> grid_times(const std::vector<double>& step_ends,
                               double t_limit) {
    std::vector<double> times;
    times.push_back(0.0);
    for (double t = kOdeGridStride; t < t_limit; t += kOdeGridStride)
        times.push_back(t);
    for (const double t : step_ends)
        if (t <= t_limit) times.push_back(t);
    times.push_back(t_limit);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    return times;
}

}  // namespace

ScalarSolution solve_y(double bias, double t_end, const SolverConfig& cfg) {
    cfg.validate();
    if (!(bias > 0.0))
        throw std::invalid_argument("solve_y requires K > 0; K = 0 is closed-form");
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");

    auto rhs = [bias](double, const std::array<double, 1>& s,
                      std::array<double, 1>& d) {
        d[0] = (1.0 - s[0]) * coefficient_c(s[0], bias) - 1.0;
    };
    Dopri5<1, decltype(rhs)> integ(rhs, cfg.rtol, cfg.atol);
    integ.start(0.0, {1.0}, t_end);

    ScalarSolution sol;
    sol.bias = bias;
    sol.t_end = t_end;
    std::vector<double> ends;
    while (t_end - integ.t() > 1e-14 * t_end) {
        sol.path.append(integ.step(0, t_end));
        ends.push_back(integ.t());
    }
    for (const double t : grid_times(ends, sol.path.t_back()))
        sol.grid.emplace_back(t, sol.eval(t));
    return sol;
}

OdeSolution solve_coupled(double bias, const SolverConfig& cfg) {
    cfg.validate();
    if (!(bias > 0.0))
        throw std::invalid_argument(
            "solve_coupled requires K > 0; K = 0 is closed-form");

    OdeSolution sol;
    sol.bias = bias;
    sol.rtol = cfg.rtol;
    sol.atol = cfg.atol;

    auto rhs_yz = [bias](double, const std::array<double, 2>& s,
                         std::array<double, 2>& d) {
        const double c = coefficient_c(s[0], bias);
        d[0] = (1.0 - s[0]) * c - 1.0;
        d[1] = c * (s[1] * s[1] - 1.0) + 1.0;
    };
    Dopri5<2, decltype(rhs_yz)> direct(rhs_yz, cfg.rtol, cfg.atol);
    direct.start(0.0, {1.0, 1.0}, cfg.t_ceiling);
    while (direct.y()[1] < cfg.z_switch) {
        if (direct.t() >= cfg.t_ceiling)
            throw blowup_not_found("z stayed below z_switch up to t_ceiling");
        sol.path.append(direct.step(0));
    }
    sol.switch_time = direct.t();

    // w = 1/z passes smoothly through the blowup; t_c is its zero crossing.
    auto rhs_yw = [bias](double, const std::array<double, 2>& s,
                         std::array<double, 2>& d) {
        const double c = coefficient_c(s[0], bias);
        d[0] = (1.0 - s[0]) * c - 1.0;
        d[1] = -c * (1.0 - s[1] * s[1]) - s[1] * s[1];
    };
    Dopri5<2, decltype(rhs_yw)> recip(rhs_yw, cfg.rtol, cfg.atol);
    recip.start(sol.switch_time, {direct.y()[0], 1.0 / direct.y()[1]},
                cfg.t_ceiling);
    while (recip.y()[1] > 0.0) {
        if (recip.t() >= cfg.t_ceiling)
            throw blowup_not_found("w never crossed zero before t_ceiling");
        sol.path.append(recip.step(1));
    }

    // Bisect w inside the crossing step down to relative width rtol.
    const auto& last = sol.path.segments().back();
    double lo = last.t0;
    double hi = last.t1();
    while (hi - lo > 0.5 * cfg.rtol * (hi + lo) && hi - lo > 1e-15) {
        const double mid = 0.5 * (lo + hi);
        (last.eval(1, mid) > 0.0 ? lo : hi) = mid;
    }
    sol.blowup_time = 0.5 * (lo + hi);
    sol.bracket_lo = lo;
    sol.bracket_hi = hi;
    if (*sol.blowup_time > 4.0 + 1e-6)
        throw std::runtime_error("blowup time exceeds the guaranteed bound 4");

    std::vector<double> ends;
    for (const auto& seg : sol.path.segments()) ends.push_back(seg.t1());
    for (const double t : grid_times(ends, lo))
        sol.grid.push_back({t, sol.eval_y(t), sol.eval_z(t)});
    return sol;
}

}  // namespace bgp

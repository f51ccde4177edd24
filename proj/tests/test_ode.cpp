#include <doctest.h>

#include <cmath>
#include <vector>

#include "bgp/ode.hpp"
#include "oracle.hpp"

using namespace bgp;

namespace {

// Binary search on the monotone dense z for the time where z hits target.
double time_at_z(const OdeSolution& sol, double target) {
    double lo = 0.0, hi = sol.grid.back().t;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (sol.eval_z(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("coefficient c: endpoints, arithmetic, range") {
    CHECK(coefficient_c(1.0, 3.5) == doctest::Approx(3.5).epsilon(1e-15));
    CHECK(coefficient_c(0.0, 3.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(coefficient_c(0.5, 4.0) == doctest::Approx(16.0 / 13.0).epsilon(1e-15));
    for (const double bias : {0.25, 0.5, 2.0, 7.0}) {
        for (double y = 0.0; y <= 1.0; y += 0.05) {
            const double c = coefficient_c(y, bias);
            CHECK(c >= std::min(1.0, bias) - 1e-12);
            CHECK(c <= std::max(1.0, bias) + 1e-12);
        }
    }
}

TEST_CASE("closed form at K = 0") {
    auto [y0, z0] = closed_form_k0(0.0);
    CHECK(y0 == 1.0);
    CHECK(z0 == 1.0);
    auto [y1, z1] = closed_form_k0(1.0);
    CHECK(y1 == 0.0);
    CHECK(z1 == 2.0);
    auto [y2, z2] = closed_form_k0(1.25);
    CHECK(y2 == 0.0);
    CHECK(z2 == doctest::Approx(4.0).epsilon(1e-15));
    CHECK_THROWS_AS(closed_form_k0(1.5), std::domain_error);
    CHECK_THROWS_AS(closed_form_k0(2.0), std::domain_error);
    CHECK_THROWS_AS(closed_form_k0(-0.1), std::domain_error);
}

TEST_CASE("solver config validation") {
    SolverConfig bad;
    bad.rtol = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = SolverConfig{};
    bad.z_switch = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = SolverConfig{};
    bad.t_ceiling = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(solve_y(0.0, 1.0, SolverConfig{}), std::invalid_argument);
    CHECK_THROWS_AS(solve_coupled(0.0, SolverConfig{}), std::invalid_argument);
}

TEST_CASE("y solution for K = 1 is the exponential") {
    const SolverConfig cfg;
    const ScalarSolution sol = solve_y(1.0, 5.0, cfg);
    CHECK(sol.eval(0.0) == 1.0);
    double worst = 0.0;
    for (const auto& [t, y] : sol.grid)
        worst = std::max(worst, std::abs(y - std::exp(-t)));
    CHECK(worst <= 10.0 * cfg.rtol);
}

TEST_CASE("y at t = 1 for K = 4 matches the fixed-step oracle") {
    const double adaptive = solve_y(4.0, 1.0, SolverConfig{}).eval(1.0);
    const double ref_h = oracle::y_at(4.0, 1.0, 1e-4);
    const double ref_h2 = oracle::y_at(4.0, 1.0, 0.5e-4);
    CHECK(std::abs(ref_h - ref_h2) < 1e-12);  // the oracle has converged
    CHECK(std::abs(adaptive - ref_h2) < 1e-9);
    CHECK(adaptive == doctest::Approx(0.45838031806784).epsilon(1e-9));
    // and sits strictly inside the exponential envelope
    CHECK(adaptive > std::exp(-1.0));
    CHECK(adaptive < std::exp(-0.25));
}

TEST_CASE("y envelope is strict for K != 1") {
    const SolverConfig cfg;
    for (const double bias : {0.25, 4.0}) {
        const ScalarSolution sol = solve_y(bias, 2.0, cfg);
        const double lo_rate = 1.0 / std::min(1.0, bias);
        const double hi_rate = 1.0 / std::max(1.0, bias);
        for (double t = 0.01; t <= 2.0 + 1e-12; t += 0.01) {
            const double y = sol.eval(t);
            CHECK(y > std::exp(-t * lo_rate) - 10.0 * cfg.rtol);
            CHECK(y < std::exp(-t * hi_rate) + 10.0 * cfg.rtol);
        }
    }
}

TEST_CASE("y is strictly increasing in K pointwise") {
    const std::vector<double> biases{0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
    std::vector<ScalarSolution> sols;
    for (const double b : biases) sols.push_back(solve_y(b, 2.0, SolverConfig{}));
    for (std::size_t i = 0; i + 1 < sols.size(); ++i) {
        for (double t = 0.05; t <= 2.0 + 1e-12; t += 0.05) {
            CHECK(sols[i].eval(t) < sols[i + 1].eval(t));
        }
    }
}

TEST_CASE("coupled K = 1: blowup at 1 and z = 1/(1-t)") {
    const SolverConfig cfg;
    const OdeSolution sol = solve_coupled(1.0, cfg);
    REQUIRE(sol.blowup_time.has_value());
    CHECK(std::abs(*sol.blowup_time - 1.0) < 1e-6);
    CHECK(sol.bracket_hi - sol.bracket_lo <= cfg.rtol * *sol.blowup_time);
    CHECK(*sol.blowup_time >= sol.bracket_lo);
    CHECK(*sol.blowup_time <= sol.bracket_hi);

    CHECK(std::abs(sol.eval_z(0.9) - 10.0) / 10.0 <= 10.0 * cfg.rtol);

    // blowup-normalized error over the whole subcritical window
    double worst = 0.0;
    for (double t = 0.0; t <= 0.99 + 1e-12; t += 1e-3) {
        const double z = sol.eval_z(t);
        worst = std::max(worst,
                         std::abs(z - 1.0 / (1.0 - t)) * (1.0 - t) * (1.0 - t));
    }
    CHECK(worst <= 10.0 * cfg.rtol);
}

TEST_CASE("coupled solution: monotone z, unit slope at 0, y consistency") {
    for (const double bias : {0.5, 3.0}) {
        const OdeSolution sol = solve_coupled(bias, SolverConfig{});
        double prev_z = 0.0;
        for (const OdePoint& p : sol.grid) {
            CHECK(p.z > prev_z);
            prev_z = p.z;
            CHECK(p.y > 0.0);
            CHECK(p.y <= 1.0);
            CHECK(p.z >= 1.0);
        }
        // z(0) = 1 kills the quadratic term, so z' (0) = 1 for every K
        for (double t = 0.0; t <= 0.1; t += 0.01)
            CHECK(sol.eval_z(t) >= 1.0 + t - 10.0 * t * t);
        // y integrated jointly agrees with the scalar solve
        const ScalarSolution ys = solve_y(bias, sol.grid.back().t, SolverConfig{});
        for (double t = 0.1; t < sol.grid.back().t; t += 0.1)
            CHECK(std::abs(sol.eval_y(t) - ys.eval(t)) < 1e-8);
    }
}

TEST_CASE("reciprocal transform agrees with direct integration") {
    SolverConfig via_w;
    via_w.z_switch = 10.0;
    SolverConfig direct;
    direct.z_switch = 2000.0;  // keeps the z form in charge through 10^3
    const OdeSolution a = solve_coupled(2.0, via_w);
    const OdeSolution b = solve_coupled(2.0, direct);
    const double ta = time_at_z(a, 1000.0);
    const double tb = time_at_z(b, 1000.0);
    CHECK(std::abs(ta - tb) <= 100.0 * via_w.rtol);
}

TEST_CASE("halving rtol moves t_c by less than the bracket width") {
    SolverConfig coarse;
    SolverConfig fine;
    fine.rtol = 0.5 * coarse.rtol;
    fine.atol = 0.5 * coarse.atol;
    for (const double bias : {0.5, 2.0, 7.0}) {
        const OdeSolution a = solve_coupled(bias, coarse);
        const OdeSolution b = solve_coupled(bias, fine);
        CHECK(std::abs(*a.blowup_time - *b.blowup_time) <
              (a.bracket_hi - a.bracket_lo));
    }
}

TEST_CASE("K = 100 blowup: near the asymptote, pinned by the oracle") {
    const OdeSolution sol = solve_coupled(100.0, SolverConfig{});
    const double asym = 4.0 / std::sqrt(300.0);
    CHECK(std::abs(*sol.blowup_time - asym) / asym < 0.15);
    const double ref = oracle::tc_of(100.0, 1e-5, 1e-7);
    CHECK(std::abs(*sol.blowup_time - ref) < 1e-8);
}

TEST_CASE("no blowup before a too-small ceiling is an error") {
    SolverConfig cfg;
    cfg.t_ceiling = 0.5;
    CHECK_THROWS_AS(solve_coupled(0.1, cfg), blowup_not_found);
}

// ode.hpp — the coupled isolation/susceptibility system
//
//     y' = (1 - y) c(y) - 1,            y(0) = 1
//     z' = c(y) (z^2 - 1) + 1,          z(0) = 1,   c(y) = K / (y^2 + (1-y^2) K)
//
// integrated adaptively with dense output. z blows up at a finite time t_c
// for every K > 0; once z crosses a switch level the second variable is
// replaced by w = 1/z (w' = -c (1 - w^2) - w^2), which passes smoothly
// through the singularity, and t_c is bracketed as the root of w. K = 0 is
// served by closed forms only.
#pragma once

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bgp/dopri5.hpp"

namespace bgp {

/// Raised when w never crosses zero before the configured ceiling; blowup is
/// guaranteed for K > 0, so this signals a misconfigured horizon.
struct blowup_not_found : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    double rtol = 1e-10;
    double atol = 1e-12;
    double z_switch = 1e3;   ///< reciprocal-transform threshold, > 1
    double t_ceiling = 5.0;  ///< hard horizon; blowup happens by t = 4

    void validate() const;
};

/// c(y) = K / (y^2 + (1-y^2) K); lies between min(1,K) and max(1,K).
double coefficient_c(double y, double bias);

/// Closed forms for K = 0 on [0, 3/2): y = 1 - t (0 past t = 1),
/// z = 1 + t up to t = 1 and 1/(3/2 - t) beyond. Throws std::domain_error
/// outside the domain.
std::pair<double, double> closed_form_k0(double t);

inline constexpr double kClosedFormTc0 = 1.5;
inline constexpr double kOdeGridStride = 1e-3;

/// Dense solution of the scalar y-equation on [0, t_end].
struct ScalarSolution {
    double bias = 0.0;
    double t_end = 0.0;
    DensePath<1> path;
    std::vector<std::pair<double, double>> grid;  // uniform stride + step ends

    double eval(double t) const { return path.eval(0, t); }
};

ScalarSolution solve_y(double bias, double t_end, const SolverConfig& cfg = {});

struct OdePoint {
    double t;
    double y;
    double z;
};

/// Joint (y, z) solution for one K with blowup metadata. The dense path is
/// kept so tests can interpolate anywhere below the bracket.
struct OdeSolution {
    double bias = 0.0;
    double rtol = 0.0;
    double atol = 0.0;
    std::vector<OdePoint> grid;
    std::optional<double> blowup_time;  ///< t_c
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double switch_time = 0.0;  ///< where integration moved to w = 1/z
    DensePath<2> path;

    double eval_y(double t) const { return path.eval(0, t); }
    double eval_z(double t) const {
        const auto& seg = path.segment_at(t);
        const double v = seg.eval(1, t);
        return seg.tag == 0 ? v : 1.0 / v;
    }
};

/// Integrates the coupled system from (1, 1) until blowup. Requires K > 0.
OdeSolution solve_coupled(double bias, const SolverConfig& cfg = {});

}  // namespace bgp

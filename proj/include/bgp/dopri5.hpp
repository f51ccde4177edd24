// dopri5.hpp — adaptive Dormand-Prince 5(4) stepping with the classic
// fourth-order dense interpolant. Small fixed dimension, value semantics;
// callers drive the loop one accepted step at a time so they can watch for
// events (transform switches, sign crossings) between steps.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace bgp {

/// Raised when step-size control underflows; the systems integrated here are
/// smooth and non-stiff, so this indicates a misuse rather than a hard limit.
struct stiffness_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One accepted step with its dense-output coefficients.
template <std::size_t N>
struct DenseSegment {
    double t0 = 0.0;
    double h = 0.0;
    int tag = 0;  // caller-defined phase marker
    std::array<double, N> c1{}, c2{}, c3{}, c4{}, c5{};

    double t1() const { return t0 + h; }

    double eval(std::size_t comp, double t) const {
        const double th = (t - t0) / h;
        const double th1 = 1.0 - th;
        return c1[comp] +
               th * (c2[comp] +
                     th1 * (c3[comp] + th * (c4[comp] + th1 * c5[comp])));
    }
};

/// Contiguous piecewise dense solution over [t_front, t_back].
template <std::size_t N>
class DensePath {
public:
    void append(const DenseSegment<N>& seg) { segments_.push_back(seg); }

    bool empty() const { return segments_.empty(); }
    double t_front() const { return segments_.front().t0; }
    double t_back() const { return segments_.back().t1(); }

    const DenseSegment<N>& segment_at(double t) const {
        if (empty()) throw std::out_of_range("empty dense path");
        std::size_t lo = 0, hi = segments_.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (segments_[mid].t1() < t)
                lo = mid + 1;
            else
                hi = mid;
        }
        return segments_[lo];
    }

    double eval(std::size_t comp, double t) const {
        return segment_at(t).eval(comp, t);
    }

    const std::vector<DenseSegment<N>>& segments() const { return segments_; }

private:
    std::vector<DenseSegment<N>> segments_;
};

/// Embedded Dormand-Prince pair; F is void(double t, const state&, state&).
template <std::size_t N, class F>
class Dopri5 {
public:
    using State = std::array<double, N>;

    Dopri5(F f, double rtol, double atol)
        : f_(std::move(f)), rtol_(rtol), atol_(atol) {
        if (!(rtol > 0.0) || !(atol > 0.0))
            throw std::invalid_argument("tolerances must be positive");
    }

    void start(double t0, const State& y0, double h_max) {
        t_ = t0;
        y_ = y0;
        h_max_ = h_max;
        f_(t_, y_, k_[0]);
        h_ = initial_step();
        rejected_last_ = false;
    }

    double t() const { return t_; }
    const State& y() const { return y_; }

    /// Advances by one accepted step and returns its dense segment. A finite
    /// t_limit caps the step so the state lands on t_limit exactly; the
    /// controller's step proposal survives such caps.
    DenseSegment<N> step(int tag = 0,
                         double t_limit = std::numeric_limits<double>::infinity()) {
        for (;;) {
            if (!(h_ > std::abs(t_) * 1e-14) || h_ < 1e-300)
                throw stiffness_error("step size underflow in dopri5");
            const double proposal = std::min(h_, h_max_);
            const bool limited = t_ + proposal >= t_limit;
            const double h = limited ? t_limit - t_ : proposal;
            if (!(h > 0.0))
                throw std::invalid_argument("step requested past t_limit");
            State y1;
            const double err = attempt(h, y1);
            const double safety = 0.9;
            double fac = safety * std::pow(err > 0.0 ? err : 1e-30, -0.2);
            fac = std::min(rejected_last_ ? 1.0 : 5.0, std::max(0.2, fac));
            if (err <= 1.0) {
                DenseSegment<N> seg = make_dense(h, y1);
                seg.tag = tag;
                t_ += h;
                y_ = y1;
                k_[0] = k_[6];  // FSAL
                if (!limited) h_ = h * fac;
                rejected_last_ = false;
                return seg;
            }
            h_ = h * fac;
            rejected_last_ = true;
        }
    }

private:
    // Butcher tableau of Dormand & Prince (1980), with Hairer's error weights
    // and dense-output constants.
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113,
                            b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                            e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432.0,
                            d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0,
                            d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0,
                            d7 = 69997945.0 / 29380423.0;

    double attempt(double h, State& y1) {
        State w;
        for (std::size_t i = 0; i < N; ++i) w[i] = y_[i] + h * a21 * k_[0][i];
        f_(t_ + c2 * h, w, k_[1]);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y_[i] + h * (a31 * k_[0][i] + a32 * k_[1][i]);
        f_(t_ + c3 * h, w, k_[2]);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y_[i] + h * (a41 * k_[0][i] + a42 * k_[1][i] + a43 * k_[2][i]);
        f_(t_ + c4 * h, w, k_[3]);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y_[i] + h * (a51 * k_[0][i] + a52 * k_[1][i] +
                                a53 * k_[2][i] + a54 * k_[3][i]);
        f_(t_ + c5 * h, w, k_[4]);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y_[i] + h * (a61 * k_[0][i] + a62 * k_[1][i] +
                                a63 * k_[2][i] + a64 * k_[3][i] +
                                a65 * k_[4][i]);
        f_(t_ + h, w, k_[5]);
        for (std::size_t i = 0; i < N; ++i)
            y1[i] = y_[i] + h * (b1 * k_[0][i] + b3 * k_[2][i] + b4 * k_[3][i] +
                                 b5 * k_[4][i] + b6 * k_[5][i]);
        f_(t_ + h, y1, k_[6]);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double ei = h * (e1 * k_[0][i] + e3 * k_[2][i] +
                                   e4 * k_[3][i] + e5 * k_[4][i] +
                                   e6 * k_[5][i] + e7 * k_[6][i]);
            const double scale =
                atol_ + rtol_ * std::max(std::abs(y_[i]), std::abs(y1[i]));
            err += (ei / scale) * (ei / scale);
        }
        return std::sqrt(err / N);
    }

    DenseSegment<N> make_dense(double h, const State& y1) const {
        DenseSegment<N> seg;
        seg.t0 = t_;
        seg.h = h;
        for (std::size_t i = 0; i < N; ++i) {
            const double ydiff = y1[i] - y_[i];
            const double bspl = h * k_[0][i] - ydiff;
            seg.c1[i] = y_[i];
            seg.c2[i] = ydiff;
            seg.c3[i] = bspl;
            seg.c4[i] = ydiff - h * k_[6][i] - bspl;
            seg.c5[i] = h * (d1 * k_[0][i] + d3 * k_[2][i] + d4 * k_[3][i] +
                             d5 * k_[4][i] + d6 * k_[5][i] + d7 * k_[6][i]);
        }
        return seg;
    }

    double initial_step() const {
        double d0 = 0.0, d1n = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double scale = atol_ + rtol_ * std::abs(y_[i]);
            d0 += (y_[i] / scale) * (y_[i] / scale);
            d1n += (k_[0][i] / scale) * (k_[0][i] / scale);
        }
        d0 = std::sqrt(d0 / N);
        d1n = std::sqrt(d1n / N);
        double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
        h0 = std::min(h0, h_max_);

        State y1, f1;
        for (std::size_t i = 0; i < N; ++i) y1[i] = y_[i] + h0 * k_[0][i];
        f_(t_ + h0, y1, f1);
        double d2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double scale = atol_ + rtol_ * std::abs(y_[i]);
            const double diff = (f1[i] - k_[0][i]) / scale;
            d2 += diff * diff;
        }
        d2 = std::sqrt(d2 / N) / h0;

        const double dm = std::max(d1n, d2);
        const double h1 =
            dm > 1e-15 ? std::pow(0.01 / dm, 0.2) : std::max(1e-6, h0 * 1e-3);
        return std::min({100.0 * h0, h1, h_max_});
    }

    F f_;
    double rtol_, atol_;
    double t_ = 0.0;
    double h_ = 0.0;
    double h_max_ = 1.0;
    bool rejected_last_ = false;
    State y_{};
    std::array<State, 7> k_{};
};

}  // namespace bgp

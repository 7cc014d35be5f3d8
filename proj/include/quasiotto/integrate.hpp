// integrate.hpp — Adaptive Dormand-Prince 5(4) stepper for small dense states.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qo::ode {

struct Options {
    double rel_tol{1e-9};
    double abs_tol{1e-11};
    double initial_step{1e-3};
    double min_step{1e-13};
    long max_steps{2000000};
};

namespace detail {

template <typename State>
double max_abs(const State& s) {
    return s.cwiseAbs().maxCoeff();
}

inline double max_abs(double s) { return std::abs(s); }

} // namespace detail

// Integrates dy/dt = rhs(y, t) from t0 to t1 and returns y(t1).
template <typename State, typename Rhs>
State integrate_adaptive(Rhs&& rhs, State y, double t0, double t1, const Options& opt = {}) {
    if (t1 < t0) throw std::invalid_argument("ode: t1 must be >= t0");
    if (t1 == t0) return y;

    // Dormand-Prince coefficients
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                     e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                     e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    double t = t0;
    double h = std::min(opt.initial_step, t1 - t0);
    State k1 = rhs(y, t);
    for (long step = 0; step < opt.max_steps; ++step) {
        if (t >= t1) return y;
        h = std::min(h, t1 - t);

        const State k2 = rhs(State(y + h * (a21 * k1)), t + c2 * h);
        const State k3 = rhs(State(y + h * (a31 * k1 + a32 * k2)), t + c3 * h);
        const State k4 = rhs(State(y + h * (a41 * k1 + a42 * k2 + a43 * k3)), t + c4 * h);
        const State k5 = rhs(State(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)),
                             t + c5 * h);
        const State k6 = rhs(State(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)),
                             t + h);
        const State ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const State k7 = rhs(ynew, t + h);
        const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double scale =
            opt.abs_tol + opt.rel_tol * std::max(detail::max_abs(y), detail::max_abs(ynew));
        const double ratio = detail::max_abs(err) / scale;
        if (ratio <= 1.0) {
            t += h;
            y = ynew;
            k1 = k7;  // FSAL
        }
        const double grow = (ratio > 0.0) ? 0.9 * std::pow(ratio, -0.2) : 5.0;
        h *= std::clamp(grow, 0.2, 5.0);
        if (h < opt.min_step)
            throw std::runtime_error("ode: step size underflow");
    }
    throw std::runtime_error("ode: step budget exhausted");
}

} // namespace qo::ode

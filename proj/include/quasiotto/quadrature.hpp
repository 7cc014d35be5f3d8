// quadrature.hpp — Adaptive Simpson integration.

#pragma once

#include <cmath>
#include <stdexcept>

namespace qo::quad {

namespace detail {

template <typename F>
double simpson_rec(F& f, double a, double b, double fa, double fm, double fb, double whole,
                   double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0) throw std::runtime_error("quad: max recursion depth reached");
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

template <typename F>
double adaptive_simpson(F&& f, double a, double b, double tol = 1e-10, int max_depth = 48) {
    if (b == a) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// (1/T) int_0^T f dt
template <typename F>
double time_average(F&& f, double horizon, double tol = 1e-10) {
    if (!(horizon > 0.0)) throw std::invalid_argument("quad: horizon must be positive");
    return adaptive_simpson(f, 0.0, horizon, tol * horizon) / horizon;
}

} // namespace qo::quad

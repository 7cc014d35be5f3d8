// equilibrium.hpp — Long-time-averaged map coefficients (closed form via
// incomplete Beta functions and by direct series summation), the thermalization
// ratio R, and the optimized trace distance to the Gibbs state.
//
// The infinite-time average of sin^2(eta t/2)/eta^2 is 1/(2 eta^2), so with
// kappa = beta^2/(4 Delta^2) and z = e^{-gamma omega}:
//
//   A_bar = (1-z)^N sum_n g_N(n) z^n n/(2(n+kappa))
//         = (1-z)^N (N/2) z^{-kappa} B_z(kappa+1, -N)
//   chi   = (1-z)^N sum_n g_N(n) z^n (n+N)/(2(n+N+kappa))
//         = (1-z)^N (N/2) z^{-kappa-N} [B_z(kappa+N, 1-N) + B_z(kappa+N+1, -N)]
//
// The z^{-kappa} prefactors cancel against the z^a inside B_z analytically; the
// closed forms below are evaluated in that combined (overflow-free) form.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "quasiotto/amplitudes.hpp"
#include "quasiotto/model.hpp"

namespace qo::equilibrium {

namespace detail {

// S(a, b, z) = sum_k ((1-b)_k / k!) z^k / (a+k), so that B_z(a,b) = z^a S(a,b,z).
// Converges geometrically (rate z) for z in [0,1); b may be any real.
inline double beta_tail_series(double z, double a, double b) {
    double poch = 1.0;  // (1-b)_k / k!
    double zk = 1.0;
    double sum = 1.0 / a;
    for (int k = 1; k < 200000; ++k) {
        poch *= (1.0 - b + double(k - 1)) / double(k);
        zk *= z;
        const double term = poch * zk / (a + double(k));
        sum += term;
        if (std::abs(term) <= 1e-16 * std::abs(sum) && k > 4) return sum;
    }
    throw std::runtime_error("equilibrium: incomplete Beta series did not converge");
}

} // namespace detail

// B_z(a, b) = int_0^z t^{a-1} (1-t)^{b-1} dt for z in [0,1), a > 0, b any real
// (the closed-form averages use b = -N and 1-N).
inline double incomplete_beta(double z, double a, double b) {
    if (!(a > 0.0)) throw std::invalid_argument("equilibrium: incomplete_beta needs a > 0");
    if (!(z >= 0.0) || z >= 1.0)
        throw std::invalid_argument("equilibrium: incomplete_beta needs z in [0,1)");
    if (z == 0.0) return 0.0;
    return std::pow(z, a) * detail::beta_tail_series(z, a, b);
}

enum class Method { closed_form, numeric_average };

struct AveragedCoefficients {
    double a_bar{0.0};  // time-averaged A_t
    double chi{0.0};    // time-averaged B_t
    Method method{Method::closed_form};
};

inline AveragedCoefficients averaged_coefficients(const model::ModelParams& params_in,
                                                  const model::TruncationPolicy& policy,
                                                  Method method = Method::closed_form) {
    const auto p = model::validate_params(params_in);
    if (p.coupling == 0.0) return {0.0, 0.0, method};

    const double n = double(p.n_modes);
    const double beta = 2.0 * p.qubit_freq + p.mode_freq;
    const double delta2 = p.coupling * p.coupling;

    if (method == Method::closed_form) {
        const double z = std::exp(-p.inv_temp * p.mode_freq);
        const double kappa = beta * beta / (4.0 * delta2);
        const double norm = std::pow(1.0 - z, n);
        AveragedCoefficients out;
        out.method = method;
        out.a_bar = norm * (n / 2.0) * z * detail::beta_tail_series(z, kappa + 1.0, -n);
        out.chi = norm * (n / 2.0) *
                  (detail::beta_tail_series(z, kappa + n, 1.0 - n) +
                   z * detail::beta_tail_series(z, kappa + n + 1.0, -n));
        return out;
    }

    const int n_max = model::truncation_level(p, policy);
    AveragedCoefficients out;
    out.method = method;
    for (int k = 0; k <= n_max; ++k) {
        const double w = model::thermal_weight(p, k);
        const auto f = amplitudes::sector_frequencies(p, k);
        out.a_bar += w * 2.0 * k * delta2 / (f.eta * f.eta);
        out.chi += w * 2.0 * (k + p.n_modes) * delta2 / (f.eta_p * f.eta_p);
    }
    return out;
}

// R = ln[(1 + (chi - A_bar)) / (1 - (chi - A_bar))] / (2 gamma omega_0); the
// long-time averaged populations are thermal iff R = 1.
inline double thermalization_ratio(const model::ModelParams& params,
                                   const model::TruncationPolicy& policy) {
    const auto avg = averaged_coefficients(params, policy, Method::closed_form);
    const double d = avg.chi - avg.a_bar;
    if (!(std::abs(d) < 1.0))
        throw std::domain_error("equilibrium: |chi - A_bar| >= 1");
    return (std::log1p(d) - std::log1p(-d)) / (2.0 * params.inv_temp * params.qubit_freq);
}

// D = |chi - A_bar - tanh(gamma omega_0)| / 2; zero iff R = 1.
inline double optimized_trace_distance(const model::ModelParams& params,
                                       const model::TruncationPolicy& policy) {
    const auto avg = averaged_coefficients(params, policy, Method::closed_form);
    return 0.5 * std::abs(avg.chi - avg.a_bar - std::tanh(params.inv_temp * params.qubit_freq));
}

// Long-time average of the Markovian reference evolution
// rho(t) = rho(0) e^{-at} + tau (1 - e^{-at}): the averaged population equals the
// Gibbs population exactly, independent of the rate.
inline double markovian_average_sanity(double a_rate, double gibbs_pop) {
    if (!(a_rate > 0.0)) throw std::invalid_argument("equilibrium: rate must be positive");
    if (gibbs_pop < 0.0 || gibbs_pop > 1.0)
        throw std::invalid_argument("equilibrium: population must lie in [0,1]");
    return gibbs_pop;
}

// Finite-horizon average of the same evolution, in closed form; used to certify
// numeric time-averaging machinery on a case with a known answer.
inline double markovian_finite_average(double a_rate, double initial_pop, double gibbs_pop,
                                       double horizon) {
    if (!(a_rate > 0.0) || !(horizon > 0.0))
        throw std::invalid_argument("equilibrium: rate and horizon must be positive");
    const double at = a_rate * horizon;
    return gibbs_pop + (initial_pop - gibbs_pop) * (-std::expm1(-at)) / at;
}

} // namespace qo::equilibrium

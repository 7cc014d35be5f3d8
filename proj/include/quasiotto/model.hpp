// model.hpp — Physical parameters, natural-unit conventions, Fock-space truncation,
// and partition functions shared by all other modules.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "quasiotto/errors.hpp"

namespace qo::model {

// Natural units hbar = k_B = 1 throughout; every energy is an angular frequency.
struct ModelParams {
    int n_modes{1};          // N, number of degenerate bath modes
    double qubit_freq{1.0};  // omega_0, qubit transition frequency
    double mode_freq{1.0};   // omega, shared frequency of all modes
    double coupling{0.1};    // Delta, qubit-mode coupling (Delta < omega)
    double inv_temp{1.0};    // gamma = 1/T, inverse bath temperature
};

// Truncation of the infinite thermal sums: keep total-occupation levels until the
// normalized Boltzmann tail (degeneracy included) drops below tail_tolerance.
struct TruncationPolicy {
    double tail_tolerance{1e-12};
    int max_level_cap{10000};
};

inline ModelParams validate_params(const ModelParams& raw) {
    if (raw.n_modes < 1)
        throw std::invalid_argument("model: need at least one mode (n_modes >= 1)");
    if (!(raw.qubit_freq > 0.0))
        throw std::invalid_argument("model: qubit frequency must be positive");
    if (!(raw.mode_freq > 0.0))
        throw std::invalid_argument("model: mode frequency must be positive");
    if (!(raw.coupling >= 0.0))
        throw std::invalid_argument("model: coupling must be non-negative");
    if (raw.coupling >= raw.mode_freq)
        throw std::invalid_argument("model: coupling exceeds mode frequency (requires Delta < omega)");
    if (!(raw.inv_temp > 0.0))
        throw std::invalid_argument("model: inverse temperature must be positive");
    return raw;
}

inline TruncationPolicy validate_policy(const TruncationPolicy& raw) {
    if (!(raw.tail_tolerance > 0.0) || !(raw.tail_tolerance < 1.0))
        throw std::invalid_argument("model: tail tolerance must lie in (0,1)");
    if (raw.max_level_cap < 0)
        throw std::invalid_argument("model: level cap must be non-negative");
    return raw;
}

// ln g_N(n) with g_N(n) = C(N+n-1, n), the number of N-mode occupation
// vectors with total photon number n.
inline double log_degeneracy(int n_modes, int n) {
    return std::lgamma(double(n_modes) + n) - std::lgamma(double(n) + 1.0) -
           std::lgamma(double(n_modes));
}

// Z_N = (1 - e^{-gamma omega})^{-N}
inline double partition_function(const ModelParams& p) {
    const double one_minus_z = -std::expm1(-p.inv_temp * p.mode_freq);
    return std::pow(one_minus_z, -double(p.n_modes));
}

// Normalized thermal weight of total occupation n: g_N(n) e^{-gamma n omega} / Z_N.
// Evaluated in log space so large n and hot baths do not overflow.
inline double thermal_weight(const ModelParams& p, int n) {
    const double go = p.inv_temp * p.mode_freq;
    const double log_norm = double(p.n_modes) * std::log(-std::expm1(-go));
    return std::exp(log_degeneracy(p.n_modes, n) - go * double(n) + log_norm);
}

// Smallest n_max with sum_{n > n_max} g_N(n) e^{-gamma n omega} / Z_N <= tail_tolerance.
inline int truncation_level(const ModelParams& p, const TruncationPolicy& policy) {
    validate_policy(policy);
    // Neumaier-compensated cumulative sum; the tail test subtracts from 1.
    double sum = 0.0, comp = 0.0;
    for (int n = 0; n <= policy.max_level_cap; ++n) {
        const double w = thermal_weight(p, n);
        const double t = sum + w;
        comp += (std::abs(sum) >= std::abs(w)) ? (sum - t) + w : (w - t) + sum;
        sum = t;
        if (1.0 - (sum + comp) <= policy.tail_tolerance) return n;
    }
    throw TruncationCapError("model: truncation cap " + std::to_string(policy.max_level_cap) +
                             " exceeded before thermal tail reached tolerance");
}

} // namespace qo::model

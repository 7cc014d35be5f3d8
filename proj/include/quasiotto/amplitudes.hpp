// amplitudes.hpp — Closed-form per-excitation-sector solutions of the restricted
// transitions for a qubit coupled to N degenerate modes.
//
// A sector is labeled by the total photon number n_tot of its ground-branch root
// |0, n>.  The ground branch mixes |0, n> with the states |1, n - e_i>; the
// excited branch mixes |1, n> with |0, n + e_i>.  Only the survival amplitude
// and the total transfer weight enter the reduced map; per-mode amplitudes are
// kept in detail:: for cross-checks against the two-mode solution.

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "quasiotto/model.hpp"

namespace qo::amplitudes {

struct SectorFrequencies {
    double alpha;    // (2 n_tot - 1) omega
    double beta;     // 2 omega_0 + omega
    double eta;      // sqrt(beta^2 + 4 n_tot Delta^2)
    double alpha_p;  // (2 n_tot + 1) omega
    double beta_p;   // -beta
    double eta_p;    // sqrt(beta^2 + 4 (n_tot + N) Delta^2)
};

inline SectorFrequencies sector_frequencies(const model::ModelParams& p, int n_tot) {
    if (n_tot < 0) throw std::invalid_argument("amplitudes: n_tot must be non-negative");
    const double beta = 2.0 * p.qubit_freq + p.mode_freq;
    const double d2 = p.coupling * p.coupling;
    SectorFrequencies f;
    f.alpha = (2.0 * n_tot - 1.0) * p.mode_freq;
    f.alpha_p = (2.0 * n_tot + 1.0) * p.mode_freq;
    f.beta = beta;
    f.beta_p = -beta;
    f.eta = std::sqrt(beta * beta + 4.0 * n_tot * d2);
    f.eta_p = std::sqrt(beta * beta + 4.0 * (n_tot + p.n_modes) * d2);
    return f;
}

struct SectorAmplitudes {
    std::complex<double> a_coeff;  // A_t, ground-branch survival amplitude
    double b_norm_sq;              // sum_i |B_{i,t}|^2
    std::complex<double> c_coeff;  // C_t, excited-branch survival amplitude
    double d_norm_sq;              // sum_i |D_{i,t}|^2
};

namespace detail {

// e^{-i alpha t/2} (cos(eta t/2) - i (beta/eta) sin(eta t/2))
inline std::complex<double> survival(double alpha, double beta, double eta, double t) {
    const double h = 0.5 * eta * t;
    const std::complex<double> osc{std::cos(h), -(beta / eta) * std::sin(h)};
    return std::polar(1.0, -0.5 * alpha * t) * osc;
}

// 4 k Delta^2 sin^2(eta t/2) / eta^2 for k transferred quanta
inline double transfer_norm_sq(double delta, int k, double eta, double t) {
    const double s = std::sin(0.5 * eta * t) / eta;
    return 4.0 * k * delta * delta * s * s;
}

} // namespace detail

// Returns (A_t, sum_i |B_{i,t}|^2).
inline std::pair<std::complex<double>, double>
ground_sector_amplitudes(const model::ModelParams& p, int n_tot, double t) {
    const auto f = sector_frequencies(p, n_tot);
    return {detail::survival(f.alpha, f.beta, f.eta, t),
            detail::transfer_norm_sq(p.coupling, n_tot, f.eta, t)};
}

// Returns (C_t, sum_i |D_{i,t}|^2); the transfer weight carries n_tot + N quanta.
inline std::pair<std::complex<double>, double>
excited_sector_amplitudes(const model::ModelParams& p, int n_tot, double t) {
    const auto f = sector_frequencies(p, n_tot);
    return {detail::survival(f.alpha_p, f.beta_p, f.eta_p, t),
            detail::transfer_norm_sq(p.coupling, n_tot + p.n_modes, f.eta_p, t)};
}

inline SectorAmplitudes sector_amplitudes(const model::ModelParams& p, int n_tot, double t) {
    const auto [a, b] = ground_sector_amplitudes(p, n_tot, t);
    const auto [c, d] = excited_sector_amplitudes(p, n_tot, t);
    return {a, b, c, d};
}

namespace detail {

// Per-mode amplitudes, internal; occ is the root occupation vector.
// B_i = -2i Delta sqrt(n_i) e^{-i alpha t/2} sin(eta t/2)/eta
inline std::complex<double> mode_transfer_ground(const model::ModelParams& p,
                                                 const std::vector<int>& occ, int i, double t) {
    int n_tot = 0;
    for (int n : occ) n_tot += n;
    const auto f = sector_frequencies(p, n_tot);
    const std::complex<double> env =
        std::complex<double>{0.0, -2.0 * p.coupling * std::sqrt(double(occ[size_t(i)]))} *
        std::polar(1.0, -0.5 * f.alpha * t) * (std::sin(0.5 * f.eta * t) / f.eta);
    return env;
}

// D_i = -2i Delta sqrt(n_i + 1) e^{-i alpha' t/2} sin(eta' t/2)/eta'
inline std::complex<double> mode_transfer_excited(const model::ModelParams& p,
                                                  const std::vector<int>& occ, int i, double t) {
    int n_tot = 0;
    for (int n : occ) n_tot += n;
    const auto f = sector_frequencies(p, n_tot);
    return std::complex<double>{0.0, -2.0 * p.coupling * std::sqrt(double(occ[size_t(i)]) + 1.0)} *
           std::polar(1.0, -0.5 * f.alpha_p * t) * (std::sin(0.5 * f.eta_p * t) / f.eta_p);
}

} // namespace detail

} // namespace qo::amplitudes

// dynamical_map.hpp — Thermal-averaged dynamical map of the qubit: the
// coefficients (A_t, B_t, C_t), their analytic time derivatives, application to
// density matrices, and complete-positivity checks.
//
//   rho_00(t) = (1 - A_t) rho_00 + B_t rho_11
//   rho_11(t) = (1 - B_t) rho_11 + A_t rho_00
//   rho_01(t) = C_t rho_01,   rho_10(t) = conj(rho_01(t))
//
// A_t, B_t, C_t are Boltzmann averages over total-occupation sectors; B_t carries
// the (n_tot + N) transfer weight required by norm conservation of the excited
// branch.  C_t is the average of A_t^(n) conj(C_t^(n)); its net phase prefactor is
// e^{+i omega t} (the free qubit limit Delta -> 0 gives C_t = e^{-2i omega_0 t}).

#pragma once

#include <algorithm>
#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "quasiotto/amplitudes.hpp"
#include "quasiotto/model.hpp"
#include "quasiotto/pauli.hpp"

namespace qo::dynmap {

using Eigen::Matrix2cd;
using Eigen::Matrix4cd;
using complexd = std::complex<double>;

// ------------------------------- qubit states --------------------------------

inline Matrix2cd diag_state(double ground_pop) {
    Matrix2cd rho = Matrix2cd::Zero();
    rho(0, 0) = ground_pop;
    rho(1, 1) = 1.0 - ground_pop;
    return rho;
}

inline Matrix2cd ground_state() { return diag_state(1.0); }
inline Matrix2cd excited_state() { return diag_state(0.0); }
inline Matrix2cd maximally_mixed() { return diag_state(0.5); }

inline Matrix2cd plus_state() {
    Matrix2cd rho;
    rho << 0.5, 0.5, 0.5, 0.5;
    return rho;
}

inline void validate_qubit_state(const Matrix2cd& rho, double tol = 1e-12) {
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument("dynmap: state is not Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > tol || std::abs(rho.trace().imag()) > tol)
        throw std::invalid_argument("dynmap: state trace differs from 1");
    // Closed-form eigenvalues of the Hermitian 2x2
    const double m = 0.5 * rho.trace().real();
    const double half_gap = 0.5 * (rho(0, 0).real() - rho(1, 1).real());
    const double r = std::sqrt(half_gap * half_gap + std::norm(rho(0, 1)));
    if (m - r < -tol)
        throw std::invalid_argument("dynmap: state has a negative eigenvalue");
}

inline double bloch_z(const Matrix2cd& rho) { return (rho(0, 0) - rho(1, 1)).real(); }

inline double trace_distance(const Matrix2cd& a, const Matrix2cd& b) {
    const Matrix2cd d = a - b;
    const double m = 0.5 * d.trace().real();
    const double half_gap = 0.5 * (d(0, 0).real() - d(1, 1).real());
    const double r = std::sqrt(half_gap * half_gap + std::norm(d(0, 1)));
    return 0.5 * (std::abs(m + r) + std::abs(m - r));
}

// ------------------------------ map coefficients -----------------------------

struct MapCoefficients {
    double a_pop{0.0};       // A_t, ground -> excited transfer weight
    double b_pop{0.0};       // B_t, excited -> ground transfer weight
    complexd c_coh{1.0, 0.0};  // C_t, coherence multiplier
    double time{0.0};
};

inline Matrix2cd apply_map(const MapCoefficients& c, const Matrix2cd& rho) {
    validate_qubit_state(rho);
    const double p00 = rho(0, 0).real();
    const double p11 = rho(1, 1).real();
    const double transfer = c.b_pop * p11 - c.a_pop * p00;
    const double tr = p00 + p11;
    Matrix2cd out;
    out(0, 0) = p00 + transfer;
    out(1, 1) = tr - (p00 + transfer);  // keeps the trace bit-exact
    out(0, 1) = c.c_coh * rho(0, 1);
    out(1, 0) = std::conj(out(0, 1));
    return out;
}

inline Matrix4cd choi_matrix(const MapCoefficients& c) {
    Matrix4cd m = Matrix4cd::Zero();
    m(0, 0) = 1.0 - c.a_pop;
    m(1, 1) = c.a_pop;
    m(2, 2) = c.b_pop;
    m(3, 3) = 1.0 - c.b_pop;
    m(0, 3) = c.c_coh;
    m(3, 0) = std::conj(c.c_coh);
    return m;
}

// Minimum eigenvalue of the Choi matrix; the map is CP iff this is >= -1e-10.
inline double choi_margin(const MapCoefficients& c) {
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(choi_matrix(c), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// min(1 - A - B, |C|): positive where the time-local generator exists.
inline double invertibility_margin(const MapCoefficients& c) {
    return std::min(1.0 - c.a_pop - c.b_pop, std::abs(c.c_coh));
}

// -------------------------------- evaluator ----------------------------------

// Coefficients together with the analytic time derivatives needed downstream:
// first derivatives of A, B, C and the second derivative of C.
struct MapJet {
    MapCoefficients value;
    double da{0.0};
    double db{0.0};
    complexd dc{0.0};
    complexd d2c{0.0};
};

// Precomputes per-sector frequencies and normalized Boltzmann weights once, then
// evaluates coefficients (and derivatives) per time in O(n_max).  Evaluation is
// const and thread-safe; computed coefficients are memoized per time key.
class MapEvaluator {
  public:
    MapEvaluator(const model::ModelParams& params, const model::TruncationPolicy& policy)
        : params_(model::validate_params(params)), policy_(model::validate_policy(policy)) {
        n_max_ = model::truncation_level(params_, policy_);
        sectors_.resize(size_t(n_max_) + 1);
        for (int n = 0; n <= n_max_; ++n) {
            const auto f = amplitudes::sector_frequencies(params_, n);
            sectors_[size_t(n)] = {model::thermal_weight(params_, n), f.eta, f.eta_p};
        }
        beta_ = 2.0 * params_.qubit_freq + params_.mode_freq;
    }

    const model::ModelParams& params() const { return params_; }
    const model::TruncationPolicy& policy() const { return policy_; }
    int truncation_level() const { return n_max_; }

    MapCoefficients coefficients(double t) const {
        {
            std::lock_guard<std::mutex> lock(cache_mutex_);
            auto it = cache_.find(t);
            if (it != cache_.end()) return it->second;
        }
        const MapCoefficients c = jet(t).value;
        std::lock_guard<std::mutex> lock(cache_mutex_);
        cache_.emplace(t, c);
        return c;
    }

    MapJet jet(double t) const {
        if (t < 0.0) throw std::invalid_argument("dynmap: time must be non-negative");
        const double delta2 = params_.coupling * params_.coupling;
        const int n_modes = params_.n_modes;
        const double omega = params_.mode_freq;

        double a = 0.0, b = 0.0, da = 0.0, db = 0.0;
        complexd s{0.0}, ds{0.0}, d2s{0.0};
        for (int n = 0; n <= n_max_; ++n) {
            const auto& sec = sectors_[size_t(n)];
            const double w = sec.weight;

            // population transfers and their derivatives
            const double sa = std::sin(0.5 * sec.eta * t) / sec.eta;
            const double sb = std::sin(0.5 * sec.eta_p * t) / sec.eta_p;
            a += w * 4.0 * n * delta2 * sa * sa;
            b += w * 4.0 * (n + n_modes) * delta2 * sb * sb;
            da += w * 4.0 * n * delta2 * std::sin(sec.eta * t) / (2.0 * sec.eta);
            db += w * 4.0 * (n + n_modes) * delta2 * std::sin(sec.eta_p * t) / (2.0 * sec.eta_p);

            // coherence factor F_n conj-G_n and its first two derivatives
            const double hg = 0.5 * sec.eta, he = 0.5 * sec.eta_p;
            const complexd f{std::cos(hg * t), -(beta_ / sec.eta) * std::sin(hg * t)};
            const complexd g{std::cos(he * t), -(beta_ / sec.eta_p) * std::sin(he * t)};
            const complexd fd{-hg * std::sin(hg * t), -(0.5 * beta_) * std::cos(hg * t)};
            const complexd gd{-he * std::sin(he * t), -(0.5 * beta_) * std::cos(he * t)};
            const complexd fdd{-hg * hg * std::cos(hg * t), (0.5 * beta_ * hg) * std::sin(hg * t)};
            const complexd gdd{-he * he * std::cos(he * t), (0.5 * beta_ * he) * std::sin(he * t)};
            s += w * f * g;
            ds += w * (fd * g + f * gd);
            d2s += w * (fdd * g + 2.0 * fd * gd + f * gdd);
        }

        const complexd phase = std::polar(1.0, omega * t);
        const complexd iw{0.0, omega};
        MapJet out;
        out.value = {a, b, phase * s, t};
        out.da = da;
        out.db = db;
        out.dc = phase * (iw * s + ds);
        out.d2c = phase * (-omega * omega * s + 2.0 * iw * ds + d2s);
        return out;
    }

  private:
    struct Sector {
        double weight, eta, eta_p;
    };

    model::ModelParams params_;
    model::TruncationPolicy policy_;
    int n_max_{0};
    std::vector<Sector> sectors_;
    double beta_{0.0};
    mutable std::mutex cache_mutex_;
    mutable std::map<double, MapCoefficients> cache_;
};

// Convenience wrapper; prefer a MapEvaluator when querying many times.
inline MapCoefficients map_coefficients(const model::ModelParams& params,
                                        const model::TruncationPolicy& policy, double t) {
    return MapEvaluator(params, policy).coefficients(t);
}

} // namespace qo::dynmap

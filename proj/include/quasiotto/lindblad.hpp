// lindblad.hpp — Exact time-local generator of the dynamical map: closed-form
// rates from analytic coefficient derivatives, the generic L = Fdot F^{-1}
// transfer-matrix route, and a master-equation integrator for cross-validation.
//
// Master equation (sigma_minus = |1><0| lowers the qubit self-energy, so the
// gamma_d channel feeds the A_t transfer and gamma_a the B_t transfer; this is
// the normalization under which the generator reproduces the map):
//
//   drho/dt = i [rho, U(t) sigma_z]
//           + gamma_dep (sz rho sz - rho)
//           + gamma_d (sm rho sp - {sp sm, rho}/2)
//           + gamma_a (sp rho sm - {sm sp, rho}/2)
//
// Closed forms, with f = 1 - A - B:
//   U         = -Im(Cdot/C) / 2          (the removable form of the C_I/C_R ratio)
//   gamma_dep = [f'/f - 2 Re(Cdot/C)] / 4
//   gamma_d   =  (A - B)'/2 - ((A - B + 1)/2) f'/f
//   gamma_a   = -(A - B)'/2 + ((A - B - 1)/2) f'/f

#pragma once

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "quasiotto/dynamical_map.hpp"
#include "quasiotto/errors.hpp"
#include "quasiotto/integrate.hpp"
#include "quasiotto/pauli.hpp"

namespace qo::lindblad {

using Eigen::Matrix2cd;
using Eigen::Matrix4d;
using complexd = std::complex<double>;

struct LindbladRates {
    double u_eff{0.0};      // U(t), effective Hamiltonian coefficient of sigma_z
    double gamma_dep{0.0};  // dephasing rate
    double gamma_d{0.0};    // decay rate (|0> -> |1| transfer, the A_t channel)
    double gamma_a{0.0};    // absorption rate (|1> -> |0> transfer, the B_t channel)
    double time{0.0};
};

inline LindbladRates rates_from_jet(const dynmap::MapJet& jet, double singular_tol = 1e-12) {
    const auto& c = jet.value;
    const double f = 1.0 - c.a_pop - c.b_pop;
    if (f <= singular_tol)
        throw SingularMapError("lindblad: 1 - A - B vanished at t = " + std::to_string(c.time));
    if (std::abs(c.c_coh) <= singular_tol)
        throw SingularMapError("lindblad: |C| vanished at t = " + std::to_string(c.time));

    const double fdot_over_f = -(jet.da + jet.db) / f;
    const complexd cdot_over_c = jet.dc / c.c_coh;
    const double diff_half = 0.5 * (jet.da - jet.db);
    const double pop_gap = c.a_pop - c.b_pop;

    LindbladRates r;
    r.u_eff = -0.5 * cdot_over_c.imag();
    r.gamma_dep = 0.25 * (fdot_over_f - 2.0 * cdot_over_c.real());
    r.gamma_d = diff_half - 0.5 * (pop_gap + 1.0) * fdot_over_f;
    r.gamma_a = -diff_half + 0.5 * (pop_gap - 1.0) * fdot_over_f;
    r.time = c.time;
    return r;
}

inline LindbladRates rates_closed_form(const dynmap::MapEvaluator& evaluator, double t,
                                       double singular_tol = 1e-12) {
    return rates_from_jet(evaluator.jet(t), singular_tol);
}

inline LindbladRates rates_closed_form(const model::ModelParams& params,
                                       const model::TruncationPolicy& policy, double t) {
    return rates_closed_form(dynmap::MapEvaluator(params, policy), t);
}

// dU/dt, needed for the internal-work integrand of the bath strokes.
inline double u_eff_derivative(const dynmap::MapJet& jet) {
    const complexd r = jet.dc / jet.value.c_coh;
    const complexd r2 = jet.d2c / jet.value.c_coh;
    return -0.5 * (r2 - r * r).imag();
}

// ----------------------------- transfer matrix --------------------------------

// F_mn = Tr[G_m Omega[G_n]] in the basis {I, sx, sy, sz}/sqrt(2); F(0) = identity
// and the first row stays (1,0,0,0) by trace preservation.
using TransferMatrix = Matrix4d;

inline TransferMatrix transfer_matrix(const dynmap::MapCoefficients& c) {
    TransferMatrix f = TransferMatrix::Zero();
    f(0, 0) = 1.0;
    f(1, 1) = c.c_coh.real();
    f(1, 2) = c.c_coh.imag();
    f(2, 1) = -c.c_coh.imag();
    f(2, 2) = c.c_coh.real();
    f(3, 0) = c.b_pop - c.a_pop;
    f(3, 3) = 1.0 - c.a_pop - c.b_pop;
    return f;
}

inline TransferMatrix transfer_matrix_derivative(const dynmap::MapJet& jet) {
    TransferMatrix f = TransferMatrix::Zero();
    f(1, 1) = jet.dc.real();
    f(1, 2) = jet.dc.imag();
    f(2, 1) = -jet.dc.imag();
    f(2, 2) = jet.dc.real();
    f(3, 0) = jet.db - jet.da;
    f(3, 3) = -(jet.da + jet.db);
    return f;
}

// L = Fdot F^{-1}; throws when F is (numerically) singular.
inline Matrix4d generator_from_transfer(const TransferMatrix& f, const Matrix4d& fdot,
                                        double cond_bound = 1e12) {
    Eigen::JacobiSVD<Matrix4d> svd(f);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (!(smin > 0.0) || smax / smin > cond_bound)
        throw SingularMapError("lindblad: transfer matrix not invertible (cond > bound)");
    return fdot * f.inverse();
}

// Reads (U, gamma_dep, gamma_d, gamma_a) off a generator of the Eq.-(17) family.
inline LindbladRates decompose_generator(const Matrix4d& l, double t = 0.0) {
    LindbladRates r;
    r.u_eff = 0.25 * (l(2, 1) - l(1, 2));
    r.gamma_d = -0.5 * (l(3, 0) + l(3, 3));
    r.gamma_a = 0.5 * (l(3, 0) - l(3, 3));
    r.gamma_dep = -0.25 * (l(1, 1) + l(2, 2)) + 0.25 * l(3, 3);
    r.time = t;
    return r;
}

// --------------------------- master-equation route ----------------------------

struct IntegrationOptions {
    ode::Options ode;
    double singular_tol{1e-12};
};

inline Matrix2cd generator_action(const LindbladRates& r, const Matrix2cd& rho) {
    static const Matrix2cd sz = pauli::sigma_z();
    static const Matrix2cd sp = pauli::sigma_plus();
    static const Matrix2cd sm = pauli::sigma_minus();
    const complexd iu(0.0, r.u_eff);
    Matrix2cd out = iu * (rho * sz - sz * rho);
    out += r.gamma_dep * (sz * rho * sz - rho);
    out += r.gamma_d * (sm * rho * sp - 0.5 * (sp * sm * rho + rho * sp * sm));
    out += r.gamma_a * (sp * rho * sm - 0.5 * (sm * sp * rho + rho * sm * sp));
    return out;
}

// Solves the master equation on an ascending grid starting at 0; returns the
// state at every grid point (the first entry is rho0 itself).
inline std::vector<Matrix2cd> integrate_master_equation(const dynmap::MapEvaluator& evaluator,
                                                        const Matrix2cd& rho0,
                                                        const std::vector<double>& t_grid,
                                                        const IntegrationOptions& opt = {}) {
    dynmap::validate_qubit_state(rho0);
    if (t_grid.empty() || t_grid.front() != 0.0)
        throw std::invalid_argument("lindblad: time grid must start at 0");
    for (size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw std::invalid_argument("lindblad: time grid must be ascending");

    auto rhs = [&](const Matrix2cd& rho, double t) {
        return generator_action(rates_closed_form(evaluator, t, opt.singular_tol), rho);
    };

    std::vector<Matrix2cd> out;
    out.reserve(t_grid.size());
    out.push_back(rho0);
    Matrix2cd rho = rho0;
    for (size_t i = 1; i < t_grid.size(); ++i) {
        rho = ode::integrate_adaptive(rhs, rho, t_grid[i - 1], t_grid[i], opt.ode);
        out.push_back(rho);
    }
    return out;
}

inline std::vector<Matrix2cd> integrate_master_equation(const model::ModelParams& params,
                                                        const Matrix2cd& rho0,
                                                        const std::vector<double>& t_grid,
                                                        const model::TruncationPolicy& policy = {},
                                                        const IntegrationOptions& opt = {}) {
    return integrate_master_equation(dynmap::MapEvaluator(params, policy), rho0, t_grid, opt);
}

// Scans [t0, t1] for sign changes of 1 - A - B and returns bracketing intervals.
// Non-invertibility points are physical features of non-Markovian generators;
// they are reported, not repaired.
inline std::vector<std::pair<double, double>>
find_singularities(const dynmap::MapEvaluator& evaluator, double t0, double t1, int n_scan = 2000) {
    std::vector<std::pair<double, double>> brackets;
    double prev_t = t0;
    double prev_f = 1.0 - evaluator.coefficients(t0).a_pop - evaluator.coefficients(t0).b_pop;
    for (int i = 1; i <= n_scan; ++i) {
        const double t = t0 + (t1 - t0) * double(i) / double(n_scan);
        const auto c = evaluator.coefficients(t);
        const double f = 1.0 - c.a_pop - c.b_pop;
        if ((prev_f > 0.0) != (f > 0.0)) brackets.emplace_back(prev_t, t);
        prev_t = t;
        prev_f = f;
    }
    return brackets;
}

} // namespace qo::lindblad

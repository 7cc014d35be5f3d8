// engine.hpp — The four-stroke quasi-Otto cycle: stroke energetics, heat/work
// split under the effective Hamiltonian, single- and multi-run efficiencies,
// regime predicates, and the fixed-point asymptotics.
//
// Bath contacts drive the ground population to its long-time averaged target
//   y = (1 - A_bar) x + chi (1 - x),
// so one full cycle is the affine update x -> a x + b with
//   a = (1 - A_bar_h - chi_h)(1 - A_bar_c - chi_c),
//   b = chi_c + (1 - A_bar_c - chi_c) chi_h,
// converging geometrically to x* = b/(1-a).  Efficiencies use total energy
// exchanges: E_qO(r) = 1 - (w_c/w_h) |sum_i (y_i - x_{i+1}) / sum_i (y_i - x_i)|.

#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "quasiotto/dynamical_map.hpp"
#include "quasiotto/equilibrium.hpp"
#include "quasiotto/lindblad.hpp"
#include "quasiotto/model.hpp"
#include "quasiotto/quadrature.hpp"

namespace qo::engine {

struct CycleSpec {
    model::ModelParams bath_c;  // cold contact: qubit_freq = mode_freq = omega_c, inv_temp = gamma_c
    model::ModelParams bath_h;  // hot contact:  qubit_freq = mode_freq = omega_h, inv_temp = gamma_h
    double x1{0.9};             // initial ground population

    double omega_c() const { return bath_c.mode_freq; }
    double omega_h() const { return bath_h.mode_freq; }
    double gamma_c() const { return bath_c.inv_temp; }
    double gamma_h() const { return bath_h.inv_temp; }
    double tau() const { return gamma_h() * omega_h() / (gamma_c() * omega_c()); }
};

// Both contacts share N and (by default) Delta; pass distinct couplings to model
// devices where the two resonances see different interaction strengths.
inline CycleSpec make_cycle_spec(double omega_c, double omega_h, double gamma_c, double gamma_h,
                                 int n_modes, double coupling, double x1,
                                 std::optional<double> coupling_c = std::nullopt,
                                 std::optional<double> coupling_h = std::nullopt) {
    if (!(omega_c < omega_h))
        throw std::invalid_argument("engine: need omega_c < omega_h");
    if (!(gamma_h < gamma_c))
        throw std::invalid_argument("engine: need gamma_h < gamma_c (hot bath hotter)");
    if (x1 < 0.0 || x1 > 1.0)
        throw std::invalid_argument("engine: x1 must lie in [0,1]");
    CycleSpec s;
    s.bath_c = model::validate_params(
        {n_modes, omega_c, omega_c, coupling_c.value_or(coupling), gamma_c});
    s.bath_h = model::validate_params(
        {n_modes, omega_h, omega_h, coupling_h.value_or(coupling), gamma_h});
    s.x1 = x1;
    return s;
}

inline double otto_efficiency(const CycleSpec& s) { return 1.0 - s.omega_c() / s.omega_h(); }
inline double carnot_efficiency(const CycleSpec& s) { return 1.0 - s.gamma_h() / s.gamma_c(); }

// E_qO = 1 - (omega_c/omega_h) |(y1 - x2)/(y1 - x1)|; undefined when y1 = x1.
inline double quasi_otto_efficiency(double x1, double y1, double x2, double omega_c,
                                    double omega_h, double degenerate_tol = 1e-14) {
    if (std::abs(y1 - x1) <= degenerate_tol)
        throw std::domain_error("engine: degenerate cycle (y1 = x1)");
    return 1.0 - (omega_c / omega_h) * std::abs((y1 - x2) / (y1 - x1));
}

// W = (omega_from - omega_to)(2x - 1): work done by the unitary stroke that
// shifts the qubit frequency at frozen populations.
inline double unitary_stroke_work(double x, double omega_from, double omega_to) {
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("engine: population must lie in [0,1]");
    return (omega_from - omega_to) * (2.0 * x - 1.0);
}

// y = (1 - A_bar) x + chi (1 - x), the long-time averaged state of a contact.
inline double bath_stroke_target(double x, double a_bar, double chi) {
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("engine: population must lie in [0,1]");
    if (a_bar < 0.0 || a_bar > 1.0 || chi < 0.0 || chi > 1.0)
        throw std::invalid_argument("engine: averaged coefficients must lie in [0,1]");
    return (1.0 - a_bar) * x + chi * (1.0 - x);
}

struct RegimeFlags {
    bool physical_engine{false};       // tau <= |(y1-x2)/(y1-x1)|  (Carnot bound holds)
    bool beats_otto{false};            // additionally |(y1-x2)/(y1-x1)| <= 1
    bool carnot_converged_case{false}; // omega_c/omega_h = gamma_h/gamma_c and x2 <= x1
};

struct BathAverages {
    double a_bar{0.0};
    double chi{0.0};
};

inline BathAverages bath_averages(const model::ModelParams& bath,
                                  const model::TruncationPolicy& policy,
                                  equilibrium::Method method = equilibrium::Method::closed_form) {
    const auto avg = equilibrium::averaged_coefficients(bath, policy, method);
    return {avg.a_bar, avg.chi};
}

inline RegimeFlags regime_predicates(const CycleSpec& s, const BathAverages& hot,
                                     const BathAverages& cold, double tol = 1e-12) {
    if (s.x1 == 1.0)
        throw std::domain_error("engine: x1 = 1 makes x1/(1-x1) undefined (boundary case)");
    const double y1 = bath_stroke_target(s.x1, hot.a_bar, hot.chi);
    const double x2 = bath_stroke_target(y1, cold.a_bar, cold.chi);
    RegimeFlags flags;
    if (std::abs(y1 - s.x1) > tol) {
        const double ratio = std::abs((y1 - x2) / (y1 - s.x1));
        flags.physical_engine = s.tau() <= ratio + tol;
        flags.beats_otto = flags.physical_engine && ratio <= 1.0 + tol;
    }
    // Carnot-converged special case: the heat-engine condition reduces to the
    // ratio inequality on x1/(1-x1), equivalent to x2 <= x1.
    if (std::abs(s.omega_c() / s.omega_h() - s.gamma_h() / s.gamma_c()) <= tol) {
        const double rb = hot.chi * (1.0 - cold.a_bar) + cold.chi * (1.0 - hot.chi);
        const double ra = hot.a_bar * (1.0 - cold.chi) + cold.a_bar * (1.0 - hot.a_bar);
        flags.carnot_converged_case = s.x1 / (1.0 - s.x1) >= rb / ra;
    }
    return flags;
}

// x1 intervals on which the cycle is a physical engine at least as efficient as
// the ideal Otto engine, located by predicate scan plus bisection refinement.
inline std::vector<std::pair<double, double>>
beats_otto_band(const CycleSpec& s, const BathAverages& hot, const BathAverages& cold,
                int scan_points = 4000) {
    auto beats = [&](double x1) {
        CycleSpec probe = s;
        probe.x1 = x1;
        return regime_predicates(probe, hot, cold).beats_otto;
    };
    auto refine = [&](double lo, double hi, bool want_entering) {
        for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (beats(mid) == want_entering)
                hi = mid;
            else
                lo = mid;
        }
        return 0.5 * (lo + hi);
    };
    std::vector<std::pair<double, double>> bands;
    const double eps = 1e-9;
    double prev_x = eps;
    bool prev = beats(prev_x);
    double open = prev ? prev_x : -1.0;
    for (int i = 1; i <= scan_points; ++i) {
        const double x = eps + (1.0 - 2.0 * eps) * double(i) / double(scan_points);
        const bool cur = beats(x);
        if (cur && !prev) open = refine(prev_x, x, true);
        if (!cur && prev && open >= 0.0) {
            bands.emplace_back(open, refine(prev_x, x, false));
            open = -1.0;
        }
        prev = cur;
        prev_x = x;
    }
    if (open >= 0.0) bands.emplace_back(open, 1.0 - eps);
    return bands;
}

struct HeatWorkSplit {
    double q{0.0};      // -int U(t) Tr[sigma_z rho_dot] dt
    double w_int{0.0};  // -int U_dot(t) Tr[sigma_z rho] dt
    double dE{0.0};     // U(0) s(0) - U(t_end) s(t_end), energy released
};

// First-law diagnostic over one bath contact window [0, t_end]: the energy
// change under the effective Hamiltonian U(t) sigma_z splits into heat and
// internal work; q + w_int = dE within quadrature tolerance.
inline HeatWorkSplit heat_work_split(const dynmap::MapEvaluator& evaluator,
                                     const Eigen::Matrix2cd& rho_start, double t_end,
                                     double tol = 1e-9) {
    dynmap::validate_qubit_state(rho_start);
    if (!(t_end > 0.0)) throw std::invalid_argument("engine: t_end must be positive");
    const double s0 = dynmap::bloch_z(rho_start);

    auto state_z = [&](const dynmap::MapJet& jet) {
        const double f = 1.0 - jet.value.a_pop - jet.value.b_pop;
        const double g = jet.value.b_pop - jet.value.a_pop;
        return f * s0 + g;
    };
    auto heat_integrand = [&](double t) {
        const auto jet = evaluator.jet(t);
        const auto rates = lindblad::rates_from_jet(jet);  // throws inside a singular window
        const double sdot = -(jet.da + jet.db) * s0 + (jet.db - jet.da);
        return rates.u_eff * sdot;
    };
    auto work_integrand = [&](double t) {
        const auto jet = evaluator.jet(t);
        lindblad::rates_from_jet(jet);
        return lindblad::u_eff_derivative(jet) * state_z(jet);
    };

    HeatWorkSplit out;
    out.q = -quad::adaptive_simpson(heat_integrand, 0.0, t_end, tol);
    out.w_int = -quad::adaptive_simpson(work_integrand, 0.0, t_end, tol);
    const auto jet0 = evaluator.jet(0.0);
    const auto jet1 = evaluator.jet(t_end);
    out.dE = lindblad::rates_from_jet(jet0).u_eff * state_z(jet0) -
             lindblad::rates_from_jet(jet1).u_eff * state_z(jet1);
    return out;
}

struct CycleResult {
    std::vector<double> x_seq;  // x_1 .. x_{r+1}
    std::vector<double> y_seq;  // y_1 .. y_r
    double w1{0.0}, w2{0.0};    // unitary stroke works of the first cycle
    double dE_h{0.0}, dE_c{0.0};
    double eff_single{0.0};
    std::vector<double> eff_cumulative;  // E_qO(i), i = 1..r
    double eff_otto{0.0}, eff_carnot{0.0};
    RegimeFlags flags;
    double fixed_point{0.0};      // x* of the composed affine update
    double convergence_gap{0.0};  // |E_qO(r) - E_otto|
};

inline CycleResult multi_cycle(const CycleSpec& s, const model::TruncationPolicy& policy,
                               long runs, double degenerate_tol = 1e-14) {
    if (runs < 1) throw std::invalid_argument("engine: need at least one run");
    const BathAverages hot = bath_averages(s.bath_h, policy);
    const BathAverages cold = bath_averages(s.bath_c, policy);

    CycleResult res;
    res.eff_otto = otto_efficiency(s);
    res.eff_carnot = carnot_efficiency(s);
    res.flags = regime_predicates(s, hot, cold);

    const double affine_a = (1.0 - hot.a_bar - hot.chi) * (1.0 - cold.a_bar - cold.chi);
    const double affine_b = cold.chi + (1.0 - cold.a_bar - cold.chi) * hot.chi;
    res.fixed_point = affine_b / (1.0 - affine_a);

    res.x_seq.reserve(size_t(runs) + 1);
    res.y_seq.reserve(size_t(runs));
    res.eff_cumulative.reserve(size_t(runs));
    res.x_seq.push_back(s.x1);

    const double freq_ratio = s.omega_c() / s.omega_h();
    double num = 0.0, den = 0.0;
    double x = s.x1;
    for (long i = 0; i < runs; ++i) {
        const double y = bath_stroke_target(x, hot.a_bar, hot.chi);
        if (std::abs(y - x) <= degenerate_tol)
            throw std::domain_error("engine: degenerate cycle (y = x) at run " +
                                    std::to_string(i + 1));
        const double x_next = bath_stroke_target(y, cold.a_bar, cold.chi);
        res.y_seq.push_back(y);
        res.x_seq.push_back(x_next);
        num += y - x_next;
        den += y - x;
        res.eff_cumulative.push_back(1.0 - freq_ratio * std::abs(num / den));
        if (i == 0) {
            res.w1 = unitary_stroke_work(x, s.omega_c(), s.omega_h());
            res.w2 = unitary_stroke_work(y, s.omega_h(), s.omega_c());
            res.dE_h = 2.0 * s.omega_h() * (y - x);
            res.dE_c = 2.0 * s.omega_c() * (y - x_next);
        }
        x = x_next;
    }
    res.eff_single = res.eff_cumulative.front();
    res.convergence_gap = std::abs(res.eff_cumulative.back() - res.eff_otto);
    return res;
}

inline CycleResult single_cycle(const CycleSpec& s, const model::TruncationPolicy& policy) {
    return multi_cycle(s, policy, 1);
}

} // namespace qo::engine

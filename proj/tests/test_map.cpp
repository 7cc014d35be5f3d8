#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "quasiotto/amplitudes.hpp"
#include "quasiotto/dynamical_map.hpp"
#include "quasiotto/oracle.hpp"

using namespace qo;
using dynmap::MapCoefficients;
using Eigen::Matrix2cd;
using complexd = std::complex<double>;

namespace {
const model::TruncationPolicy kPolicy{1e-12, 10000};
}

TEST_SUITE_BEGIN("map");

TEST_CASE("identity at t = 0 and free evolution at Delta = 0") {
    const dynmap::MapEvaluator ev({1, 1.0, 1.0, 0.1, 1.0}, kPolicy);
    const auto c0 = ev.coefficients(0.0);
    CHECK(c0.a_pop == 0.0);
    CHECK(c0.b_pop == 0.0);
    CHECK(std::abs(c0.c_coh - 1.0) <= 1e-12);

    const dynmap::MapEvaluator free({2, 1.3, 0.9, 0.0, 0.7}, kPolicy);
    for (double t : {0.5, 4.0, 17.0}) {
        const auto c = free.coefficients(t);
        CHECK(c.a_pop == 0.0);
        CHECK(c.b_pop == 0.0);
        CHECK(std::abs(std::abs(c.c_coh) - 1.0) <= 1e-12);
        // free qubit coherence rotates at -2 omega_0
        CHECK(std::abs(c.c_coh - std::polar(1.0, -2.0 * free.params().qubit_freq * t)) <= 1e-11);
    }
}

TEST_CASE("cold-bath limit keeps only the vacuum Rabi term") {
    const model::ModelParams p{1, 1.0, 1.0, 0.2, 50.0};
    const dynmap::MapEvaluator ev(p, kPolicy);
    const auto f0 = amplitudes::sector_frequencies(p, 0);
    for (double t : {0.9, 2.7, 6.0}) {
        const auto c = ev.coefficients(t);
        const double s = std::sin(0.5 * f0.eta_p * t) / f0.eta_p;
        CHECK(std::abs(c.a_pop) <= 1e-20);
        CHECK(c.b_pop == doctest::Approx(4.0 * p.coupling * p.coupling * s * s).epsilon(1e-12));
    }
}

TEST_CASE("apply_map worked examples") {
    const Matrix2cd rho = dynmap::ground_state();
    const Matrix2cd same = dynmap::apply_map({0.0, 0.0, {1.0, 0.0}, 0.0}, dynmap::plus_state());
    CHECK((same - dynmap::plus_state()).cwiseAbs().maxCoeff() == 0.0);

    const Matrix2cd moved = dynmap::apply_map({0.2, 0.1, {0.0, 0.0}, 0.0}, rho);
    CHECK(moved(0, 0).real() == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(moved(1, 1).real() == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(std::abs(moved(0, 1)) == 0.0);

    const Matrix2cd mixed = dynmap::apply_map({0.37, 0.37, {0.5, 0.1}, 0.0},
                                              dynmap::maximally_mixed());
    CHECK((mixed - dynmap::maximally_mixed()).cwiseAbs().maxCoeff() <= 1e-16);
}

TEST_CASE("apply_map rejects invalid states") {
    Matrix2cd bad = dynmap::ground_state();
    bad(0, 0) = 1.4;  // trace != 1
    CHECK_THROWS_AS(dynmap::apply_map({0.1, 0.1, {0.5, 0.0}, 0.0}, bad), std::invalid_argument);
    Matrix2cd neg = Matrix2cd::Zero();
    neg(0, 0) = 1.4;
    neg(1, 1) = -0.4;
    CHECK_THROWS_AS(dynmap::apply_map({0.1, 0.1, {0.5, 0.0}, 0.0}, neg), std::invalid_argument);
}

TEST_CASE("choi margin closed cases") {
    CHECK(dynmap::choi_margin({0.0, 0.0, {1.0, 0.0}, 0.0}) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(dynmap::choi_margin({0.0, 0.0, {1.1, 0.0}, 0.0}) < -0.04);
}

TEST_CASE("trace is preserved bit-exactly and hermiticity by construction") {
    const dynmap::MapEvaluator ev({1, 1.0, 1.0, 0.3, 1.0}, kPolicy);
    std::vector<Matrix2cd> states = {dynmap::ground_state(), dynmap::excited_state(),
                                     dynmap::plus_state(), dynmap::diag_state(0.7)};
    Matrix2cd tilted;
    tilted << 0.6, complexd(0.2, -0.3), complexd(0.2, 0.3), 0.4;
    states.push_back(tilted);
    for (double t : {0.0, 0.4, 1.7, 6.3, 14.0}) {
        const auto c = ev.coefficients(t);
        for (const auto& rho : states) {
            const Matrix2cd out = dynmap::apply_map(c, rho);
            CHECK(out.trace().real() == rho.trace().real());
            CHECK(out.trace().imag() == 0.0);
            CHECK((out - out.adjoint()).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("single-mode coefficients equal the sector-amplitude Boltzmann sum") {
    const model::ModelParams p{1, 1.0, 1.0, 0.25, 1.0};
    const dynmap::MapEvaluator ev(p, kPolicy);
    const int n_max = ev.truncation_level();
    for (double t : {0.8, 3.2, 9.5}) {
        double a = 0.0, b = 0.0;
        complexd coh = 0.0;
        for (int n = 0; n <= n_max; ++n) {
            const double w = model::thermal_weight(p, n);
            const auto s = amplitudes::sector_amplitudes(p, n, t);
            a += w * s.b_norm_sq;
            b += w * s.d_norm_sq;
            coh += w * s.a_coeff * std::conj(s.c_coeff);
        }
        const auto c = ev.coefficients(t);
        CHECK(c.a_pop == doctest::Approx(a).epsilon(1e-14));
        CHECK(c.b_pop == doctest::Approx(b).epsilon(1e-14));
        CHECK(std::abs(c.c_coh - coh) <= 1e-14);
    }
}

TEST_CASE("two-mode coefficients equal the explicit double sum over occupations") {
    const model::ModelParams p{2, 1.0, 1.0, 0.3, 1.0};
    const dynmap::MapEvaluator ev(p, kPolicy);
    const int n_max = ev.truncation_level();
    const double go = p.inv_temp * p.mode_freq;
    const double norm = std::pow(-std::expm1(-go), 2);
    for (double t : {0.9, 4.1}) {
        double a = 0.0, b = 0.0;
        complexd coh = 0.0;
        for (int n1 = 0; n1 <= n_max; ++n1) {
            for (int n2 = 0; n1 + n2 <= n_max; ++n2) {
                const std::vector<int> occ{n1, n2};
                const double w = norm * std::exp(-go * (n1 + n2));
                const auto b1 = amplitudes::detail::mode_transfer_ground(p, occ, 0, t);
                const auto b2 = amplitudes::detail::mode_transfer_ground(p, occ, 1, t);
                const auto d1 = amplitudes::detail::mode_transfer_excited(p, occ, 0, t);
                const auto d2 = amplitudes::detail::mode_transfer_excited(p, occ, 1, t);
                const auto s = amplitudes::sector_amplitudes(p, n1 + n2, t);
                a += w * (std::norm(b1) + std::norm(b2));
                b += w * (std::norm(d1) + std::norm(d2));
                coh += w * s.a_coeff * std::conj(s.c_coeff);
            }
        }
        const auto c = ev.coefficients(t);
        CHECK(std::abs(c.a_pop - a) <= 1e-10);
        CHECK(std::abs(c.b_pop - b) <= 1e-10);
        CHECK(std::abs(c.c_coh - coh) <= 1e-10);
    }
}

TEST_CASE("complete positivity over a small parameter grid") {
    for (int n_modes : {1, 2}) {
        for (double delta : {0.1, 0.5, 0.85}) {
            for (double go : {0.5, 2.0}) {
                const dynmap::MapEvaluator ev({n_modes, 1.0, 1.0, delta, go}, kPolicy);
                for (int i = 0; i <= 20; ++i) {
                    const auto c = ev.coefficients(0.35 * i);
                    CHECK(c.a_pop >= 0.0);
                    CHECK(c.a_pop <= 1.0);
                    CHECK(c.b_pop >= 0.0);
                    CHECK(c.b_pop <= 1.0);
                    CHECK(dynmap::choi_margin(c) >= -1e-10);
                }
            }
        }
    }
}

TEST_CASE("analytic map matches the exact-diagonalization oracle at a spot") {
    const model::ModelParams p{1, 1.0, 1.0, 0.1, 1.0};
    const dynmap::MapEvaluator ev(p, kPolicy);
    const oracle::Propagator prop =
        oracle::Propagator::from_policy(p, kPolicy, oracle::Variant::full);
    const auto a = ev.coefficients(5.0);
    const auto o = prop.reference_coefficients(5.0);
    CHECK(std::abs(a.a_pop - o.a_pop) <= 1e-8);
    CHECK(std::abs(a.b_pop - o.b_pop) <= 1e-8);
    CHECK(std::abs(a.c_coh - o.c_coh) <= 1e-8);
}

TEST_CASE("coefficient cache returns identical values") {
    const dynmap::MapEvaluator ev({1, 1.0, 1.0, 0.2, 1.0}, kPolicy);
    const auto first = ev.coefficients(2.5);
    const auto second = ev.coefficients(2.5);
    CHECK(first.a_pop == second.a_pop);
    CHECK(first.c_coh == second.c_coh);
}

TEST_SUITE_END();

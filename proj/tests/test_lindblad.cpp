#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "quasiotto/dynamical_map.hpp"
#include "quasiotto/lindblad.hpp"
#include "test_support.hpp"

using namespace qo;
using Eigen::Matrix2cd;
using Eigen::Matrix4d;

namespace {
const model::TruncationPolicy kPolicy{1e-12, 10000};

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out[size_t(i)] = a + (b - a) * double(i) / double(n - 1);
    return out;
}
}  // namespace

TEST_SUITE_BEGIN("lindblad");

TEST_CASE("decoupled evolution has vanishing rates and the bare level splitting") {
    const dynmap::MapEvaluator ev({1, 1.4, 0.9, 0.0, 1.0}, kPolicy);
    for (double t : {0.5, 3.0, 12.0}) {
        const auto r = lindblad::rates_closed_form(ev, t);
        CHECK(r.gamma_d == 0.0);
        CHECK(r.gamma_a == 0.0);
        CHECK(std::abs(r.gamma_dep) <= 1e-13);
        CHECK(r.u_eff == doctest::Approx(1.4).epsilon(1e-12));
    }
}

TEST_CASE("rates tend to zero as t -> 0+ and are defined at t = 0") {
    const dynmap::MapEvaluator ev({1, 1.0, 1.0, 0.2, 1.0}, kPolicy);
    const auto r0 = lindblad::rates_closed_form(ev, 0.0);
    CHECK(std::abs(r0.gamma_d) <= 1e-12);
    CHECK(std::abs(r0.gamma_a) <= 1e-12);
    CHECK(std::abs(r0.gamma_dep) <= 1e-12);
    CHECK(r0.u_eff == doctest::Approx(1.0).epsilon(1e-10));
    const auto r_small = lindblad::rates_closed_form(ev, 1e-5);
    CHECK(std::abs(r_small.gamma_d) <= 1e-4);
    CHECK(std::abs(r_small.gamma_a) <= 1e-4);
    CHECK(std::abs(r_small.gamma_dep) <= 1e-4);
}

namespace {

// Test-local extended-precision evaluation of the single-mode coefficient series,
// so the finite-difference oracle is not limited by double rounding (gamma_dep
// at the probe time is ~1e-6 and needs better than 1e-22 absolute in the logs).
struct LongCoefficients {
    long double f;        // 1 - A - B
    long double gap;      // A - B
    long double c_re, c_im;
};

LongCoefficients series_long(const qo::model::ModelParams& p, int n_max, long double t) {
    const long double w0 = p.qubit_freq, w = p.mode_freq, d = p.coupling, g = p.inv_temp;
    const long double beta = 2.0L * w0 + w;
    const long double z = std::exp(-g * w);
    long double a = 0.0L, b = 0.0L, s_re = 0.0L, s_im = 0.0L;
    for (int n = 0; n <= n_max; ++n) {
        const long double weight = (1.0L - z) * std::pow(z, (long double)n);
        const long double eta = std::sqrt(beta * beta + 4.0L * n * d * d);
        const long double etp = std::sqrt(beta * beta + 4.0L * (n + 1) * d * d);
        const long double sa = std::sin(0.5L * eta * t) / eta;
        const long double sb = std::sin(0.5L * etp * t) / etp;
        a += weight * 4.0L * n * d * d * sa * sa;
        b += weight * 4.0L * (n + 1) * d * d * sb * sb;
        const long double fr = std::cos(0.5L * eta * t), fi = -(beta / eta) * std::sin(0.5L * eta * t);
        const long double gr = std::cos(0.5L * etp * t), gi = -(beta / etp) * std::sin(0.5L * etp * t);
        s_re += weight * (fr * gr - fi * gi);
        s_im += weight * (fr * gi + fi * gr);
    }
    const long double pr = std::cos(w * t), pi = std::sin(w * t);
    return {1.0L - a - b, a - b, pr * s_re - pi * s_im, pr * s_im + pi * s_re};
}

} // namespace

TEST_CASE("closed-form rates match finite differences of the same formulas") {
    // Oracle: central differences (step 1e-5) applied to the coefficient logs,
    // using only coefficient values, never the analytic derivative path.
    const model::ModelParams p{1, 1.0, 1.0, 0.1, 1.0};
    const dynmap::MapEvaluator ev(p, kPolicy);
    const int n_max = ev.truncation_level();
    const long double t = 2.0L, h = 1e-5L;

    const auto cm = series_long(p, n_max, t - h);
    const auto cp = series_long(p, n_max, t + h);
    const auto c = series_long(p, n_max, t);

    auto norm2 = [](const LongCoefficients& x) { return x.c_re * x.c_re + x.c_im * x.c_im; };
    const long double dlogf = (std::log(cp.f) - std::log(cm.f)) / (2.0L * h);
    const long double dgap = (cp.gap - cm.gap) / (2.0L * h);

    const double gamma_d_fd = double(0.5L * dgap - 0.5L * (c.gap + 1.0L) * dlogf);
    const double gamma_a_fd = double(-0.5L * dgap + 0.5L * (c.gap - 1.0L) * dlogf);
    const double gamma_dep_fd = double(
        0.25L * (std::log(cp.f / norm2(cp)) - std::log(cm.f / norm2(cm))) / (2.0L * h));
    // literal ratio form of U
    auto log_ratio = [](const LongCoefficients& x) {
        const long double r = x.c_re / x.c_im;
        return std::log1p(r * r);
    };
    const double u_fd = double(0.25L * (c.c_im / c.c_re) * (log_ratio(cp) - log_ratio(cm)) /
                               (2.0L * h));

    const auto r = lindblad::rates_closed_form(ev, 2.0);
    CHECK(test_support::rel_err(r.gamma_d, gamma_d_fd) <= 1e-6);
    CHECK(test_support::rel_err(r.gamma_a, gamma_a_fd) <= 1e-6);
    CHECK(test_support::rel_err(r.gamma_dep, gamma_dep_fd) <= 1e-6);
    CHECK(test_support::rel_err(r.u_eff, u_fd) <= 1e-6);
}

TEST_CASE("singular maps are reported, not evaluated") {
    dynmap::MapJet jet;
    jet.value = {0.6, 0.5, {0.3, 0.0}, 1.0};  // 1 - A - B < 0
    CHECK_THROWS_AS(lindblad::rates_from_jet(jet), SingularMapError);
    jet.value = {0.1, 0.1, {0.0, 0.0}, 1.0};  // C = 0
    CHECK_THROWS_AS(lindblad::rates_from_jet(jet), SingularMapError);
}

TEST_CASE("transfer-matrix route: identity, singular, and cross-route agreement") {
    CHECK(lindblad::generator_from_transfer(Matrix4d::Identity(), Matrix4d::Zero())
              .cwiseAbs()
              .maxCoeff() == 0.0);

    Matrix4d singular = Matrix4d::Identity();
    singular(1, 1) = 0.0;
    singular(2, 2) = 0.0;  // a C = 0 transfer matrix
    CHECK_THROWS_AS(lindblad::generator_from_transfer(singular, Matrix4d::Zero()),
                    SingularMapError);

    const dynmap::MapEvaluator ev({1, 1.0, 1.0, 0.1, 1.0}, kPolicy);
    for (double t : {0.5, 2.0, 7.5}) {
        const auto jet = ev.jet(t);
        const auto f = lindblad::transfer_matrix(jet.value);
        const auto fdot = lindblad::transfer_matrix_derivative(jet);
        const auto decomposed =
            lindblad::decompose_generator(lindblad::generator_from_transfer(f, fdot), t);
        const auto direct = lindblad::rates_closed_form(ev, t);
        CHECK(std::abs(decomposed.u_eff - direct.u_eff) <= 1e-6);
        CHECK(std::abs(decomposed.gamma_dep - direct.gamma_dep) <= 1e-6);
        CHECK(std::abs(decomposed.gamma_d - direct.gamma_d) <= 1e-6);
        CHECK(std::abs(decomposed.gamma_a - direct.gamma_a) <= 1e-6);
    }
}

TEST_CASE("transfer matrix has the trace-preserving first row and F(0) = identity") {
    const dynmap::MapEvaluator ev({2, 1.0, 1.0, 0.3, 1.0}, kPolicy);
    const auto f0 = lindblad::transfer_matrix(ev.coefficients(0.0));
    CHECK((f0 - Matrix4d::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
    const auto f = lindblad::transfer_matrix(ev.coefficients(3.0));
    CHECK(f(0, 0) == 1.0);
    CHECK(f.row(0).tail(3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a zero generator freezes the state") {
    const lindblad::LindbladRates zero{0.0, 0.0, 0.0, 0.0, 0.0};
    auto rhs = [&](const Matrix2cd& rho, double) { return lindblad::generator_action(zero, rho); };
    const Matrix2cd rho0 = dynmap::plus_state();
    const Matrix2cd rho1 = ode::integrate_adaptive(rhs, rho0, 0.0, 25.0);
    CHECK((rho1 - rho0).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("master equation reproduces the map along a trajectory") {
    const model::ModelParams p{1, 1.0, 1.0, 0.1, 1.0};
    const dynmap::MapEvaluator ev(p, kPolicy);
    const Matrix2cd rho0 = dynmap::plus_state();
    const auto grid = linspace(0.0, 10.0, 51);
    const auto traj = lindblad::integrate_master_equation(ev, rho0, grid);
    REQUIRE(traj.size() == grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
        const Matrix2cd direct = dynmap::apply_map(ev.coefficients(grid[i]), rho0);
        CHECK(dynmap::trace_distance(traj[i], direct) <= 1e-6);
        CHECK(std::abs(traj[i].trace().real() - 1.0) <= 1e-9);
        CHECK(std::abs(traj[i].trace().imag()) <= 1e-12);
    }
}

TEST_CASE("grid validation") {
    const dynmap::MapEvaluator ev({1, 1.0, 1.0, 0.1, 1.0}, kPolicy);
    CHECK_THROWS_AS(lindblad::integrate_master_equation(ev, dynmap::plus_state(), {1.0, 2.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(lindblad::integrate_master_equation(ev, dynmap::plus_state(), {0.0, 2.0, 1.5}),
                    std::invalid_argument);
}

TEST_CASE("no invertibility loss for weak coupling on [0, 20]") {
    const dynmap::MapEvaluator ev({1, 1.0, 1.0, 0.1, 1.0}, kPolicy);
    CHECK(lindblad::find_singularities(ev, 0.0, 20.0).empty());
}

TEST_SUITE_END();

// test_support.hpp — Shared test oracles: fixed-step Schrodinger integration and
// numeric helpers kept independent of the library's analytic paths.

#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Dense>

namespace test_support {

// Classic RK4 on d psi/dt = -i H psi with a time-independent H.
inline Eigen::VectorXcd rk4_schrodinger(const Eigen::MatrixXcd& h, Eigen::VectorXcd psi,
                                        double t_end, int steps) {
    const std::complex<double> mi(0.0, -1.0);
    const double dt = t_end / steps;
    for (int s = 0; s < steps; ++s) {
        const Eigen::VectorXcd k1 = mi * (h * psi);
        const Eigen::VectorXcd k2 = mi * (h * (psi + 0.5 * dt * k1));
        const Eigen::VectorXcd k3 = mi * (h * (psi + 0.5 * dt * k2));
        const Eigen::VectorXcd k4 = mi * (h * (psi + dt * k3));
        psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return psi;
}

inline double rel_err(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

} // namespace test_support

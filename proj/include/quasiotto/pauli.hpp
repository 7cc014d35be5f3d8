// pauli.hpp — Qubit operators and common 2x2 states.
//
// Basis convention follows the sector equations of motion: |0> = (1 0)^T is the
// state with qubit self-energy +omega_0 under H_S = omega_0 sigma_z, and
// |1> = (0 1)^T has -omega_0.  sigma_minus = |1><0| lowers the energy in this
// convention; both ladder operators have unit matrix elements.

#pragma once

#include <complex>

#include <Eigen/Dense>

namespace qo::pauli {

using Eigen::Matrix2cd;
using namespace std::complex_literals;

inline Matrix2cd identity() { return Matrix2cd::Identity(); }

inline Matrix2cd sigma_x() {
    Matrix2cd m;
    m << 0, 1, 1, 0;
    return m;
}

inline Matrix2cd sigma_y() {
    Matrix2cd m;
    m << 0, -1i, 1i, 0;
    return m;
}

inline Matrix2cd sigma_z() {
    Matrix2cd m;
    m << 1, 0, 0, -1;
    return m;
}

inline Matrix2cd sigma_plus() {  // |0><1|, energy raising
    Matrix2cd m;
    m << 0, 1, 0, 0;
    return m;
}

inline Matrix2cd sigma_minus() {  // |1><0|, energy lowering
    Matrix2cd m;
    m << 0, 0, 1, 0;
    return m;
}

// Hermitian orthonormal basis {I, sx, sy, sz}/sqrt(2) used for transfer matrices.
inline Matrix2cd orthonormal_basis(int i) {
    const double s = 1.0 / std::sqrt(2.0);
    switch (i) {
        case 0: return s * identity();
        case 1: return s * sigma_x();
        case 2: return s * sigma_y();
        default: return s * sigma_z();
    }
}

} // namespace qo::pauli

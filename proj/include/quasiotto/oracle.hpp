// oracle.hpp — Independent brute-force reference dynamics: exact propagation of
// the truncated system-bath Schrodinger equation, partial trace, and extraction
// of reference map coefficients.
//
// The total excitation number (qubit excitation + total photon number) is
// conserved, so propagation happens sector by sector.  The thermal bath is a
// Boltzmann mixture over number eigenstates; each branch is propagated pure via
// the eigendecomposition of its sector (variant full) or of the small subspace
// the restricted-transition structure allows (variant restricted).

#pragma once

#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "quasiotto/dynamical_map.hpp"
#include "quasiotto/model.hpp"

namespace qo::oracle {

using Eigen::Matrix2cd;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using complexd = std::complex<double>;

enum class Variant { full, restricted };

struct BasisState {
    int qubit{0};          // 0 = |0> (self-energy +omega_0), 1 = |1>
    std::vector<int> occ;  // per-mode occupation
};

namespace detail {

inline int total(const std::vector<int>& occ) {
    int s = 0;
    for (int n : occ) s += n;
    return s;
}

inline double diag_energy(const model::ModelParams& p, int qubit, int n_tot) {
    return (qubit == 0 ? p.qubit_freq : -p.qubit_freq) + p.mode_freq * double(n_tot);
}

// All N-mode occupation vectors with total m, lexicographic.
inline std::vector<std::vector<int>> occupations_with_total(int n_modes, int m) {
    std::vector<std::vector<int>> out;
    std::vector<int> occ(size_t(n_modes), 0);
    auto rec = [&](auto&& self, int mode, int left) -> void {
        if (mode == n_modes - 1) {
            occ[size_t(mode)] = left;
            out.push_back(occ);
            return;
        }
        for (int k = 0; k <= left; ++k) {
            occ[size_t(mode)] = k;
            self(self, mode + 1, left - k);
        }
    };
    if (n_modes >= 1) rec(rec, 0, m);
    return out;
}

struct Eigensystem {
    MatrixXcd vecs;
    VectorXd vals;

    void build(const MatrixXcd& h) {
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("oracle: eigendecomposition failed");
        vecs = es.eigenvectors();
        vals = es.eigenvalues();
    }

    // exp(-i H t) applied to selected basis columns (adjoint rows pre-sliced by caller)
    MatrixXcd evolve_columns(const MatrixXcd& adj_rows, double t) const {
        VectorXcd phases(vals.size());
        for (Eigen::Index k = 0; k < vals.size(); ++k) phases[k] = std::polar(1.0, -vals[k] * t);
        return vecs * (phases.asDiagonal() * adj_rows);
    }
};

} // namespace detail

// ------------------------- explicit truncated Hamiltonian --------------------

// Full variant: every basis state (qubit, occupations <= n_max per mode); the
// matrix has couplings Delta sqrt(n_i) between |0, n> and |1, n - e_i>.
// Restricted variant: a direct sum of branch blocks, one per root state, each
// containing only the transitions the restricted ansatz allows from that root;
// the bath-to-bath-via-system couplings are absent by construction.
struct TruncatedHamiltonian {
    model::ModelParams params;
    int n_max{0};
    Variant variant{Variant::full};
    std::vector<BasisState> basis;
    std::vector<int> block_starts;  // restricted only: root-first block offsets
    MatrixXcd matrix;
};

inline TruncatedHamiltonian build_hamiltonian(const model::ModelParams& params_in, int n_max,
                                              Variant variant, Eigen::Index max_dim = 8192) {
    const auto p = model::validate_params(params_in);
    if (n_max < 0) throw std::invalid_argument("oracle: n_max must be non-negative");
    TruncatedHamiltonian h;
    h.params = p;
    h.n_max = n_max;
    h.variant = variant;

    const int nm = p.n_modes;
    // lexicographic hypercube of occupations
    std::vector<std::vector<int>> configs;
    {
        std::vector<int> occ(size_t(nm), 0);
        while (true) {
            configs.push_back(occ);
            int i = nm - 1;
            while (i >= 0 && occ[size_t(i)] == n_max) occ[size_t(i--)] = 0;
            if (i < 0) break;
            ++occ[size_t(i)];
        }
    }

    if (variant == Variant::full) {
        const Eigen::Index dim = Eigen::Index(2 * configs.size());
        if (dim > max_dim)
            throw DimensionError("oracle: dimension " + std::to_string(dim) +
                                 " exceeds bound " + std::to_string(max_dim));
        std::map<std::vector<int>, int> rank;
        for (int i = 0; i < int(configs.size()); ++i) rank[configs[size_t(i)]] = i;
        for (int q : {0, 1})
            for (const auto& occ : configs) h.basis.push_back({q, occ});

        h.matrix = MatrixXcd::Zero(dim, dim);
        const int off1 = int(configs.size());
        for (int i = 0; i < off1; ++i) {
            const auto& occ = configs[size_t(i)];
            const int m = detail::total(occ);
            h.matrix(i, i) = detail::diag_energy(p, 0, m);
            h.matrix(off1 + i, off1 + i) = detail::diag_energy(p, 1, m);
            for (int mode = 0; mode < nm; ++mode) {
                if (occ[size_t(mode)] == 0) continue;
                auto lower = occ;
                --lower[size_t(mode)];
                const int j = rank.at(lower);
                const double g = p.coupling * std::sqrt(double(occ[size_t(mode)]));
                h.matrix(off1 + j, i) += g;  // <1, n - e_i | H | 0, n>
                h.matrix(i, off1 + j) += g;
            }
        }
        return h;
    }

    // restricted: one block per root state
    Eigen::Index dim = 0;
    std::vector<std::pair<int, std::vector<int>>> roots;
    for (int q : {0, 1})
        for (const auto& occ : configs) roots.emplace_back(q, occ);
    std::vector<std::vector<BasisState>> blocks;
    for (const auto& [q, occ] : roots) {
        std::vector<BasisState> block{{q, occ}};
        for (int mode = 0; mode < nm; ++mode) {
            auto leaf = occ;
            if (q == 0) {
                if (leaf[size_t(mode)] == 0) continue;
                --leaf[size_t(mode)];
                block.push_back({1, leaf});
            } else {
                if (leaf[size_t(mode)] == n_max) continue;  // truncation edge
                ++leaf[size_t(mode)];
                block.push_back({0, leaf});
            }
        }
        dim += Eigen::Index(block.size());
        blocks.push_back(std::move(block));
    }
    if (dim > max_dim)
        throw DimensionError("oracle: dimension " + std::to_string(dim) + " exceeds bound " +
                             std::to_string(max_dim));

    h.matrix = MatrixXcd::Zero(dim, dim);
    Eigen::Index pos = 0;
    for (const auto& block : blocks) {
        h.block_starts.push_back(int(pos));
        const auto& root = block.front();
        const int m = detail::total(root.occ);
        h.matrix(pos, pos) = detail::diag_energy(p, root.qubit, m);
        for (size_t k = 1; k < block.size(); ++k) {
            const auto& leaf = block[k];
            h.matrix(pos + Eigen::Index(k), pos + Eigen::Index(k)) =
                detail::diag_energy(p, leaf.qubit, detail::total(leaf.occ));
            // transferred quantum count: occupancy of the changed mode on the higher side
            int mode = 0;
            while (leaf.occ[size_t(mode)] == root.occ[size_t(mode)]) ++mode;
            const int quanta = std::max(leaf.occ[size_t(mode)], root.occ[size_t(mode)]);
            const double g = p.coupling * std::sqrt(double(quanta));
            h.matrix(pos, pos + Eigen::Index(k)) = g;
            h.matrix(pos + Eigen::Index(k), pos) = g;
        }
        for (const auto& s : block) h.basis.push_back(s);
        pos += Eigen::Index(block.size());
    }
    return h;
}

// ------------------------------- propagator ----------------------------------

// Reusable propagation engine for one (params, thermal cap, variant) tuple.
// Thermal branches cover all occupation configs with total <= thermal_cap; the
// truncated bath state is renormalized over the retained branches.
class Propagator {
  public:
    Propagator(const model::ModelParams& params_in, int thermal_cap, Variant variant,
               Eigen::Index max_sector_dim = 4000)
        : params_(model::validate_params(params_in)), cap_(thermal_cap), variant_(variant) {
        if (cap_ < 0) throw std::invalid_argument("oracle: thermal cap must be non-negative");

        const int nm = params_.n_modes;
        configs_.resize(size_t(cap_) + 2);
        for (int m = 0; m <= cap_ + 1; ++m)
            configs_[size_t(m)] = detail::occupations_with_total(nm, m);

        // normalized per-config weights z^m (1-z)^N over retained branches
        const double go = params_.inv_temp * params_.mode_freq;
        sector_weight_.assign(size_t(cap_) + 1, 0.0);
        double sum = 0.0;
        for (int m = 0; m <= cap_; ++m) {
            sector_weight_[size_t(m)] =
                std::exp(-go * m + double(nm) * std::log(-std::expm1(-go)));
            sum += sector_weight_[size_t(m)] * double(configs_[size_t(m)].size());
        }
        tail_ = 1.0 - sum;
        for (auto& w : sector_weight_) w /= sum;

        if (variant_ == Variant::full) {
            sectors_.resize(size_t(cap_) + 2);
            for (int m = 0; m <= cap_ + 1; ++m) {
                const auto& c0 = configs_[size_t(m)];
                const auto& c1 = (m >= 1) ? configs_[size_t(m) - 1] : std::vector<std::vector<int>>{};
                const Eigen::Index n0 = Eigen::Index(c0.size());
                const Eigen::Index d = n0 + Eigen::Index(c1.size());
                if (d > max_sector_dim)
                    throw DimensionError("oracle: sector dimension " + std::to_string(d) +
                                         " exceeds bound " + std::to_string(max_sector_dim));
                MatrixXcd hsec = MatrixXcd::Zero(d, d);
                std::map<std::vector<int>, int> rank1;
                for (int i = 0; i < int(c1.size()); ++i) rank1[c1[size_t(i)]] = i;
                for (Eigen::Index i = 0; i < n0; ++i) {
                    hsec(i, i) = detail::diag_energy(params_, 0, m);
                    const auto& occ = c0[size_t(i)];
                    for (int mode = 0; mode < nm; ++mode) {
                        if (occ[size_t(mode)] == 0) continue;
                        auto lower = occ;
                        --lower[size_t(mode)];
                        const Eigen::Index j = n0 + rank1.at(lower);
                        const double g = params_.coupling * std::sqrt(double(occ[size_t(mode)]));
                        hsec(i, j) += g;
                        hsec(j, i) += g;
                    }
                }
                for (Eigen::Index j = n0; j < d; ++j)
                    hsec(j, j) = detail::diag_energy(params_, 1, m - 1);
                sectors_[size_t(m)].n0 = n0;
                sectors_[size_t(m)].eig.build(hsec);
            }
        } else {
            // per-config small blocks: ground (1 + #active) and excited (1 + N)
            blocks_.resize(size_t(cap_) + 1);
            for (int m = 0; m <= cap_; ++m) {
                auto& row = blocks_[size_t(m)];
                row.resize(configs_[size_t(m)].size());
                for (size_t j = 0; j < configs_[size_t(m)].size(); ++j) {
                    const auto& occ = configs_[size_t(m)][j];
                    row[j].ground.build(branch_matrix(occ, 0));
                    row[j].excited.build(branch_matrix(occ, 1));
                }
            }
        }
    }

    static Propagator from_policy(const model::ModelParams& params,
                                  const model::TruncationPolicy& policy, Variant variant,
                                  Eigen::Index max_sector_dim = 4000) {
        return Propagator(params, model::truncation_level(params, policy), variant,
                          max_sector_dim);
    }

    const model::ModelParams& params() const { return params_; }
    int thermal_cap() const { return cap_; }
    double thermal_tail() const { return tail_; }
    Variant variant() const { return variant_; }

    // Reference coefficients read off from evolved basis inputs:
    // A := rho_11(t) from diag(1,0), B := rho_00(t) from diag(0,1),
    // C := 2 rho_01(t) from the |+> state.
    dynmap::MapCoefficients reference_coefficients(double t) const {
        const Kernel k = kernel(t);
        return {k.a_pop, k.b_pop, k.ov, t};
    }

    Matrix2cd propagate_reduced(const Matrix2cd& rho0, double t) const {
        dynmap::validate_qubit_state(rho0);
        const Kernel k = kernel(t);
        const double p00 = rho0(0, 0).real(), p11 = rho0(1, 1).real();
        Matrix2cd out;
        out(0, 0) = (1.0 - k.a_pop) * p00 + k.b_pop * p11;
        out(1, 1) = k.a_pop * p00 + (1.0 - k.b_pop) * p11;
        out(0, 1) = k.ov * rho0(0, 1);
        out(1, 0) = std::conj(out(0, 1));
        return out;
    }

  private:
    struct Kernel {
        double a_pop{0.0}, b_pop{0.0};
        complexd ov{0.0};
    };

    struct Sector {
        Eigen::Index n0{0};  // count of |0,.> states; |1,.> states follow
        detail::Eigensystem eig;
    };

    struct BranchPair {
        detail::Eigensystem ground, excited;
    };

    MatrixXcd branch_matrix(const std::vector<int>& occ, int root_qubit) const {
        const int nm = params_.n_modes;
        const int m = detail::total(occ);
        std::vector<double> couplings;
        for (int mode = 0; mode < nm; ++mode) {
            if (root_qubit == 0) {
                if (occ[size_t(mode)] > 0)
                    couplings.push_back(params_.coupling * std::sqrt(double(occ[size_t(mode)])));
            } else {
                couplings.push_back(params_.coupling * std::sqrt(double(occ[size_t(mode)]) + 1.0));
            }
        }
        const Eigen::Index d = 1 + Eigen::Index(couplings.size());
        MatrixXcd h = MatrixXcd::Zero(d, d);
        h(0, 0) = detail::diag_energy(params_, root_qubit, m);
        const double leaf_energy = (root_qubit == 0) ? detail::diag_energy(params_, 1, m - 1)
                                                     : detail::diag_energy(params_, 0, m + 1);
        for (Eigen::Index k = 1; k < d; ++k) {
            h(k, k) = leaf_energy;
            h(0, k) = couplings[size_t(k - 1)];
            h(k, 0) = couplings[size_t(k - 1)];
        }
        return h;
    }

    Kernel kernel(double t) const {
        if (t < 0.0) throw std::invalid_argument("oracle: time must be non-negative");
        Kernel out;
        if (variant_ == Variant::full) {
            for (int m = 0; m <= cap_; ++m) {
                const double w = sector_weight_[size_t(m)];
                const auto& s0 = sectors_[size_t(m)];
                const auto& s1 = sectors_[size_t(m) + 1];
                const Eigen::Index d0 = s0.eig.vals.size();
                const Eigen::Index g = s0.n0;  // thermal roots of this sector
                // Evolved ground roots (columns) and excited roots (columns, same config order)
                const MatrixXcd m0 = s0.eig.evolve_columns(s0.eig.vecs.topRows(g).adjoint(), t);
                const MatrixXcd m1 = s1.eig.evolve_columns(
                    s1.eig.vecs.bottomRows(s1.eig.vals.size() - s1.n0).adjoint(), t);
                for (Eigen::Index j = 0; j < g; ++j) {
                    out.a_pop += w * m0.col(j).tail(d0 - g).squaredNorm();
                    out.b_pop += w * m1.col(j).head(s1.n0).squaredNorm();
                    out.ov += w * m1.col(j).segment(s1.n0, g).dot(m0.col(j).head(g));
                }
            }
            return out;
        }
        for (int m = 0; m <= cap_; ++m) {
            const double w = sector_weight_[size_t(m)];
            for (const auto& pair : blocks_[size_t(m)]) {
                const VectorXcd psi0 =
                    pair.ground.evolve_columns(pair.ground.vecs.row(0).adjoint(), t);
                const VectorXcd psi1 =
                    pair.excited.evolve_columns(pair.excited.vecs.row(0).adjoint(), t);
                out.a_pop += w * psi0.tail(psi0.size() - 1).squaredNorm();
                out.b_pop += w * psi1.tail(psi1.size() - 1).squaredNorm();
                out.ov += w * std::conj(psi1[0]) * psi0[0];
            }
        }
        return out;
    }

    model::ModelParams params_;
    int cap_{0};
    Variant variant_{Variant::full};
    double tail_{0.0};
    std::vector<std::vector<std::vector<int>>> configs_;  // configs_[m] = occupations with total m
    std::vector<double> sector_weight_;                   // normalized, per config in sector m
    std::vector<Sector> sectors_;                         // full variant
    std::vector<std::vector<BranchPair>> blocks_;         // restricted variant
};

// Spec-shaped convenience wrappers.
inline Matrix2cd propagate_reduced(const model::ModelParams& params, int thermal_cap,
                                   Variant variant, const Matrix2cd& rho0, double t) {
    return Propagator(params, thermal_cap, variant).propagate_reduced(rho0, t);
}

inline dynmap::MapCoefficients reference_coefficients(const model::ModelParams& params,
                                                      int thermal_cap, Variant variant, double t) {
    return Propagator(params, thermal_cap, variant).reference_coefficients(t);
}

} // namespace qo::oracle

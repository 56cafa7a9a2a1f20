// Copyright 2026 The qtraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>
#include <utility>
#include <vector>

#include "qtraj/errors.hpp"
#include "qtraj/fock_basis.hpp"
#include "qtraj/state.hpp"

namespace qtraj {

enum class ModelKind { OneBody, ThreeBody };
enum class Convention { BlockLocal, JwExact };
enum class Outcome : std::uint8_t { Up = 0, Down = 1 };

inline std::string to_string(ModelKind m) {
    return m == ModelKind::OneBody ? "one-body" : "three-body";
}
inline std::string to_string(Convention c) {
    return c == Convention::BlockLocal ? "block-local" : "jw-exact";
}
inline ModelKind parse_model(const std::string &s) {
    if (s == "one-body" || s == "onebody" || s == "OneBody") {
        return ModelKind::OneBody;
    }
    if (s == "three-body" || s == "threebody" || s == "ThreeBody") {
        return ModelKind::ThreeBody;
    }
    throw ConfigError("unknown model '" + s + "' (expected one-body or three-body)");
}
inline Convention parse_convention(const std::string &s) {
    if (s == "block-local") {
        return Convention::BlockLocal;
    }
    if (s == "jw-exact") {
        return Convention::JwExact;
    }
    throw ConfigError("unknown convention '" + s + "' (expected block-local or jw-exact)");
}

using Matrix3 = Eigen::Matrix3cd;
using Matrix8 = Eigen::Matrix<cdouble, 8, 8>;
using Matrix16 = Eigen::Matrix<cdouble, 16, 16>;

/// Local block indices (n_c<<2 | n_cnext<<1 | n_a) of the two nontrivial sectors,
/// in sector order: N_p=1 (|00>|1>, |01>|0>, |10>|0>), N_p=2 (|10>|1>, |01>|1>, |11>|0>).
inline constexpr std::array<std::array<int, 3>, 2> kSectorLocal = {{{1, 2, 4}, {5, 3, 6}}};

/// Sector slot (0 for N_p=1, 1 for N_p=2) and position of a local index; slot -1 for N_p=0,3.
inline constexpr std::array<std::pair<int, int>, 8> kLocalToSector = {
    {{-1, 0}, {0, 0}, {0, 1}, {1, 1}, {0, 2}, {1, 0}, {1, 2}, {-1, 0}}};

/// Particle-hole image: position a in the N_p=1 sector maps to kParticleHole[a] in N_p=2.
inline constexpr std::array<int, 3> kParticleHole = {2, 0, 1};

/// Matrix elements of the c_{i+1} <-> a_i hop inside the N_p=1 (s1) and N_p=2 (s2) sectors.
/// Both are +1 for every bulk block. For the periodic block with exact fermion strings
/// they are (r, -r) with r the parity of the skipped modes.
struct HopSigns {
    int s1 = +1;
    int s2 = +1;
    bool operator==(const HopSigns &) const = default;
};

inline HopSigns boundary_signs(int rest_parity) {
    return HopSigns{rest_parity, -rest_parity};
}

/// Outcome-resolved Kraus pair for one block, restricted to the two nontrivial sectors.
struct BlockChannel {
    ModelKind model = ModelKind::OneBody;
    double alpha_tilde = 0.0;
    HopSigns signs;
    std::array<Matrix3, 2> up;
    std::array<Matrix3, 2> down;
    std::array<Matrix3, 2> gram_up;
    std::array<Matrix3, 2> gram_down;

    const Matrix3 &kraus(int slot, Outcome o) const {
        return o == Outcome::Up ? up[slot] : down[slot];
    }

    /// Kraus operator on the full 8-dimensional block space (N_p=0,3 included).
    Matrix8 full_kraus(Outcome o) const {
        Matrix8 k = Matrix8::Zero();
        if (o == Outcome::Up) {
            k(0, 0) = 1.0;
            k(7, 7) = 1.0;
        }
        for (int s = 0; s < 2; ++s) {
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    k(kSectorLocal[s][a], kSectorLocal[s][b]) = kraus(s, o)(a, b);
                }
            }
        }
        return k;
    }
};

inline BlockChannel build_channel(ModelKind model, double alpha_tilde, HopSigns signs = {}) {
    const double c = std::cos(alpha_tilde);
    const double s = std::sin(alpha_tilde);
    const cdouble d(0.0, -s / std::sqrt(2.0));
    const double s1 = signs.s1;
    const double s2 = signs.s2;

    BlockChannel ch;
    ch.model = model;
    ch.alpha_tilde = alpha_tilde;
    ch.signs = signs;
    for (auto &m : ch.up) {
        m.setZero();
    }
    for (auto &m : ch.down) {
        m.setZero();
    }

    if (model == ModelKind::OneBody) {
        const double p = (1.0 + c) / 2.0;
        const double q = (c - 1.0) / 2.0;
        ch.up[0] << c, 0, 0, 0, p, q * s1, 0, q * s1, p;
        ch.down[0] << 0, d * s1, d, d * s1, 0, 0, d, 0, 0;
        ch.up[1] << p, q * s2, 0, q * s2, p, 0, 0, 0, c;
        ch.down[1] << 0, 0, d * s2, 0, 0, d, d * s2, d, 0;
    } else {
        ch.up[0] = Matrix3::Identity();
        ch.up[0](0, 0) = c;
        ch.down[0](1, 0) = d * s1;
        ch.down[0](2, 0) = d;
        ch.up[1] = Matrix3::Identity();
        ch.up[1](2, 2) = c;
        ch.down[1](0, 2) = d * s2;
        ch.down[1](1, 2) = d;
    }
    for (int k = 0; k < 2; ++k) {
        ch.gram_up[k] = ch.up[k].adjoint() * ch.up[k];
        ch.gram_down[k] = ch.down[k].adjoint() * ch.down[k];
    }
    return ch;
}

/// Placement of the three block modes in the Jordan-Wigner order.
enum class BlockOrdering {
    Bulk,      // c_i < a_i < c_next, no modes in between
    Boundary,  // c_next < (skipped modes) < c_i < a_i
};

/// System-detector Hamiltonian of one block on 16 states, index = 2*local + detector
/// (detector 0 = up, 1 = down). Fermion operators follow the Jordan-Wigner string of
/// `ordering`; the skipped modes of the boundary block enter through their parity.
inline Matrix16 block_hamiltonian(ModelKind model, double alpha_tilde, BlockOrdering ordering, int rest_parity = +1) {
    // Local bit positions inside the 3-bit index.
    constexpr int kC = 2;
    constexpr int kCn = 1;
    constexpr int kA = 0;
    // JW rank of each local bit (smaller rank = earlier in the string order).
    std::array<int, 3> rank{};
    bool rest_before_c = false;
    bool rest_before_a = false;
    bool rest_before_cn = false;
    if (ordering == BlockOrdering::Bulk) {
        rank[kC] = 0;
        rank[kA] = 1;
        rank[kCn] = 2;
    } else {
        rank[kCn] = 0;
        rank[kC] = 1;
        rank[kA] = 2;
        rest_before_c = true;
        rest_before_a = true;
    }
    auto rest_before = [&](int bit) {
        return bit == kC ? rest_before_c : bit == kA ? rest_before_a : rest_before_cn;
    };

    // Annihilation operators on the 8-dim block space.
    auto annihilator = [&](int bit) {
        Matrix8 op = Matrix8::Zero();
        for (int l = 0; l < 8; ++l) {
            if (!((l >> bit) & 1)) {
                continue;
            }
            int sign = 1;
            for (int other = 0; other < 3; ++other) {
                if (rank[other] < rank[bit] && ((l >> other) & 1)) {
                    sign = -sign;
                }
            }
            if (rest_before(bit)) {
                sign *= rest_parity;
            }
            op(l ^ (1 << bit), l) = sign;
        }
        return op;
    };
    const Matrix8 c = annihilator(kC);
    const Matrix8 cn = annihilator(kCn);
    const Matrix8 a = annihilator(kA);
    const Matrix8 id = Matrix8::Identity();
    const Matrix8 nc = c.adjoint() * c;
    const Matrix8 ncn = cn.adjoint() * cn;

    Eigen::Matrix2cd sx;
    sx << 0, 1, 1, 0;
    Eigen::Matrix2cd sminus;  // |down><up|
    sminus << 0, 0, 1, 0;

    auto kron = [](const Matrix8 &sys, const Eigen::Matrix2cd &det) {
        Matrix16 out;
        for (int i = 0; i < 8; ++i) {
            for (int j = 0; j < 8; ++j) {
                out.block<2, 2>(2 * i, 2 * j) = sys(i, j) * det;
            }
        }
        return out;
    };

    const double alpha = alpha_tilde / std::sqrt(2.0);
    Matrix16 h;
    if (model == ModelKind::OneBody) {
        Matrix8 hop = (c.adjoint() + cn.adjoint()) * a;
        h = alpha * kron(hop + hop.adjoint(), sx);
    } else {
        Matrix8 empty = (c.adjoint() + cn.adjoint()) * a * (id - nc) * (id - ncn);
        Matrix8 full = a.adjoint() * (c + cn) * nc * ncn;
        Matrix16 t = alpha * kron(empty + full, sminus);
        h = t + t.adjoint();
    }
    return h;
}

inline Matrix16 block_unitary(ModelKind model, double alpha_tilde, BlockOrdering ordering, int rest_parity = +1) {
    Matrix16 h = block_hamiltonian(model, alpha_tilde, ordering, rest_parity);
    Matrix16 mih = cdouble(0.0, -1.0) * h;
    return mih.exp();
}

/// K_up = <up|U|up>, K_down = <down|U|up> on the 8-dim block space.
inline std::pair<Matrix8, Matrix8> kraus_from_unitary(const Matrix16 &u) {
    Matrix8 up;
    Matrix8 down;
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
            up(i, j) = u(2 * i, 2 * j);
            down(i, j) = u(2 * i + 1, 2 * j);
        }
    }
    return {up, down};
}

inline std::pair<Matrix8, Matrix8> kraus_by_exponentiation(
    ModelKind model, double alpha_tilde, BlockOrdering ordering, int rest_parity = +1) {
    return kraus_from_unitary(block_unitary(model, alpha_tilde, ordering, rest_parity));
}

/// Largest entrywise deviation between a closed-form channel and direct exponentiation.
inline double exponentiation_residual(const BlockChannel &ch, BlockOrdering ordering, int rest_parity) {
    auto [up, down] = kraus_by_exponentiation(ch.model, ch.alpha_tilde, ordering, rest_parity);
    double r = (up - ch.full_kraus(Outcome::Up)).cwiseAbs().maxCoeff();
    return std::max(r, (down - ch.full_kraus(Outcome::Down)).cwiseAbs().maxCoeff());
}

inline double completeness_residual(const BlockChannel &ch) {
    double r = 0.0;
    for (int k = 0; k < 2; ++k) {
        Matrix3 sum = ch.gram_up[k] + ch.gram_down[k] - Matrix3::Identity();
        r = std::max(r, sum.cwiseAbs().maxCoeff());
    }
    return r;
}

/// Channels for every block of a chain: bulk plus the boundary variants keyed by skipped-mode parity.
struct ChannelSet {
    Convention convention = Convention::BlockLocal;
    BlockChannel bulk;
    std::array<BlockChannel, 2> boundary;  // [0]: parity +1, [1]: parity -1

    const BlockChannel &for_block(bool is_boundary, int variant) const {
        return is_boundary ? boundary[variant] : bulk;
    }
    const BlockChannel &for_word(const BlockAddress &addr, Word w) const {
        return for_block(addr.is_boundary, rest_parity(w, addr) < 0 ? 1 : 0);
    }
};

/// Builds and validates the channels against exponentiation of the block Hamiltonian.
inline ChannelSet make_channel_set(ModelKind model, double alpha_tilde, Convention convention, double tol = 1e-12) {
    if (!std::isfinite(alpha_tilde)) {
        throw ConfigError("alpha_tilde must be finite");
    }
    ChannelSet set;
    set.convention = convention;
    set.bulk = build_channel(model, alpha_tilde);
    if (convention == Convention::BlockLocal) {
        set.boundary = {set.bulk, set.bulk};
    } else {
        set.boundary = {build_channel(model, alpha_tilde, boundary_signs(+1)), build_channel(model, alpha_tilde, boundary_signs(-1))};
    }
    double res = exponentiation_residual(set.bulk, BlockOrdering::Bulk, +1);
    if (convention == Convention::JwExact) {
        res = std::max(res, exponentiation_residual(set.boundary[0], BlockOrdering::Boundary, +1));
        res = std::max(res, exponentiation_residual(set.boundary[1], BlockOrdering::Boundary, -1));
    }
    if (res > tol) {
        throw NumericalError("closed-form Kraus matrices disagree with exponentiation: " + std::to_string(res));
    }
    return set;
}

/// Eigenvalue-resolved projectors of the measured hopping operator in sector 1 or 2.
inline std::map<int, Matrix3> projective_kraus(int sector) {
    if (sector != 1 && sector != 2) {
        throw ConfigError("projective_kraus: sector must be 1 or 2");
    }
    const double h = 0.5;
    const double r = 1.0 / (2.0 * std::sqrt(2.0));
    std::map<int, Matrix3> s1;
    s1[0] << 0, 0, 0, 0, h, -h, 0, -h, h;
    s1[+1] << h, r, r, r, 0.25, 0.25, r, 0.25, 0.25;
    s1[-1] << h, -r, -r, -r, 0.25, 0.25, -r, 0.25, 0.25;
    if (sector == 1) {
        return s1;
    }
    std::map<int, Matrix3> s2;
    for (auto &[key, m] : s1) {
        Matrix3 out = Matrix3::Zero();
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                out(kParticleHole[a], kParticleHole[b]) = m(a, b);
            }
        }
        s2[key] = out;
    }
    return s2;
}

/// The measured one-body operator (c_i^+ a_i + c_{i+1}^+ a_i + H.c.) in sector 1 or 2.
inline Matrix3 hopping_observable(int sector) {
    Matrix3 m1;
    m1 << 0, 1, 1, 1, 0, 0, 1, 0, 0;
    if (sector == 1) {
        return m1;
    }
    Matrix3 out = Matrix3::Zero();
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            out(kParticleHole[a], kParticleHole[b]) = m1(a, b);
        }
    }
    return out;
}

/// One outcome branch of a block measurement.
struct Branch {
    Outcome outcome;
    StateVector state;  // unnormalized
    double prob;
};

inline Word replace_block_bits(Word w, const BlockAddress &addr, int local) {
    Word out = w & ~addr.mask();
    if (local & 4) {
        out |= Word{1} << addr.modes[0];
    }
    if (local & 2) {
        out |= Word{1} << addr.modes[1];
    }
    if (local & 1) {
        out |= Word{1} << addr.modes[2];
    }
    return out;
}

/// Both outcome branches of measuring block `addr` with the detector prepared in |up>.
inline std::pair<Branch, Branch> apply_block(const StateVector &state, const BlockAddress &addr, const ChannelSet &channels) {
    require_normalized(state);
    const FockBasis &basis = *state.basis;
    Branch up{Outcome::Up, StateVector(state.basis), 0.0};
    Branch down{Outcome::Down, StateVector(state.basis), 0.0};
    for (std::size_t k = 0; k < basis.dimension(); ++k) {
        Word w = basis.state(k);
        int local = block_occupation(w, addr).local_index();
        auto [slot, pos] = kLocalToSector[local];
        if (slot < 0) {
            up.state.amps[k] = state.amps[k];
            continue;
        }
        const BlockChannel &ch = channels.for_word(addr, w);
        cdouble au = 0.0;
        cdouble ad = 0.0;
        for (int b = 0; b < 3; ++b) {
            std::uint32_t j = basis.index_of(replace_block_bits(w, addr, kSectorLocal[slot][b]));
            au += ch.up[slot](pos, b) * state.amps[j];
            ad += ch.down[slot](pos, b) * state.amps[j];
        }
        up.state.amps[k] = au;
        down.state.amps[k] = ad;
    }
    up.prob = up.state.amps.squaredNorm();
    down.prob = down.state.amps.squaredNorm();
    return {std::move(up), std::move(down)};
}

/// Basis-index orbits of one block, grouped by sector and boundary sign variant.
struct BlockTable {
    BlockAddress addr;
    // orbits[slot][variant]: triples of basis indices in sector order.
    std::array<std::array<std::vector<std::array<std::uint32_t, 3>>, 2>, 2> orbits;
    std::vector<std::uint32_t> trivial;  // N_p = 0 or 3
};

inline BlockTable build_block_table(const FockBasis &basis, const BlockAddress &addr) {
    BlockTable t;
    t.addr = addr;
    for (std::size_t k = 0; k < basis.dimension(); ++k) {
        Word w = basis.state(k);
        int local = block_occupation(w, addr).local_index();
        auto [slot, pos] = kLocalToSector[local];
        if (slot < 0) {
            t.trivial.push_back(static_cast<std::uint32_t>(k));
            continue;
        }
        if (pos != 0) {
            continue;
        }
        std::array<std::uint32_t, 3> tri{};
        for (int b = 0; b < 3; ++b) {
            tri[b] = basis.index_of(replace_block_bits(w, addr, kSectorLocal[slot][b]));
        }
        int variant = addr.is_boundary && rest_parity(w, addr) < 0 ? 1 : 0;
        t.orbits[slot][variant].push_back(tri);
    }
    return t;
}

inline std::vector<BlockTable> build_block_tables(const FockBasis &basis) {
    std::vector<BlockTable> out;
    for (const auto &addr : all_blocks(basis.layout())) {
        out.push_back(build_block_table(basis, addr));
    }
    return out;
}

namespace detail {

inline double quadratic_form(const Matrix3 &g, const cdouble *x0, const cdouble *x1, const cdouble *x2) {
    const cdouble x[3] = {*x0, *x1, *x2};
    double acc = 0.0;
    for (int a = 0; a < 3; ++a) {
        acc += g(a, a).real() * std::norm(x[a]);
        for (int b = a + 1; b < 3; ++b) {
            acc += 2.0 * (std::conj(x[a]) * g(a, b) * x[b]).real();
        }
    }
    return acc;
}

}  // namespace detail

struct BranchProbabilities {
    double up = 0.0;
    double down = 0.0;
};

/// ||K_up psi||^2 and ||K_down psi||^2 for one block, evaluated in place.
inline BranchProbabilities branch_probabilities(const Eigen::VectorXcd &amps, const BlockTable &table, const ChannelSet &channels) {
    BranchProbabilities p;
    const cdouble *v = amps.data();
    for (std::uint32_t k : table.trivial) {
        p.up += std::norm(v[k]);
    }
    for (int slot = 0; slot < 2; ++slot) {
        for (int variant = 0; variant < 2; ++variant) {
            const auto &orbits = table.orbits[slot][variant];
            if (orbits.empty()) {
                continue;
            }
            const BlockChannel &ch = channels.for_block(table.addr.is_boundary, variant);
            const Matrix3 &gu = ch.gram_up[slot];
            const Matrix3 &gd = ch.gram_down[slot];
            for (const auto &tri : orbits) {
                p.up += detail::quadratic_form(gu, v + tri[0], v + tri[1], v + tri[2]);
                p.down += detail::quadratic_form(gd, v + tri[0], v + tri[1], v + tri[2]);
            }
        }
    }
    return p;
}

/// amps <- scale * K_outcome amps for one block.
inline void apply_branch_inplace(
    Eigen::VectorXcd &amps, const BlockTable &table, const ChannelSet &channels, Outcome outcome, double scale) {
    cdouble *v = amps.data();
    for (std::uint32_t k : table.trivial) {
        v[k] = outcome == Outcome::Up ? v[k] * scale : cdouble(0.0);
    }
    for (int slot = 0; slot < 2; ++slot) {
        for (int variant = 0; variant < 2; ++variant) {
            const auto &orbits = table.orbits[slot][variant];
            if (orbits.empty()) {
                continue;
            }
            const Matrix3 m = scale * channels.for_block(table.addr.is_boundary, variant).kraus(slot, outcome);
            for (const auto &tri : orbits) {
                const cdouble x0 = v[tri[0]];
                const cdouble x1 = v[tri[1]];
                const cdouble x2 = v[tri[2]];
                v[tri[0]] = m(0, 0) * x0 + m(0, 1) * x1 + m(0, 2) * x2;
                v[tri[1]] = m(1, 0) * x0 + m(1, 1) * x1 + m(1, 2) * x2;
                v[tri[2]] = m(2, 0) * x0 + m(2, 1) * x1 + m(2, 2) * x2;
            }
        }
    }
}

}  // namespace qtraj

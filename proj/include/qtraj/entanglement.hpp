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
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "qtraj/block_operators.hpp"
#include "qtraj/errors.hpp"
#include "qtraj/fock_basis.hpp"
#include "qtraj/state.hpp"

namespace qtraj {

inline constexpr double kEigenvalueClamp = 1e-12;

enum class CutName { B, Bprime, C, Custom };

inline std::string to_string(CutName n) {
    switch (n) {
        case CutName::B:
            return "B";
        case CutName::Bprime:
            return "Bprime";
        case CutName::C:
            return "C";
        default:
            return "Custom";
    }
}

/// A subset of global modes.
struct Cut {
    CutName name = CutName::Custom;
    std::vector<int> modes;  // ascending

    Word mask() const {
        Word m = 0;
        for (int q : modes) {
            m |= Word{1} << q;
        }
        return m;
    }
    int size() const {
        return static_cast<int>(modes.size());
    }
};

/// B = c_1..c_{L/4}. For L/2 odd, B takes floor(L/4) sites and B' the rest.
inline Cut cut_B(const ModeLayout &layout) {
    Cut c{CutName::B, {}};
    for (int i = 1; i <= layout.num_cells() / 2; ++i) {
        c.modes.push_back(layout.main_mode(i));
    }
    return c;
}
inline Cut cut_Bprime(const ModeLayout &layout) {
    Cut c{CutName::Bprime, {}};
    for (int i = layout.num_cells() / 2 + 1; i <= layout.num_cells(); ++i) {
        c.modes.push_back(layout.main_mode(i));
    }
    return c;
}
inline Cut cut_C(const ModeLayout &layout) {
    Cut c{CutName::C, {}};
    for (int i = 1; i <= layout.num_cells(); ++i) {
        c.modes.push_back(layout.main_mode(i));
    }
    return c;
}
inline Cut custom_cut(std::vector<int> modes) {
    std::sort(modes.begin(), modes.end());
    modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
    return Cut{CutName::Custom, std::move(modes)};
}

/// Sign of reordering |w> (ascending creators) into (cut creators)(complement creators).
inline int reorder_sign(Word w, Word cut_mask) {
    int crossings = 0;
    Word in_cut = w & cut_mask;
    Word out_cut = w & ~cut_mask;
    while (in_cut) {
        int p = std::countr_zero(in_cut);
        crossings += std::popcount(out_cut & ((Word{1} << p) - 1));
        in_cut &= in_cut - 1;
    }
    return (crossings & 1) ? -1 : +1;
}

/// Extracts the bits of w at `modes` into a compact pattern (bit j = modes[j]).
inline std::uint32_t compress_bits(Word w, const std::vector<int> &modes) {
    std::uint32_t out = 0;
    for (std::size_t j = 0; j < modes.size(); ++j) {
        out |= static_cast<std::uint32_t>(bit_of(w, modes[j])) << j;
    }
    return out;
}

/// Per-basis-state placement in the popcount-resolved Schmidt matrices of a cut.
class CutTable {
   public:
    CutTable(std::shared_ptr<const FockBasis> basis, Cut cut, Convention convention)
        : basis_(std::move(basis)), cut_(std::move(cut)), convention_(convention) {
        const int L = basis_->layout().num_sites();
        for (int q : cut_.modes) {
            if (q < 0 || q >= L) {
                throw ConfigError("cut contains out-of-range mode " + std::to_string(q));
            }
        }
        for (int q = 0; q < L; ++q) {
            if (!((cut_.mask() >> q) & 1)) {
                complement_.push_back(q);
            }
        }
        const int na = cut_.size();
        rows_.assign(static_cast<std::size_t>(na) + 1, 0);
        cols_.assign(static_cast<std::size_t>(na) + 1, 0);
        std::vector<std::unordered_map<std::uint32_t, std::uint32_t>> col_index(static_cast<std::size_t>(na) + 1);
        pattern_rank_.assign(std::size_t{1} << na, 0);
        for (std::uint32_t pat = 0; pat < (std::uint32_t{1} << na); ++pat) {
            int k = std::popcount(pat);
            pattern_rank_[pat] = rows_[k]++;
        }
        entries_.reserve(basis_->dimension());
        Word mask = cut_.mask();
        for (std::size_t i = 0; i < basis_->dimension(); ++i) {
            Word w = basis_->state(i);
            std::uint32_t a = compress_bits(w, cut_.modes);
            std::uint32_t b = compress_bits(w, complement_);
            int k = std::popcount(a);
            auto &cmap = col_index[k];
            auto it = cmap.find(b);
            std::uint32_t col;
            if (it == cmap.end()) {
                col = cols_[k]++;
                cmap.emplace(b, col);
            } else {
                col = it->second;
            }
            int sign = convention_ == Convention::JwExact ? reorder_sign(w, mask) : 1;
            entries_.push_back(Entry{static_cast<std::uint8_t>(k), sign < 0, pattern_rank_[a], col, a});
        }
    }

    const Cut &cut() const {
        return cut_;
    }
    Convention convention() const {
        return convention_;
    }
    const std::shared_ptr<const FockBasis> &basis() const {
        return basis_;
    }

    /// Popcount-resolved Schmidt matrices M_k (rows: cut patterns, cols: complement patterns).
    std::vector<Eigen::MatrixXcd> schmidt_blocks(const Eigen::VectorXcd &amps) const {
        std::vector<Eigen::MatrixXcd> m(rows_.size());
        for (std::size_t k = 0; k < rows_.size(); ++k) {
            m[k] = Eigen::MatrixXcd::Zero(rows_[k], cols_[k]);
        }
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const Entry &e = entries_[i];
            m[e.sector](e.row, e.col) = e.negative ? -amps[static_cast<Eigen::Index>(i)] : amps[static_cast<Eigen::Index>(i)];
        }
        return m;
    }

    /// Nonzero spectrum of the reduced density matrix (eigenvalues above the clamp).
    std::vector<double> spectrum(const Eigen::VectorXcd &amps) const {
        std::vector<double> out;
        for (const auto &mk : schmidt_blocks(amps)) {
            if (mk.size() == 0) {
                continue;
            }
            Eigen::MatrixXcd g = mk.rows() <= mk.cols() ? Eigen::MatrixXcd(mk * mk.adjoint()) : Eigen::MatrixXcd(mk.adjoint() * mk);
            if (g.rows() == 1) {
                out.push_back(g(0, 0).real());
                continue;
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
            for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
                out.push_back(es.eigenvalues()[j]);
            }
        }
        return out;
    }

    double entropy(const Eigen::VectorXcd &amps) const {
        double s = 0.0;
        for (double lam : spectrum(amps)) {
            if (lam > kEigenvalueClamp) {
                s -= lam * std::log(lam);
            }
        }
        return s;
    }

    /// Full 2^|A| reduced density matrix indexed by cut pattern (bit j = occupation of modes[j]).
    Eigen::MatrixXcd density_matrix(const Eigen::VectorXcd &amps) const {
        const std::size_t dim = std::size_t{1} << cut_.size();
        Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        auto blocks = schmidt_blocks(amps);
        std::vector<std::vector<std::uint32_t>> patterns(rows_.size());
        for (std::uint32_t pat = 0; pat < dim; ++pat) {
            patterns[std::popcount(pat)].push_back(pat);
        }
        for (std::size_t k = 0; k < blocks.size(); ++k) {
            if (blocks[k].size() == 0) {
                continue;
            }
            Eigen::MatrixXcd rk = blocks[k] * blocks[k].adjoint();
            for (Eigen::Index r = 0; r < rk.rows(); ++r) {
                for (Eigen::Index c = 0; c < rk.cols(); ++c) {
                    rho(patterns[k][r], patterns[k][c]) = rk(r, c);
                }
            }
        }
        return rho;
    }

   private:
    struct Entry {
        std::uint8_t sector;
        bool negative;
        std::uint32_t row;
        std::uint32_t col;
        std::uint32_t pattern;
    };
    std::shared_ptr<const FockBasis> basis_;
    Cut cut_;
    Convention convention_;
    std::vector<int> complement_;
    std::vector<std::uint32_t> rows_;
    std::vector<std::uint32_t> cols_;
    std::vector<std::uint32_t> pattern_rank_;
    std::vector<Entry> entries_;
};

struct ReducedDensityMatrix {
    Cut cut;
    Eigen::MatrixXcd matrix;
};

inline ReducedDensityMatrix reduced_density_matrix(const StateVector &state, const Cut &cut, Convention convention) {
    require_normalized(state);
    CutTable table(state.basis, cut, convention);
    return ReducedDensityMatrix{cut, table.density_matrix(state.amps)};
}

inline double von_neumann_entropy(const ReducedDensityMatrix &rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.matrix, Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
        double lam = es.eigenvalues()[j];
        if (lam > kEigenvalueClamp) {
            s -= lam * std::log(lam);
        }
    }
    return s;
}

inline double clamp_mutual_information(double i) {
    return (i < 0.0 && i > -1e-10) ? 0.0 : i;
}

struct EntropyValues {
    double S_B = 0.0;
    double S_Bprime = 0.0;
    double S_C = 0.0;
    double I_BB = 0.0;
};

/// Cached cut tables for the B, B', C entropies of one basis.
class EntropyProbe {
   public:
    EntropyProbe(std::shared_ptr<const FockBasis> basis, Convention convention)
        : b_(basis, cut_B(basis->layout()), convention),
          bp_(basis, cut_Bprime(basis->layout()), convention),
          c_(basis, cut_C(basis->layout()), convention) {
    }

    EntropyValues operator()(const Eigen::VectorXcd &amps) const {
        EntropyValues v;
        v.S_B = b_.entropy(amps);
        v.S_Bprime = bp_.entropy(amps);
        v.S_C = c_.entropy(amps);
        v.I_BB = clamp_mutual_information(v.S_B + v.S_Bprime - v.S_C);
        return v;
    }

    const CutTable &table(CutName n) const {
        return n == CutName::B ? b_ : n == CutName::Bprime ? bp_ : c_;
    }

   private:
    CutTable b_;
    CutTable bp_;
    CutTable c_;
};

inline double mutual_information(const StateVector &state, Convention convention = Convention::BlockLocal) {
    require_normalized(state);
    return EntropyProbe(state.basis, convention)(state.amps).I_BB;
}

}  // namespace qtraj

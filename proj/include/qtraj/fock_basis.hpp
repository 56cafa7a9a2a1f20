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

#include <array>
#include <bit>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "qtraj/errors.hpp"

namespace qtraj {

/// Occupation word: bit q is the occupation of global mode q.
using Word = std::uint32_t;

inline constexpr int kMinSites = 4;
inline constexpr int kMaxSites = 24;

inline bool bit_of(Word w, int mode) {
    return (w >> mode) & 1u;
}

/// Interleaved mode order c_1, a_1, c_2, a_2, ..., c_{L/2}, a_{L/2}.
///
/// Main-chain site i (1-based) lives on mode 2(i-1); ancilla site i on 2(i-1)+1.
/// With this order both hoppings of a bulk block connect adjacent modes, so
/// Jordan-Wigner strings only appear on the periodic boundary block.
class ModeLayout {
   public:
    explicit ModeLayout(int num_sites) : num_sites_(num_sites) {
        if (num_sites < kMinSites || num_sites % 2 != 0) {
            throw ConfigError("L must be even and >= 4, got " + std::to_string(num_sites));
        }
    }

    int num_sites() const {
        return num_sites_;
    }
    int num_cells() const {
        return num_sites_ / 2;
    }
    int num_particles() const {
        return num_sites_ / 2;
    }
    int main_mode(int i) const {
        return 2 * (i - 1);
    }
    int ancilla_mode(int i) const {
        return 2 * (i - 1) + 1;
    }
    Word main_mask() const {
        Word m = 0;
        for (int i = 1; i <= num_cells(); ++i) {
            m |= Word{1} << main_mode(i);
        }
        return m;
    }
    Word ancilla_mask() const {
        return main_mask() << 1;
    }

    /// Builds a word from main-chain and ancilla occupation strings, e.g.
    /// word_from_strings("0101", "1100") for |0101> (x) |1100>.
    Word word_from_strings(const std::string &main, const std::string &ancilla) const {
        if (static_cast<int>(main.size()) != num_cells() || static_cast<int>(ancilla.size()) != num_cells()) {
            throw ConfigError("occupation strings must have L/2 characters");
        }
        Word w = 0;
        for (int i = 1; i <= num_cells(); ++i) {
            char c = main[i - 1];
            char a = ancilla[i - 1];
            if ((c != '0' && c != '1') || (a != '0' && a != '1')) {
                throw ConfigError("occupation strings may only contain 0 and 1");
            }
            if (c == '1') {
                w |= Word{1} << main_mode(i);
            }
            if (a == '1') {
                w |= Word{1} << ancilla_mode(i);
            }
        }
        return w;
    }

    std::string main_string(Word w) const {
        std::string s;
        for (int i = 1; i <= num_cells(); ++i) {
            s.push_back(bit_of(w, main_mode(i)) ? '1' : '0');
        }
        return s;
    }
    std::string ancilla_string(Word w) const {
        std::string s;
        for (int i = 1; i <= num_cells(); ++i) {
            s.push_back(bit_of(w, ancilla_mode(i)) ? '1' : '0');
        }
        return s;
    }

    bool operator==(const ModeLayout &) const = default;

   private:
    int num_sites_;
};

/// The triple (c_i, c_{i+1 mod L/2}, a_i) acted on by the i-th detector.
struct BlockAddress {
    int index;  // 1..L/2
    std::array<int, 3> modes;  // {c_i, c_next, a_i}
    bool is_boundary;

    int main_mode() const {
        return modes[0];
    }
    int next_main_mode() const {
        return modes[1];
    }
    int ancilla_mode() const {
        return modes[2];
    }
    Word mask() const {
        return (Word{1} << modes[0]) | (Word{1} << modes[1]) | (Word{1} << modes[2]);
    }
};

inline BlockAddress block_address(const ModeLayout &layout, int i) {
    int cells = layout.num_cells();
    if (i < 1 || i > cells) {
        throw ConfigError("block index out of range: " + std::to_string(i));
    }
    int next = i == cells ? 1 : i + 1;
    return BlockAddress{i, {layout.main_mode(i), layout.main_mode(next), layout.ancilla_mode(i)}, i == cells};
}

inline std::vector<BlockAddress> all_blocks(const ModeLayout &layout) {
    std::vector<BlockAddress> out;
    for (int i = 1; i <= layout.num_cells(); ++i) {
        out.push_back(block_address(layout, i));
    }
    return out;
}

/// Block occupations (n^c_i, n^c_{i+1}, n^a_i).
struct BlockOccupation {
    int c;
    int c_next;
    int a;

    /// Local 3-bit index c*4 + c_next*2 + a.
    int local_index() const {
        return (c << 2) | (c_next << 1) | a;
    }
    int particles() const {
        return c + c_next + a;
    }
    bool operator==(const BlockOccupation &) const = default;
};

inline BlockOccupation block_occupation(Word w, const BlockAddress &addr) {
    return BlockOccupation{
        static_cast<int>(bit_of(w, addr.modes[0])),
        static_cast<int>(bit_of(w, addr.modes[1])),
        static_cast<int>(bit_of(w, addr.modes[2]))};
}

/// Mask of non-block modes strictly between the lowest and highest block mode.
inline Word rest_string_mask(const BlockAddress &addr) {
    int lo = std::min({addr.modes[0], addr.modes[1], addr.modes[2]});
    int hi = std::max({addr.modes[0], addr.modes[1], addr.modes[2]});
    Word between = 0;
    for (int q = lo + 1; q < hi; ++q) {
        between |= Word{1} << q;
    }
    return between & ~addr.mask();
}

/// (-1)^(occupied modes strictly inside the block span, excluding block modes).
/// Always +1 for bulk blocks.
inline int rest_parity(Word w, const BlockAddress &addr) {
    return (std::popcount(w & rest_string_mask(addr)) & 1) ? -1 : +1;
}

/// Half-filled occupation basis, sorted ascending, with inverse index.
class FockBasis {
   public:
    explicit FockBasis(ModeLayout layout) : layout_(layout) {
        int L = layout_.num_sites();
        int n = layout_.num_particles();
        // Gosper's hack walks popcount-n words in ascending order.
        Word w = (Word{1} << n) - 1;
        Word limit = Word{1} << L;
        while (w < limit) {
            index_.emplace(w, static_cast<std::uint32_t>(states_.size()));
            states_.push_back(w);
            Word c = w & (~w + 1);
            Word r = w + c;
            w = (((r ^ w) >> 2) / c) | r;
        }
    }

    const ModeLayout &layout() const {
        return layout_;
    }
    std::size_t dimension() const {
        return states_.size();
    }
    const std::vector<Word> &states() const {
        return states_;
    }
    Word state(std::size_t k) const {
        return states_[k];
    }
    bool contains(Word w) const {
        return index_.count(w) != 0;
    }
    std::uint32_t index_of(Word w) const {
        auto it = index_.find(w);
        if (it == index_.end()) {
            throw ConfigError("word is not in the half-filled basis");
        }
        return it->second;
    }

   private:
    ModeLayout layout_;
    std::vector<Word> states_;
    std::unordered_map<Word, std::uint32_t> index_;
};

inline std::shared_ptr<const FockBasis> enumerate_basis(int L) {
    if (L % 2 != 0 || L < kMinSites || L > kMaxSites) {
        throw ConfigError("L must be even with 4 <= L <= 24, got " + std::to_string(L));
    }
    return std::make_shared<const FockBasis>(ModeLayout(L));
}

}  // namespace qtraj

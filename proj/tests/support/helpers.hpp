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

#include <random>

#include "qtraj/qtraj.hpp"

namespace qtraj::support {

/// Complex Gaussian random normalized state.
inline StateVector random_state(std::shared_ptr<const FockBasis> basis, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    StateVector s(basis);
    for (Eigen::Index k = 0; k < s.amps.size(); ++k) {
        s.amps[k] = cdouble(n(gen), n(gen));
    }
    s.normalize();
    return s;
}

/// Word from main/ancilla strings, parsed character by character.
inline Word word_of(int L, const std::string &main, const std::string &ancilla) {
    Word w = 0;
    for (int i = 0; i < L / 2; ++i) {
        if (main[i] == '1') {
            w |= Word{1} << (2 * i);
        }
        if (ancilla[i] == '1') {
            w |= Word{1} << (2 * i + 1);
        }
    }
    return w;
}

}  // namespace qtraj::support

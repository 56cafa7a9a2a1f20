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
#include <cmath>
#include <complex>
#include <memory>

#include "qtraj/errors.hpp"
#include "qtraj/fock_basis.hpp"

namespace qtraj {

using cdouble = std::complex<double>;

/// Complex amplitudes over a half-filled FockBasis.
struct StateVector {
    std::shared_ptr<const FockBasis> basis;
    Eigen::VectorXcd amps;

    StateVector() = default;
    explicit StateVector(std::shared_ptr<const FockBasis> b)
        : basis(std::move(b)), amps(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->dimension()))) {
    }
    StateVector(std::shared_ptr<const FockBasis> b, Eigen::VectorXcd a) : basis(std::move(b)), amps(std::move(a)) {
        if (static_cast<std::size_t>(amps.size()) != basis->dimension()) {
            throw ConfigError("amplitude vector does not match basis dimension");
        }
    }

    static StateVector basis_state(std::shared_ptr<const FockBasis> b, Word w) {
        StateVector s(b);
        s.amps[b->index_of(w)] = 1.0;
        return s;
    }

    const ModeLayout &layout() const {
        return basis->layout();
    }
    std::size_t dimension() const {
        return basis->dimension();
    }
    double norm() const {
        return amps.norm();
    }
    void normalize() {
        double n = amps.norm();
        if (!(n > 0.0)) {
            throw NumericalError("cannot normalize a zero state");
        }
        amps /= n;
    }
    cdouble amplitude(Word w) const {
        return amps[basis->index_of(w)];
    }
};

inline cdouble overlap(const StateVector &a, const StateVector &b) {
    return a.amps.dot(b.amps);
}

inline void require_normalized(const StateVector &s, double tol = 1e-8) {
    if (std::abs(s.norm() - 1.0) > tol) {
        throw ConfigError("state is not normalized");
    }
}

}  // namespace qtraj

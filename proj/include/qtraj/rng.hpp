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

#include <cstdint>
#include <random>

namespace qtraj {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Stream seed for (global seed, trajectory id).
inline std::uint64_t stream_seed(std::uint64_t global_seed, std::uint64_t trajectory_id) {
    return splitmix64(splitmix64(global_seed) ^ splitmix64(trajectory_id + 0x632BE59BD9B4E019ull));
}

/// One independent stream per trajectory.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {
    }
    Rng(std::uint64_t global_seed, std::uint64_t trajectory_id) : engine_(stream_seed(global_seed, trajectory_id)) {
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
        return dist(engine_);
    }

    std::mt19937_64 &engine() {
        return engine_;
    }

   private:
    std::mt19937_64 engine_;
};

}  // namespace qtraj

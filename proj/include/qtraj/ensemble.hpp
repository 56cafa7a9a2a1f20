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

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "qtraj/errors.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

/// Worker count: QTRAJ_THREADS if set, else `requested`, else hardware concurrency.
inline int resolve_threads(int requested = 0) {
    if (const char *env = std::getenv("QTRAJ_THREADS")) {
        char *end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) {
            throw ConfigError(std::string("QTRAJ_THREADS must be a positive integer, got '") + env + "'");
        }
        return static_cast<int>(v);
    }
    if (requested > 0) {
        return requested;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs trajectories first_id .. first_id+n-1. Trajectory k goes to worker k % threads
/// and lands in slot k, so the result is independent of the thread count.
/// `on_done` (optional) is called under a lock after each trajectory.
inline std::vector<TrajectoryRecord> run_ensemble(
    const TrajectoryEngine &engine,
    const TrajectoryConfig &cfg,
    std::size_t n_traj,
    int threads = 0,
    std::uint64_t first_id = 0,
    const std::function<void(std::size_t done)> &on_done = {}) {
    if (n_traj == 0) {
        throw ConfigError("n_traj must be >= 1");
    }
    int workers = std::max(1, std::min<int>(resolve_threads(threads), static_cast<int>(n_traj)));
    std::vector<TrajectoryRecord> out(n_traj);
    std::exception_ptr error;
    std::mutex mu;
    std::size_t done = 0;
    auto work = [&](int w) {
        for (std::size_t k = static_cast<std::size_t>(w); k < n_traj; k += static_cast<std::size_t>(workers)) {
            {
                std::lock_guard<std::mutex> lock(mu);
                if (error) {
                    return;
                }
            }
            try {
                out[k] = engine.run(cfg, first_id + k);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!error) {
                    error = std::current_exception();
                }
                return;
            }
            std::lock_guard<std::mutex> lock(mu);
            ++done;
            if (on_done) {
                on_done(done);
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(work, w);
        }
        for (auto &t : pool) {
            t.join();
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return out;
}

}  // namespace qtraj

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
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "qtraj/ensemble.hpp"
#include "qtraj/errors.hpp"
#include "qtraj/statistics.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

inline constexpr int kMaxOracleMeasurements = 20;

/// One outcome sequence with its exact probability. Bit (m-1)*blocks + (i-1) set = down.
struct ExactSequence {
    std::uint64_t key = 0;
    double probability = 0.0;
    double S_B = 0.0;
};

/// Enumerates every outcome sequence of `steps` sweeps with exact branch probabilities.
/// NoClick keeps only the all-up sequence.
inline std::vector<ExactSequence> enumerate_sequences(
    const TrajectoryEngine &engine, const StateVector &initial, int steps, SamplingMode mode = SamplingMode::Born) {
    const int blocks = static_cast<int>(engine.tables().size());
    const int total = blocks * steps;
    if (steps < 1) {
        throw ConfigError("oracle needs at least one step");
    }
    if (total >= kMaxOracleMeasurements) {
        throw ConfigError("oracle would enumerate 2^" + std::to_string(total) + " sequences (limit 2^20)");
    }
    std::vector<ExactSequence> out;
    const CutTable &cut = engine.probe().table(CutName::B);
    std::vector<Eigen::VectorXcd> stack(static_cast<std::size_t>(total) + 1);
    stack[0] = initial.amps;
    auto recurse = [&](auto &&self, int depth, std::uint64_t key) -> void {
        const Eigen::VectorXcd &cur = stack[static_cast<std::size_t>(depth)];
        double w = cur.squaredNorm();
        if (w == 0.0) {
            return;
        }
        if (depth == total) {
            Eigen::VectorXcd normed = cur / std::sqrt(w);
            out.push_back(ExactSequence{key, w, cut.entropy(normed)});
            return;
        }
        const BlockTable &table = engine.tables()[static_cast<std::size_t>(depth % blocks)];
        for (Outcome o : {Outcome::Up, Outcome::Down}) {
            if (mode == SamplingMode::NoClick && o == Outcome::Down) {
                continue;
            }
            Eigen::VectorXcd &next = stack[static_cast<std::size_t>(depth) + 1];
            next = cur;
            apply_branch_inplace(next, table, engine.channels(), o, 1.0);
            self(self, depth + 1, o == Outcome::Down ? key | (std::uint64_t{1} << depth) : key);
        }
    };
    recurse(recurse, 0, 0);
    return out;
}

inline std::uint64_t sequence_key(const TrajectoryRecord &rec) {
    std::uint64_t key = 0;
    for (std::size_t b = 0; b < rec.outcomes.size(); ++b) {
        if (rec.outcomes[b]) {
            key |= std::uint64_t{1} << b;
        }
    }
    return key;
}

/// TVD between two finite distributions given as (value, probability) lists, atoms matched within `tol`.
inline double discrete_tvd(const std::vector<std::pair<double, double>> &p, const std::vector<std::pair<double, double>> &q,
                           double tol = kAtomTolerance) {
    SampleSet all;
    std::vector<double> sign;
    for (const auto &[v, w] : p) {
        all.values.push_back(v);
        sign.push_back(+w);
    }
    for (const auto &[v, w] : q) {
        all.values.push_back(v);
        sign.push_back(-w);
    }
    std::vector<std::size_t> order(all.values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return all.values[a] < all.values[b];
    });
    double acc = 0.0;
    double cluster = 0.0;
    double last = -std::numeric_limits<double>::infinity();
    for (std::size_t idx : order) {
        if (all.values[idx] - last > tol) {
            acc += std::abs(cluster);
            cluster = 0.0;
        }
        cluster += sign[idx];
        last = all.values[idx];
    }
    acc += std::abs(cluster);
    return 0.5 * acc;
}

struct OracleReport {
    std::size_t sequences = 0;  // nonzero-probability sequences
    double probability_sum = 0.0;
    bool post_selected = false;  // no-click: one survivor carrying its own Born weight
    std::size_t samples = 0;
    double max_abs_deviation = 0.0;
    double max_sigma_ratio = 0.0;  // max |f - p| / sqrt(p(1-p)/n)
    double s_b_tvd = 0.0;
    std::vector<ExactSequence> exact;
    std::map<std::uint64_t, std::size_t> counts;

    bool sum_ok(double tol = 1e-12) const {
        if (post_selected) {
            return sequences == 1;
        }
        return std::abs(probability_sum - 1.0) <= tol;
    }
    bool sequences_ok(double sigmas = 3.0) const {
        return max_sigma_ratio <= sigmas;
    }
};

/// Exact enumeration against `samples` Monte Carlo trajectories of the same configuration.
inline OracleReport run_oracle(const TrajectoryEngine &engine, TrajectoryConfig cfg, std::size_t samples, int threads = 0) {
    OracleReport rep;
    StateVector init = engine.initial_state(cfg, 0);
    rep.exact = enumerate_sequences(engine, init, cfg.steps, cfg.sampling);
    for (const auto &s : rep.exact) {
        rep.probability_sum += s.probability;
    }
    rep.sequences = rep.exact.size();
    rep.post_selected = cfg.sampling == SamplingMode::NoClick;

    cfg.record_outcomes = true;
    cfg.record_every = cfg.steps;
    cfg.redraw_initial = false;
    auto records = run_ensemble(engine, cfg, samples, threads);
    rep.samples = samples;
    std::vector<double> sampled_sb;
    for (const auto &r : records) {
        ++rep.counts[sequence_key(r)];
        sampled_sb.push_back(r.final().S_B);
    }
    const double n = static_cast<double>(samples);
    std::map<std::uint64_t, double> exact_p;
    for (const auto &s : rep.exact) {
        exact_p[s.key] = cfg.sampling == SamplingMode::NoClick ? 1.0 : s.probability;
    }
    if (cfg.sampling != SamplingMode::ForcedUniform) {
        for (const auto &[key, p] : exact_p) {
            auto it = rep.counts.find(key);
            double f = it == rep.counts.end() ? 0.0 : static_cast<double>(it->second) / n;
            double dev = std::abs(f - p);
            rep.max_abs_deviation = std::max(rep.max_abs_deviation, dev);
            double sigma = std::sqrt(p * (1.0 - p) / n);
            if (sigma > 0.0) {
                rep.max_sigma_ratio = std::max(rep.max_sigma_ratio, dev / sigma);
            } else if (dev > 0.0) {
                rep.max_sigma_ratio = std::numeric_limits<double>::infinity();
            }
        }
        for (const auto &[key, c] : rep.counts) {
            if (!exact_p.count(key)) {
                rep.max_abs_deviation = std::max(rep.max_abs_deviation, static_cast<double>(c) / n);
                rep.max_sigma_ratio = std::numeric_limits<double>::infinity();
            }
        }
    }
    std::vector<std::pair<double, double>> exact_sb;
    for (const auto &s : rep.exact) {
        exact_sb.emplace_back(s.S_B, rep.post_selected ? 1.0 : s.probability / rep.probability_sum);
    }
    std::vector<std::pair<double, double>> mc_sb;
    for (double v : sampled_sb) {
        mc_sb.emplace_back(v, 1.0 / n);
    }
    rep.s_b_tvd = discrete_tvd(exact_sb, mc_sb);
    return rep;
}

}  // namespace qtraj

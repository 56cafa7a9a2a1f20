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

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qtraj/block_operators.hpp"
#include "qtraj/entanglement.hpp"
#include "qtraj/errors.hpp"
#include "qtraj/fock_basis.hpp"
#include "qtraj/rng.hpp"
#include "qtraj/state.hpp"

namespace qtraj {

inline constexpr double kNoClickFloor = 1e-14;
inline constexpr double kUnderflowFloor = 1e-300;
inline constexpr double kDefaultStationarityTol = 1e-10;

enum class SamplingMode { Born, ForcedUniform, NoClick };
enum class InitialKind { ProductFilled, RandomProduct, RandomSuperposition, EqualSuperposition };

inline std::string to_string(SamplingMode m) {
    switch (m) {
        case SamplingMode::Born:
            return "born";
        case SamplingMode::ForcedUniform:
            return "forced";
        default:
            return "no-click";
    }
}
inline SamplingMode parse_sampling(const std::string &s) {
    if (s == "born") {
        return SamplingMode::Born;
    }
    if (s == "forced" || s == "forced-uniform") {
        return SamplingMode::ForcedUniform;
    }
    if (s == "no-click" || s == "noclick") {
        return SamplingMode::NoClick;
    }
    throw ConfigError("unknown sampling mode '" + s + "' (expected born, forced or no-click)");
}
inline std::string to_string(InitialKind k) {
    switch (k) {
        case InitialKind::ProductFilled:
            return "product";
        case InitialKind::RandomProduct:
            return "random-product";
        case InitialKind::RandomSuperposition:
            return "random-superposition";
        default:
            return "equal-superposition";
    }
}
inline InitialKind parse_initial_kind(const std::string &s) {
    if (s == "product" || s == "p") {
        return InitialKind::ProductFilled;
    }
    if (s == "random-product" || s == "rp") {
        return InitialKind::RandomProduct;
    }
    if (s == "random-superposition" || s == "rs") {
        return InitialKind::RandomSuperposition;
    }
    if (s == "equal-superposition" || s == "s") {
        return InitialKind::EqualSuperposition;
    }
    throw ConfigError("unknown initial state '" + s + "'");
}

struct InitialStateSpec {
    InitialKind kind = InitialKind::ProductFilled;
    std::uint64_t seed = 0;
    bool signed_coefficients = false;  // random-superposition draws from [-1, 1) instead of [0, 1)
};

inline StateVector prepare_initial(const InitialStateSpec &spec, std::shared_ptr<const FockBasis> basis, Rng &rng) {
    StateVector s(basis);
    const std::size_t dim = basis->dimension();
    switch (spec.kind) {
        case InitialKind::ProductFilled:
            s.amps[basis->index_of(basis->layout().main_mask())] = 1.0;
            break;
        case InitialKind::RandomProduct:
            s.amps[static_cast<Eigen::Index>(rng.uniform_index(dim))] = 1.0;
            break;
        case InitialKind::RandomSuperposition:
            for (std::size_t k = 0; k < dim; ++k) {
                double u = rng.uniform();
                s.amps[static_cast<Eigen::Index>(k)] = spec.signed_coefficients ? 2.0 * u - 1.0 : u;
            }
            s.normalize();
            break;
        case InitialKind::EqualSuperposition:
            s.amps.setConstant(1.0 / std::sqrt(static_cast<double>(dim)));
            break;
    }
    return s;
}

inline StateVector prepare_initial(const InitialStateSpec &spec, std::shared_ptr<const FockBasis> basis) {
    Rng rng(spec.seed);
    return prepare_initial(spec, std::move(basis), rng);
}

struct MeasureResult {
    Outcome outcome;
    double p_taken;
};

/// Measures one block in place: draws the outcome, collapses and renormalizes.
inline MeasureResult measure_block(
    Eigen::VectorXcd &amps, const BlockTable &table, const ChannelSet &channels, SamplingMode mode, Rng &rng) {
    BranchProbabilities p = branch_probabilities(amps, table, channels);
    Outcome o;
    switch (mode) {
        case SamplingMode::Born:
            o = rng.uniform() < p.up ? Outcome::Up : Outcome::Down;
            break;
        case SamplingMode::ForcedUniform:
            o = rng.uniform() < 0.5 ? Outcome::Up : Outcome::Down;
            break;
        default:
            if (p.up < kNoClickFloor) {
                throw PostSelectionImpossible(
                    "no-click branch has probability " + std::to_string(p.up) + " at block " + std::to_string(table.addr.index));
            }
            o = Outcome::Up;
            break;
    }
    double taken = o == Outcome::Up ? p.up : p.down;
    if (taken < kUnderflowFloor) {
        throw NumericalUnderflow("selected branch probability below 1e-300 at block " + std::to_string(table.addr.index));
    }
    apply_branch_inplace(amps, table, channels, o, 1.0 / std::sqrt(taken));
    return MeasureResult{o, taken};
}

inline MeasureResult measure_block(
    StateVector &state, const BlockTable &table, const ChannelSet &channels, SamplingMode mode, Rng &rng) {
    require_normalized(state);
    return measure_block(state.amps, table, channels, mode, rng);
}

struct SweepResult {
    std::vector<Outcome> outcomes;
    double log_weight = 0.0;
    int clicks = 0;
};

/// One measurement step: blocks 1..L/2 in ascending order, boundary block last.
inline SweepResult sweep(
    Eigen::VectorXcd &amps, const std::vector<BlockTable> &tables, const ChannelSet &channels, SamplingMode mode, Rng &rng) {
    SweepResult r;
    r.outcomes.reserve(tables.size());
    for (const auto &t : tables) {
        MeasureResult m = measure_block(amps, t, channels, mode, rng);
        r.outcomes.push_back(m.outcome);
        r.log_weight += std::log(m.p_taken);
        r.clicks += m.outcome == Outcome::Down ? 1 : 0;
    }
    return r;
}

inline bool is_stationary(const Eigen::VectorXcd &prev, const Eigen::VectorXcd &next, double tol = kDefaultStationarityTol) {
    return std::abs(prev.dot(next)) > 1.0 - tol;
}
inline bool is_stationary(const StateVector &prev, const StateVector &next, double tol = kDefaultStationarityTol) {
    return is_stationary(prev.amps, next.amps, tol);
}

struct ModelSpec {
    ModelKind model = ModelKind::OneBody;
    int L = 8;
    double alpha_tilde = 0.0;
    Convention convention = Convention::BlockLocal;
};

inline int default_record_every(int steps) {
    return steps <= 1000 ? 1 : 10;
}

struct TrajectoryConfig {
    int steps = 100;
    SamplingMode sampling = SamplingMode::Born;
    InitialStateSpec initial;
    bool redraw_initial = false;
    std::uint64_t seed = 0;
    int record_every = 0;  // 0 selects default_record_every(steps)
    bool record_outcomes = true;
    bool track_stationarity = false;
    double stationarity_tol = kDefaultStationarityTol;
    bool keep_final_state = false;
    std::string config_tag;  // identifies the configuration an ensemble was generated from

    int effective_record_every() const {
        return record_every > 0 ? record_every : default_record_every(steps);
    }
};

struct EntropySnapshot {
    int step = 0;
    double S_B = 0.0;
    double S_Bprime = 0.0;
    double S_C = 0.0;
    double I_BB = 0.0;
    int clicks = 0;  // clicks during this step
    double log_weight = 0.0;  // cumulative
};

struct TrajectoryRecord {
    std::uint64_t trajectory_id = 0;
    int steps = 0;
    int blocks = 0;
    std::vector<bool> outcomes;  // index (m-1)*blocks + (i-1); true = down
    std::vector<std::uint8_t> clicks_per_step;  // index m-1
    double log_born_weight = 0.0;
    long click_count = 0;
    std::vector<EntropySnapshot> series;  // step 0, every record_every step, and the final step
    int last_nonstationary_step = -1;  // -1 when not tracked
    std::optional<StateVector> final_state;
    std::string config_tag;

    bool outcome_down(int step, int block) const {
        return outcomes[static_cast<std::size_t>(step - 1) * static_cast<std::size_t>(blocks) + static_cast<std::size_t>(block - 1)];
    }
    const EntropySnapshot &final() const {
        return series.back();
    }
    /// Snapshot at a recorded step; throws if the step was not recorded.
    const EntropySnapshot &at(int step) const {
        for (const auto &s : series) {
            if (s.step == step) {
                return s;
            }
        }
        throw ConfigError("step " + std::to_string(step) + " was not recorded");
    }
};

inline double click_fraction(const TrajectoryRecord &rec) {
    if (rec.steps <= 0 || rec.blocks <= 0) {
        throw ConfigError("click_fraction: empty record");
    }
    return static_cast<double>(rec.click_count) / (static_cast<double>(rec.steps) * rec.blocks);
}

/// Precomputed basis, block tables, channels and entropy cuts for one model.
class TrajectoryEngine {
   public:
    explicit TrajectoryEngine(const ModelSpec &spec)
        : spec_(spec),
          basis_(enumerate_basis(spec.L)),
          tables_(build_block_tables(*basis_)),
          channels_(make_channel_set(spec.model, spec.alpha_tilde, spec.convention)),
          probe_(basis_, spec.convention) {
    }

    const ModelSpec &spec() const {
        return spec_;
    }
    const std::shared_ptr<const FockBasis> &basis() const {
        return basis_;
    }
    const std::vector<BlockTable> &tables() const {
        return tables_;
    }
    const ChannelSet &channels() const {
        return channels_;
    }
    const EntropyProbe &probe() const {
        return probe_;
    }

    StateVector initial_state(const TrajectoryConfig &cfg, std::uint64_t trajectory_id) const {
        InitialStateSpec spec = cfg.initial;
        if (cfg.redraw_initial) {
            spec.seed = stream_seed(cfg.initial.seed, trajectory_id);
        }
        return prepare_initial(spec, basis_);
    }

    TrajectoryRecord run(const TrajectoryConfig &cfg, std::uint64_t trajectory_id) const {
        return run(cfg, trajectory_id, initial_state(cfg, trajectory_id));
    }

    TrajectoryRecord run(const TrajectoryConfig &cfg, std::uint64_t trajectory_id, StateVector state) const {
        if (cfg.steps < 1) {
            throw ConfigError("steps must be >= 1");
        }
        if (state.dimension() != basis_->dimension()) {
            throw ConfigError("initial state does not match the engine basis");
        }
        require_normalized(state);
        Rng rng(cfg.seed, trajectory_id);
        const int every = cfg.effective_record_every();
        const int blocks = static_cast<int>(tables_.size());

        TrajectoryRecord rec;
        rec.trajectory_id = trajectory_id;
        rec.steps = cfg.steps;
        rec.blocks = blocks;
        rec.config_tag = cfg.config_tag;
        if (cfg.record_outcomes) {
            rec.outcomes.reserve(static_cast<std::size_t>(cfg.steps) * blocks);
        }
        rec.clicks_per_step.reserve(static_cast<std::size_t>(cfg.steps));
        record(rec, 0, 0, state.amps);

        Eigen::VectorXcd prev;
        if (cfg.track_stationarity) {
            rec.last_nonstationary_step = 0;
        }
        for (int m = 1; m <= cfg.steps; ++m) {
            if (cfg.track_stationarity) {
                prev = state.amps;
            }
            SweepResult r = sweep(state.amps, tables_, channels_, cfg.sampling, rng);
            rec.log_born_weight += r.log_weight;
            rec.click_count += r.clicks;
            rec.clicks_per_step.push_back(static_cast<std::uint8_t>(r.clicks));
            if (cfg.record_outcomes) {
                for (Outcome o : r.outcomes) {
                    rec.outcomes.push_back(o == Outcome::Down);
                }
            }
            if (cfg.track_stationarity && !is_stationary(prev, state.amps, cfg.stationarity_tol)) {
                rec.last_nonstationary_step = m;
            }
            if (m % every == 0 || m == cfg.steps) {
                record(rec, m, r.clicks, state.amps);
            }
        }
        if (cfg.keep_final_state) {
            rec.final_state = std::move(state);
        }
        return rec;
    }

   private:
    void record(TrajectoryRecord &rec, int step, int clicks, const Eigen::VectorXcd &amps) const {
        EntropyValues v = probe_(amps);
        rec.series.push_back(EntropySnapshot{step, v.S_B, v.S_Bprime, v.S_C, v.I_BB, clicks, rec.log_born_weight});
    }

    ModelSpec spec_;
    std::shared_ptr<const FockBasis> basis_;
    std::vector<BlockTable> tables_;
    ChannelSet channels_;
    EntropyProbe probe_;
};

}  // namespace qtraj

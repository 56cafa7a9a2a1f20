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
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "qtraj/block_operators.hpp"
#include "qtraj/config.hpp"
#include "qtraj/ensemble.hpp"
#include "qtraj/errors.hpp"
#include "qtraj/oracle.hpp"
#include "qtraj/output.hpp"
#include "qtraj/statistics.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

/// Ensemble sizes used by the scaling campaign when n_traj is not given.
inline int default_ensemble_size(int L) {
    switch (L) {
        case 8:
            return 6000;
        case 12:
            return 4000;
        case 16:
            return 2000;
        case 20:
            return 1000;
        default:
            return 1000;
    }
}

inline std::string config_tag(const RunConfig &cfg) {
    ordered_json j = to_json(cfg);
    j.erase("output_dir");
    j.erase("threads");
    return j.dump();
}

inline TrajectoryConfig trajectory_config_for(const RunConfig &cfg) {
    TrajectoryConfig t = cfg.trajectory_config();
    t.config_tag = config_tag(cfg);
    return t;
}

/// Recorded steps of a trajectory configuration, ascending.
inline std::vector<int> recorded_steps(const TrajectoryConfig &t) {
    std::vector<int> out{0};
    int every = t.effective_record_every();
    for (int m = every; m < t.steps; m += every) {
        out.push_back(m);
    }
    out.push_back(t.steps);
    return out;
}

/// Latest recorded step not after t.
inline int snap_to_recorded(const std::vector<int> &steps, int t) {
    auto it = std::upper_bound(steps.begin(), steps.end(), t);
    return it == steps.begin() ? steps.front() : *(it - 1);
}

inline int cmd_run(const RunConfig &cfg, std::ostream &log) {
    if (cfg.n_traj > 1) {
        throw ConfigError("run: n_traj must be 1 (use 'ensemble' for more)");
    }
    auto dir = ensure_directory(cfg.output_dir);
    TrajectoryEngine engine(cfg.model_spec());
    TrajectoryConfig t = trajectory_config_for(cfg);
    t.record_outcomes = true;
    TrajectoryRecord rec = engine.run(t, 0);
    ordered_json meta = output_metadata(cfg, "run");

    CsvWriter traj(dir / "trajectory.csv", meta, {"t_m", "S_B", "S_Bprime", "S_C", "I_BB", "clicks_this_step", "log_born_weight"});
    for (const auto &s : rec.series) {
        traj.row(s.step, s.S_B, s.S_Bprime, s.S_C, s.I_BB, s.clicks, s.log_weight);
    }
    traj.close();
    CsvWriter outc(dir / "outcomes.csv", meta, {"t_m", "block", "outcome"});
    for (int m = 1; m <= rec.steps; ++m) {
        for (int i = 1; i <= rec.blocks; ++i) {
            outc.row(m, i, rec.outcome_down(m, i) ? 1 : 0);
        }
    }
    outc.close();
    log << "run: " << rec.steps << " steps, " << rec.click_count << " clicks, final S_B " << format_double(rec.final().S_B) << "\n";
    return kExitOk;
}

/// Default KDE time stamps: 0 and steps/16, /8, /4, /2, final.
inline std::vector<int> default_kde_times(int steps) {
    std::set<int> s{0, steps / 16, steps / 8, steps / 4, steps / 2, steps};
    return {s.begin(), s.end()};
}

inline std::vector<std::size_t> ipr_sizes(std::size_t n) {
    std::vector<std::size_t> out;
    for (std::size_t base = 10; base <= n; base *= 10) {
        for (std::size_t f : {1, 2, 5}) {
            if (f * base <= n) {
                out.push_back(f * base);
            }
        }
    }
    if (out.empty() || out.back() != n) {
        out.push_back(n);
    }
    return out;
}

inline ordered_json ensemble_summary(const std::vector<TrajectoryRecord> &records, const TrajectoryConfig &t) {
    ordered_json s;
    const int final_step = t.steps;
    ordered_json finals;
    for (Observable o : {Observable::S_B, Observable::S_Bprime, Observable::S_C, Observable::I_BB}) {
        MeanStderr m = ensemble_average(records, o, final_step);
        finals[to_string(o)] = {{"mean", m.mean}, {"stderr", m.stderr_}};
    }
    s["n_traj"] = records.size();
    s["final_step"] = final_step;
    s["final"] = finals;
    ordered_json window;
    int lo = snap_to_recorded(recorded_steps(t), final_step / 2);
    for (Observable o : {Observable::S_B, Observable::S_Bprime, Observable::S_C, Observable::I_BB}) {
        MeanStderr m = long_time_average(records, o, lo, final_step);
        window[to_string(o)] = {{"mean", m.mean}, {"stderr", m.stderr_}};
    }
    s["long_time_window"] = {lo, final_step};
    s["long_time"] = window;

    std::vector<double> sb = values_at(records, Observable::S_B, final_step);
    ordered_json ipr_json = ordered_json::array();
    for (auto [n, v] : ipr_curve(sb, ipr_sizes(sb.size()))) {
        ipr_json.push_back({{"N_t", n}, {"ipr", v}});
    }
    s["ipr_tolerance"] = kAtomTolerance;
    s["ipr_vs_N_t"] = ipr_json;

    constexpr int kBins = 20;
    std::vector<int> hist(kBins, 0);
    double mean_cf = 0.0;
    for (const auto &r : records) {
        double cf = click_fraction(r);
        mean_cf += cf;
        hist[std::min(kBins - 1, static_cast<int>(cf * kBins))]++;
    }
    s["click_fraction"] = {{"mean", mean_cf / static_cast<double>(records.size())}, {"bins", kBins}, {"histogram", hist}};

    std::vector<double> w = relative_born_weights(records);
    std::size_t best = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
    s["relative_born_weights"] = w;
    s["max_weight_trajectory"] = {
        {"trajectory_id", records[best].trajectory_id},
        {"log_born_weight", records[best].log_born_weight},
        {"clicks", records[best].click_count},
        {"final_S_B", records[best].final().S_B}};
    if (t.track_stationarity) {
        int latest = 0;
        for (const auto &r : records) {
            latest = std::max(latest, r.last_nonstationary_step);
        }
        s["last_nonstationary_step_max"] = latest;
    }
    return s;
}

inline int cmd_ensemble(const RunConfig &cfg, std::ostream &log) {
    int n = cfg.n_traj == 0 ? 100 : cfg.n_traj;
    if (n < 2) {
        throw ConfigError("ensemble: n_traj must be >= 2");
    }
    auto dir = ensure_directory(cfg.output_dir);
    TrajectoryEngine engine(cfg.model_spec());
    TrajectoryConfig t = trajectory_config_for(cfg);
    t.record_outcomes = false;
    t.track_stationarity = cfg.model == ModelKind::ThreeBody;
    auto records = run_ensemble(engine, t, static_cast<std::size_t>(n), cfg.threads);
    ordered_json meta = output_metadata(cfg, "ensemble");

    CsvWriter ent(dir / "ensemble_entropy.csv", meta, {"trajectory_id", "t_m", "S_B", "S_C", "I_BB"});
    for (const auto &r : records) {
        for (const auto &s : r.series) {
            ent.row(r.trajectory_id, s.step, s.S_B, s.S_C, s.I_BB);
        }
    }
    ent.close();

    std::vector<int> steps = recorded_steps(t);
    std::vector<int> times = cfg.kde_times.empty() ? default_kde_times(cfg.steps) : cfg.kde_times;
    std::set<int> snapped;
    for (int tm : times) {
        snapped.insert(snap_to_recorded(steps, tm));
    }
    for (int tm : snapped) {
        KdeCurve c = kde(SampleSet(values_at(records, Observable::S_B, tm)));
        CsvWriter k(dir / ("kde_" + std::to_string(tm) + ".csv"), meta, {"grid", "density"},
                    {{"bandwidth", format_double(c.bandwidth)}, {"bandwidth_rule", "silverman"}, {"degenerate", c.degenerate ? "1" : "0"}});
        for (std::size_t g = 0; g < c.grid.size(); ++g) {
            k.row(c.grid[g], c.density[g]);
        }
        k.close();
    }

    KdeCurve final_kde = kde(SampleSet(values_at(records, Observable::S_B, cfg.steps)));
    CsvWriter tv(dir / "tvd_series.csv", meta, {"t_m", "tvd_vs_final"});
    std::size_t stride = std::max<std::size_t>(1, steps.size() / 100);
    for (std::size_t j = 0; j < steps.size(); j += stride) {
        tv.row(steps[j], tvd(kde(SampleSet(values_at(records, Observable::S_B, steps[j]))), final_kde));
    }
    if ((steps.size() - 1) % stride != 0) {
        tv.row(steps.back(), 0.0);
    }
    tv.close();

    ordered_json summary;
    summary["metadata"] = meta;
    summary["summary"] = ensemble_summary(records, t);
    write_json(dir / "summary.json", summary);
    log << "ensemble: " << n << " trajectories, final mean S_B "
        << format_double(summary["summary"]["final"]["S_B"]["mean"].get<double>()) << "\n";
    return kExitOk;
}

inline int cmd_scaling(const RunConfig &cfg, std::ostream &log) {
    for (int L : cfg.L_list) {
        if (L != 8 && L != 12 && L != 16 && L != 20) {
            throw ConfigError("scaling: L_list entries must be in {8, 12, 16, 20}, got " + std::to_string(L));
        }
    }
    auto dir = ensure_directory(cfg.output_dir);
    ordered_json meta = output_metadata(cfg, "scaling");
    CsvWriter out(dir / "scaling.csv", meta, {"L", "observable", "mean", "stderr"});
    for (int L : cfg.L_list) {
        RunConfig c = cfg;
        c.L = L;
        int n = cfg.n_traj > 0 ? cfg.n_traj : default_ensemble_size(L);
        TrajectoryEngine engine(c.model_spec());
        TrajectoryConfig t = trajectory_config_for(c);
        t.record_outcomes = false;
        t.record_every = cfg.steps;
        auto records = run_ensemble(engine, t, static_cast<std::size_t>(n), cfg.threads);
        for (Observable o : {Observable::S_B, Observable::S_C, Observable::I_BB}) {
            MeanStderr m = ensemble_average(records, o, cfg.steps);
            out.row(L, to_string(o), m.mean, m.stderr_);
        }
        log << "scaling: L=" << L << " done (" << n << " trajectories)\n";
    }
    out.close();
    return kExitOk;
}

inline int cmd_oracle(const RunConfig &cfg, std::ostream &log) {
    if (cfg.L != 4) {
        throw ConfigError("oracle: L must be 4");
    }
    if (cfg.steps > 3) {
        throw ConfigError("oracle: steps must be <= 3");
    }
    auto dir = ensure_directory(cfg.output_dir);
    TrajectoryEngine engine(cfg.model_spec());
    TrajectoryConfig t = trajectory_config_for(cfg);
    OracleReport rep = run_oracle(engine, t, static_cast<std::size_t>(cfg.samples), cfg.threads);
    bool pass = rep.sum_ok() && rep.sequences_ok() && rep.s_b_tvd < 0.01;
    ordered_json doc;
    doc["metadata"] = output_metadata(cfg, "oracle");
    doc["sequences"] = rep.sequences;
    doc["probability_sum"] = rep.probability_sum;
    doc["post_selected"] = rep.post_selected;
    doc["samples"] = rep.samples;
    doc["max_abs_deviation"] = rep.max_abs_deviation;
    doc["max_sigma_ratio"] = std::isfinite(rep.max_sigma_ratio) ? ordered_json(rep.max_sigma_ratio) : ordered_json("inf");
    doc["s_b_tvd"] = rep.s_b_tvd;
    ordered_json seqs = ordered_json::array();
    for (const auto &s : rep.exact) {
        auto it = rep.counts.find(s.key);
        std::size_t c = it == rep.counts.end() ? 0 : it->second;
        seqs.push_back({{"key", s.key}, {"probability", s.probability}, {"S_B", s.S_B}, {"count", c}});
    }
    doc["exact"] = seqs;
    doc["pass"] = pass;
    write_json(dir / "oracle_report.json", doc);
    log << "oracle: " << rep.sequences << " sequences, sum " << format_double(rep.probability_sum) << ", max sigma "
        << rep.max_sigma_ratio << ", S_B TVD " << rep.s_b_tvd << (pass ? " PASS" : " FAIL") << "\n";
    return pass ? kExitOk : kExitNumerical;
}

struct KrausCheck {
    std::string name;
    double residual;
    bool pass;
};

/// Structural checks of the block channel of one model at one coupling.
inline std::vector<KrausCheck> kraus_checks(ModelKind model, double alpha_tilde, double tol = 1e-12) {
    std::vector<KrausCheck> out;
    auto add = [&](const std::string &name, double r, double limit) {
        out.push_back(KrausCheck{name, r, r <= limit});
    };
    const BlockChannel bulk = build_channel(model, alpha_tilde);
    add("completeness", completeness_residual(bulk), tol);
    for (int r : {+1, -1}) {
        add("completeness_boundary_" + std::string(r > 0 ? "even" : "odd"), completeness_residual(build_channel(model, alpha_tilde, boundary_signs(r))), tol);
    }
    double unitarity = 0.0;
    for (auto [ord, r] : {std::pair{BlockOrdering::Bulk, 1}, std::pair{BlockOrdering::Boundary, 1}, std::pair{BlockOrdering::Boundary, -1}}) {
        Matrix16 u = block_unitary(model, alpha_tilde, ord, r);
        unitarity = std::max(unitarity, (u.adjoint() * u - Matrix16::Identity()).cwiseAbs().maxCoeff());
    }
    add("unitarity", unitarity, tol);
    double expo = exponentiation_residual(bulk, BlockOrdering::Bulk, 1);
    expo = std::max(expo, exponentiation_residual(build_channel(model, alpha_tilde, boundary_signs(1)), BlockOrdering::Boundary, 1));
    expo = std::max(expo, exponentiation_residual(build_channel(model, alpha_tilde, boundary_signs(-1)), BlockOrdering::Boundary, -1));
    add("exponentiation", expo, tol);
    const BlockChannel shifted = build_channel(model, alpha_tilde + 2.0 * M_PI);
    double period = 0.0;
    for (int k = 0; k < 2; ++k) {
        period = std::max(period, (shifted.up[k] - bulk.up[k]).cwiseAbs().maxCoeff());
        period = std::max(period, (shifted.down[k] - bulk.down[k]).cwiseAbs().maxCoeff());
    }
    add("periodicity", period, tol);
    double ph = 0.0;
    for (Outcome o : {Outcome::Up, Outcome::Down}) {
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                ph = std::max(ph, std::abs(bulk.kraus(1, o)(kParticleHole[a], kParticleHole[b]) - bulk.kraus(0, o)(a, b)));
            }
        }
    }
    add("particle_hole", ph, tol);
    double reduced = std::remainder(alpha_tilde - M_PI / 2, 2.0 * M_PI);
    if (model == ModelKind::OneBody && std::abs(reduced) < 1e-12) {
        double proj = 0.0;
        for (int sector = 1; sector <= 2; ++sector) {
            proj = std::max(proj, (bulk.up[sector - 1] - projective_kraus(sector).at(0)).cwiseAbs().maxCoeff());
        }
        add("no_click_projective", proj, 1e-15);
    }
    return out;
}

inline int cmd_kraus_check(const RunConfig &cfg, std::ostream &log) {
    auto checks = kraus_checks(cfg.model, cfg.alpha_tilde);
    bool all = true;
    ordered_json doc;
    doc["metadata"] = output_metadata(cfg, "kraus-check");
    ordered_json arr = ordered_json::array();
    for (const auto &c : checks) {
        log << (c.pass ? "PASS " : "FAIL ") << c.name << " residual " << format_double(c.residual) << "\n";
        arr.push_back({{"check", c.name}, {"residual", c.residual}, {"pass", c.pass}});
        all = all && c.pass;
    }
    doc["checks"] = arr;
    doc["pass"] = all;
    auto dir = ensure_directory(cfg.output_dir);
    write_json(dir / "kraus_check.json", doc);
    return all ? kExitOk : kExitNumerical;
}

}  // namespace qtraj

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
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "qtraj/errors.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

inline constexpr int kKdeGridPoints = 2048;
inline constexpr double kKdeBandwidthFloor = 1e-3;
inline constexpr double kAtomTolerance = 1e-6;

struct SampleSet {
    std::vector<double> values;
    std::vector<double> weights;  // empty = uniform

    SampleSet() = default;
    explicit SampleSet(std::vector<double> v) : values(std::move(v)) {
    }
    SampleSet(std::vector<double> v, std::vector<double> w) : values(std::move(v)), weights(std::move(w)) {
        validate();
    }

    std::size_t size() const {
        return values.size();
    }
    double weight(std::size_t i) const {
        return weights.empty() ? 1.0 : weights[i];
    }
    void validate() const {
        if (!weights.empty() && weights.size() != values.size()) {
            throw ConfigError("sample weights do not match values");
        }
        double total = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!std::isfinite(values[i])) {
                throw ConfigError("non-finite sample value");
            }
            if (weight(i) < 0.0) {
                throw ConfigError("negative sample weight");
            }
            total += weight(i);
        }
        if (!values.empty() && !(total > 0.0)) {
            throw ConfigError("sample weights sum to zero");
        }
    }
};

inline double mean_of(const std::vector<double> &v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Sample standard deviation (n-1 denominator); 0 for fewer than two values.
inline double stddev_of(const std::vector<double> &v) {
    if (v.size() < 2) {
        return 0.0;
    }
    // Shifted by the first value so identical samples give exactly 0.
    const double shift = v.front();
    double sum = 0.0;
    for (double x : v) {
        sum += x - shift;
    }
    const double m = sum / static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) {
        acc += (x - shift - m) * (x - shift - m);
    }
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

/// Linear-interpolation quantile of sorted data.
inline double quantile_sorted(const std::vector<double> &sorted, double q) {
    if (sorted.empty()) {
        throw ConfigError("quantile of empty sample");
    }
    double pos = q * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct Bandwidth {
    double h = kKdeBandwidthFloor;
    bool degenerate = false;
};

/// Silverman's rule 0.9 min(sigma, IQR/1.34) n^(-1/5); sigma alone when IQR is 0, floor when both are 0.
inline Bandwidth silverman_bandwidth(const std::vector<double> &values) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.empty() || sorted.front() == sorted.back()) {
        return Bandwidth{kKdeBandwidthFloor, true};
    }
    double sigma = stddev_of(sorted);
    double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double spread = sigma;
    if (iqr > 0.0) {
        spread = std::min(sigma, iqr / 1.34);
    }
    if (!(spread > 0.0)) {
        return Bandwidth{kKdeBandwidthFloor, true};
    }
    return Bandwidth{0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2), false};
}

struct KdeCurve {
    std::vector<double> grid;
    std::vector<double> density;
    double bandwidth = 0.0;
    bool degenerate = false;
};

inline double trapezoid(const std::vector<double> &x, const std::vector<double> &y) {
    double acc = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    }
    return acc;
}

/// Gaussian KDE evaluated at arbitrary points (not renormalized).
inline double kde_point(const SampleSet &s, double h, double x) {
    const double norm = 1.0 / (h * std::sqrt(2.0 * M_PI));
    double acc = 0.0;
    double wsum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double z = (x - s.values[i]) / h;
        acc += s.weight(i) * std::exp(-0.5 * z * z);
        wsum += s.weight(i);
    }
    return norm * acc / wsum;
}

inline KdeCurve kde(const SampleSet &samples, int grid_points = kKdeGridPoints) {
    if (samples.size() < 2) {
        throw ConfigError("kde needs at least 2 samples");
    }
    samples.validate();
    Bandwidth bw = silverman_bandwidth(samples.values);
    auto [mn, mx] = std::minmax_element(samples.values.begin(), samples.values.end());
    double lo = std::max(0.0, *mn - 3.0 * bw.h);
    double hi = *mx + 3.0 * bw.h;
    KdeCurve c;
    c.bandwidth = bw.h;
    c.degenerate = bw.degenerate;
    c.grid.resize(static_cast<std::size_t>(grid_points));
    c.density.resize(static_cast<std::size_t>(grid_points));
    for (int g = 0; g < grid_points; ++g) {
        double x = lo + (hi - lo) * g / (grid_points - 1);
        c.grid[g] = x;
        c.density[g] = kde_point(samples, bw.h, x);
    }
    double z = trapezoid(c.grid, c.density);
    for (double &d : c.density) {
        d /= z;
    }
    return c;
}

/// Linear interpolation of a curve; zero outside its grid.
inline double interpolate(const KdeCurve &c, double x) {
    if (c.grid.empty() || x < c.grid.front() || x > c.grid.back()) {
        return 0.0;
    }
    auto it = std::lower_bound(c.grid.begin(), c.grid.end(), x);
    std::size_t j = static_cast<std::size_t>(it - c.grid.begin());
    if (j == 0) {
        return c.density[0];
    }
    double x0 = c.grid[j - 1];
    double x1 = c.grid[j];
    double t = x1 > x0 ? (x - x0) / (x1 - x0) : 0.0;
    return c.density[j - 1] + t * (c.density[j] - c.density[j - 1]);
}

/// 0.5 * integral |p - q| on the union of both grids.
inline double tvd(const KdeCurve &p, const KdeCurve &q) {
    std::vector<double> grid;
    grid.reserve(p.grid.size() + q.grid.size());
    std::merge(p.grid.begin(), p.grid.end(), q.grid.begin(), q.grid.end(), std::back_inserter(grid));
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    std::vector<double> diff(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        diff[i] = std::abs(interpolate(p, grid[i]) - interpolate(q, grid[i]));
    }
    return std::clamp(0.5 * trapezoid(grid, diff), 0.0, 1.0);
}

/// Histogram TVD with shared equal-width bins over the joint range.
inline double histogram_tvd(const SampleSet &a, const SampleSet &b, int bins = 50) {
    if (a.size() == 0 || b.size() == 0) {
        throw ConfigError("histogram_tvd: empty sample set");
    }
    double lo = std::min(*std::min_element(a.values.begin(), a.values.end()), *std::min_element(b.values.begin(), b.values.end()));
    double hi = std::max(*std::max_element(a.values.begin(), a.values.end()), *std::max_element(b.values.begin(), b.values.end()));
    double width = hi > lo ? (hi - lo) / bins : 1.0;
    auto hist = [&](const SampleSet &s) {
        std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
        double total = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            int k = std::min(bins - 1, static_cast<int>((s.values[i] - lo) / width));
            h[k] += s.weight(i);
            total += s.weight(i);
        }
        for (double &x : h) {
            x /= total;
        }
        return h;
    };
    auto ha = hist(a);
    auto hb = hist(b);
    double acc = 0.0;
    for (int k = 0; k < bins; ++k) {
        acc += std::abs(ha[k] - hb[k]);
    }
    return 0.5 * acc;
}

struct Atom {
    double value;
    double probability;
    std::size_t count;
};

struct DiscreteDistribution {
    std::vector<Atom> atoms;  // ascending value
    double tolerance = kAtomTolerance;

    const Atom &modal() const {
        if (atoms.empty()) {
            throw ConfigError("empty distribution");
        }
        return *std::max_element(atoms.begin(), atoms.end(), [](const Atom &a, const Atom &b) {
            return a.probability < b.probability;
        });
    }
};

/// Single-linkage clustering of values with gap threshold `tol`.
inline DiscreteDistribution cluster_atoms(const SampleSet &samples, double tol = kAtomTolerance) {
    if (samples.size() == 0) {
        throw ConfigError("cluster_atoms: empty sample set");
    }
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return samples.values[a] < samples.values[b];
    });
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        total += samples.weight(i);
    }
    DiscreteDistribution d;
    d.tolerance = tol;
    double wsum = 0.0;
    double vsum = 0.0;
    std::size_t count = 0;
    double last = 0.0;
    auto flush = [&]() {
        if (count > 0) {
            d.atoms.push_back(Atom{vsum / wsum, wsum / total, count});
        }
        wsum = vsum = 0.0;
        count = 0;
    };
    for (std::size_t idx : order) {
        double v = samples.values[idx];
        if (count > 0 && v - last > tol) {
            flush();
        }
        double w = samples.weight(idx);
        if (w > 0.0) {
            wsum += w;
            vsum += w * v;
            ++count;
        }
        last = v;
    }
    flush();
    return d;
}

inline double ipr(const DiscreteDistribution &d) {
    double acc = 0.0;
    for (const auto &a : d.atoms) {
        acc += a.probability * a.probability;
    }
    return acc;
}

inline double ipr(const SampleSet &samples, double tol = kAtomTolerance) {
    return ipr(cluster_atoms(samples, tol));
}

/// IPR of the first N samples for each requested N.
inline std::vector<std::pair<std::size_t, double>> ipr_curve(
    const std::vector<double> &values, const std::vector<std::size_t> &sizes, double tol = kAtomTolerance) {
    std::vector<std::pair<std::size_t, double>> out;
    for (std::size_t n : sizes) {
        if (n == 0 || n > values.size()) {
            throw ConfigError("ipr_curve: ensemble size out of range");
        }
        out.emplace_back(n, ipr(SampleSet(std::vector<double>(values.begin(), values.begin() + static_cast<long>(n))), tol));
    }
    return out;
}

inline std::vector<double> relative_born_weights(const std::vector<double> &log_weights) {
    if (log_weights.empty()) {
        throw ConfigError("relative_born_weights: empty ensemble");
    }
    double mx = *std::max_element(log_weights.begin(), log_weights.end());
    std::vector<double> out;
    out.reserve(log_weights.size());
    for (double lw : log_weights) {
        out.push_back(std::exp(lw - mx));
    }
    return out;
}

inline std::vector<double> relative_born_weights(const std::vector<TrajectoryRecord> &records) {
    std::vector<double> lw;
    lw.reserve(records.size());
    for (const auto &r : records) {
        lw.push_back(r.log_born_weight);
    }
    return relative_born_weights(lw);
}

enum class Observable { S_B, S_Bprime, S_C, I_BB };

inline std::string to_string(Observable o) {
    switch (o) {
        case Observable::S_B:
            return "S_B";
        case Observable::S_Bprime:
            return "S_Bprime";
        case Observable::S_C:
            return "S_C";
        default:
            return "I_BB";
    }
}

inline double observable_of(const EntropySnapshot &s, Observable o) {
    switch (o) {
        case Observable::S_B:
            return s.S_B;
        case Observable::S_Bprime:
            return s.S_Bprime;
        case Observable::S_C:
            return s.S_C;
        default:
            return s.I_BB;
    }
}

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

inline MeanStderr mean_stderr(const std::vector<double> &v) {
    MeanStderr m;
    m.n = v.size();
    m.mean = mean_of(v);
    m.stderr_ = v.size() < 2 ? 0.0 : stddev_of(v) / std::sqrt(static_cast<double>(v.size()));
    return m;
}

inline void require_shared_config(const std::vector<TrajectoryRecord> &records) {
    if (records.empty()) {
        throw ConfigError("empty ensemble");
    }
    for (const auto &r : records) {
        if (r.config_tag != records.front().config_tag) {
            throw ConfigError("ensemble mixes records from different configurations");
        }
    }
}

/// Values of an observable at a recorded step across the ensemble.
inline std::vector<double> values_at(const std::vector<TrajectoryRecord> &records, Observable o, int step) {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto &r : records) {
        out.push_back(observable_of(r.at(step), o));
    }
    return out;
}

inline MeanStderr ensemble_average(const std::vector<TrajectoryRecord> &records, Observable o, int step) {
    require_shared_config(records);
    return mean_stderr(values_at(records, o, step));
}

/// Samples of an observable at the recorded steps of one record inside [t_lo, t_hi].
inline SampleSet time_window_distribution(const TrajectoryRecord &rec, int t_lo, int t_hi, Observable o = Observable::S_B) {
    if (t_lo < 0 || t_hi > rec.steps || t_lo > t_hi) {
        throw ConfigError("time window [" + std::to_string(t_lo) + ", " + std::to_string(t_hi) + "] outside the record");
    }
    SampleSet s;
    for (const auto &snap : rec.series) {
        if (snap.step >= t_lo && snap.step <= t_hi) {
            s.values.push_back(observable_of(snap, o));
        }
    }
    return s;
}

/// Ensemble mean of per-trajectory time averages over [t_lo, t_hi].
inline MeanStderr long_time_average(const std::vector<TrajectoryRecord> &records, Observable o, int t_lo, int t_hi) {
    require_shared_config(records);
    std::vector<double> per;
    per.reserve(records.size());
    for (const auto &r : records) {
        per.push_back(mean_of(time_window_distribution(r, t_lo, t_hi, o).values));
    }
    return mean_stderr(per);
}

}  // namespace qtraj

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
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qtraj/block_operators.hpp"
#include "qtraj/errors.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

using ordered_json = nlohmann::ordered_json;

/// Parses a decimal or a rational multiple of pi ("pi", "pi/4", "3pi/4", "3*pi/4", "-pi/2").
inline double parse_alpha(const std::string &text) {
    static const std::regex pi_form(R"(^\s*([+-]?)\s*([0-9]+)?\s*\*?\s*pi\s*(?:/\s*([0-9]+))?\s*$)");
    std::smatch m;
    if (std::regex_match(text, m, pi_form)) {
        double num = m[2].matched ? std::stod(m[2].str()) : 1.0;
        double den = m[3].matched ? std::stod(m[3].str()) : 1.0;
        if (den == 0.0) {
            throw ConfigError("alpha_tilde '" + text + "' divides by zero");
        }
        double v = num * M_PI / den;
        return m[1].str() == "-" ? -v : v;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception &) {
        throw ConfigError("alpha_tilde '" + text + "' is neither a number nor a multiple of pi");
    }
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) {
        ++used;
    }
    if (used != text.size() || !std::isfinite(v)) {
        throw ConfigError("alpha_tilde '" + text + "' is neither a number nor a multiple of pi");
    }
    return v;
}

struct RunConfig {
    ModelKind model = ModelKind::OneBody;
    int L = 8;
    std::string alpha_text = "pi/4";
    double alpha_tilde = M_PI / 4;
    int steps = 100;
    int n_traj = 0;  // 0: command default
    InitialStateSpec initial{InitialKind::ProductFilled, 1, false};
    SamplingMode sampling = SamplingMode::Born;
    Convention convention = Convention::BlockLocal;
    bool redraw_initial = false;
    std::uint64_t seed = 1;
    int record_every = 0;  // 0: 1 for steps <= 1000, else 10
    std::string output_dir = ".";
    int threads = 0;  // 0: hardware concurrency
    std::vector<int> L_list{8, 12, 16, 20};
    std::vector<int> kde_times;  // empty: a default ladder ending at the final step
    int samples = 100000;  // oracle Monte Carlo draws

    ModelSpec model_spec() const {
        return ModelSpec{model, L, alpha_tilde, convention};
    }
    TrajectoryConfig trajectory_config() const {
        TrajectoryConfig c;
        c.steps = steps;
        c.sampling = sampling;
        c.initial = initial;
        c.redraw_initial = redraw_initial;
        c.seed = seed;
        c.record_every = record_every;
        return c;
    }
};

inline ordered_json to_json(const RunConfig &c) {
    ordered_json j;
    j["model"] = to_string(c.model);
    j["L"] = c.L;
    j["alpha_tilde"] = c.alpha_text;
    j["steps"] = c.steps;
    j["n_traj"] = c.n_traj;
    j["initial"] = to_string(c.initial.kind);
    j["initial_seed"] = c.initial.seed;
    j["signed_coefficients"] = c.initial.signed_coefficients;
    j["sampling"] = to_string(c.sampling);
    j["convention"] = to_string(c.convention);
    j["redraw_initial"] = c.redraw_initial;
    j["seed"] = c.seed;
    j["record_every"] = c.record_every;
    j["output_dir"] = c.output_dir;
    j["threads"] = c.threads;
    j["L_list"] = c.L_list;
    j["kde_times"] = c.kde_times;
    j["samples"] = c.samples;
    return j;
}

namespace detail {

/// 1-based line of the first occurrence of "key" in a JSON document, 0 if absent.
inline int key_line(const std::string &text, const std::string &key) {
    std::size_t pos = text.find("\"" + key + "\"");
    if (pos == std::string::npos) {
        return 0;
    }
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

inline std::string where(const std::string &source, const std::string &text, const std::string &key) {
    int line = key_line(text, key);
    std::string loc = source.empty() ? "config" : source;
    if (line > 0) {
        loc += ":" + std::to_string(line);
    }
    return loc + ": field '" + key + "': ";
}

}  // namespace detail

inline const std::vector<std::string> &config_keys() {
    static const std::vector<std::string> keys = {
        "model", "L", "alpha_tilde", "steps", "n_traj", "initial", "initial_seed", "signed_coefficients",
        "sampling", "convention", "redraw_initial", "seed", "record_every", "output_dir", "threads",
        "L_list", "kde_times", "samples"};
    return keys;
}

/// Reads a RunConfig from JSON. `text` and `source` only sharpen error messages.
inline RunConfig run_config_from_json(const nlohmann::json &j, const std::string &text = "", const std::string &source = "") {
    if (!j.is_object()) {
        throw ConfigError((source.empty() ? std::string("config") : source) + ": top level must be an object");
    }
    RunConfig c;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string &key = it.key();
        if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end()) {
            throw ConfigError(detail::where(source, text, key) + "unknown field");
        }
    }
    auto fail = [&](const std::string &key, const std::string &msg) -> ConfigError {
        return ConfigError(detail::where(source, text, key) + msg);
    };
    auto get_int = [&](const std::string &key, long lo, long hi) -> long {
        const auto &v = j.at(key);
        if (!v.is_number_integer()) {
            throw fail(key, "expected an integer");
        }
        long x = v.get<long>();
        if (x < lo || x > hi) {
            throw fail(key, "value " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
        return x;
    };
    auto get_u64 = [&](const std::string &key) -> std::uint64_t {
        const auto &v = j.at(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
            throw fail(key, "expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    };
    auto get_bool = [&](const std::string &key) -> bool {
        const auto &v = j.at(key);
        if (!v.is_boolean()) {
            throw fail(key, "expected true or false");
        }
        return v.get<bool>();
    };
    auto get_string = [&](const std::string &key) -> std::string {
        const auto &v = j.at(key);
        if (!v.is_string()) {
            throw fail(key, "expected a string");
        }
        return v.get<std::string>();
    };
    auto get_int_list = [&](const std::string &key) -> std::vector<int> {
        const auto &v = j.at(key);
        if (!v.is_array()) {
            throw fail(key, "expected an array of integers");
        }
        std::vector<int> out;
        for (const auto &e : v) {
            if (!e.is_number_integer()) {
                throw fail(key, "expected an array of integers");
            }
            out.push_back(e.get<int>());
        }
        return out;
    };
    auto wrap = [&](const std::string &key, auto &&fn) {
        if (!j.contains(key)) {
            return;
        }
        try {
            fn();
        } catch (const ConfigError &e) {
            std::string msg = e.what();
            if (msg.find(": field '") != std::string::npos) {
                throw;
            }
            throw fail(key, msg);
        }
    };

    wrap("model", [&] { c.model = parse_model(get_string("model")); });
    wrap("L", [&] { c.L = static_cast<int>(get_int("L", kMinSites, kMaxSites)); });
    wrap("alpha_tilde", [&] {
        const auto &v = j.at("alpha_tilde");
        if (v.is_number()) {
            c.alpha_tilde = v.get<double>();
            std::ostringstream os;
            os.precision(17);
            os << c.alpha_tilde;
            c.alpha_text = os.str();
        } else if (v.is_string()) {
            c.alpha_text = v.get<std::string>();
            c.alpha_tilde = parse_alpha(c.alpha_text);
        } else {
            throw fail("alpha_tilde", "expected a number or a string such as \"pi/4\"");
        }
    });
    wrap("steps", [&] { c.steps = static_cast<int>(get_int("steps", 1, 100000000)); });
    wrap("n_traj", [&] { c.n_traj = static_cast<int>(get_int("n_traj", 0, 100000000)); });
    wrap("initial", [&] { c.initial.kind = parse_initial_kind(get_string("initial")); });
    wrap("initial_seed", [&] { c.initial.seed = get_u64("initial_seed"); });
    wrap("signed_coefficients", [&] { c.initial.signed_coefficients = get_bool("signed_coefficients"); });
    wrap("sampling", [&] { c.sampling = parse_sampling(get_string("sampling")); });
    wrap("convention", [&] { c.convention = parse_convention(get_string("convention")); });
    wrap("redraw_initial", [&] { c.redraw_initial = get_bool("redraw_initial"); });
    wrap("seed", [&] { c.seed = get_u64("seed"); });
    wrap("record_every", [&] { c.record_every = static_cast<int>(get_int("record_every", 0, 100000000)); });
    wrap("output_dir", [&] { c.output_dir = get_string("output_dir"); });
    wrap("threads", [&] { c.threads = static_cast<int>(get_int("threads", 0, 4096)); });
    wrap("L_list", [&] { c.L_list = get_int_list("L_list"); });
    wrap("kde_times", [&] { c.kde_times = get_int_list("kde_times"); });
    wrap("samples", [&] { c.samples = static_cast<int>(get_int("samples", 1, 100000000)); });

    if (c.L % 2 != 0) {
        throw fail("L", "L must be even");
    }
    for (int l : c.L_list) {
        if (l % 2 != 0 || l < kMinSites || l > kMaxSites) {
            throw fail("L_list", "entry " + std::to_string(l) + " must be even with 4 <= L <= 24");
        }
    }
    for (int t : c.kde_times) {
        if (t < 0 || t > c.steps) {
            throw fail("kde_times", "entry " + std::to_string(t) + " outside [0, steps]");
        }
    }
    return c;
}

inline nlohmann::json read_json_file(const std::string &path, std::string *text_out = nullptr) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (text_out) {
        *text_out = text;
    }
    return j;
}

inline RunConfig load_config_file(const std::string &path) {
    std::string text;
    nlohmann::json j = read_json_file(path, &text);
    return run_config_from_json(j, text, path);
}

}  // namespace qtraj

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

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qtraj/qtraj.hpp"

namespace {

struct Flags {
    std::string config;
    std::string model;
    int L = 0;
    std::string alpha;
    int steps = 0;
    int n_traj = 0;
    std::string initial;
    std::uint64_t initial_seed = 0;
    bool signed_coefficients = false;
    std::string sampling;
    std::string convention;
    bool redraw_initial = false;
    std::uint64_t seed = 0;
    int record_every = 0;
    std::string output_dir;
    int threads = 0;
    std::vector<int> L_list;
    std::vector<int> kde_times;
    int samples = 0;
};

struct Bound {
    CLI::App *app;
    std::vector<std::pair<std::string, CLI::Option *>> options;
};

Bound add_run_flags(CLI::App *app, Flags &f) {
    Bound b{app, {}};
    auto add = [&](const std::string &key, CLI::Option *o) {
        b.options.emplace_back(key, o);
    };
    app->add_option("--config", f.config, "JSON file with run configuration fields");
    add("model", app->add_option("--model", f.model, "one-body or three-body"));
    add("L", app->add_option("--L,-L", f.L, "total number of sites (main + ancilla), even"));
    add("alpha_tilde", app->add_option("--alpha", f.alpha, "coupling alpha_tilde: decimal or pi/4, pi/2, 3pi/4"));
    add("steps", app->add_option("--steps", f.steps, "number of measurement steps t_m"));
    add("n_traj", app->add_option("--n-traj", f.n_traj, "number of trajectories"));
    add("initial", app->add_option("--initial", f.initial, "product, random-product, random-superposition, equal-superposition"));
    add("initial_seed", app->add_option("--initial-seed", f.initial_seed, "seed of the random initial state"));
    add("signed_coefficients", app->add_flag("--signed-coefficients", f.signed_coefficients, "random superposition coefficients in [-1, 1)"));
    add("sampling", app->add_option("--sampling", f.sampling, "born, forced or no-click"));
    add("convention", app->add_option("--convention", f.convention, "block-local or jw-exact"));
    add("redraw_initial", app->add_flag("--redraw-initial", f.redraw_initial, "draw a fresh random initial state per trajectory"));
    add("seed", app->add_option("--seed", f.seed, "global seed"));
    add("record_every", app->add_option("--record-every", f.record_every, "entropy recording interval (0 = automatic)"));
    add("output_dir", app->add_option("--output-dir,-o", f.output_dir, "output directory"));
    add("threads", app->add_option("--threads", f.threads, "worker threads (0 = all cores)"));
    add("L_list", app->add_option("--L-list", f.L_list, "system sizes for scaling")->delimiter(','));
    add("kde_times", app->add_option("--kde-times", f.kde_times, "steps at which KDE curves are written")->delimiter(','));
    add("samples", app->add_option("--samples", f.samples, "Monte Carlo samples for the oracle"));
    return b;
}

nlohmann::json overlay(const Bound &b, const Flags &f) {
    nlohmann::json j;
    for (const auto &[key, opt] : b.options) {
        if (opt->count() == 0) {
            continue;
        }
        if (key == "model") j[key] = f.model;
        else if (key == "L") j[key] = f.L;
        else if (key == "alpha_tilde") j[key] = f.alpha;
        else if (key == "steps") j[key] = f.steps;
        else if (key == "n_traj") j[key] = f.n_traj;
        else if (key == "initial") j[key] = f.initial;
        else if (key == "initial_seed") j[key] = f.initial_seed;
        else if (key == "signed_coefficients") j[key] = f.signed_coefficients;
        else if (key == "sampling") j[key] = f.sampling;
        else if (key == "convention") j[key] = f.convention;
        else if (key == "redraw_initial") j[key] = f.redraw_initial;
        else if (key == "seed") j[key] = f.seed;
        else if (key == "record_every") j[key] = f.record_every;
        else if (key == "output_dir") j[key] = f.output_dir;
        else if (key == "threads") j[key] = f.threads;
        else if (key == "L_list") j[key] = f.L_list;
        else if (key == "kde_times") j[key] = f.kde_times;
        else if (key == "samples") j[key] = f.samples;
    }
    return j;
}

qtraj::RunConfig resolve(const Bound &b, const Flags &f) {
    nlohmann::json merged = nlohmann::json::object();
    if (!f.config.empty()) {
        std::string text;
        merged = qtraj::read_json_file(f.config, &text);
        qtraj::run_config_from_json(merged, text, f.config);
    }
    const nlohmann::json flags = overlay(b, f);
    for (auto &[k, v] : flags.items()) {
        merged[k] = v;
    }
    return qtraj::run_config_from_json(merged, "", "command line");
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"qtraj: measurement-only quantum trajectories of a main/ancilla fermion chain"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(qtraj::kVersion));

    std::vector<std::pair<std::string, Flags>> flag_store;
    flag_store.reserve(5);
    std::vector<Bound> bound;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"run", "single trajectory: trajectory.csv and outcomes.csv"},
        {"ensemble", "trajectory ensemble: entropies, KDE, TVD series and summary.json"},
        {"scaling", "ensemble averages at final t_m across system sizes: scaling.csv"},
        {"oracle", "exact outcome-sequence enumeration against Monte Carlo at L=4"},
        {"kraus-check", "structural checks of the block Kraus operators"},
    };
    for (const auto &[name, help] : commands) {
        flag_store.emplace_back(name, Flags{});
        bound.push_back(add_run_flags(app.add_subcommand(name, help), flag_store.back().second));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return qtraj::kExitConfig;
    }

    try {
        for (std::size_t k = 0; k < bound.size(); ++k) {
            if (!bound[k].app->parsed()) {
                continue;
            }
            qtraj::RunConfig cfg = resolve(bound[k], flag_store[k].second);
            const std::string &name = commands[k].first;
            if (name == "run") return qtraj::cmd_run(cfg, std::cout);
            if (name == "ensemble") return qtraj::cmd_ensemble(cfg, std::cout);
            if (name == "scaling") return qtraj::cmd_scaling(cfg, std::cout);
            if (name == "oracle") return qtraj::cmd_oracle(cfg, std::cout);
            return qtraj::cmd_kraus_check(cfg, std::cout);
        }
    } catch (const qtraj::ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return qtraj::kExitConfig;
    } catch (const qtraj::NumericalError &e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return qtraj::kExitNumerical;
    } catch (const qtraj::IoError &e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return qtraj::kExitIo;
    }
    return qtraj::kExitConfig;
}

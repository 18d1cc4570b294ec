// Copyright 2026 The MLCI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: infer, sample, render, eval, learn-reward, grid.
// Exit codes: 0 success, 2 infeasible/degenerate model, 3 schema or config
// error, 64 usage error.

#include <chrono>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "mlci/experiment.hpp"
#include "mlci/json_io.hpp"
#include "mlci/render.hpp"
#include "mlci/version.hpp"

namespace {

using namespace mlci;

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitSchema = 3;
constexpr int kExitUsage = 64;

struct Timer {
    std::chrono::steady_clock::time_point begin = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         begin)
            .count();
    }
};

std::string digest_file(const std::string& path) { return fnv1a_hex(read_file(path)); }

InferenceOptions hypothesis_options(const std::vector<std::string>& kinds) {
    InferenceOptions opts;
    if (kinds.empty()) return opts;
    opts.allow_state = opts.allow_action = opts.allow_feature = false;
    for (const auto& kind : kinds) {
        if (kind == "state") opts.allow_state = true;
        else if (kind == "action") opts.allow_action = true;
        else if (kind == "feature") opts.allow_feature = true;
        else throw InvalidConfig("unknown hypothesis class '" + kind + "'");
    }
    return opts;
}

Json hypothesis_json(const InferenceOptions& opts) {
    Json kinds = Json::array();
    if (opts.allow_state) kinds.push_back("state");
    if (opts.allow_action) kinds.push_back("action");
    if (opts.allow_feature) kinds.push_back("feature");
    return kinds;
}

int cmd_infer(const std::string& mdp_path, const std::string& demos_path,
              const std::string& out_path, double threshold,
              const std::vector<std::string>& kinds, int max_iters, uint64_t seed) {
    Timer timer;
    Mdp mdp = mdp_from_json(parse_with_schema(read_file(mdp_path), kMdpSchema));
    DemoSet demos = ingest_demo_file(demos_path, mdp);

    InferenceOptions opts = hypothesis_options(kinds);
    opts.d_kl_threshold = threshold;
    opts.max_iters = max_iters;
    InferenceResult result = greedy_iterative_inference(mdp, demos, opts);

    RunManifest manifest;
    manifest.command = "infer";
    manifest.tool_version = kVersion;
    manifest.input_digests["mdp"] = digest_file(mdp_path);
    manifest.input_digests["demos"] = digest_file(demos_path);
    manifest.seed = seed;
    manifest.parameters["threshold"] = threshold;
    manifest.parameters["max_iters"] = max_iters;
    manifest.parameters["hypothesis"] = hypothesis_json(opts);
    manifest.stop_reason = to_string(result.stop_reason);

    atomic_write_file(out_path, result_to_json(result, manifest).dump(2) + "\n");
    std::cerr << "infer: selected " << result.selected.size() << " constraint(s), stop reason "
              << to_string(result.stop_reason) << ", final KL " << result.final_kl << " ("
              << timer.ms() << " ms)\n";
    return kExitOk;
}

int cmd_sample(const std::string& mdp_path, const std::string& constraints_path,
               const std::string& out_path, const std::string& policy_out, int n,
               uint64_t seed) {
    Timer timer;
    Mdp mdp = mdp_from_json(parse_with_schema(read_file(mdp_path), kMdpSchema));
    RunManifest manifest;
    manifest.command = "sample";
    manifest.tool_version = kVersion;
    manifest.input_digests["mdp"] = digest_file(mdp_path);
    if (!constraints_path.empty()) {
        auto constraints =
            constraints_from_json(parse_with_schema(read_file(constraints_path), kConstraintsSchema));
        manifest.input_digests["constraints"] = digest_file(constraints_path);
        mdp = apply_constraints(mdp, constraints);
    }
    manifest.seed = seed;
    manifest.parameters["n"] = n;

    auto [pol, part] = backward_pass(mdp);
    DemoSet demos = sample_trajectories(mdp, pol, n, seed);
    Json j = demos_to_json(demos);
    j["manifest"] = manifest.to_json();
    atomic_write_file(out_path, j.dump(2) + "\n");
    if (!policy_out.empty()) {
        Json pj = policy_to_json(pol, part);
        pj["manifest"] = manifest.to_json();
        atomic_write_file(policy_out, pj.dump(2) + "\n");
    }
    std::cerr << "sample: wrote " << n << " trajectories (" << timer.ms() << " ms)\n";
    return kExitOk;
}

int cmd_render(const std::string& mdp_path, const std::string& result_path,
               const std::string& accrual_path, const std::string& out_ascii,
               const std::string& out_svg, const std::string& accrual_out) {
    Timer timer;
    Json mdp_json = parse_with_schema(read_file(mdp_path), kMdpSchema);
    Mdp mdp = mdp_from_json(mdp_json);
    auto meta = grid_meta_from_json(mdp_json);
    if (!meta) throw SchemaError("MDP file carries no grid metadata; cannot render");
    if (meta->width * meta->height != mdp.n_states)
        throw SchemaError("grid metadata does not match the MDP's state count");

    std::vector<MinimalConstraint> marks;
    if (!result_path.empty()) {
        auto result = result_from_json(parse_with_schema(read_file(result_path), kResultSchema));
        marks = result.selected;
    }

    AccrualHistory hist;
    if (!accrual_path.empty()) {
        hist = accrual_from_json(parse_with_schema(read_file(accrual_path), kAccrualSchema));
    } else {
        auto [pol, part] = backward_pass(mdp);
        (void)part;
        hist = feature_accrual_history(mdp, augment_features(mdp), pol);
    }

    std::string ascii = render_ascii(*meta, hist, marks);
    if (out_ascii == "-") {
        std::cout << ascii;
    } else if (!out_ascii.empty()) {
        atomic_write_file(out_ascii, ascii);
    }
    if (!out_svg.empty()) atomic_write_file(out_svg, render_svg(*meta, hist, marks));
    if (!accrual_out.empty())
        atomic_write_file(accrual_out, accrual_to_json(hist).dump(2) + "\n");
    std::cerr << "render: done (" << timer.ms() << " ms)\n";
    return kExitOk;
}

int eval_single(const std::string& result_path, const std::string& truth_path,
                const std::string& mdp_path, const std::string& out_path) {
    auto result = result_from_json(parse_with_schema(read_file(result_path), kResultSchema));
    auto truth =
        constraints_from_json(parse_with_schema(read_file(truth_path), kConstraintsSchema));
    Mdp mdp = mdp_from_json(parse_with_schema(read_file(mdp_path), kMdpSchema));
    double fp = false_positive_rate(result, truth, mdp);
    std::string csv = "kind,n_demos,threshold,seed,fp_rate,final_kl,n_selected,stderr_fp,"
                      "stderr_kl\n";
    char line[160];
    std::snprintf(line, sizeof line, "run,,,,%.10g,%.10g,%d,,\n", fp, result.final_kl,
                  static_cast<int>(result.selected.size()));
    csv += line;
    if (out_path == "-" || out_path.empty()) {
        std::cout << csv;
    } else {
        atomic_write_file(out_path, csv);
    }
    return kExitOk;
}

int eval_sweep(const std::string& sweep_path, const std::string& out_path, int threads) {
    Timer timer;
    Json j = parse_with_schema(read_file(sweep_path), kSweepSchema);
    GridConfig grid_cfg;
    try {
        if (j.contains("grid_config_path")) {
            grid_cfg = load_grid_config(j.at("grid_config_path").get<std::string>());
        } else {
            grid_cfg = grid_config_from_json(j.at("grid_config"));
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed sweep config: ") + e.what());
    }
    SweepConfig cfg;
    try {
        cfg.demo_counts = j.at("demo_counts").get<std::vector<int>>();
        cfg.thresholds = j.at("thresholds").get<std::vector<double>>();
        cfg.n_seeds = j.value("n_seeds", 10);
        cfg.seed_base = j.value("seed_base", uint64_t{1});
        if (j.contains("hypothesis"))
            cfg.base_opts = hypothesis_options(j.at("hypothesis").get<std::vector<std::string>>());
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed sweep config: ") + e.what());
    }
    auto gw = build_gridworld(grid_cfg);
    auto cells = run_sweep(gw, cfg, threads);
    std::string csv = sweep_csv(cells);
    if (out_path == "-" || out_path.empty()) {
        std::cout << csv;
    } else {
        atomic_write_file(out_path, csv);
    }
    std::cerr << "eval: swept " << cells.size() << " cells (" << timer.ms() << " ms)\n";
    return kExitOk;
}

int cmd_learn_reward(const std::string& mdp_path, const std::string& demos_path,
                     const std::string& out_path, double lr, int iters) {
    Timer timer;
    Mdp skeleton = mdp_from_json(parse_with_schema(read_file(mdp_path), kMdpSchema));
    DemoSet demos = ingest_demo_file(demos_path, skeleton);

    RunManifest manifest;
    manifest.command = "learn-reward";
    manifest.tool_version = kVersion;
    manifest.input_digests["mdp"] = digest_file(mdp_path);
    manifest.input_digests["demos"] = digest_file(demos_path);
    manifest.parameters["lr"] = lr;
    manifest.parameters["iters"] = iters;

    std::vector<double> loglik;
    try {
        auto w = learn_reward_weights(skeleton, demos, lr, iters, &loglik);
        atomic_write_file(out_path, weights_to_json(w, loglik, false, manifest).dump(2) + "\n");
    } catch (const Divergence& e) {
        // Deliberate outcome: keep the log gathered so far, mark it, exit 2.
        atomic_write_file(out_path, weights_to_json({}, loglik, true, manifest).dump(2) + "\n");
        std::cerr << "learn-reward: " << e.what() << "\n";
        return kExitInfeasible;
    }
    std::cerr << "learn-reward: " << iters << " iterations (" << timer.ms() << " ms)\n";
    return kExitOk;
}

int cmd_grid(const std::string& config_path, const std::string& out_mdp,
             const std::string& out_truth) {
    GridConfig cfg = load_grid_config(config_path);
    Gridworld gw = build_gridworld(cfg);
    RunManifest manifest;
    manifest.command = "grid";
    manifest.tool_version = kVersion;
    manifest.input_digests["config"] = digest_file(config_path);
    if (!out_mdp.empty()) {
        Json j = mdp_to_json(gw.nominal, gw.meta);
        j["manifest"] = manifest.to_json();
        atomic_write_file(out_mdp, j.dump(2) + "\n");
    }
    if (!out_truth.empty()) {
        auto closed = close_constraints(gw.nominal, gw.truth);
        Json j = constraints_to_json(closed);
        j["manifest"] = manifest.to_json();
        atomic_write_file(out_truth, j.dump(2) + "\n");
    }
    std::cerr << "grid: built " << cfg.name << " (" << gw.nominal.n_states << " states)\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Maximum likelihood constraint inference for tabular MDPs"};
    app.set_version_flag("--version", mlci::kVersion);
    app.require_subcommand(1);

    // infer
    std::string mdp_path, demos_path, out_path, constraints_path, result_path, truth_path;
    std::string accrual_path, out_ascii, out_svg, accrual_out, sweep_path, config_path;
    std::string out_mdp, out_truth, policy_out;
    double threshold = 0.1;
    std::vector<std::string> hypothesis;
    int max_iters = -1;
    uint64_t seed = 0;
    int n = 100;
    double lr = 0.1;
    int iters = 200;
    int threads = 0;

    auto* infer = app.add_subcommand("infer", "Infer the most likely constraint set");
    infer->add_option("--mdp", mdp_path, "nominal MDP file (mlci-mdp/1)")->required();
    infer->add_option("--demos", demos_path, "demonstrations file (mlci-demos/1)")->required();
    infer->add_option("--out", out_path, "result file (mlci-result/1)")->required();
    infer->add_option("--threshold", threshold, "KL improvement threshold")
        ->check(CLI::NonNegativeNumber);
    infer->add_option("--hypothesis", hypothesis,
                      "hypothesis classes: state, action, feature (default all)");
    infer->add_option("--max-iters", max_iters, "iteration cap (default: indicator count)");
    infer->add_option("--seed", seed, "seed recorded in the manifest");

    auto* sample = app.add_subcommand("sample", "Sample demonstrations from the MaxEnt policy");
    sample->add_option("--mdp", mdp_path, "MDP file (mlci-mdp/1)")->required();
    sample->add_option("--n", n, "number of trajectories")->check(CLI::PositiveNumber);
    sample->add_option("--seed", seed, "random seed");
    sample->add_option("--constraints", constraints_path,
                       "optional constraint file applied before sampling");
    sample->add_option("--out", out_path, "demos file (mlci-demos/1)")->required();
    sample->add_option("--dump-policy", policy_out,
                       "also export the policy and partition value (mlci-policy/1)");

    auto* render = app.add_subcommand("render", "Render accrual heatmaps as ASCII/SVG");
    render->add_option("--mdp", mdp_path, "MDP file with grid metadata")->required();
    render->add_option("--result", result_path, "result file whose constraints are marked");
    render->add_option("--accrual", accrual_path, "precomputed accrual history file");
    render->add_option("--out-ascii", out_ascii, "ASCII output path, or - for stdout");
    render->add_option("--out-svg", out_svg, "SVG output path");
    render->add_option("--accrual-out", accrual_out, "also save the accrual history");

    auto* eval = app.add_subcommand("eval", "Score results or run a sweep");
    eval->add_option("--result", result_path, "result file to score");
    eval->add_option("--truth", truth_path, "ground-truth constraints file");
    eval->add_option("--mdp", mdp_path, "MDP file for membership expansion");
    eval->add_option("--sweep", sweep_path, "sweep config (mlci-sweep/1)");
    eval->add_option("--threads", threads, "worker cap (default: MLCI_THREADS or hardware)");
    eval->add_option("--out", out_path, "CSV output path, or - for stdout");

    auto* learn = app.add_subcommand("learn-reward", "Learn reward weights from demos");
    learn->add_option("--mdp-skeleton", mdp_path, "MDP file whose reward weights are ignored")
        ->required();
    learn->add_option("--demos", demos_path, "demonstrations file")->required();
    learn->add_option("--lr", lr, "gradient step size")->check(CLI::PositiveNumber);
    learn->add_option("--iters", iters, "gradient steps")->check(CLI::PositiveNumber);
    learn->add_option("--out", out_path, "weights file (mlci-weights/1)")->required();

    auto* grid = app.add_subcommand("grid", "Materialize a grid config as MDP and truth files");
    grid->add_option("--config", config_path, "grid config (mlci-grid/1)")->required();
    grid->add_option("--out-mdp", out_mdp, "nominal MDP output");
    grid->add_option("--out-truth", out_truth, "ground-truth constraints output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (infer->parsed())
            return cmd_infer(mdp_path, demos_path, out_path, threshold, hypothesis, max_iters,
                             seed);
        if (sample->parsed())
            return cmd_sample(mdp_path, constraints_path, out_path, policy_out, n, seed);
        if (render->parsed())
            return cmd_render(mdp_path, result_path, accrual_path, out_ascii, out_svg,
                              accrual_out);
        if (eval->parsed()) {
            if (!sweep_path.empty()) return eval_sweep(sweep_path, out_path, threads);
            if (result_path.empty() || truth_path.empty() || mdp_path.empty()) {
                std::cerr << "eval needs either --sweep or --result/--truth/--mdp\n";
                return kExitUsage;
            }
            return eval_single(result_path, truth_path, mdp_path, out_path);
        }
        if (learn->parsed()) return cmd_learn_reward(mdp_path, demos_path, out_path, lr, iters);
        if (grid->parsed()) return cmd_grid(config_path, out_mdp, out_truth);
    } catch (const mlci::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const mlci::InvalidConfig& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const mlci::InfeasibleDemo& e) {
        std::cerr << "infeasible demonstration: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const mlci::NoFeasibleTrajectory& e) {
        std::cerr << "no feasible trajectory: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const mlci::FullyConstrained& e) {
        std::cerr << "fully constrained: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const mlci::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}

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

#include "mlci/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>

namespace mlci {

double mean(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

double standard_error(const std::vector<double>& xs) {
    const size_t n = xs.size();
    if (n < 2) return 0.0;
    double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MLCI_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

ExperimentReport run_grid_experiment(const Gridworld& gw, uint64_t seed, int n_demos,
                                  double d_kl, const InferenceOptions& base_opts) {
    Mdp true_mdp = true_gridworld_mdp(gw);
    auto [true_pol, true_part] = backward_pass(true_mdp);
    (void)true_part;
    DemoSet demos = sample_trajectories(true_mdp, true_pol, n_demos, seed);

    InferenceOptions opts = base_opts;
    opts.d_kl_threshold = d_kl;
    ExperimentReport report;
    report.seed = seed;
    report.n_demos = n_demos;
    report.d_kl_threshold = d_kl;
    report.result = greedy_iterative_inference(gw.nominal, demos, opts);
    report.fp_rate = false_positive_rate(report.result, gw.truth, gw.nominal);
    report.final_kl = report.result.final_kl;
    report.n_selected = static_cast<int>(report.result.selected.size());
    return report;
}

std::vector<SweepCell> run_sweep(const Gridworld& gw, const SweepConfig& cfg, int threads) {
    struct Job {
        int cell;
        int n_demos;
        double threshold;
        uint64_t seed;
    };
    std::vector<Job> jobs;
    std::vector<SweepCell> cells;
    for (int n_demos : cfg.demo_counts) {
        for (double threshold : cfg.thresholds) {
            SweepCell cell;
            cell.n_demos = n_demos;
            cell.threshold = threshold;
            cell.runs.resize(cfg.n_seeds);
            int cell_idx = static_cast<int>(cells.size());
            for (int i = 0; i < cfg.n_seeds; ++i)
                jobs.push_back({cell_idx, n_demos, threshold, cfg.seed_base + i});
            cells.push_back(std::move(cell));
        }
    }

    const int workers = std::min<int>(resolve_thread_count(threads),
                                      std::max<size_t>(jobs.size(), 1));
    std::atomic<size_t> next{0};
    auto work = [&]() {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= jobs.size()) break;
            const Job& job = jobs[i];
            auto report =
                run_grid_experiment(gw, job.seed, job.n_demos, job.threshold, cfg.base_opts);
            cells[job.cell].runs[job.seed - cfg.seed_base] = std::move(report);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    for (auto& cell : cells) {
        std::vector<double> fps, kls, counts;
        for (const auto& run : cell.runs) {
            fps.push_back(run.fp_rate);
            kls.push_back(run.final_kl);
            counts.push_back(run.n_selected);
        }
        cell.mean_fp = mean(fps);
        cell.stderr_fp = standard_error(fps);
        cell.mean_kl = mean(kls);
        cell.stderr_kl = standard_error(kls);
        cell.mean_selected = mean(counts);
    }
    return cells;
}

std::string sweep_csv(const std::vector<SweepCell>& cells) {
    std::string out = "kind,n_demos,threshold,seed,fp_rate,final_kl,n_selected,"
                      "stderr_fp,stderr_kl\n";
    char line[256];
    for (const auto& cell : cells) {
        for (const auto& run : cell.runs) {
            std::snprintf(line, sizeof line, "run,%d,%.10g,%llu,%.10g,%.10g,%d,,\n",
                          cell.n_demos, cell.threshold,
                          static_cast<unsigned long long>(run.seed), run.fp_rate,
                          run.final_kl, run.n_selected);
            out += line;
        }
        std::snprintf(line, sizeof line, "mean,%d,%.10g,,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                      cell.n_demos, cell.threshold, cell.mean_fp, cell.mean_kl,
                      cell.mean_selected, cell.stderr_fp, cell.stderr_kl);
        out += line;
    }
    return out;
}

} // namespace mlci

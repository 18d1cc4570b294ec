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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlci/gridworld.hpp"
#include "mlci/inference.hpp"

namespace mlci {

/// One end-to-end run: sample demos from the true (constrained) MDP's
/// maximum entropy policy, infer constraints against the nominal MDP,
/// and score against the ground truth.
struct ExperimentReport {
    uint64_t seed = 0;
    int n_demos = 0;
    double d_kl_threshold = 0.0;
    InferenceResult result;
    double fp_rate = 0.0;
    double final_kl = 0.0;
    int n_selected = 0;
};

ExperimentReport run_grid_experiment(const Gridworld& gw, uint64_t seed, int n_demos,
                                  double d_kl, const InferenceOptions& base_opts = {});

/// Sweep grid: every (n_demos, threshold, seed) cell of a factorial design.
struct SweepConfig {
    std::vector<int> demo_counts;
    std::vector<double> thresholds;
    int n_seeds = 10;
    uint64_t seed_base = 1; ///< seeds are seed_base .. seed_base + n_seeds - 1
    InferenceOptions base_opts;
};

struct SweepCell {
    int n_demos = 0;
    double threshold = 0.0;
    double mean_fp = 0.0;
    double stderr_fp = 0.0;
    double mean_kl = 0.0;
    double stderr_kl = 0.0;
    double mean_selected = 0.0;
    std::vector<ExperimentReport> runs;
};

/// Runs the sweep; independent cells may execute on up to `threads` workers
/// (0 = read MLCI_THREADS, falling back to the hardware count). Results are
/// ordered by (n_demos, threshold, seed) regardless of scheduling.
std::vector<SweepCell> run_sweep(const Gridworld& gw, const SweepConfig& cfg,
                                 int threads = 0);

/// CSV with one row per run plus mean/stderr aggregate rows per cell.
std::string sweep_csv(const std::vector<SweepCell>& cells);

double mean(const std::vector<double>& xs);
double standard_error(const std::vector<double>& xs);

/// Worker count: explicit argument, else MLCI_THREADS, else hardware.
int resolve_thread_count(int requested);

} // namespace mlci

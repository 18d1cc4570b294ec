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
#include <map>
#include <vector>

#include "mlci/mdp.hpp"

namespace mlci {

/// Time-varying stochastic policy pi(a | s, t), stored in log space.
/// One slice per action step t = 0 .. T.
struct TimeVaryingPolicy {
    int horizon = 0; ///< T; log_pi has T + 1 slices.
    /// log_pi[t][s][a]; -inf for unavailable actions.
    std::vector<std::vector<std::vector<double>>> log_pi;

    double prob(int t, int s, int a) const;
    int steps() const { return static_cast<int>(log_pi.size()); }
};

/// Log-partition value together with the per-state backward soft values.
struct PartitionValue {
    double log_z = 0.0;
    /// state_log_value[t][s]: log of the summed exponentiated reward-to-go of
    /// all continuation segments starting at s with action step t.
    std::vector<std::vector<double>> state_log_value;
};

/// A demonstration set with its empirical trajectory distribution.
struct DemoSet {
    std::vector<Trajectory> demos;

    /// Distinct state-action sequences with multiplicities; the empirical
    /// probability of an entry is count / size().
    struct Distinct {
        Trajectory traj;
        int count = 0;
    };
    std::vector<Distinct> distinct;

    int size() const { return static_cast<int>(demos.size()); }
    bool empty() const { return demos.empty(); }
};

/// Builds a DemoSet, validating every demonstration against `mdp` and caching
/// rewards and accrued indicators. Throws InfeasibleDemo (with the index of
/// the first offending demo) if any trajectory is infeasible.
DemoSet make_demo_set(const Mdp& mdp, const AugmentedFeatureMap& map,
                      std::vector<Trajectory> trajectories);

/**
 * Soft backward recursion over the horizon, entirely in log space.
 *
 * The state-action value at step t combines beta * gamma^t * R(s, a) with the
 * expected successor soft value; the policy is the softmax over available
 * actions and log Z aggregates initial-state soft values weighted by the
 * initial distribution. Constrained action sets must already be applied.
 *
 * Throws NoFeasibleTrajectory if every initial state has an empty action set.
 */
std::pair<TimeVaryingPolicy, PartitionValue> backward_pass(const Mdp& mdp);

/**
 * Log-probability of one trajectory under the maximum entropy trajectory
 * distribution: beta * R(xi) + log D_0(s_0) - log Z. Returns -inf for
 * infeasible trajectories (use validate_trajectory for the violation report).
 * The log D_0 term vanishes for the usual point-mass initial distribution.
 */
double trajectory_log_prob(const Mdp& mdp, const PartitionValue& z, const Trajectory& xi);

/// Log-probability of observing the whole demonstration set (independent
/// draws): sum of per-trajectory log-probabilities. Throws InfeasibleDemo.
double demo_set_log_prob(const Mdp& mdp, const PartitionValue& z, const DemoSet& demos);

/// KL divergence D_KL(P_D || P_M) restricted to the demonstrated support.
/// Throws InfeasibleDemo if the model assigns zero probability to a demo.
double kl_empirical_model(const DemoSet& demos, const Mdp& mdp, const PartitionValue& z);

/**
 * Samples n trajectories: s_0 ~ D_0, a_t ~ pi(. | s_t, t), s_{t+1} ~ P_{s_t, a_t}.
 * Each trajectory consumes an independent counter-derived random stream, so
 * results are reproducible for a fixed seed regardless of scheduling.
 */
DemoSet sample_trajectories(const Mdp& mdp, const TimeVaryingPolicy& pol, int n,
                            uint64_t seed);

/// Expected discounted native feature counts under (D_0, pi, P); the
/// model-side term of the likelihood gradient.
std::vector<double> expected_feature_counts(const Mdp& mdp, const TimeVaryingPolicy& pol);

/**
 * Plain MaxEnt IRL gradient ascent: repeatedly matches expected feature
 * counts to the empirical mean, starting from all-zero weights with a fixed
 * step size. Returns the weights after `iterations` steps. Deterministic.
 *
 * Throws Divergence if the demo log-likelihood decreases for 10 consecutive
 * steps. If `loglik_history` is non-null it receives the per-iteration mean
 * demo log-likelihood (also filled on the divergence path).
 */
std::vector<double> learn_reward_weights(const Mdp& mdp_skeleton, const DemoSet& demos,
                                         double step_size, int iterations,
                                         std::vector<double>* loglik_history = nullptr);

// --- small numeric helpers ---------------------------------------------------

double log_sum_exp(const std::vector<double>& xs);

/// splitmix64; used to derive independent per-trajectory streams.
uint64_t split_mix_64(uint64_t& state);

} // namespace mlci

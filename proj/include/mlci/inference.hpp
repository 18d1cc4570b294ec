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

#include <limits>
#include <optional>

#include "mlci/accrual.hpp"
#include "mlci/maxent.hpp"
#include "mlci/mdp.hpp"

namespace mlci {

/// One candidate minimal constraint with its current eliminated-mass score.
/// Only demo-respecting hypotheses (no demonstration ever accrues the
/// indicator) are selectable.
struct Hypothesis {
    MinimalConstraint constraint;
    double eliminated_mass = 0.0;
    bool demo_respecting = false;
};

enum class StopReason { Threshold, Exhausted, MaxIters, NoPositiveMass };

std::string to_string(StopReason r);

struct IterationRecord {
    int iteration = 0;
    MinimalConstraint chosen;
    double eliminated_mass = 0.0; ///< on the model of the iteration it was chosen
    double kl_before = 0.0;
    double kl_after = 0.0;
    double delta_kl = 0.0;
};

/// Result of greedy iterative inference: the selected constraints in
/// acceptance order with per-iteration diagnostics. The iteration log holds
/// accepted iterations only; a rejected final probe is reported separately.
struct InferenceResult {
    std::vector<MinimalConstraint> selected;
    std::vector<IterationRecord> iterations;
    StopReason stop_reason = StopReason::Exhausted;
    double initial_kl = 0.0;
    double final_kl = 0.0;
    std::optional<IterationRecord> rejected; ///< probe that failed the threshold

    ConstraintSet as_constraint_set() const {
        return ConstraintSet{selected, {}};
    }
};

struct InferenceOptions {
    double d_kl_threshold = 0.1;
    int max_iters = -1; ///< default: number of augmented indicators
    bool allow_state = true;
    bool allow_action = true;
    bool allow_feature = true;

    bool kind_allowed(ConstraintKind k) const {
        switch (k) {
        case ConstraintKind::State: return allow_state;
        case ConstraintKind::Action: return allow_action;
        case ConstraintKind::Feature: return allow_feature;
        }
        return false;
    }
};

/**
 * The model a scoring iteration works with: the constrained MDP in
 * observation form (for stochastic MDPs, transition mass into empty states
 * renormalized away and the agent policy reweighted accordingly; for
 * deterministic MDPs, plain constraint application), its policy, and the
 * partition value used for likelihoods.
 */
struct ScoredModel {
    Mdp mdp;
    TimeVaryingPolicy policy;
    PartitionValue partition;
    ConstraintSet closed; ///< input constraints with their closure
};

ScoredModel constrained_observation(const Mdp& nominal, const ConstraintSet& c);

/// Enumerates all minimal constraints (one per augmented indicator), marking
/// which are demo-respecting, with eliminated mass scored on `mdp`.
std::vector<Hypothesis> candidate_hypotheses(const Mdp& mdp, const AugmentedFeatureMap& map,
                                             const DemoSet& demos);

/// Rescores the hypotheses' eliminated masses on (mdp, pol) in place.
void score_hypotheses(const Mdp& mdp, const AugmentedFeatureMap& map,
                      const TimeVaryingPolicy& pol, std::vector<Hypothesis>& hyps);

/// Returns the demo-respecting hypothesis with maximum eliminated mass on
/// (mdp, pol), ties broken by canonical constraint order. Zero-mass
/// candidates are not selectable. Throws NoCandidates.
Hypothesis select_max_likelihood_constraint(const Mdp& mdp, const TimeVaryingPolicy& pol,
                                            const std::vector<Hypothesis>& hyps);

/**
 * Greedy iterative constraint inference with a KL stopping rule.
 *
 * Each iteration rescores the demo-respecting hypotheses on the currently
 * constrained model, picks the one eliminating the most mass, and accepts it
 * only if it reduces D_KL(P_D || P_model) by strictly more than the
 * threshold; otherwise the loop stops. Accepted constraints are re-applied
 * with closure and the backward pass, policy, and accrual history are
 * recomputed. Selected constraints leave the hypothesis list.
 */
InferenceResult greedy_iterative_inference(const Mdp& mdp, const DemoSet& demos,
                                           const InferenceOptions& opts = {});

/// Exhaustive search over all unions of `n_c` demo-respecting minimal
/// constraints, scored by compound eliminated mass on the nominal model.
/// Guards the combination count; throws TooLarge above one million.
struct BestCombination {
    ConstraintSet constraints;
    double eliminated_mass = 0.0;
};

BestCombination brute_force_best_combination(const Mdp& mdp, const DemoSet& demos, int n_c,
                                             const InferenceOptions& opts = {});

/**
 * Fraction of selected constraints that are not part of the true system.
 * A selected constraint counts as true when its state-action set (over
 * available pairs of `mdp`) is a subset of the truth's induced set.
 * Empty selections score zero.
 */
double false_positive_rate(const InferenceResult& result, const ConstraintSet& truth,
                           const Mdp& mdp);

} // namespace mlci

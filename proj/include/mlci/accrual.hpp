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

#include "mlci/maxent.hpp"
#include "mlci/mdp.hpp"

namespace mlci {

/**
 * Output of the feature-accrual forward pass.
 *
 * accrued[t - 1][i] is the probability that a trajectory has accrued
 * augmented indicator i within its first t action steps, for t = 1 .. T + 1.
 * The final column therefore gives, for each minimal constraint, the
 * probability mass of the trajectories that the constraint would eliminate.
 *
 * visitation[t][s] is the state distribution after t transitions,
 * t = 0 .. T; each column sums to one.
 */
struct AccrualHistory {
    int n_indicators = 0;
    int horizon = 0; ///< T; accrued has T + 1 columns, visitation T + 1.
    int n_native = 0, n_states = 0, n_actions = 0; ///< indicator layout

    std::vector<std::vector<double>> accrued;
    std::vector<std::vector<double>> visitation;

    /// Per-state accrual blocks at the final step, [s][i]; retained only
    /// when requested (diagnostics).
    std::vector<std::vector<double>> state_blocks;

    const std::vector<double>& final_accrual() const { return accrued.back(); }
    int bit_of(const MinimalConstraint& c) const;
};

struct AccrualOptions {
    bool keep_state_blocks = false;
};

/**
 * Forward propagation of state-visitation mass and first-accrual feature
 * mass. Tracks, per state and time, how much trajectory probability has
 * already accrued each indicator, so that repeat accruals are not counted
 * again:
 *
 *   new accrual at (s, a, t) = indicator(s, a) * (D_{s,t} - Phi_{s,t})
 *
 * and both D and Phi are pushed through the policy and the transition
 * kernel. The pass runs over all T + 1 action steps of a trajectory.
 * Throws HorizonMismatch if the policy does not match the MDP horizon.
 */
AccrualHistory feature_accrual_history(const Mdp& mdp, const AugmentedFeatureMap& map,
                                       const TimeVaryingPolicy& pol,
                                       const AccrualOptions& opts = {});

/// Probability mass eliminated by a single minimal constraint: the matching
/// entry of the final accrual column. Throws IndexOutOfRange.
double eliminated_mass(const AccrualHistory& hist, const MinimalConstraint& c);

/**
 * Probability that a trajectory contains any pair of the compound set `c`,
 * computed by rerunning the forward pass with one synthetic indicator equal
 * to the union membership test.
 */
double eliminated_mass_compound(const Mdp& mdp, const TimeVaryingPolicy& pol,
                                const ConstraintSet& c);

} // namespace mlci

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

#include <optional>
#include <string>
#include <vector>

#include "mlci/bitset.hpp"
#include "mlci/errors.hpp"

namespace mlci {

/// One entry of a sparse successor distribution. Only states with positive
/// probability are stored.
struct Successor {
    int state;
    double prob;
    bool operator==(const Successor&) const = default;
};

struct StateAction {
    int state;
    int action;
    auto operator<=>(const StateAction&) const = default;
};

/**
 * Finite-horizon tabular MDP.
 *
 * A trajectory is a sequence of `horizon + 1` state-action pairs
 * (s_0, a_0), ..., (s_T, a_T): an action is taken at every visited state,
 * including the last one, and the successor of the final action is not part
 * of the trajectory. Variable-length episodes are modeled by making goal
 * states absorbing with a zero-reward, zero-feature self-loop, so that every
 * trajectory has uniform length.
 *
 * The reward is linear in the feature map, R(s, a) = w . phi(s, a), unless an
 * explicit per-pair reward table is supplied. The rationality scale `beta`
 * multiplies R wherever trajectory probabilities are formed; it does not
 * change R itself.
 */
struct Mdp {
    int n_states = 0;
    int n_actions = 0;
    int n_features = 0;

    /// Sorted action ids available per state. May become empty only through
    /// constraint application.
    std::vector<std::vector<int>> available_actions;

    /// transitions[s][a] is the successor distribution of (s, a). Rows for
    /// unavailable actions are ignored.
    std::vector<std::vector<std::vector<Successor>>> transitions;

    /// Initial state distribution, sums to one.
    std::vector<double> initial_dist;

    /// features[s][a] is the non-negative native feature vector phi(s, a).
    std::vector<std::vector<std::vector<double>>> features;

    /// Linear reward weights; R(s, a) = reward_weights . features[s][a].
    std::vector<double> reward_weights;

    /// Optional explicit reward table overriding the linear form.
    std::optional<std::vector<std::vector<double>>> reward_table;

    int horizon = 0;          ///< T: a trajectory has T + 1 state-action pairs.
    double discount = 1.0;    ///< gamma in (0, 1].
    double rationality = 1.0; ///< beta >= 0.
    std::vector<int> goal_states; ///< Absorbing states, if any (metadata).

    double reward(int s, int a) const {
        if (reward_table) return (*reward_table)[s][a];
        double r = 0.0;
        const auto& f = features[s][a];
        for (int i = 0; i < n_features; ++i)
            r += reward_weights[i] * f[i];
        return r;
    }

    bool action_available(int s, int a) const;
    bool is_deterministic() const;

    /// Checks structural invariants (row sums, distribution sums, feature
    /// non-negativity, table shapes). Throws InvalidConfig or
    /// DimensionMismatch on violation.
    void validate() const;

    bool operator==(const Mdp&) const = default;
};

/// Kinds of minimal constraints, in canonical order.
enum class ConstraintKind { Feature = 0, State = 1, Action = 2 };

std::string to_string(ConstraintKind k);

/**
 * A minimal constraint forbids every state-action pair selected by a single
 * augmented indicator: all pairs producing feature `index`, all pairs at
 * state `index`, or all pairs using action `index`.
 *
 * Canonical order (features by index, then states, then actions) is the
 * deterministic tie-break used everywhere.
 */
struct MinimalConstraint {
    ConstraintKind kind;
    int index;
    auto operator<=>(const MinimalConstraint&) const = default;
};

/// True if (s, a) belongs to the constraint's state-action set.
bool pair_in_constraint(const Mdp& mdp, const MinimalConstraint& c, int s, int a);

/**
 * A set of forbidden state-action pairs, represented as a union of minimal
 * constraints plus the pairs added by empty-state propagation. The closure
 * is derived data: it is recomputed against a concrete MDP and reaches a
 * fixed point (re-running propagation adds nothing).
 */
struct ConstraintSet {
    std::vector<MinimalConstraint> minimal_constraints;
    std::vector<StateAction> empty_state_closure;

    bool contains(const Mdp& mdp, int s, int a) const;
    bool empty() const { return minimal_constraints.empty() && empty_state_closure.empty(); }

    bool operator==(const ConstraintSet&) const = default;
};

/**
 * Augmented indicator feature map. Extends the k native features with one
 * binary indicator per state and per action:
 *
 *   bit i          (i < k)   set iff phi_i(s, a) > 0
 *   bit k + s'               set iff s == s'
 *   bit k + |S| + a'         set iff a == a'
 *
 * Exactly one state bit and one action bit are set for every pair, so every
 * minimal constraint corresponds to one augmented indicator.
 */
class AugmentedFeatureMap {
  public:
    static AugmentedFeatureMap build(const Mdp& mdp);

    int n_native() const { return k_; }
    int n_states() const { return s_; }
    int n_actions() const { return a_; }
    int size() const { return k_ + s_ + a_; }

    int feature_bit(int i) const { return i; }
    int state_bit(int s) const { return k_ + s; }
    int action_bit(int a) const { return k_ + s_ + a; }

    /// Indicator vector of one pair, as a bitset over size() bits.
    const Bitset& indicators(int s, int a) const { return table_[static_cast<size_t>(s) * a_ + a]; }

    /// Maps an augmented indicator bit back to the minimal constraint it encodes.
    MinimalConstraint constraint_at(int bit) const;
    /// Inverse of constraint_at. Throws IndexOutOfRange on a bad index.
    int bit_of(const MinimalConstraint& c) const;

  private:
    int k_ = 0, s_ = 0, a_ = 0;
    std::vector<Bitset> table_;
};

/**
 * A trajectory of horizon + 1 state-action pairs. `reward` and `accrued`
 * are caches filled against the MDP the trajectory was built or validated
 * on; see finalize_trajectory.
 */
struct Trajectory {
    std::vector<int> states;  ///< s_0 .. s_T
    std::vector<int> actions; ///< a_0 .. a_T
    double reward = 0.0;
    Bitset accrued;

    int steps() const { return static_cast<int>(states.size()); }

    /// Equality of the state-action sequence only (caches excluded).
    bool same_path(const Trajectory& o) const {
        return states == o.states && actions == o.actions;
    }
};

/// Machine-readable feasibility report: which invariant a trajectory broke
/// first, and at which step.
struct Feasibility {
    enum class Violation {
        None,
        LengthMismatch,
        OutOfRange,
        BadStart,
        UnavailableAction,
        ImpossibleTransition,
    };
    bool feasible = true;
    Violation violation = Violation::None;
    int step = -1;

    explicit operator bool() const { return feasible; }
    std::string describe() const;
};

// --- operations ------------------------------------------------------------

/// Builds the augmented indicator map of an MDP (deterministic layout).
AugmentedFeatureMap augment_features(const Mdp& mdp);

/// Checks that every constraint indexes within the MDP's dimensions.
/// Throws IndexOutOfRange otherwise.
void validate_constraints(const Mdp& mdp, const ConstraintSet& c);

/**
 * Recomputes the empty-state closure of `c` against `mdp`: starting from the
 * direct removals, any remaining action whose entire transition mass lands in
 * empty states is removed too, until a fixed point. For deterministic MDPs
 * this is exactly the recursive "action leads to an empty state" rule.
 * Returns a copy of `c` whose empty_state_closure holds the extra pairs.
 */
ConstraintSet close_constraints(const Mdp& mdp, const ConstraintSet& c);

/**
 * Returns the constrained MDP: available action sets shrink to
 * A_s \ {a | (s,a) in C} with empty-state propagation applied to fixed point.
 * The input MDP is not modified.
 *
 * Throws FullyConstrained if no state with positive initial probability
 * keeps a nonempty action set.
 */
Mdp apply_constraints(const Mdp& mdp, const ConstraintSet& c);

/**
 * Observation model of a constrained stochastic MDP: transition mass into
 * empty states is removed and the remaining successor probabilities are
 * renormalized. `survive_weight[s][a]` is the retained mass 1 - P_{s,a}(S_empty)
 * of each remaining pair; observed_policy reweights an agent policy by it.
 * On deterministic MDPs the result behaves exactly like apply_constraints.
 */
struct StochasticObservation {
    Mdp mdp;
    std::vector<std::vector<double>> survive_weight;
    std::vector<int> empty_states;
    std::vector<StateAction> closure;
};

StochasticObservation stochastic_observation_model(const Mdp& mdp, const ConstraintSet& c);

/// Renormalizes transition rows away from `empty_states` without touching
/// availability. Throws TotallyBlocked if an available pair has its entire
/// mass inside the empty set (such pairs must be closed away first).
void renormalize_transitions(Mdp& mdp, const std::vector<bool>& empty_state,
                             std::vector<std::vector<double>>* survive_weight = nullptr);

/// Total discounted reward sum_t gamma^t R(s_t, a_t) of a trajectory.
/// Throws DimensionMismatch if the trajectory shape does not fit the MDP.
double trajectory_reward(const Mdp& mdp, const Trajectory& xi);

/// Feasibility indicator: checks length, index ranges, initial support,
/// action availability, and transition support, reporting the first
/// violation. Infeasibility is a return value, not an error.
Feasibility validate_trajectory(const Mdp& mdp, const Trajectory& xi);

/// Set of augmented indicators accrued anywhere along the trajectory.
Bitset accrued_features(const AugmentedFeatureMap& map, const Trajectory& xi);

/// Fills the reward and accrual caches of a trajectory in place.
void finalize_trajectory(const Mdp& mdp, const AugmentedFeatureMap& map, Trajectory& xi);

} // namespace mlci

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

#include "mlci/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mlci {

namespace {
constexpr double kProbTol = 1e-9;
} // namespace

bool Mdp::action_available(int s, int a) const {
    const auto& as = available_actions[s];
    return std::binary_search(as.begin(), as.end(), a);
}

bool Mdp::is_deterministic() const {
    for (int s = 0; s < n_states; ++s)
        for (int a : available_actions[s])
            if (transitions[s][a].size() != 1) return false;
    return true;
}

void Mdp::validate() const {
    if (n_states <= 0 || n_actions <= 0 || horizon < 0)
        throw InvalidConfig("MDP must have positive state/action counts and horizon >= 0");
    if (discount <= 0.0 || discount > 1.0)
        throw InvalidConfig("discount must lie in (0, 1]");
    if (rationality < 0.0) throw InvalidConfig("rationality must be non-negative");
    auto check_size = [&](size_t got, size_t want, const char* what) {
        if (got != want)
            throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(want) +
                                    " entries, got " + std::to_string(got));
    };
    check_size(available_actions.size(), n_states, "available_actions");
    check_size(transitions.size(), n_states, "transitions");
    check_size(initial_dist.size(), n_states, "initial_dist");
    check_size(features.size(), n_states, "features");
    check_size(reward_weights.size(), n_features, "reward_weights");
    if (reward_table) check_size(reward_table->size(), n_states, "reward_table");

    double d0 = 0.0;
    for (double p : initial_dist) {
        if (p < 0.0) throw InvalidConfig("initial_dist has a negative entry");
        d0 += p;
    }
    if (std::abs(d0 - 1.0) > kProbTol)
        throw InvalidConfig("initial_dist sums to " + std::to_string(d0));

    for (int s = 0; s < n_states; ++s) {
        check_size(transitions[s].size(), n_actions, "transitions row");
        check_size(features[s].size(), n_actions, "features row");
        if (reward_table) check_size((*reward_table)[s].size(), n_actions, "reward_table row");
        int prev = -1;
        for (int a : available_actions[s]) {
            if (a < 0 || a >= n_actions)
                throw IndexOutOfRange("available action id out of range");
            if (a <= prev) throw InvalidConfig("available_actions must be sorted and unique");
            prev = a;
            double row = 0.0;
            for (const auto& succ : transitions[s][a]) {
                if (succ.state < 0 || succ.state >= n_states)
                    throw IndexOutOfRange("successor state out of range");
                if (succ.prob <= 0.0)
                    throw InvalidConfig("stored successor probabilities must be positive");
                row += succ.prob;
            }
            if (std::abs(row - 1.0) > kProbTol)
                throw InvalidConfig("transition row for available (s=" + std::to_string(s) +
                                    ", a=" + std::to_string(a) + ") sums to " +
                                    std::to_string(row));
        }
        for (int a = 0; a < n_actions; ++a) {
            check_size(features[s][a].size(), n_features, "feature vector");
            for (double v : features[s][a])
                if (v < 0.0) throw InvalidConfig("features must be non-negative");
        }
    }
}

std::string to_string(ConstraintKind k) {
    switch (k) {
    case ConstraintKind::Feature: return "feature";
    case ConstraintKind::State: return "state";
    case ConstraintKind::Action: return "action";
    }
    return "?";
}

bool pair_in_constraint(const Mdp& mdp, const MinimalConstraint& c, int s, int a) {
    switch (c.kind) {
    case ConstraintKind::Feature: return mdp.features[s][a][c.index] > 0.0;
    case ConstraintKind::State: return s == c.index;
    case ConstraintKind::Action: return a == c.index;
    }
    return false;
}

bool ConstraintSet::contains(const Mdp& mdp, int s, int a) const {
    for (const auto& c : minimal_constraints)
        if (pair_in_constraint(mdp, c, s, a)) return true;
    return std::binary_search(empty_state_closure.begin(), empty_state_closure.end(),
                              StateAction{s, a});
}

AugmentedFeatureMap AugmentedFeatureMap::build(const Mdp& mdp) {
    AugmentedFeatureMap m;
    m.k_ = mdp.n_features;
    m.s_ = mdp.n_states;
    m.a_ = mdp.n_actions;
    m.table_.reserve(static_cast<size_t>(m.s_) * m.a_);
    for (int s = 0; s < m.s_; ++s) {
        for (int a = 0; a < m.a_; ++a) {
            Bitset b(m.size());
            for (int i = 0; i < m.k_; ++i)
                if (mdp.features[s][a][i] > 0.0) b.set(i);
            b.set(m.k_ + s);
            b.set(m.k_ + m.s_ + a);
            m.table_.push_back(std::move(b));
        }
    }
    return m;
}

MinimalConstraint AugmentedFeatureMap::constraint_at(int bit) const {
    if (bit < 0 || bit >= size()) throw IndexOutOfRange("augmented indicator out of range");
    if (bit < k_) return {ConstraintKind::Feature, bit};
    if (bit < k_ + s_) return {ConstraintKind::State, bit - k_};
    return {ConstraintKind::Action, bit - k_ - s_};
}

int AugmentedFeatureMap::bit_of(const MinimalConstraint& c) const {
    switch (c.kind) {
    case ConstraintKind::Feature:
        if (c.index < 0 || c.index >= k_) throw IndexOutOfRange("feature index out of range");
        return c.index;
    case ConstraintKind::State:
        if (c.index < 0 || c.index >= s_) throw IndexOutOfRange("state index out of range");
        return k_ + c.index;
    case ConstraintKind::Action:
        if (c.index < 0 || c.index >= a_) throw IndexOutOfRange("action index out of range");
        return k_ + s_ + c.index;
    }
    throw IndexOutOfRange("bad constraint kind");
}

AugmentedFeatureMap augment_features(const Mdp& mdp) {
    return AugmentedFeatureMap::build(mdp);
}

void validate_constraints(const Mdp& mdp, const ConstraintSet& c) {
    for (const auto& mc : c.minimal_constraints) {
        int limit = 0;
        switch (mc.kind) {
        case ConstraintKind::Feature: limit = mdp.n_features; break;
        case ConstraintKind::State: limit = mdp.n_states; break;
        case ConstraintKind::Action: limit = mdp.n_actions; break;
        }
        if (mc.index < 0 || mc.index >= limit)
            throw IndexOutOfRange(to_string(mc.kind) + " constraint index " +
                                  std::to_string(mc.index) + " outside the MDP");
    }
    for (const auto& sa : c.empty_state_closure)
        if (sa.state < 0 || sa.state >= mdp.n_states || sa.action < 0 ||
            sa.action >= mdp.n_actions)
            throw IndexOutOfRange("closure pair outside the MDP");
}

namespace {

// Fixed-point removal shared by apply_constraints and the observation model.
// Starts from direct membership removals, then removes any remaining action
// whose whole transition mass lands in states with empty action sets.
struct ClosureResult {
    std::vector<std::vector<int>> available; // per state, sorted
    std::vector<StateAction> closure_pairs;  // removals beyond direct membership
    std::vector<bool> empty_state;
};

ClosureResult constrain_availability(const Mdp& mdp, const ConstraintSet& c) {
    validate_constraints(mdp, c);
    ClosureResult r;
    r.available.resize(mdp.n_states);
    r.empty_state.assign(mdp.n_states, false);
    for (int s = 0; s < mdp.n_states; ++s) {
        for (int a : mdp.available_actions[s])
            if (!c.contains(mdp, s, a)) r.available[s].push_back(a);
        r.empty_state[s] = r.available[s].empty();
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (int s = 0; s < mdp.n_states; ++s) {
            if (r.available[s].empty()) continue;
            std::vector<int> kept;
            for (int a : r.available[s]) {
                double doomed = 0.0;
                for (const auto& succ : mdp.transitions[s][a])
                    if (r.empty_state[succ.state]) doomed += succ.prob;
                if (doomed >= 1.0 - kProbTol) {
                    r.closure_pairs.push_back({s, a});
                    changed = true;
                } else {
                    kept.push_back(a);
                }
            }
            if (kept.size() != r.available[s].size()) {
                r.available[s] = std::move(kept);
                r.empty_state[s] = r.available[s].empty();
            }
        }
    }
    std::sort(r.closure_pairs.begin(), r.closure_pairs.end());
    return r;
}

void require_feasible_start(const Mdp& mdp, const std::vector<std::vector<int>>& available) {
    for (int s = 0; s < mdp.n_states; ++s)
        if (mdp.initial_dist[s] > 0.0 && !available[s].empty()) return;
    throw FullyConstrained("no initial state keeps an available action");
}

} // namespace

ConstraintSet close_constraints(const Mdp& mdp, const ConstraintSet& c) {
    ConstraintSet out;
    out.minimal_constraints = c.minimal_constraints;
    ConstraintSet direct{c.minimal_constraints, {}};
    out.empty_state_closure = constrain_availability(mdp, direct).closure_pairs;
    return out;
}

Mdp apply_constraints(const Mdp& mdp, const ConstraintSet& c) {
    ConstraintSet direct{c.minimal_constraints, c.empty_state_closure};
    auto closed = constrain_availability(mdp, direct);
    require_feasible_start(mdp, closed.available);
    Mdp out = mdp;
    out.available_actions = std::move(closed.available);
    return out;
}

void renormalize_transitions(Mdp& mdp, const std::vector<bool>& empty_state,
                             std::vector<std::vector<double>>* survive_weight) {
    if (survive_weight) {
        survive_weight->assign(mdp.n_states, std::vector<double>(mdp.n_actions, 0.0));
    }
    for (int s = 0; s < mdp.n_states; ++s) {
        for (int a : mdp.available_actions[s]) {
            double kept = 0.0;
            for (const auto& succ : mdp.transitions[s][a])
                if (!empty_state[succ.state]) kept += succ.prob;
            if (kept <= kProbTol)
                throw TotallyBlocked("available pair (s=" + std::to_string(s) +
                                     ", a=" + std::to_string(a) +
                                     ") transitions into empty states with probability 1");
            std::vector<Successor> renorm;
            renorm.reserve(mdp.transitions[s][a].size());
            for (const auto& succ : mdp.transitions[s][a])
                if (!empty_state[succ.state]) renorm.push_back({succ.state, succ.prob / kept});
            mdp.transitions[s][a] = std::move(renorm);
            if (survive_weight) (*survive_weight)[s][a] = kept;
        }
    }
}

StochasticObservation stochastic_observation_model(const Mdp& mdp, const ConstraintSet& c) {
    ConstraintSet direct{c.minimal_constraints, c.empty_state_closure};
    auto closed = constrain_availability(mdp, direct);
    require_feasible_start(mdp, closed.available);

    StochasticObservation obs;
    obs.mdp = mdp;
    obs.mdp.available_actions = closed.available;
    obs.closure = closed.closure_pairs;
    for (int s = 0; s < mdp.n_states; ++s)
        if (closed.empty_state[s]) obs.empty_states.push_back(s);
    renormalize_transitions(obs.mdp, closed.empty_state, &obs.survive_weight);
    return obs;
}

double trajectory_reward(const Mdp& mdp, const Trajectory& xi) {
    if (xi.states.size() != xi.actions.size())
        throw DimensionMismatch("trajectory needs one action per visited state");
    double total = 0.0;
    double scale = 1.0;
    for (size_t t = 0; t < xi.states.size(); ++t) {
        int s = xi.states[t], a = xi.actions[t];
        if (s < 0 || s >= mdp.n_states || a < 0 || a >= mdp.n_actions)
            throw DimensionMismatch("trajectory indexes outside the MDP");
        total += scale * mdp.reward(s, a);
        scale *= mdp.discount;
    }
    return total;
}

Feasibility validate_trajectory(const Mdp& mdp, const Trajectory& xi) {
    Feasibility f;
    auto fail = [&](Feasibility::Violation v, int step) {
        f.feasible = false;
        f.violation = v;
        f.step = step;
        return f;
    };
    const size_t want = static_cast<size_t>(mdp.horizon) + 1;
    if (xi.states.size() != want || xi.actions.size() != want)
        return fail(Feasibility::Violation::LengthMismatch, -1);
    for (size_t t = 0; t < want; ++t) {
        if (xi.states[t] < 0 || xi.states[t] >= mdp.n_states || xi.actions[t] < 0 ||
            xi.actions[t] >= mdp.n_actions)
            return fail(Feasibility::Violation::OutOfRange, static_cast<int>(t));
    }
    if (mdp.initial_dist[xi.states[0]] <= 0.0)
        return fail(Feasibility::Violation::BadStart, 0);
    for (size_t t = 0; t < want; ++t) {
        if (!mdp.action_available(xi.states[t], xi.actions[t]))
            return fail(Feasibility::Violation::UnavailableAction, static_cast<int>(t));
        if (t + 1 < want) {
            bool found = false;
            for (const auto& succ : mdp.transitions[xi.states[t]][xi.actions[t]]) {
                if (succ.state == xi.states[t + 1] && succ.prob > 0.0) {
                    found = true;
                    break;
                }
            }
            if (!found) return fail(Feasibility::Violation::ImpossibleTransition,
                                    static_cast<int>(t));
        }
    }
    return f;
}

std::string Feasibility::describe() const {
    if (feasible) return "feasible";
    std::string at = step >= 0 ? " at step " + std::to_string(step) : "";
    switch (violation) {
    case Violation::LengthMismatch: return "length does not match the horizon";
    case Violation::OutOfRange: return "state or action id out of range" + at;
    case Violation::BadStart: return "initial state has zero initial probability";
    case Violation::UnavailableAction: return "action not available" + at;
    case Violation::ImpossibleTransition: return "transition has zero probability" + at;
    case Violation::None: break;
    }
    return "feasible";
}

Bitset accrued_features(const AugmentedFeatureMap& map, const Trajectory& xi) {
    Bitset acc(map.size());
    for (size_t t = 0; t < xi.states.size(); ++t)
        acc |= map.indicators(xi.states[t], xi.actions[t]);
    return acc;
}

void finalize_trajectory(const Mdp& mdp, const AugmentedFeatureMap& map, Trajectory& xi) {
    xi.reward = trajectory_reward(mdp, xi);
    xi.accrued = accrued_features(map, xi);
}

} // namespace mlci

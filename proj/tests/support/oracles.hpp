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

// Exhaustive enumeration oracles. These stay independent of the library's
// backward/forward passes: everything here is computed by walking the full
// trajectory set directly.

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mlci/maxent.hpp"
#include "mlci/mdp.hpp"

namespace mlci::test {

/// All feasible trajectories of an MDP (every start with positive initial
/// probability, every available action, every positive-probability
/// successor). Throws if the count exceeds `cap`.
inline std::vector<Trajectory> enumerate_trajectories(const Mdp& mdp, size_t cap = 500000) {
    std::vector<Trajectory> out;
    Trajectory cur;
    auto extend = [&](auto&& self, int s, int t) -> void {
        cur.states.push_back(s);
        for (int a : mdp.available_actions[s]) {
            cur.actions.push_back(a);
            if (t == mdp.horizon) {
                if (out.size() >= cap) throw std::runtime_error("enumeration cap exceeded");
                out.push_back(cur);
            } else {
                for (const auto& succ : mdp.transitions[s][a])
                    self(self, succ.state, t + 1);
            }
            cur.actions.pop_back();
        }
        cur.states.pop_back();
    };
    for (int s = 0; s < mdp.n_states; ++s)
        if (mdp.initial_dist[s] > 0.0) extend(extend, s, 0);
    return out;
}

/// Discounted reward computed with a bare loop (no library call).
inline double naive_reward(const Mdp& mdp, const Trajectory& xi) {
    double total = 0.0;
    for (size_t t = 0; t < xi.states.size(); ++t)
        total += std::pow(mdp.discount, static_cast<double>(t)) *
                 mdp.reward(xi.states[t], xi.actions[t]);
    return total;
}

/// Partition sum over enumerated trajectories: sum of D_0(s_0) e^{beta R(xi)}.
/// Exact for deterministic MDPs.
inline double enumerated_partition(const Mdp& mdp, const std::vector<Trajectory>& all) {
    double z = 0.0;
    for (const auto& xi : all)
        z += mdp.initial_dist[xi.states[0]] * std::exp(mdp.rationality * naive_reward(mdp, xi));
    return z;
}

/// Probability of one trajectory under (D_0, pi, P): the distribution the
/// forward passes propagate.
inline double path_probability(const Mdp& mdp, const TimeVaryingPolicy& pol,
                               const Trajectory& xi) {
    double p = mdp.initial_dist[xi.states[0]];
    for (size_t t = 0; t < xi.states.size(); ++t) {
        p *= pol.prob(static_cast<int>(t), xi.states[t], xi.actions[t]);
        if (t + 1 < xi.states.size()) {
            double step = 0.0;
            for (const auto& succ : mdp.transitions[xi.states[t]][xi.actions[t]])
                if (succ.state == xi.states[t + 1]) step = succ.prob;
            p *= step;
        }
    }
    return p;
}

/// Enumerated accrual mass per augmented indicator: total path probability of
/// the trajectories that ever produce each indicator.
inline std::vector<double> enumerated_accrual(const Mdp& mdp, const AugmentedFeatureMap& map,
                                              const TimeVaryingPolicy& pol,
                                              const std::vector<Trajectory>& all) {
    std::vector<double> mass(map.size(), 0.0);
    for (const auto& xi : all) {
        double p = path_probability(mdp, pol, xi);
        if (p <= 0.0) continue;
        Bitset acc = accrued_features(map, xi);
        for (int i = 0; i < map.size(); ++i)
            if (acc.test(i)) mass[i] += p;
    }
    return mass;
}

/// Same, for an arbitrary compound set: mass of trajectories containing any
/// member pair.
inline double enumerated_compound_mass(const Mdp& mdp, const TimeVaryingPolicy& pol,
                                       const ConstraintSet& c,
                                       const std::vector<Trajectory>& all) {
    double mass = 0.0;
    for (const auto& xi : all) {
        bool hit = false;
        for (size_t t = 0; t < xi.states.size() && !hit; ++t)
            hit = c.contains(mdp, xi.states[t], xi.actions[t]);
        if (hit) mass += path_probability(mdp, pol, xi);
    }
    return mass;
}

/// Expected per-trajectory accrual counts (with repeats), for contrasting
/// against the first-accrual pass.
inline std::vector<double> enumerated_expected_counts(const Mdp& mdp,
                                                      const AugmentedFeatureMap& map,
                                                      const TimeVaryingPolicy& pol,
                                                      const std::vector<Trajectory>& all) {
    std::vector<double> counts(map.size(), 0.0);
    for (const auto& xi : all) {
        double p = path_probability(mdp, pol, xi);
        if (p <= 0.0) continue;
        for (size_t t = 0; t < xi.states.size(); ++t) {
            const Bitset& bits = map.indicators(xi.states[t], xi.actions[t]);
            for (int i = 0; i < map.size(); ++i)
                if (bits.test(i)) counts[i] += p;
        }
    }
    return counts;
}

} // namespace mlci::test

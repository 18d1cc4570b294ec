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

#include "mlci/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace mlci {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double log_sum_exp(const std::vector<double>& xs) {
    double m = kNegInf;
    for (double x : xs) m = std::max(m, x);
    if (m == kNegInf) return kNegInf;
    double sum = 0.0;
    for (double x : xs) sum += std::exp(x - m);
    return m + std::log(sum);
}

uint64_t split_mix_64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double TimeVaryingPolicy::prob(int t, int s, int a) const {
    double lp = log_pi[t][s][a];
    return lp == kNegInf ? 0.0 : std::exp(lp);
}

DemoSet make_demo_set(const Mdp& mdp, const AugmentedFeatureMap& map,
                      std::vector<Trajectory> trajectories) {
    DemoSet d;
    d.demos = std::move(trajectories);
    for (size_t i = 0; i < d.demos.size(); ++i) {
        auto feas = validate_trajectory(mdp, d.demos[i]);
        if (!feas)
            throw InfeasibleDemo(static_cast<int>(i), "demo " + std::to_string(i) + " " +
                                                          feas.describe());
        finalize_trajectory(mdp, map, d.demos[i]);
    }
    // Deterministic empirical distribution keyed by the flattened sequence.
    std::map<std::pair<std::vector<int>, std::vector<int>>, int> counts;
    for (const auto& traj : d.demos) ++counts[{traj.states, traj.actions}];
    for (const auto& [key, count] : counts) {
        Trajectory t;
        t.states = key.first;
        t.actions = key.second;
        finalize_trajectory(mdp, map, t);
        d.distinct.push_back({std::move(t), count});
    }
    return d;
}

std::pair<TimeVaryingPolicy, PartitionValue> backward_pass(const Mdp& mdp) {
    const int T = mdp.horizon;
    const double beta = mdp.rationality;

    TimeVaryingPolicy pol;
    pol.horizon = T;
    pol.log_pi.assign(T + 1,
                      std::vector<std::vector<double>>(
                          mdp.n_states, std::vector<double>(mdp.n_actions, kNegInf)));

    PartitionValue part;
    part.state_log_value.assign(T + 1, std::vector<double>(mdp.n_states, kNegInf));

    // gamma^t factors; the value at step t accumulates rewards discounted to
    // trajectory time, so the recursion stays exact for gamma < 1.
    std::vector<double> gamma_pow(T + 1, 1.0);
    for (int t = 1; t <= T; ++t) gamma_pow[t] = gamma_pow[t - 1] * mdp.discount;

    std::vector<double> next_value(mdp.n_states, 0.0); // continuation after the last action
    for (int t = T; t >= 0; --t) {
        for (int s = 0; s < mdp.n_states; ++s) {
            const auto& actions = mdp.available_actions[s];
            if (actions.empty()) continue; // value stays -inf: no continuation exists
            std::vector<double> q(actions.size(), kNegInf);
            for (size_t i = 0; i < actions.size(); ++i) {
                int a = actions[i];
                double expect = 0.0;
                if (t < T) {
                    for (const auto& succ : mdp.transitions[s][a]) {
                        double v = next_value[succ.state];
                        if (v == kNegInf) {
                            expect = kNegInf;
                            break;
                        }
                        expect += succ.prob * v;
                    }
                }
                if (expect != kNegInf)
                    q[i] = beta * gamma_pow[t] * mdp.reward(s, a) + expect;
            }
            double v = log_sum_exp(q);
            part.state_log_value[t][s] = v;
            if (v != kNegInf)
                for (size_t i = 0; i < actions.size(); ++i)
                    if (q[i] != kNegInf) pol.log_pi[t][s][actions[i]] = q[i] - v;
        }
        next_value = part.state_log_value[t];
    }

    std::vector<double> init_terms;
    for (int s = 0; s < mdp.n_states; ++s)
        if (mdp.initial_dist[s] > 0.0 && part.state_log_value[0][s] != kNegInf)
            init_terms.push_back(std::log(mdp.initial_dist[s]) + part.state_log_value[0][s]);
    if (init_terms.empty())
        throw NoFeasibleTrajectory("every initial state is empty after constraint closure");
    part.log_z = log_sum_exp(init_terms);
    return {std::move(pol), std::move(part)};
}

double trajectory_log_prob(const Mdp& mdp, const PartitionValue& z, const Trajectory& xi) {
    if (!validate_trajectory(mdp, xi)) return kNegInf;
    return mdp.rationality * trajectory_reward(mdp, xi) +
           std::log(mdp.initial_dist[xi.states[0]]) - z.log_z;
}

double demo_set_log_prob(const Mdp& mdp, const PartitionValue& z, const DemoSet& demos) {
    double total = 0.0;
    for (size_t i = 0; i < demos.demos.size(); ++i) {
        double lp = trajectory_log_prob(mdp, z, demos.demos[i]);
        if (lp == kNegInf)
            throw InfeasibleDemo(static_cast<int>(i),
                                 "demo " + std::to_string(i) + " has zero model probability: " +
                                     validate_trajectory(mdp, demos.demos[i]).describe());
        total += lp;
    }
    return total;
}

double kl_empirical_model(const DemoSet& demos, const Mdp& mdp, const PartitionValue& z) {
    if (demos.empty()) throw InvalidConfig("KL divergence of an empty demo set");
    const double n = demos.size();
    double kl = 0.0;
    for (size_t i = 0; i < demos.distinct.size(); ++i) {
        const auto& entry = demos.distinct[i];
        double p_d = entry.count / n;
        double lp_m = trajectory_log_prob(mdp, z, entry.traj);
        if (lp_m == kNegInf)
            throw InfeasibleDemo(static_cast<int>(i),
                                 "demonstrated trajectory has zero model probability: " +
                                     validate_trajectory(mdp, entry.traj).describe());
        kl += p_d * (std::log(p_d) - lp_m);
    }
    return kl;
}

namespace {

// Uniform double in [0, 1) from a raw 64-bit draw; stable across platforms.
double uniform01(uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

int sample_index(const std::vector<double>& probs, double u) {
    double acc = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
}

} // namespace

DemoSet sample_trajectories(const Mdp& mdp, const TimeVaryingPolicy& pol, int n,
                            uint64_t seed) {
    if (n < 1) throw InvalidConfig("need at least one trajectory to sample");
    if (pol.steps() != mdp.horizon + 1)
        throw HorizonMismatch("policy does not match the MDP horizon");

    std::vector<double> init = mdp.initial_dist;
    std::vector<Trajectory> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        // Independent per-trajectory stream: chain two splitmix steps so that
        // nearby (seed, index) pairs do not correlate.
        uint64_t stream = seed;
        uint64_t mix = split_mix_64(stream) ^ (0x9e3779b97f4a7c15ULL * (uint64_t(i) + 1));
        Trajectory traj;
        int s = sample_index(init, uniform01(split_mix_64(mix)));
        for (int t = 0; t <= mdp.horizon; ++t) {
            const auto& actions = mdp.available_actions[s];
            std::vector<double> probs(actions.size());
            for (size_t k = 0; k < actions.size(); ++k)
                probs[k] = pol.prob(t, s, actions[k]);
            int a = actions[sample_index(probs, uniform01(split_mix_64(mix)))];
            traj.states.push_back(s);
            traj.actions.push_back(a);
            if (t < mdp.horizon) {
                const auto& succs = mdp.transitions[s][a];
                std::vector<double> ps(succs.size());
                for (size_t k = 0; k < succs.size(); ++k) ps[k] = succs[k].prob;
                s = succs[sample_index(ps, uniform01(split_mix_64(mix)))].state;
            }
        }
        out.push_back(std::move(traj));
    }
    auto map = augment_features(mdp);
    return make_demo_set(mdp, map, std::move(out));
}

std::vector<double> expected_feature_counts(const Mdp& mdp, const TimeVaryingPolicy& pol) {
    if (pol.steps() != mdp.horizon + 1)
        throw HorizonMismatch("policy does not match the MDP horizon");
    std::vector<double> counts(mdp.n_features, 0.0);
    std::vector<double> dist = mdp.initial_dist;
    double scale = 1.0;
    for (int t = 0; t <= mdp.horizon; ++t) {
        std::vector<double> next(mdp.n_states, 0.0);
        for (int s = 0; s < mdp.n_states; ++s) {
            if (dist[s] <= 0.0) continue;
            for (int a : mdp.available_actions[s]) {
                double w = dist[s] * pol.prob(t, s, a);
                if (w <= 0.0) continue;
                const auto& f = mdp.features[s][a];
                for (int i = 0; i < mdp.n_features; ++i) counts[i] += scale * w * f[i];
                if (t < mdp.horizon)
                    for (const auto& succ : mdp.transitions[s][a])
                        next[succ.state] += w * succ.prob;
            }
        }
        if (t < mdp.horizon) dist = std::move(next);
        scale *= mdp.discount;
    }
    return counts;
}

std::vector<double> learn_reward_weights(const Mdp& mdp_skeleton, const DemoSet& demos,
                                         double step_size, int iterations,
                                         std::vector<double>* loglik_history) {
    if (demos.empty()) throw InvalidConfig("cannot learn a reward from zero demos");
    const int k = mdp_skeleton.n_features;
    const double n = demos.size();
    const double beta = mdp_skeleton.rationality;

    // Empirical mean of discounted feature counts.
    std::vector<double> empirical(k, 0.0);
    for (const auto& demo : demos.demos) {
        double scale = 1.0;
        for (size_t t = 0; t < demo.states.size(); ++t) {
            const auto& f = mdp_skeleton.features[demo.states[t]][demo.actions[t]];
            for (int i = 0; i < k; ++i) empirical[i] += scale * f[i];
            scale *= mdp_skeleton.discount;
        }
    }
    for (int i = 0; i < k; ++i) empirical[i] /= n;

    Mdp mdp = mdp_skeleton;
    mdp.reward_table.reset();
    std::vector<double> w(k, 0.0);
    double best_ll = kNegInf;
    int decline_streak = 0;
    for (int it = 0; it < iterations; ++it) {
        mdp.reward_weights = w;
        auto [pol, part] = backward_pass(mdp);
        double ll = demo_set_log_prob(mdp, part, demos) / n;
        if (loglik_history) loglik_history->push_back(ll);
        if (ll < best_ll) {
            if (++decline_streak >= 10)
                throw Divergence("demo log-likelihood decreased for 10 consecutive steps");
        } else {
            decline_streak = 0;
            best_ll = ll;
        }
        auto model = expected_feature_counts(mdp, pol);
        for (int i = 0; i < k; ++i) w[i] += step_size * beta * (empirical[i] - model[i]);
    }
    return w;
}

} // namespace mlci

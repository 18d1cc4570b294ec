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

#include "mlci/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mlci {

std::string to_string(StopReason r) {
    switch (r) {
    case StopReason::Threshold: return "threshold";
    case StopReason::Exhausted: return "exhausted";
    case StopReason::MaxIters: return "max_iters";
    case StopReason::NoPositiveMass: return "no_positive_mass";
    }
    return "?";
}

ScoredModel constrained_observation(const Mdp& nominal, const ConstraintSet& c) {
    ScoredModel sm;
    if (nominal.is_deterministic()) {
        sm.closed = close_constraints(nominal, c);
        sm.mdp = apply_constraints(nominal, sm.closed);
        auto [pol, part] = backward_pass(sm.mdp);
        sm.policy = std::move(pol);
        sm.partition = std::move(part);
        return sm;
    }
    // Stochastic case: demonstrations that survive censoring follow the
    // renormalized kernel, so the agent model plans on it; the observed
    // policy additionally downweights each pair by its surviving mass.
    auto obs = stochastic_observation_model(nominal, c);
    auto [agent_pol, agent_part] = backward_pass(obs.mdp);

    TimeVaryingPolicy observed = agent_pol;
    for (int t = 0; t < observed.steps(); ++t) {
        for (int s = 0; s < obs.mdp.n_states; ++s) {
            const auto& actions = obs.mdp.available_actions[s];
            if (actions.empty()) continue;
            std::vector<double> weighted(actions.size());
            double total = 0.0;
            for (size_t i = 0; i < actions.size(); ++i) {
                weighted[i] = agent_pol.prob(t, s, actions[i]) *
                              obs.survive_weight[s][actions[i]];
                total += weighted[i];
            }
            for (int a = 0; a < obs.mdp.n_actions; ++a)
                observed.log_pi[t][s][a] = -std::numeric_limits<double>::infinity();
            if (total <= 0.0) continue;
            for (size_t i = 0; i < actions.size(); ++i)
                if (weighted[i] > 0.0)
                    observed.log_pi[t][s][actions[i]] = std::log(weighted[i] / total);
        }
    }
    sm.closed = ConstraintSet{c.minimal_constraints, obs.closure};
    sm.policy = std::move(observed);
    sm.partition = std::move(agent_part);
    sm.mdp = std::move(obs.mdp);
    return sm;
}

std::vector<Hypothesis> candidate_hypotheses(const Mdp& mdp, const AugmentedFeatureMap& map,
                                             const DemoSet& demos) {
    auto [pol, part] = backward_pass(mdp);
    (void)part;
    auto hist = feature_accrual_history(mdp, map, pol);

    std::vector<Hypothesis> hyps;
    hyps.reserve(map.size());
    for (int bit = 0; bit < map.size(); ++bit) {
        Hypothesis h;
        h.constraint = map.constraint_at(bit);
        h.eliminated_mass = hist.final_accrual()[bit];
        h.demo_respecting = true;
        for (const auto& demo : demos.demos) {
            if (demo.accrued.test(bit)) {
                h.demo_respecting = false;
                break;
            }
        }
        hyps.push_back(h);
    }
    return hyps;
}

void score_hypotheses(const Mdp& mdp, const AugmentedFeatureMap& map,
                      const TimeVaryingPolicy& pol, std::vector<Hypothesis>& hyps) {
    auto hist = feature_accrual_history(mdp, map, pol);
    for (auto& h : hyps) h.eliminated_mass = eliminated_mass(hist, h.constraint);
}

namespace {

// Argmax over demo-respecting positive-mass hypotheses; assumes hypotheses
// are already in canonical order so the first strict maximum wins ties.
const Hypothesis* pick_best(const std::vector<Hypothesis>& hyps) {
    const Hypothesis* best = nullptr;
    for (const auto& h : hyps) {
        if (!h.demo_respecting || h.eliminated_mass <= 0.0) continue;
        if (!best || h.eliminated_mass > best->eliminated_mass) best = &h;
    }
    return best;
}

} // namespace

Hypothesis select_max_likelihood_constraint(const Mdp& mdp, const TimeVaryingPolicy& pol,
                                            const std::vector<Hypothesis>& hyps) {
    bool any_respecting = false;
    for (const auto& h : hyps)
        if (h.demo_respecting) any_respecting = true;
    if (!any_respecting) throw NoCandidates("no demo-respecting hypothesis");

    auto map = augment_features(mdp);
    std::vector<Hypothesis> scored = hyps;
    std::sort(scored.begin(), scored.end(),
              [](const Hypothesis& a, const Hypothesis& b) { return a.constraint < b.constraint; });
    score_hypotheses(mdp, map, pol, scored);
    const Hypothesis* best = pick_best(scored);
    if (!best) throw NoCandidates("every demo-respecting hypothesis eliminates zero mass");
    return *best;
}

InferenceResult greedy_iterative_inference(const Mdp& mdp, const DemoSet& demos,
                                           const InferenceOptions& opts) {
    auto map = augment_features(mdp);
    for (size_t i = 0; i < demos.demos.size(); ++i) {
        auto feas = validate_trajectory(mdp, demos.demos[i]);
        if (!feas)
            throw InfeasibleDemo(static_cast<int>(i), "demo " + std::to_string(i) +
                                                          " infeasible on the nominal MDP: " +
                                                          feas.describe());
    }

    // Demo-respecting status never changes: it depends on the demos alone.
    auto hyps = candidate_hypotheses(mdp, map, demos);
    std::erase_if(hyps, [&](const Hypothesis& h) {
        return !h.demo_respecting || !opts.kind_allowed(h.constraint.kind);
    });

    const int max_iters = opts.max_iters >= 0 ? opts.max_iters : map.size();

    InferenceResult result;
    ConstraintSet current;
    auto model = constrained_observation(mdp, current);
    double kl = kl_empirical_model(demos, model.mdp, model.partition);
    result.initial_kl = kl;
    result.final_kl = kl;
    result.stop_reason = max_iters == 0 ? StopReason::MaxIters : StopReason::Exhausted;

    for (int iter = 1; iter <= max_iters; ++iter) {
        if (hyps.empty()) {
            result.stop_reason = StopReason::Exhausted;
            break;
        }
        score_hypotheses(model.mdp, map, model.policy, hyps);

        // The accrued-indicator test is necessary but not sufficient: a
        // candidate's empty-state closure can still eliminate a demo whose
        // final action leads into a newly emptied state. Such candidates
        // violate the no-eliminated-demo constraint and are dropped.
        const Hypothesis* best = nullptr;
        ConstraintSet trial;
        std::optional<ScoredModel> trial_model;
        while (true) {
            best = pick_best(hyps);
            if (!best) break;
            trial = current;
            trial.minimal_constraints.push_back(best->constraint);
            try {
                trial_model = constrained_observation(mdp, trial);
            } catch (const FullyConstrained&) {
                trial_model.reset();
            }
            bool eliminates_demo = !trial_model.has_value();
            for (const auto& demo : demos.demos) {
                if (eliminates_demo) break;
                eliminates_demo = !validate_trajectory(trial_model->mdp, demo).feasible;
            }
            if (!eliminates_demo) break;
            auto doomed = best->constraint;
            std::erase_if(hyps, [&](const Hypothesis& h) { return h.constraint == doomed; });
        }
        if (!best) {
            result.stop_reason =
                hyps.empty() ? StopReason::Exhausted : StopReason::NoPositiveMass;
            break;
        }
        double trial_kl = kl_empirical_model(demos, trial_model->mdp, trial_model->partition);

        IterationRecord rec;
        rec.iteration = iter;
        rec.chosen = best->constraint;
        rec.eliminated_mass = best->eliminated_mass;
        rec.kl_before = kl;
        rec.kl_after = trial_kl;
        rec.delta_kl = kl - trial_kl;

        if (!(rec.delta_kl > opts.d_kl_threshold)) {
            result.stop_reason = StopReason::Threshold;
            result.rejected = rec;
            break;
        }

        result.selected.push_back(best->constraint);
        result.iterations.push_back(rec);
        auto accepted = best->constraint;
        std::erase_if(hyps, [&](const Hypothesis& h) { return h.constraint == accepted; });
        current = trial_model->closed;
        model = std::move(*trial_model);
        kl = trial_kl;
        result.final_kl = kl;
        if (iter == max_iters) result.stop_reason = StopReason::MaxIters;
    }
    return result;
}

namespace {

int64_t binomial_guarded(int n, int k) {
    if (k < 0 || k > n) return 0;
    long double acc = 1.0L;
    for (int i = 1; i <= k; ++i) {
        acc = acc * (n - k + i) / i;
        if (acc > 2e6L) return 2'000'000; // caller only needs the guard
    }
    return static_cast<int64_t>(acc + 0.5L);
}

} // namespace

BestCombination brute_force_best_combination(const Mdp& mdp, const DemoSet& demos, int n_c,
                                             const InferenceOptions& opts) {
    auto map = augment_features(mdp);
    auto hyps = candidate_hypotheses(mdp, map, demos);
    std::erase_if(hyps, [&](const Hypothesis& h) {
        return !h.demo_respecting || !opts.kind_allowed(h.constraint.kind);
    });
    std::sort(hyps.begin(), hyps.end(),
              [](const Hypothesis& a, const Hypothesis& b) { return a.constraint < b.constraint; });

    const int n = static_cast<int>(hyps.size());
    if (n_c < 1) throw InvalidConfig("combination size must be at least 1");
    if (n == 0) throw NoCandidates("no demo-respecting hypothesis");
    const int k = std::min(n_c, n);
    if (binomial_guarded(n, k) > 1'000'000)
        throw TooLarge("combination space exceeds the one-million guard");

    auto [pol, part] = backward_pass(mdp);
    (void)part;

    BestCombination best;
    best.eliminated_mass = -1.0;
    std::vector<int> pick(k);
    // Plain lexicographic combination enumeration; first maximum wins, which
    // matches the canonical tie-break.
    auto evaluate = [&]() {
        ConstraintSet set;
        for (int idx : pick) set.minimal_constraints.push_back(hyps[idx].constraint);
        // The union must not eliminate any demo, closure effects included.
        try {
            Mdp constrained = apply_constraints(mdp, set);
            for (const auto& demo : demos.demos)
                if (!validate_trajectory(constrained, demo).feasible) return;
        } catch (const FullyConstrained&) {
            return;
        }
        double mass = eliminated_mass_compound(mdp, pol, set);
        if (mass > best.eliminated_mass) {
            best.eliminated_mass = mass;
            best.constraints = set;
        }
    };
    for (int i = 0; i < k; ++i) pick[i] = i;
    while (true) {
        evaluate();
        int pos = k - 1;
        while (pos >= 0 && pick[pos] == n - k + pos) --pos;
        if (pos < 0) break;
        ++pick[pos];
        for (int j = pos + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
    return best;
}

double false_positive_rate(const InferenceResult& result, const ConstraintSet& truth,
                           const Mdp& mdp) {
    validate_constraints(mdp, ConstraintSet{result.selected, {}});
    validate_constraints(mdp, truth);
    if (result.selected.empty()) return 0.0;
    // Expand the truth's membership over available pairs once.
    int false_positives = 0;
    for (const auto& sel : result.selected) {
        bool subset = true;
        for (int s = 0; s < mdp.n_states && subset; ++s) {
            for (int a : mdp.available_actions[s]) {
                if (!pair_in_constraint(mdp, sel, s, a)) continue;
                if (!truth.contains(mdp, s, a)) {
                    subset = false;
                    break;
                }
            }
        }
        if (!subset) ++false_positives;
    }
    return static_cast<double>(false_positives) / static_cast<double>(result.selected.size());
}

} // namespace mlci

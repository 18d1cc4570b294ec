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

#include "mlci/accrual.hpp"

#include <cassert>
#include <cmath>

namespace mlci {

namespace {

// Shared forward pass over an arbitrary indicator layout. bits_per_pair maps
// (s * n_actions + a) to the indicator ids set for that pair. Visitation mass
// and per-state accrued mass propagate together through (policy, kernel);
// new accruals at (s, a, t) are indicator * (D_{s,t} - Phi_{s,t}), so a
// trajectory that already accrued an indicator is not counted again.
AccrualHistory forward_pass(const Mdp& mdp, const TimeVaryingPolicy& pol,
                            const std::vector<std::vector<int>>& bits_per_pair,
                            int n_indicators, bool keep_state_blocks) {
    if (pol.steps() != mdp.horizon + 1)
        throw HorizonMismatch("policy has " + std::to_string(pol.steps()) +
                              " slices for horizon " + std::to_string(mdp.horizon));
    const int T = mdp.horizon;
    const int S = mdp.n_states;
    const size_t A = static_cast<size_t>(mdp.n_actions);

    AccrualHistory hist;
    hist.n_indicators = n_indicators;
    hist.horizon = T;
    hist.visitation.assign(T + 1, std::vector<double>(S, 0.0));
    hist.visitation[0] = mdp.initial_dist;
    hist.accrued.assign(T + 1, std::vector<double>(n_indicators, 0.0));

    // Rolling per-state accrual blocks for two adjacent time slices.
    std::vector<std::vector<double>> phi(S, std::vector<double>(n_indicators, 0.0));
    std::vector<std::vector<double>> phi_next(S, std::vector<double>(n_indicators, 0.0));
    std::vector<double> carried(n_indicators, 0.0);

    for (int t = 0; t <= T; ++t) {
        const auto& dist = hist.visitation[t];
        std::vector<double>* next_dist = t < T ? &hist.visitation[t + 1] : nullptr;
        for (auto& block : phi_next) std::fill(block.begin(), block.end(), 0.0);
        std::fill(carried.begin(), carried.end(), 0.0);

        for (int s = 0; s < S; ++s) {
            if (dist[s] <= 0.0) continue; // no visiting mass, no accrued mass
            for (int a : mdp.available_actions[s]) {
                double pi = pol.prob(t, s, a);
                if (pi <= 0.0) continue;
                const auto& bits = bits_per_pair[static_cast<size_t>(s) * A + a];
                if (t < T) {
                    for (const auto& succ : mdp.transitions[s][a]) {
                        double w = pi * succ.prob;
                        auto& target = phi_next[succ.state];
                        for (int i = 0; i < n_indicators; ++i)
                            target[i] += w * phi[s][i];
                        for (int i : bits)
                            target[i] += w * (dist[s] - phi[s][i]);
                        (*next_dist)[succ.state] += dist[s] * w;
                    }
                } else {
                    // Final action step: aggregate directly, no propagation target.
                    for (int i = 0; i < n_indicators; ++i)
                        carried[i] += pi * phi[s][i];
                    for (int i : bits)
                        carried[i] += pi * (dist[s] - phi[s][i]);
                }
            }
        }

        auto& column = hist.accrued[t];
        if (t < T) {
            for (int s = 0; s < S; ++s)
                for (int i = 0; i < n_indicators; ++i) column[i] += phi_next[s][i];
            std::swap(phi, phi_next);
#ifndef NDEBUG
            for (int s = 0; s < S; ++s)
                for (int i = 0; i < n_indicators; ++i)
                    assert(phi[s][i] <= hist.visitation[t + 1][s] + 1e-9);
#endif
        } else {
            column = carried;
        }
    }

    if (keep_state_blocks) hist.state_blocks = std::move(phi);
    return hist;
}

} // namespace

int AccrualHistory::bit_of(const MinimalConstraint& c) const {
    int bit = -1;
    switch (c.kind) {
    case ConstraintKind::Feature: bit = c.index >= 0 && c.index < n_native ? c.index : -1; break;
    case ConstraintKind::State:
        bit = c.index >= 0 && c.index < n_states ? n_native + c.index : -1;
        break;
    case ConstraintKind::Action:
        bit = c.index >= 0 && c.index < n_actions ? n_native + n_states + c.index : -1;
        break;
    }
    if (bit < 0) throw IndexOutOfRange("constraint does not index the accrual table");
    return bit;
}

AccrualHistory feature_accrual_history(const Mdp& mdp, const AugmentedFeatureMap& map,
                                       const TimeVaryingPolicy& pol,
                                       const AccrualOptions& opts) {
    std::vector<std::vector<int>> bits(static_cast<size_t>(mdp.n_states) * mdp.n_actions);
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a)
            bits[static_cast<size_t>(s) * mdp.n_actions + a] = map.indicators(s, a).set_bits();
    auto hist = forward_pass(mdp, pol, bits, map.size(), opts.keep_state_blocks);
    hist.n_native = map.n_native();
    hist.n_states = map.n_states();
    hist.n_actions = map.n_actions();
    return hist;
}

double eliminated_mass(const AccrualHistory& hist, const MinimalConstraint& c) {
    return hist.final_accrual()[hist.bit_of(c)];
}

double eliminated_mass_compound(const Mdp& mdp, const TimeVaryingPolicy& pol,
                                const ConstraintSet& c) {
    validate_constraints(mdp, c);
    std::vector<std::vector<int>> bits(static_cast<size_t>(mdp.n_states) * mdp.n_actions);
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a)
            if (c.contains(mdp, s, a))
                bits[static_cast<size_t>(s) * mdp.n_actions + a] = {0};
    return forward_pass(mdp, pol, bits, 1, false).final_accrual()[0];
}

} // namespace mlci

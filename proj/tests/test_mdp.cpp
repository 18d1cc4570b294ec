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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "mlci/accrual.hpp"
#include "mlci/gridworld.hpp"
#include "mlci/maxent.hpp"
#include "mlci/mdp.hpp"
#include "oracles.hpp"

using namespace mlci;
using test::Rng;

namespace {

// Chain s0 -> s1 -> s2 with single forward actions and a self-loop at the
// end. An escape self-loop at s0 keeps the chain viable under closure.
Mdp chain_mdp(bool escape_at_s0) {
    Mdp m;
    m.n_states = 3;
    m.n_actions = 2; // 0 = advance/self-loop, 1 = escape loop at s0
    m.n_features = 1;
    m.horizon = 3;
    m.initial_dist = {1.0, 0.0, 0.0};
    m.reward_weights = {-1.0};
    m.available_actions = {{0}, {0}, {0}};
    if (escape_at_s0) m.available_actions[0] = {0, 1};
    m.transitions.assign(3, std::vector<std::vector<Successor>>(2));
    m.transitions[0][0] = {{1, 1.0}};
    m.transitions[0][1] = {{0, 1.0}};
    m.transitions[1][0] = {{2, 1.0}};
    m.transitions[2][0] = {{2, 1.0}};
    m.features.assign(3, std::vector<std::vector<double>>(2, std::vector<double>(1, 0.0)));
    m.features[0][0][0] = 1.0;
    m.features[1][0][0] = 1.0;
    m.validate();
    return m;
}

GridConfig grid3x3() {
    GridConfig cfg;
    cfg.name = "tiny";
    cfg.width = 3;
    cfg.height = 3;
    cfg.start = {0, 0};
    cfg.goal = {2, 2};
    cfg.horizon = 4;
    return cfg;
}

} // namespace

TEST_CASE("augmented map has one indicator per feature, state, and action") {
    GridConfig cfg;
    cfg.width = 9;
    cfg.height = 9;
    cfg.start = {0, 0};
    cfg.goal = {8, 0};
    cfg.colors.push_back({"green", {{1, 6}}, {}});
    auto gw = build_gridworld(cfg);
    // two native features, 81 states: the remaining count comes from actions.
    auto map = augment_features(gw.nominal);
    CHECK(map.size() == 2 + 81 + gw.nominal.n_actions);
}

TEST_CASE("indicator layout: feature bits from phi > 0, one state and one action bit") {
    Mdp m = chain_mdp(true);
    m.n_features = 2;
    m.reward_weights = {-1.0, 0.0};
    for (auto& per_state : m.features)
        for (auto& row : per_state) row.assign(2, 0.0);
    m.features[0][0] = {0.5, 0.0};
    m.validate();
    auto map = augment_features(m);
    const Bitset& bits = map.indicators(0, 0);
    CHECK(bits.test(map.feature_bit(0)));
    CHECK_FALSE(bits.test(map.feature_bit(1)));
    CHECK(bits.test(map.state_bit(0)));
    CHECK_FALSE(bits.test(map.state_bit(1)));
    CHECK(bits.test(map.action_bit(0)));
    CHECK_FALSE(bits.test(map.action_bit(1)));
}

TEST_CASE("augmented map matches per-pair brute-force evaluation on a 3x3 grid") {
    auto gw = build_gridworld(grid3x3());
    const Mdp& m = gw.nominal;
    auto map = augment_features(m);
    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) {
            const Bitset& bits = map.indicators(s, a);
            int set_count = 0;
            for (int i = 0; i < m.n_features; ++i) {
                CHECK(bits.test(i) == (m.features[s][a][i] > 0.0));
                set_count += bits.test(i);
            }
            for (int s2 = 0; s2 < m.n_states; ++s2) {
                CHECK(bits.test(map.state_bit(s2)) == (s == s2));
                set_count += bits.test(map.state_bit(s2));
            }
            for (int a2 = 0; a2 < m.n_actions; ++a2) {
                CHECK(bits.test(map.action_bit(a2)) == (a == a2));
                set_count += bits.test(map.action_bit(a2));
            }
            CHECK(set_count == bits.count());
        }
    }
}

TEST_CASE("exactly one state and one action indicator per pair") {
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        Mdp m = test::random_small_mdp(rng, rep % 2 == 1);
        auto map = augment_features(m);
        for (int s = 0; s < m.n_states; ++s) {
            for (int a = 0; a < m.n_actions; ++a) {
                const Bitset& bits = map.indicators(s, a);
                int state_bits = 0, action_bits = 0;
                for (int i = 0; i < m.n_states; ++i) state_bits += bits.test(map.state_bit(i));
                for (int i = 0; i < m.n_actions; ++i)
                    action_bits += bits.test(map.action_bit(i));
                CHECK(state_bits == 1);
                CHECK(action_bits == 1);
            }
        }
    }
}

TEST_CASE("apply_constraints with an empty set is the identity") {
    auto gw = build_gridworld(grid3x3());
    Mdp constrained = apply_constraints(gw.nominal, ConstraintSet{});
    CHECK(constrained == gw.nominal);
}

TEST_CASE("empty-state closure cascades backwards through a chain") {
    // Constraining the last chain state removes s1's only action, then the
    // chain action at s0; the escape loop keeps s0 alive.
    Mdp m = chain_mdp(true);
    ConstraintSet c{{{ConstraintKind::State, 2}}, {}};
    auto closed = close_constraints(m, c);
    CHECK(closed.empty_state_closure ==
          std::vector<StateAction>{{0, 0}, {1, 0}});
    Mdp constrained = apply_constraints(m, c);
    CHECK(constrained.available_actions[0] == std::vector<int>{1});
    CHECK(constrained.available_actions[1].empty());
    CHECK(constrained.available_actions[2].empty());

    // Without the escape the closure empties every initial state.
    Mdp bare = chain_mdp(false);
    CHECK_THROWS_AS(apply_constraints(bare, c), FullyConstrained);
}

TEST_CASE("feature constraint removes exactly the producing pairs on a 9x9 grid") {
    GridConfig cfg;
    cfg.width = 9;
    cfg.height = 9;
    cfg.start = {0, 0};
    cfg.goal = {8, 0};
    cfg.colors.push_back({"blue", {{4, 4}, {4, 5}, {5, 4}}, {}});
    auto gw = build_gridworld(cfg);
    ConstraintSet c{{{ConstraintKind::Feature, 1}}, {}};
    Mdp constrained = apply_constraints(gw.nominal, c);
    for (int s = 0; s < gw.nominal.n_states; ++s) {
        for (int a : gw.nominal.available_actions[s]) {
            bool removed = !constrained.action_available(s, a);
            bool member = c.contains(gw.nominal, s, a);
            // No closure triggers here: blue cells keep no action at all,
            // and no other pair deterministically enters them... except
            // pairs that do; those are exactly the closure pairs.
            if (member) CHECK(removed);
        }
    }
    // Every removal is either a member or a closure pair.
    auto closed = close_constraints(gw.nominal, c);
    for (int s = 0; s < gw.nominal.n_states; ++s) {
        for (int a : gw.nominal.available_actions[s]) {
            if (constrained.action_available(s, a)) continue;
            CHECK(closed.contains(gw.nominal, s, a));
        }
    }
}

TEST_CASE("apply_constraints is idempotent and order-insensitive") {
    Rng rng(22);
    int done = 0;
    for (int rep = 0; rep < 200 && done < 60; ++rep) {
        Mdp m = test::random_small_mdp(rng, rep % 3 == 0);
        ConstraintSet c;
        c.minimal_constraints.push_back(test::random_constraint(rng, m));
        if (rng.chance(0.5)) c.minimal_constraints.push_back(test::random_constraint(rng, m));
        Mdp once;
        try {
            once = apply_constraints(m, c);
        } catch (const FullyConstrained&) {
            continue; // fine, not this property's concern
        }
        ++done;
        Mdp twice = apply_constraints(once, c);
        CHECK(twice == once);
    }
    CHECK(done >= 30);
}

TEST_CASE("no feasible trajectory of the constrained MDP touches the constraint set") {
    Rng rng(33);
    int done = 0;
    for (int rep = 0; rep < 120 && done < 25; ++rep) {
        auto cfg = test::random_grid_config(rng, 4, 4);
        auto gw = build_gridworld(cfg);
        ConstraintSet c;
        c.minimal_constraints.push_back(test::random_constraint(rng, gw.nominal));
        Mdp constrained;
        try {
            constrained = apply_constraints(gw.nominal, c);
        } catch (const FullyConstrained&) {
            continue;
        }
        std::vector<Trajectory> all;
        try {
            all = test::enumerate_trajectories(constrained, 30000);
        } catch (const std::runtime_error&) {
            continue;
        }
        ++done;
        auto closed = close_constraints(gw.nominal, c);
        for (const auto& xi : all) {
            CHECK(validate_trajectory(constrained, xi).feasible);
            for (size_t t = 0; t < xi.states.size(); ++t)
                CHECK_FALSE(closed.contains(gw.nominal, xi.states[t], xi.actions[t]));
        }
    }
    CHECK(done >= 10);
}

TEST_CASE("larger constraint sets admit fewer trajectories") {
    Rng rng(44);
    int done = 0;
    for (int rep = 0; rep < 100 && done < 20; ++rep) {
        auto cfg = test::random_grid_config(rng, 3, 4);
        auto gw = build_gridworld(cfg);
        ConstraintSet small;
        small.minimal_constraints.push_back(test::random_constraint(rng, gw.nominal));
        ConstraintSet large = small;
        large.minimal_constraints.push_back(test::random_constraint(rng, gw.nominal));
        Mdp m_small, m_large;
        try {
            m_small = apply_constraints(gw.nominal, small);
            m_large = apply_constraints(gw.nominal, large);
        } catch (const FullyConstrained&) {
            continue;
        }
        ++done;
        auto trajs_large = test::enumerate_trajectories(m_large, 30000);
        for (const auto& xi : trajs_large)
            CHECK(validate_trajectory(m_small, xi).feasible);
    }
    CHECK(done >= 8);
}

TEST_CASE("stochastic observation model renormalizes away empty-state mass") {
    // One state with two actions; action 0 branches half/half into a state
    // that the constraint empties.
    Mdp m;
    m.n_states = 3;
    m.n_actions = 2;
    m.n_features = 1;
    m.horizon = 2;
    m.initial_dist = {1.0, 0.0, 0.0};
    m.reward_weights = {0.0};
    m.available_actions = {{0, 1}, {0}, {0}};
    m.transitions.assign(3, std::vector<std::vector<Successor>>(2));
    m.transitions[0][0] = {{1, 0.5}, {2, 0.5}};
    m.transitions[0][1] = {{0, 1.0}};
    m.transitions[1][0] = {{1, 1.0}};
    m.transitions[2][0] = {{2, 1.0}};
    m.features.assign(3, std::vector<std::vector<double>>(2, std::vector<double>(1, 0.0)));
    m.validate();

    ConstraintSet c{{{ConstraintKind::State, 2}}, {}};
    auto obs = stochastic_observation_model(m, c);
    CHECK(obs.empty_states == std::vector<int>{2});
    REQUIRE(obs.mdp.transitions[0][0].size() == 1);
    CHECK(obs.mdp.transitions[0][0][0].state == 1);
    CHECK(obs.mdp.transitions[0][0][0].prob == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(obs.survive_weight[0][0] == doctest::Approx(0.5));
    CHECK(obs.survive_weight[0][1] == doctest::Approx(1.0));

    // Rows of every remaining pair sum to one.
    for (int s = 0; s < obs.mdp.n_states; ++s) {
        for (int a : obs.mdp.available_actions[s]) {
            double row = 0.0;
            for (const auto& succ : obs.mdp.transitions[s][a]) row += succ.prob;
            CHECK(row == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("observation model on deterministic MDPs behaves like apply_constraints") {
    Rng rng(55);
    int done = 0;
    for (int rep = 0; rep < 60 && done < 30; ++rep) {
        Mdp m = test::random_small_mdp(rng, false);
        ConstraintSet c;
        c.minimal_constraints.push_back(test::random_constraint(rng, m));
        Mdp direct;
        try {
            direct = apply_constraints(m, c);
        } catch (const FullyConstrained&) {
            continue;
        }
        ++done;
        auto obs = stochastic_observation_model(m, c);
        CHECK(obs.mdp.available_actions == direct.available_actions);
        for (int s = 0; s < m.n_states; ++s)
            for (int a : obs.mdp.available_actions[s]) {
                CHECK(obs.mdp.transitions[s][a] == direct.transitions[s][a]);
                CHECK(obs.survive_weight[s][a] == doctest::Approx(1.0));
            }
    }
    CHECK(done >= 15);
}

TEST_CASE("constraints indexing outside the MDP are rejected") {
    auto gw = build_gridworld(grid3x3());
    const Mdp& m = gw.nominal;
    auto [pol, part] = backward_pass(m);
    (void)part;
    ConstraintSet bad_feature{{{ConstraintKind::Feature, 7}}, {}};
    CHECK_THROWS_AS(apply_constraints(m, bad_feature), IndexOutOfRange);
    CHECK_THROWS_AS(eliminated_mass_compound(m, pol, bad_feature), IndexOutOfRange);
    ConstraintSet bad_state{{{ConstraintKind::State, -1}}, {}};
    CHECK_THROWS_AS(close_constraints(m, bad_state), IndexOutOfRange);
    ConstraintSet bad_closure{{}, {{0, 99}}};
    CHECK_THROWS_AS(stochastic_observation_model(m, bad_closure), IndexOutOfRange);
}

TEST_CASE("renormalize_transitions rejects fully doomed pairs") {
    Mdp m = chain_mdp(false);
    std::vector<bool> empty(3, false);
    empty[1] = true; // s0's only action leads to s1 with probability one
    CHECK_THROWS_AS(renormalize_transitions(m, empty), TotallyBlocked);
}

TEST_CASE("trajectory reward: zero weights, unit distances, and a naive oracle") {
    auto gw = build_gridworld(grid3x3());
    Mdp m = gw.nominal;

    Trajectory xi;
    xi.states = {0, 1, 2, 5, 8};
    xi.actions = {kEast, kEast, kNorth, kNorth, kStay};
    REQUIRE(validate_trajectory(m, xi).feasible);

    Mdp zero = m;
    zero.reward_weights = {0.0};
    CHECK(trajectory_reward(zero, xi) == 0.0);

    // Unit-distance feature, weight -1, five moves of length one... except
    // the final stay is free, so walk five orthogonal moves on a wider grid.
    GridConfig wide;
    wide.width = 6;
    wide.height = 1;
    wide.start = {0, 0};
    wide.goal = {5, 0};
    wide.horizon = 4;
    auto gw_wide = build_gridworld(wide);
    Trajectory line;
    line.states = {0, 1, 2, 3, 4};
    line.actions = {kEast, kEast, kEast, kEast, kEast};
    REQUIRE(validate_trajectory(gw_wide.nominal, line).feasible);
    CHECK(trajectory_reward(gw_wide.nominal, line) == doctest::Approx(-5.0));

    Rng rng(66);
    for (int rep = 0; rep < 40; ++rep) {
        GridConfig cfg = test::random_grid_config(rng, 4, 4);
        cfg.discount = rng.chance(0.5) ? 1.0 : rng.uniform(0.5, 1.0);
        auto g = build_gridworld(cfg);
        auto all = test::enumerate_trajectories(g.nominal, 5000);
        const auto& xi2 = all[rng.range(0, static_cast<int>(all.size()) - 1)];
        CHECK(trajectory_reward(g.nominal, xi2) ==
              doctest::Approx(test::naive_reward(g.nominal, xi2)).epsilon(1e-12));
    }
}

TEST_CASE("validate_trajectory flags constrained actions and replays transitions") {
    auto gw = build_gridworld(grid3x3());
    Mdp m = gw.nominal;
    auto [pol, part] = backward_pass(m);
    (void)part;
    DemoSet demos = sample_trajectories(m, pol, 5, 7);
    for (const auto& demo : demos.demos) CHECK(validate_trajectory(m, demo).feasible);

    ConstraintSet c{{{ConstraintKind::Action, kNorth}}, {}};
    Mdp constrained = apply_constraints(m, c);
    Trajectory north;
    north.states = {0, 3, 4, 5, 8};
    north.actions = {kNorth, kEast, kEast, kNorth, kStay};
    REQUIRE(validate_trajectory(m, north).feasible);
    auto feas = validate_trajectory(constrained, north);
    CHECK_FALSE(feas.feasible);
    CHECK(feas.violation == Feasibility::Violation::UnavailableAction);
    CHECK(feas.step == 0);
}

TEST_CASE("fuzz: indicator equals a replay oracle on 1000 random action sequences") {
    auto gw = build_gridworld(grid3x3());
    const Mdp& m = gw.nominal;
    Rng rng(77);
    for (int rep = 0; rep < 1000; ++rep) {
        // Random walk that may or may not respect the dynamics.
        Trajectory xi;
        int s = rng.range(0, m.n_states - 1);
        for (int t = 0; t <= m.horizon; ++t) {
            xi.states.push_back(s);
            xi.actions.push_back(rng.range(0, m.n_actions - 1));
            s = rng.chance(0.8) ? [&] {
                int a = xi.actions.back();
                if (!m.action_available(xi.states.back(), a)) return rng.range(0, m.n_states - 1);
                return m.transitions[xi.states.back()][a][0].state;
            }()
                                : rng.range(0, m.n_states - 1);
        }

        // Replay oracle: step through the dynamics by hand.
        bool ok = m.initial_dist[xi.states[0]] > 0.0;
        for (size_t t = 0; ok && t < xi.states.size(); ++t) {
            ok = m.action_available(xi.states[t], xi.actions[t]);
            if (ok && t + 1 < xi.states.size()) {
                bool reachable = false;
                for (const auto& succ : m.transitions[xi.states[t]][xi.actions[t]])
                    reachable = reachable || (succ.state == xi.states[t + 1] && succ.prob > 0.0);
                ok = reachable;
            }
        }
        CHECK(validate_trajectory(m, xi).feasible == ok);
    }
}

TEST_CASE("accrued features: single step, idempotent revisits, union oracle") {
    auto gw = build_gridworld(grid3x3());
    const Mdp& m = gw.nominal;
    auto map = augment_features(m);

    Trajectory single;
    single.states = {0};
    single.actions = {kEast};
    Bitset acc = accrued_features(map, single);
    CHECK(acc == map.indicators(0, kEast));

    // Visiting a state twice sets its bit once.
    Trajectory loop;
    loop.states = {0, 3, 0, 3, 0};
    loop.actions = {kNorth, kSouth, kNorth, kSouth, kNorth};
    REQUIRE(validate_trajectory(m, loop).feasible);
    Bitset acc2 = accrued_features(map, loop);
    CHECK(acc2.test(map.state_bit(0)));
    CHECK(acc2.test(map.state_bit(3)));
    CHECK(acc2.count() == 1 /*distance*/ + 2 /*states*/ + 2 /*actions*/);

    // Union-over-steps oracle on sampled trajectories of a 9x9 grid.
    GridConfig big;
    big.width = 9;
    big.height = 9;
    big.start = {0, 0};
    big.goal = {8, 0};
    big.horizon = 12;
    auto gbig = build_gridworld(big);
    auto map9 = augment_features(gbig.nominal);
    auto [pol, part] = backward_pass(gbig.nominal);
    (void)part;
    DemoSet demos = sample_trajectories(gbig.nominal, pol, 25, 3);
    for (const auto& xi : demos.demos) {
        Bitset expect(map9.size());
        for (size_t t = 0; t < xi.states.size(); ++t)
            expect |= map9.indicators(xi.states[t], xi.actions[t]);
        CHECK(accrued_features(map9, xi) == expect);
    }
}

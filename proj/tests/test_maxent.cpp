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
#include <map>

#include "generators.hpp"
#include "mlci/gridworld.hpp"
#include "mlci/maxent.hpp"
#include "oracles.hpp"

using namespace mlci;
using test::Rng;

namespace {

GridConfig grid3x3(double weight = -1.0) {
    GridConfig cfg;
    cfg.name = "tiny";
    cfg.width = 3;
    cfg.height = 3;
    cfg.start = {0, 0};
    cfg.goal = {2, 2};
    cfg.horizon = 4;
    cfg.distance_weight = weight;
    return cfg;
}

Mdp null_reward_grid() {
    auto gw = build_gridworld(grid3x3());
    Mdp m = gw.nominal;
    m.reward_weights = {0.0};
    return m;
}

} // namespace

TEST_CASE("single state with one free self-loop: uniform policy, log Z = 0") {
    Mdp m;
    m.n_states = 1;
    m.n_actions = 1;
    m.n_features = 1;
    m.horizon = 5;
    m.initial_dist = {1.0};
    m.reward_weights = {0.0};
    m.available_actions = {{0}};
    m.transitions = {{{{0, 1.0}}}};
    m.features = {{{0.0}}};
    m.validate();
    auto [pol, part] = backward_pass(m);
    CHECK(part.log_z == doctest::Approx(0.0).epsilon(1e-12));
    for (int t = 0; t <= m.horizon; ++t) CHECK(pol.prob(t, 0, 0) == doctest::Approx(1.0));
}

TEST_CASE("null reward: trajectories are equiprobable and log Z counts paths") {
    Mdp m = null_reward_grid();
    auto [pol, part] = backward_pass(m);
    auto all = test::enumerate_trajectories(m);
    CHECK(std::exp(part.log_z) == doctest::Approx(all.size()).epsilon(1e-9));
    // Uniformity holds at the trajectory level: the policy weights each
    // action by its continuation count, so every path gets equal mass.
    for (size_t i = 0; i < all.size(); i += 11)
        CHECK(test::path_probability(m, pol, all[i]) ==
              doctest::Approx(1.0 / all.size()).epsilon(1e-9));
    // At the final step there are no continuations to weight, so the policy
    // is action-uniform there.
    for (int s = 0; s < m.n_states; ++s) {
        const auto& actions = m.available_actions[s];
        for (int a : actions)
            CHECK(pol.prob(m.horizon, s, a) ==
                  doctest::Approx(1.0 / actions.size()).epsilon(1e-12));
    }
    // On a homogeneous-branching MDP the null-reward policy is uniform at
    // every step.
    Mdp h;
    h.n_states = 2;
    h.n_actions = 2;
    h.n_features = 1;
    h.horizon = 3;
    h.initial_dist = {1.0, 0.0};
    h.reward_weights = {0.0};
    h.available_actions = {{0, 1}, {0, 1}};
    h.transitions = {{{{1, 1.0}}, {{0, 1.0}}}, {{{0, 1.0}}, {{1, 1.0}}}};
    h.features.assign(2, std::vector<std::vector<double>>(2, std::vector<double>(1, 0.0)));
    h.validate();
    auto [hpol, hpart] = backward_pass(h);
    (void)hpart;
    for (int t = 0; t <= h.horizon; ++t)
        for (int s = 0; s < 2; ++s)
            for (int a = 0; a < 2; ++a)
                CHECK(hpol.prob(t, s, a) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("partition matches exhaustive enumeration on random deterministic instances") {
    Rng rng(101);
    int done = 0;
    for (int rep = 0; rep < 80 && done < 30; ++rep) {
        Mdp m = test::random_small_mdp(rng, false);
        std::vector<Trajectory> all;
        try {
            all = test::enumerate_trajectories(m, 4000);
        } catch (const std::runtime_error&) {
            continue;
        }
        ++done;
        auto [pol, part] = backward_pass(m);
        double oracle = test::enumerated_partition(m, all);
        CHECK(std::exp(part.log_z) == doctest::Approx(oracle).epsilon(1e-9));
    }
    CHECK(done >= 20);
}

TEST_CASE("partition oracle on a 3x3 grid with random rewards, discount, rationality") {
    Rng rng(102);
    for (int rep = 0; rep < 10; ++rep) {
        GridConfig cfg = grid3x3(rng.uniform(-1.5, -0.25));
        cfg.discount = rng.chance(0.5) ? 1.0 : rng.uniform(0.6, 1.0);
        cfg.rationality = rng.uniform(0.3, 2.0);
        auto gw = build_gridworld(cfg);
        auto all = test::enumerate_trajectories(gw.nominal);
        auto [pol, part] = backward_pass(gw.nominal);
        double oracle = test::enumerated_partition(gw.nominal, all);
        CHECK(std::exp(part.log_z) == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("policy rows are normalized at every reachable (s, t)") {
    Rng rng(103);
    for (int rep = 0; rep < 60; ++rep) {
        Mdp m = test::random_small_mdp(rng, rep % 2 == 0);
        auto [pol, part] = backward_pass(m);
        (void)part;
        for (int t = 0; t <= m.horizon; ++t) {
            for (int s = 0; s < m.n_states; ++s) {
                if (m.available_actions[s].empty()) continue;
                double row = 0.0;
                for (int a : m.available_actions[s]) row += pol.prob(t, s, a);
                CHECK(row == doctest::Approx(1.0).epsilon(1e-9));
                for (int a = 0; a < m.n_actions; ++a)
                    if (!m.action_available(s, a)) CHECK(pol.prob(t, s, a) == 0.0);
            }
        }
    }
}

TEST_CASE("backward pass throws when every initial state is empty") {
    Mdp m = null_reward_grid();
    ConstraintSet c{{{ConstraintKind::State, 0}}, {}};
    // Constraining the unique start directly: apply_constraints refuses...
    CHECK_THROWS_AS(apply_constraints(m, c), FullyConstrained);
    // ...and a hand-emptied MDP makes the backward pass itself refuse.
    m.available_actions[0] = {};
    CHECK_THROWS_AS(backward_pass(m), NoFeasibleTrajectory);
}

TEST_CASE("trajectory log-probabilities: uniformity, infeasibility, oracle") {
    Mdp m = null_reward_grid();
    auto [pol, part] = backward_pass(m);
    (void)pol;
    auto all = test::enumerate_trajectories(m);
    for (size_t i = 0; i < all.size(); i += 7)
        CHECK(trajectory_log_prob(m, part, all[i]) ==
              doctest::Approx(-std::log(static_cast<double>(all.size()))).epsilon(1e-9));

    Trajectory bad;
    bad.states = {0, 8, 0, 8, 0};
    bad.actions = {kNorth, kNorth, kNorth, kNorth, kNorth};
    CHECK(trajectory_log_prob(m, part, bad) == -std::numeric_limits<double>::infinity());

    Rng rng(104);
    for (int rep = 0; rep < 8; ++rep) {
        GridConfig cfg = grid3x3(rng.uniform(-1.5, -0.3));
        cfg.rationality = rng.uniform(0.5, 1.5);
        auto gw = build_gridworld(cfg);
        auto [pol2, part2] = backward_pass(gw.nominal);
        (void)pol2;
        auto trajs = test::enumerate_trajectories(gw.nominal);
        double z = test::enumerated_partition(gw.nominal, trajs);
        const auto& xi = trajs[rng.range(0, static_cast<int>(trajs.size()) - 1)];
        double expect = gw.nominal.rationality * test::naive_reward(gw.nominal, xi) - std::log(z);
        CHECK(trajectory_log_prob(gw.nominal, part2, xi) ==
              doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("trajectory probabilities normalize over the full feasible set") {
    Rng rng(105);
    int done = 0;
    for (int rep = 0; rep < 60 && done < 15; ++rep) {
        Mdp m = test::random_small_mdp(rng, false);
        std::vector<Trajectory> all;
        try {
            all = test::enumerate_trajectories(m, 3000);
        } catch (const std::runtime_error&) {
            continue;
        }
        ++done;
        auto [pol, part] = backward_pass(m);
        (void)pol;
        std::vector<double> lps;
        for (const auto& xi : all) lps.push_back(trajectory_log_prob(m, part, xi));
        CHECK(log_sum_exp(lps) == doctest::Approx(0.0).epsilon(1e-9));
        // Any strict subset sums to less than one.
        lps.resize(all.size() / 2);
        if (!lps.empty()) CHECK(log_sum_exp(lps) < 1e-12);
    }
    CHECK(done >= 8);
}

TEST_CASE("demo-set log-probability: single demo, duplicates, summation oracle") {
    auto gw = build_gridworld(grid3x3());
    const Mdp& m = gw.nominal;
    auto map = augment_features(m);
    auto [pol, part] = backward_pass(m);
    DemoSet one = sample_trajectories(m, pol, 1, 9);
    CHECK(demo_set_log_prob(m, part, one) ==
          doctest::Approx(trajectory_log_prob(m, part, one.demos[0])).epsilon(1e-12));

    DemoSet two = make_demo_set(m, map, {one.demos[0], one.demos[0]});
    CHECK(demo_set_log_prob(m, part, two) ==
          doctest::Approx(2.0 * trajectory_log_prob(m, part, one.demos[0])).epsilon(1e-12));

    DemoSet ten = sample_trajectories(m, pol, 10, 10);
    double sum = 0.0;
    for (const auto& demo : ten.demos) sum += trajectory_log_prob(m, part, demo);
    CHECK(demo_set_log_prob(m, part, ten) == doctest::Approx(sum).epsilon(1e-12));

    // Infeasible demo raises with its index.
    Mdp constrained = apply_constraints(m, ConstraintSet{{{ConstraintKind::Action, kNorth}}, {}});
    auto [cpol, cpart] = backward_pass(constrained);
    (void)cpol;
    bool raised = false;
    try {
        // Sampled on the nominal MDP, some demo uses the north action.
        DemoSet many = sample_trajectories(m, pol, 50, 11);
        demo_set_log_prob(constrained, cpart, many);
    } catch (const InfeasibleDemo& e) {
        raised = e.demo_index >= 0;
    }
    CHECK(raised);
}

TEST_CASE("KL divergence: closed form for a repeated demo against a uniform model") {
    Mdp m = null_reward_grid();
    auto map = augment_features(m);
    auto [pol, part] = backward_pass(m);
    (void)pol;
    auto all = test::enumerate_trajectories(m);
    DemoSet repeated = make_demo_set(m, map, {all[3], all[3], all[3]});
    CHECK(kl_empirical_model(repeated, m, part) ==
          doctest::Approx(std::log(static_cast<double>(all.size()))).epsilon(1e-9));
}

TEST_CASE("KL divergence matches the direct formula on sampled demos") {
    GridConfig cfg = grid3x3();
    auto gw = build_gridworld(cfg);
    const Mdp& m = gw.nominal;
    auto [pol, part] = backward_pass(m);
    DemoSet demos = sample_trajectories(m, pol, 100, 13);

    // Direct formula over the empirical support, with model probabilities
    // taken from enumeration rather than the backward pass.
    auto all = test::enumerate_trajectories(m);
    double z = test::enumerated_partition(m, all);
    std::map<std::pair<std::vector<int>, std::vector<int>>, int> counts;
    for (const auto& demo : demos.demos) ++counts[{demo.states, demo.actions}];
    double expect = 0.0;
    for (const auto& [key, count] : counts) {
        double p_d = count / 100.0;
        Trajectory xi;
        xi.states = key.first;
        xi.actions = key.second;
        double p_m = std::exp(m.rationality * test::naive_reward(m, xi)) / z;
        expect += p_d * (std::log(p_d) - std::log(p_m));
    }
    CHECK(kl_empirical_model(demos, m, part) == doctest::Approx(expect).epsilon(1e-9));
    CHECK(kl_empirical_model(demos, m, part) >= 0.0);
}

TEST_CASE("constraining never lowers the likelihood of respecting demos") {
    Rng rng(106);
    int done = 0;
    for (int rep = 0; rep < 80 && done < 25; ++rep) {
        auto cfg = test::random_grid_config(rng, 3, 4);
        auto gw = build_gridworld(cfg);
        const Mdp& m = gw.nominal;
        auto [pol, part] = backward_pass(m);
        DemoSet demos = sample_trajectories(m, pol, 5, rng.next());
        MinimalConstraint c = test::random_constraint(rng, m);
        auto map = augment_features(m);
        bool respected = true;
        for (const auto& demo : demos.demos)
            respected = respected && !demo.accrued.test(map.bit_of(c));
        if (!respected) continue;
        Mdp constrained;
        try {
            constrained = apply_constraints(m, ConstraintSet{{c}, {}});
        } catch (const FullyConstrained&) {
            continue;
        }
        ++done;
        auto [cpol, cpart] = backward_pass(constrained);
        (void)cpol;
        CHECK(cpart.log_z <= part.log_z + 1e-12);
        CHECK(demo_set_log_prob(constrained, cpart, demos) >=
              demo_set_log_prob(m, part, demos) - 1e-9);
    }
    CHECK(done >= 10);
}

TEST_CASE("KL improvement equals the log-partition drop exactly") {
    Rng rng(107);
    int done = 0;
    for (int rep = 0; rep < 120 && done < 30; ++rep) {
        auto cfg = test::random_grid_config(rng, 4, 4);
        auto gw = build_gridworld(cfg);
        const Mdp& m = gw.nominal;
        auto map = augment_features(m);
        auto [pol, part] = backward_pass(m);
        DemoSet demos = sample_trajectories(m, pol, 8, rng.next());
        MinimalConstraint c = test::random_constraint(rng, m);
        bool respected = true;
        for (const auto& demo : demos.demos)
            respected = respected && !demo.accrued.test(map.bit_of(c));
        if (!respected) continue;
        Mdp constrained;
        try {
            constrained = apply_constraints(m, ConstraintSet{{c}, {}});
        } catch (const FullyConstrained&) {
            continue;
        }
        ++done;
        auto [cpol, cpart] = backward_pass(constrained);
        (void)cpol;
        double delta_kl =
            kl_empirical_model(demos, m, part) - kl_empirical_model(demos, constrained, cpart);
        CHECK(delta_kl == doctest::Approx(part.log_z - cpart.log_z).epsilon(1e-9));
    }
    CHECK(done >= 12);
}

TEST_CASE("sampling: deterministic single path, seed reproducibility") {
    GridConfig cfg;
    cfg.width = 2;
    cfg.height = 1;
    cfg.start = {0, 0};
    cfg.goal = {1, 0};
    cfg.horizon = 3;
    auto gw = build_gridworld(cfg);
    auto [pol, part] = backward_pass(gw.nominal);
    (void)part;
    DemoSet one = sample_trajectories(gw.nominal, pol, 1, 42);
    CHECK(one.demos[0].states == std::vector<int>{0, 1, 1, 1});
    CHECK(one.demos[0].actions == std::vector<int>{kEast, kStay, kStay, kStay});

    auto gw3 = build_gridworld(grid3x3());
    auto [pol3, part3] = backward_pass(gw3.nominal);
    (void)part3;
    DemoSet a = sample_trajectories(gw3.nominal, pol3, 20, 4242);
    DemoSet b = sample_trajectories(gw3.nominal, pol3, 20, 4242);
    REQUIRE(a.size() == b.size());
    for (int i = 0; i < a.size(); ++i) CHECK(a.demos[i].same_path(b.demos[i]));
    DemoSet c = sample_trajectories(gw3.nominal, pol3, 20, 4243);
    bool all_same = true;
    for (int i = 0; i < a.size(); ++i) all_same = all_same && a.demos[i].same_path(c.demos[i]);
    CHECK_FALSE(all_same);
}

TEST_CASE("sampling matches the exact trajectory distribution within 3 sigma") {
    Mdp m = null_reward_grid();
    m.horizon = 3; // keep the trajectory space small for tight bounds
    auto [pol, part] = backward_pass(m);
    (void)part;
    auto all = test::enumerate_trajectories(m);
    const int n = 50000;
    DemoSet demos = sample_trajectories(m, pol, n, 777);
    std::map<std::pair<std::vector<int>, std::vector<int>>, int> counts;
    for (const auto& demo : demos.demos) ++counts[{demo.states, demo.actions}];
    int violations = 0;
    for (const auto& xi : all) {
        double p = test::path_probability(m, pol, xi);
        double expect = n * p;
        double sigma = std::sqrt(n * p * (1.0 - p));
        auto it = counts.find({xi.states, xi.actions});
        double got = it == counts.end() ? 0.0 : it->second;
        if (std::abs(got - expect) > 3.0 * sigma) ++violations;
    }
    // With ~hundreds of cells a few 3-sigma excursions are expected; demand
    // 99% within 3 sigma rather than a statistically unsound "all".
    CHECK(violations <= static_cast<int>(all.size() / 100) + 1);
}

TEST_CASE("reward learning: zero iterations returns the zero initialization") {
    auto gw = build_gridworld(grid3x3());
    auto [pol, part] = backward_pass(gw.nominal);
    (void)part;
    DemoSet demos = sample_trajectories(gw.nominal, pol, 10, 5);
    auto w = learn_reward_weights(gw.nominal, demos, 0.1, 0);
    CHECK(w == std::vector<double>{0.0});
}

TEST_CASE("reward learning matches feature counts on a 5x5 grid") {
    GridConfig cfg;
    cfg.width = 5;
    cfg.height = 5;
    cfg.start = {0, 0};
    cfg.goal = {4, 4};
    cfg.horizon = 8;
    cfg.distance_weight = -0.8;
    auto gw = build_gridworld(cfg);
    auto [pol, part] = backward_pass(gw.nominal);
    (void)part;
    DemoSet demos = sample_trajectories(gw.nominal, pol, 200, 6);

    std::vector<double> loglik;
    auto w = learn_reward_weights(gw.nominal, demos, 0.05, 400, &loglik);
    REQUIRE(w.size() == 1);

    // At the optimum the model's expected feature counts match the demos'.
    Mdp learned = gw.nominal;
    learned.reward_weights = w;
    auto [lpol, lpart] = backward_pass(learned);
    (void)lpart;
    auto model_counts = expected_feature_counts(learned, lpol);
    double empirical = 0.0;
    for (const auto& demo : demos.demos) empirical += test::naive_reward(gw.nominal, demo);
    empirical /= -0.8 * demos.size(); // distance accumulated per demo
    CHECK(model_counts[0] == doctest::Approx(empirical).epsilon(1e-3));
    CHECK(loglik.size() == 400);
    CHECK(loglik.back() >= loglik.front());
}

TEST_CASE("reward learning: demos preferring short paths give a negative weight") {
    auto gw = build_gridworld(grid3x3());
    auto [pol, part] = backward_pass(gw.nominal); // weight -1: short paths likely
    (void)part;
    DemoSet demos = sample_trajectories(gw.nominal, pol, 100, 7);
    auto w = learn_reward_weights(gw.nominal, demos, 0.1, 120);
    CHECK(w[0] < 0.0);
}

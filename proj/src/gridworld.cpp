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

#include "mlci/gridworld.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <map>

namespace mlci {

const std::array<std::string, kGridActionCount> kGridActionNames = {
    "N", "NE", "E", "SE", "S", "SW", "W", "NW", "STAY"};

const std::array<std::pair<int, int>, kGridActionCount> kGridActionDeltas = {{
    {0, 1},   // N
    {1, 1},   // NE
    {1, 0},   // E
    {1, -1},  // SE
    {0, -1},  // S
    {-1, -1}, // SW
    {-1, 0},  // W
    {-1, 1},  // NW
    {0, 0},   // STAY
}};

int grid_action_from_name(const std::string& name) {
    std::string upper;
    for (char c : name) upper.push_back(static_cast<char>(std::toupper(c)));
    for (int a = 0; a < kGridActionCount; ++a)
        if (kGridActionNames[a] == upper) return a;
    throw InvalidConfig("unknown grid action '" + name + "'");
}

void GridConfig::validate() const {
    if (width < 1 || height < 1) throw InvalidConfig("grid must be at least 1x1");
    if (!in_grid(start) || !in_grid(goal)) throw InvalidConfig("start or goal outside the grid");
    if (start == goal) throw InvalidConfig("start and goal must differ");
    if (slip < 0.0 || slip >= 1.0) throw InvalidConfig("slip must lie in [0, 1)");
    if (discount <= 0.0 || discount > 1.0) throw InvalidConfig("discount must lie in (0, 1]");
    if (rationality < 0.0) throw InvalidConfig("rationality must be non-negative");
    for (const auto& color : colors) {
        if (color.name.empty()) throw InvalidConfig("color feature needs a name");
        for (const auto& cell : color.cells)
            if (!in_grid(cell)) throw InvalidConfig("color cell outside the grid");
        for (int a : color.actions)
            if (a < 0 || a >= kGridActionCount) throw InvalidConfig("color action out of range");
    }
}

namespace {

// Slip outcomes: the intended move, plus the two 45-degree neighbors.
// Off-grid displacements leave the agent in place.
std::vector<Successor> successor_distribution(const GridConfig& cfg, const Cell& from,
                                              int action) {
    auto land = [&](int a) {
        auto [dx, dy] = kGridActionDeltas[a];
        Cell to{from.x + dx, from.y + dy};
        return cfg.in_grid(to) ? cfg.cell_index(to) : cfg.cell_index(from);
    };
    std::map<int, double> mass;
    if (action == kStay || cfg.slip <= 0.0) {
        mass[land(action)] = 1.0;
    } else {
        mass[land(action)] += 1.0 - cfg.slip;
        mass[land((action + 1) % 8)] += cfg.slip / 2.0;
        mass[land((action + 7) % 8)] += cfg.slip / 2.0;
    }
    std::vector<Successor> out;
    out.reserve(mass.size());
    for (const auto& [s, p] : mass) out.push_back({s, p});
    return out;
}

int feature_index_of_color(const GridConfig& cfg, const std::string& name) {
    for (size_t i = 0; i < cfg.colors.size(); ++i)
        if (cfg.colors[i].name == name) return static_cast<int>(i) + 1;
    throw InvalidConfig("constraint names unknown color feature '" + name + "'");
}

// Shortest feasible path length (in moves) on the constrained availability,
// or -1 when the goal is unreachable.
int bfs_moves_to_goal(const Mdp& mdp, int start, int goal) {
    std::vector<int> dist(mdp.n_states, -1);
    std::deque<int> queue{start};
    dist[start] = 0;
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        if (s == goal) return dist[s];
        for (int a : mdp.available_actions[s]) {
            for (const auto& succ : mdp.transitions[s][a]) {
                if (dist[succ.state] < 0) {
                    dist[succ.state] = dist[s] + 1;
                    queue.push_back(succ.state);
                }
            }
        }
    }
    return -1;
}

} // namespace

Gridworld build_gridworld(const GridConfig& cfg) {
    cfg.validate();
    const int n_states = cfg.width * cfg.height;
    const int k = 1 + static_cast<int>(cfg.colors.size());
    const double diag = cfg.diagonal_cost > 0.0 ? cfg.diagonal_cost : std::sqrt(2.0);
    const int goal_state = cfg.cell_index(cfg.goal);

    Mdp mdp;
    mdp.n_states = n_states;
    mdp.n_actions = kGridActionCount;
    mdp.n_features = k;
    mdp.horizon = cfg.horizon >= 0 ? cfg.horizon : 2 * cfg.width;
    mdp.discount = cfg.discount;
    mdp.rationality = cfg.rationality;
    mdp.goal_states = {goal_state};
    mdp.initial_dist.assign(n_states, 0.0);
    mdp.initial_dist[cfg.cell_index(cfg.start)] = 1.0;
    mdp.reward_weights.assign(k, 0.0);
    mdp.reward_weights[0] = cfg.distance_weight;

    mdp.available_actions.assign(n_states, {});
    mdp.transitions.assign(n_states, std::vector<std::vector<Successor>>(kGridActionCount));
    mdp.features.assign(
        n_states, std::vector<std::vector<double>>(kGridActionCount, std::vector<double>(k, 0.0)));

    for (int s = 0; s < n_states; ++s) {
        Cell cell = cfg.cell_at(s);
        if (s == goal_state) {
            // Absorbing goal: the stay action only, zero reward, zero features.
            mdp.available_actions[s] = {kStay};
            mdp.transitions[s][kStay] = {{s, 1.0}};
            continue;
        }
        for (int a = 0; a < 8; ++a) {
            auto [dx, dy] = kGridActionDeltas[a];
            Cell to{cell.x + dx, cell.y + dy};
            if (!cfg.in_grid(to)) continue;
            mdp.available_actions[s].push_back(a);
            mdp.transitions[s][a] = successor_distribution(cfg, cell, a);
            bool diagonal = dx != 0 && dy != 0;
            mdp.features[s][a][0] = diagonal ? diag : 1.0;
        }
    }
    for (size_t ci = 0; ci < cfg.colors.size(); ++ci) {
        const auto& color = cfg.colors[ci];
        for (const auto& cell : color.cells) {
            int s = cfg.cell_index(cell);
            const auto& acts = color.actions.empty()
                                   ? std::vector<int>(mdp.available_actions[s])
                                   : color.actions;
            for (int a : acts) mdp.features[s][a][static_cast<int>(ci) + 1] = 1.0;
        }
    }
    mdp.validate();

    ConstraintSet truth;
    for (const auto& gc : cfg.true_constraints) {
        switch (gc.kind) {
        case ConstraintKind::State:
            if (!cfg.in_grid(gc.cell)) throw InvalidConfig("constrained cell outside the grid");
            truth.minimal_constraints.push_back(
                {ConstraintKind::State, cfg.cell_index(gc.cell)});
            break;
        case ConstraintKind::Action:
            if (gc.action < 0 || gc.action >= kGridActionCount)
                throw InvalidConfig("constrained action out of range");
            truth.minimal_constraints.push_back({ConstraintKind::Action, gc.action});
            break;
        case ConstraintKind::Feature:
            truth.minimal_constraints.push_back(
                {ConstraintKind::Feature, feature_index_of_color(cfg, gc.feature)});
            break;
        }
    }
    std::sort(truth.minimal_constraints.begin(), truth.minimal_constraints.end());

    if (!truth.minimal_constraints.empty()) {
        int moves = -1;
        try {
            Mdp constrained = apply_constraints(mdp, truth);
            moves = bfs_moves_to_goal(constrained, cfg.cell_index(cfg.start), goal_state);
        } catch (const FullyConstrained&) {
        }
        if (moves < 0 || moves > mdp.horizon)
            throw InvalidConfig("planted constraints leave no start-to-goal path "
                                "within the horizon");
    }

    Gridworld gw;
    gw.nominal = std::move(mdp);
    gw.truth = std::move(truth);
    gw.meta.name = cfg.name;
    gw.meta.width = cfg.width;
    gw.meta.height = cfg.height;
    gw.meta.start_state = cfg.cell_index(cfg.start);
    gw.meta.goal_state = goal_state;
    gw.meta.feature_names.push_back("distance");
    for (const auto& color : cfg.colors) gw.meta.feature_names.push_back(color.name);
    for (const auto& color : cfg.colors) {
        std::vector<int> cells;
        for (const auto& cell : color.cells) cells.push_back(cfg.cell_index(cell));
        std::sort(cells.begin(), cells.end());
        gw.meta.color_states.push_back(std::move(cells));
    }
    return gw;
}

Mdp true_gridworld_mdp(const Gridworld& gw) {
    return apply_constraints(gw.nominal, gw.truth);
}

} // namespace mlci

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

#include <array>
#include <string>
#include <vector>

#include "mlci/maxent.hpp"
#include "mlci/mdp.hpp"

namespace mlci {

/// The eight king moves, clockwise from north, then the absorbing stay
/// action available only at goal cells.
enum GridAction : int {
    kNorth = 0,
    kNorthEast = 1,
    kEast = 2,
    kSouthEast = 3,
    kSouth = 4,
    kSouthWest = 5,
    kWest = 6,
    kNorthWest = 7,
    kStay = 8,
};

constexpr int kGridActionCount = 9;

extern const std::array<std::string, kGridActionCount> kGridActionNames;
extern const std::array<std::pair<int, int>, kGridActionCount> kGridActionDeltas;

/// Parses an action name ("NE", "stay", ...); throws InvalidConfig.
int grid_action_from_name(const std::string& name);

struct Cell {
    int x = 0;
    int y = 0; ///< y = 0 is the bottom row.
    auto operator<=>(const Cell&) const = default;
};

/// A named binary feature produced by taking actions from certain cells.
struct ColorFeature {
    std::string name;
    std::vector<Cell> cells;
    /// Actions producing the feature from those cells; empty = all moves.
    std::vector<int> actions;
};

/// Ground-truth constraint spelled in grid terms.
struct GridConstraint {
    ConstraintKind kind;
    Cell cell;          ///< for state constraints
    int action = -1;    ///< for action constraints
    std::string feature; ///< for feature constraints (color name)
};

struct GridConfig {
    std::string name = "grid";
    int width = 0;
    int height = 0;
    Cell start;
    Cell goal;
    int horizon = -1;            ///< default: 2 * width
    double diagonal_cost = -1.0; ///< default: sqrt(2); set 1 for Chebyshev
    double distance_weight = -1.0;
    double discount = 1.0;
    double rationality = 1.0;
    double slip = 0.0; ///< probability of slipping to a 45-degree neighbor move
    std::vector<ColorFeature> colors;
    std::vector<GridConstraint> true_constraints;

    int cell_index(const Cell& c) const { return c.y * width + c.x; }
    Cell cell_at(int s) const { return Cell{s % width, s / width}; }
    bool in_grid(const Cell& c) const {
        return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height;
    }

    void validate() const; ///< throws InvalidConfig
};

/// Geometry and naming metadata carried next to a grid MDP so renderers and
/// reports can map states back to cells.
struct GridMeta {
    std::string name;
    int width = 0;
    int height = 0;
    int start_state = -1;
    int goal_state = -1;
    std::vector<std::string> feature_names; ///< "distance" then color names
    std::vector<std::vector<int>> color_states; ///< per color, cells producing it
};

struct Gridworld {
    Mdp nominal;
    ConstraintSet truth; ///< ground-truth constraints, closure not yet derived
    GridMeta meta;
};

/**
 * Builds the synthetic grid world: king moves minus off-grid targets, an
 * absorbing zero-reward stay action at the goal, a geometric distance
 * feature on every move (1 orthogonal, diagonal_cost diagonal), binary color
 * features, and reward = distance_weight * distance. With slip > 0 the
 * intended move is swapped for one of its two 45-degree neighbors with
 * probability slip (off-grid slips leave the agent in place).
 *
 * Throws InvalidConfig, in particular when the planted constraints leave no
 * feasible start-to-goal path within the horizon.
 */
Gridworld build_gridworld(const GridConfig& cfg);

/// The true system of a grid: nominal MDP with the planted constraints
/// applied (closure included).
Mdp true_gridworld_mdp(const Gridworld& gw);

/**
 * Loads a demonstrations file against a grid's MDP. Trajectories shorter
 * than the horizon must end at the goal and are padded with the absorbing
 * stay action; infeasible trajectories are rejected with per-demo
 * diagnostics. Throws SchemaError or InfeasibleDemo.
 */
DemoSet ingest_external_demos(const std::string& path, const GridConfig& cfg);
DemoSet ingest_external_demos(const std::string& path, const Gridworld& gw);

} // namespace mlci

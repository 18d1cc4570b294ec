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

#include <string>
#include <vector>

#include "mlci/accrual.hpp"
#include "mlci/gridworld.hpp"
#include "mlci/mdp.hpp"

namespace mlci {

/**
 * Heatmap rendering of an accrual history over a grid: three panels (states,
 * actions, features), each element shaded by the proportion of trajectories
 * expected to accrue it, with constraints overlaid as 'X' marks. Output is
 * deterministic byte-for-byte given the same inputs.
 */
std::string render_ascii(const GridMeta& meta, const AccrualHistory& hist,
                         const std::vector<MinimalConstraint>& marks);

std::string render_svg(const GridMeta& meta, const AccrualHistory& hist,
                       const std::vector<MinimalConstraint>& marks);

} // namespace mlci

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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlci/accrual.hpp"
#include "mlci/gridworld.hpp"
#include "mlci/inference.hpp"
#include "mlci/maxent.hpp"
#include "mlci/mdp.hpp"

namespace mlci {

using Json = nlohmann::ordered_json;

// Schema version strings. Every file this tool reads or writes carries one.
inline constexpr const char* kMdpSchema = "mlci-mdp/1";
inline constexpr const char* kDemosSchema = "mlci-demos/1";
inline constexpr const char* kPolicySchema = "mlci-policy/1";
inline constexpr const char* kResultSchema = "mlci-result/1";
inline constexpr const char* kConstraintsSchema = "mlci-constraints/1";
inline constexpr const char* kWeightsSchema = "mlci-weights/1";
inline constexpr const char* kAccrualSchema = "mlci-accrual/1";
inline constexpr const char* kGridSchema = "mlci-grid/1";
inline constexpr const char* kSweepSchema = "mlci-sweep/1";

/**
 * Reproducibility manifest embedded in every output file. Only deterministic
 * fields live here so that reruns of the same command produce byte-identical
 * outputs; wall-clock timing is reported on stderr instead.
 */
struct RunManifest {
    std::string command;
    std::string tool_version;
    std::map<std::string, std::string> input_digests; ///< role -> fnv1a-64 hex
    uint64_t seed = 0;
    std::map<std::string, Json> parameters;
    std::string stop_reason; ///< empty when not applicable

    Json to_json() const;
};

/// FNV-1a 64-bit digest of a byte string, as fixed-width hex.
std::string fnv1a_hex(const std::string& bytes);

/// Reads a whole file; throws SchemaError if it cannot be opened.
std::string read_file(const std::string& path);

/// Writes via a temporary file in the same directory plus atomic rename, so
/// failures never leave partial outputs.
void atomic_write_file(const std::string& path, const std::string& content);

/// Parses text as JSON and checks the declared schema string.
Json parse_with_schema(const std::string& text, const std::string& expected_schema);

// --- MDP ---------------------------------------------------------------------

Json mdp_to_json(const Mdp& mdp, const std::optional<GridMeta>& meta = std::nullopt);
Mdp mdp_from_json(const Json& j);
std::optional<GridMeta> grid_meta_from_json(const Json& j);

// --- demonstrations ------------------------------------------------------------

Json demos_to_json(const DemoSet& demos);
/// Raw state/action sequences; validation happens in make_demo_set.
std::vector<Trajectory> trajectories_from_json(const Json& j);

/**
 * Loads and validates a demonstrations file against an MDP. Sequences may
 * omit the final action or stop early when they end on an absorbing goal
 * state; they are padded with the goal's self-loop action up to the horizon.
 * Throws SchemaError, or InfeasibleDemo carrying per-demo diagnostics.
 */
DemoSet ingest_demo_file(const std::string& path, const Mdp& mdp);

// --- constraint sets ----------------------------------------------------------

Json constraints_to_json(const ConstraintSet& c);
ConstraintSet constraints_from_json(const Json& j);

// --- policy / partition (debug export) -----------------------------------------

Json policy_to_json(const TimeVaryingPolicy& pol, const PartitionValue& z);

// --- inference results ----------------------------------------------------------

Json result_to_json(const InferenceResult& r, const RunManifest& manifest);
InferenceResult result_from_json(const Json& j);

// --- accrual history -------------------------------------------------------------

Json accrual_to_json(const AccrualHistory& h);
AccrualHistory accrual_from_json(const Json& j);

// --- learned weights --------------------------------------------------------------

Json weights_to_json(const std::vector<double>& w, const std::vector<double>& loglik,
                     bool diverged, const RunManifest& manifest);

// --- grid configs -----------------------------------------------------------------

GridConfig grid_config_from_json(const Json& j);
GridConfig load_grid_config(const std::string& path);

} // namespace mlci

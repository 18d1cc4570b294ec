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

#include "mlci/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mlci {

namespace {

ConstraintKind kind_from_string(const std::string& s) {
    if (s == "feature") return ConstraintKind::Feature;
    if (s == "state") return ConstraintKind::State;
    if (s == "action") return ConstraintKind::Action;
    throw SchemaError("unknown constraint kind '" + s + "'");
}

StopReason stop_reason_from_string(const std::string& s) {
    if (s == "threshold") return StopReason::Threshold;
    if (s == "exhausted") return StopReason::Exhausted;
    if (s == "max_iters") return StopReason::MaxIters;
    if (s == "no_positive_mass") return StopReason::NoPositiveMass;
    throw SchemaError("unknown stop reason '" + s + "'");
}

Json constraint_to_json(const MinimalConstraint& c) {
    return Json{{"kind", to_string(c.kind)}, {"index", c.index}};
}

MinimalConstraint constraint_from_json(const Json& j) {
    return {kind_from_string(j.at("kind").get<std::string>()), j.at("index").get<int>()};
}

Json iteration_to_json(const IterationRecord& rec) {
    return Json{{"iteration", rec.iteration},
                {"constraint", constraint_to_json(rec.chosen)},
                {"eliminated_mass", rec.eliminated_mass},
                {"kl_before", rec.kl_before},
                {"kl_after", rec.kl_after},
                {"delta_kl", rec.delta_kl}};
}

IterationRecord iteration_from_json(const Json& j) {
    IterationRecord rec;
    rec.iteration = j.at("iteration").get<int>();
    rec.chosen = constraint_from_json(j.at("constraint"));
    rec.eliminated_mass = j.at("eliminated_mass").get<double>();
    rec.kl_before = j.at("kl_before").get<double>();
    rec.kl_after = j.at("kl_after").get<double>();
    rec.delta_kl = j.at("delta_kl").get<double>();
    return rec;
}

} // namespace

Json RunManifest::to_json() const {
    Json j;
    j["command"] = command;
    j["tool_version"] = tool_version;
    j["inputs"] = Json::object();
    for (const auto& [role, digest] : input_digests) j["inputs"][role] = digest;
    j["seed"] = seed;
    j["parameters"] = Json::object();
    for (const auto& [key, value] : parameters) j["parameters"][key] = value;
    if (!stop_reason.empty()) j["stop_reason"] = stop_reason;
    return j;
}

std::string fnv1a_hex(const std::string& bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void atomic_write_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp + "' for writing");
        out << content;
        out.flush();
        if (!out) throw Error("short write to '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw Error("cannot rename '" + tmp + "' to '" + path + "'");
    }
}

Json parse_with_schema(const std::string& text, const std::string& expected_schema) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("schema") || !j.at("schema").is_string())
        throw SchemaError("missing schema string");
    const auto schema = j.at("schema").get<std::string>();
    if (schema != expected_schema)
        throw SchemaError("expected schema '" + expected_schema + "', found '" + schema + "'");
    return j;
}

// --- MDP ---------------------------------------------------------------------

Json mdp_to_json(const Mdp& mdp, const std::optional<GridMeta>& meta) {
    Json j;
    j["schema"] = kMdpSchema;
    j["n_states"] = mdp.n_states;
    j["n_actions"] = mdp.n_actions;
    j["n_features"] = mdp.n_features;
    j["horizon"] = mdp.horizon;
    j["discount"] = mdp.discount;
    j["rationality"] = mdp.rationality;
    j["initial_dist"] = mdp.initial_dist;
    j["goal_states"] = mdp.goal_states;
    j["available_actions"] = mdp.available_actions;
    Json rows = Json::array();
    for (int s = 0; s < mdp.n_states; ++s) {
        for (int a : mdp.available_actions[s]) {
            Json succs = Json::array();
            for (const auto& succ : mdp.transitions[s][a])
                succs.push_back(Json{{"s2", succ.state}, {"p", succ.prob}});
            rows.push_back(Json{{"s", s}, {"a", a}, {"successors", succs}});
        }
    }
    j["transitions"] = rows;
    j["features"] = mdp.features;
    j["reward_weights"] = mdp.reward_weights;
    if (mdp.reward_table) j["reward_table"] = *mdp.reward_table;
    if (meta) {
        j["meta"] = Json{{"name", meta->name},
                         {"width", meta->width},
                         {"height", meta->height},
                         {"start_state", meta->start_state},
                         {"goal_state", meta->goal_state},
                         {"feature_names", meta->feature_names},
                         {"color_states", meta->color_states},
                         {"action_names", kGridActionNames}};
    }
    return j;
}

Mdp mdp_from_json(const Json& j) {
    Mdp mdp;
    try {
        mdp.n_states = j.at("n_states").get<int>();
        mdp.n_actions = j.at("n_actions").get<int>();
        mdp.n_features = j.at("n_features").get<int>();
        mdp.horizon = j.at("horizon").get<int>();
        mdp.discount = j.value("discount", 1.0);
        mdp.rationality = j.value("rationality", 1.0);
        mdp.initial_dist = j.at("initial_dist").get<std::vector<double>>();
        mdp.goal_states = j.value("goal_states", std::vector<int>{});
        mdp.available_actions = j.at("available_actions").get<std::vector<std::vector<int>>>();
        mdp.features =
            j.at("features").get<std::vector<std::vector<std::vector<double>>>>();
        mdp.reward_weights = j.at("reward_weights").get<std::vector<double>>();
        if (j.contains("reward_table"))
            mdp.reward_table = j.at("reward_table").get<std::vector<std::vector<double>>>();
        if (mdp.n_states <= 0 || mdp.n_actions <= 0)
            throw SchemaError("MDP needs positive state and action counts");
        mdp.transitions.assign(mdp.n_states,
                               std::vector<std::vector<Successor>>(mdp.n_actions));
        for (const auto& row : j.at("transitions")) {
            int s = row.at("s").get<int>();
            int a = row.at("a").get<int>();
            if (s < 0 || s >= mdp.n_states || a < 0 || a >= mdp.n_actions)
                throw SchemaError("transition row indexes outside the MDP");
            std::vector<Successor> succs;
            for (const auto& e : row.at("successors"))
                succs.push_back({e.at("s2").get<int>(), e.at("p").get<double>()});
            mdp.transitions[s][a] = std::move(succs);
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed MDP file: ") + e.what());
    }
    try {
        mdp.validate();
    } catch (const Error& e) {
        throw SchemaError(std::string("MDP fails validation: ") + e.what());
    }
    return mdp;
}

std::optional<GridMeta> grid_meta_from_json(const Json& j) {
    if (!j.contains("meta")) return std::nullopt;
    const auto& m = j.at("meta");
    GridMeta meta;
    try {
        meta.name = m.value("name", std::string{});
        meta.width = m.at("width").get<int>();
        meta.height = m.at("height").get<int>();
        meta.start_state = m.value("start_state", -1);
        meta.goal_state = m.value("goal_state", -1);
        meta.feature_names = m.value("feature_names", std::vector<std::string>{});
        meta.color_states = m.value("color_states", std::vector<std::vector<int>>{});
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed grid meta: ") + e.what());
    }
    return meta;
}

// --- demonstrations -------------------------------------------------------------

Json demos_to_json(const DemoSet& demos) {
    Json j;
    j["schema"] = kDemosSchema;
    Json list = Json::array();
    for (const auto& d : demos.demos)
        list.push_back(Json{{"states", d.states}, {"actions", d.actions}});
    j["demos"] = list;
    return j;
}

std::vector<Trajectory> trajectories_from_json(const Json& j) {
    std::vector<Trajectory> out;
    try {
        const auto& list = j.at("demos");
        if (!list.is_array() || list.empty())
            throw SchemaError("demo file must contain at least one trajectory");
        for (const auto& entry : list) {
            Trajectory t;
            t.states = entry.at("states").get<std::vector<int>>();
            t.actions = entry.at("actions").get<std::vector<int>>();
            out.push_back(std::move(t));
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed demos file: ") + e.what());
    }
    return out;
}

// --- constraint sets --------------------------------------------------------------

Json constraints_to_json(const ConstraintSet& c) {
    Json j;
    j["schema"] = kConstraintsSchema;
    Json list = Json::array();
    for (const auto& mc : c.minimal_constraints) list.push_back(constraint_to_json(mc));
    j["constraints"] = list;
    Json closure = Json::array();
    for (const auto& sa : c.empty_state_closure)
        closure.push_back(Json{{"s", sa.state}, {"a", sa.action}});
    j["empty_state_closure"] = closure;
    return j;
}

ConstraintSet constraints_from_json(const Json& j) {
    ConstraintSet c;
    try {
        for (const auto& entry : j.at("constraints"))
            c.minimal_constraints.push_back(constraint_from_json(entry));
        for (const auto& entry : j.value("empty_state_closure", Json::array()))
            c.empty_state_closure.push_back({entry.at("s").get<int>(), entry.at("a").get<int>()});
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed constraints file: ") + e.what());
    }
    return c;
}

// --- policy ------------------------------------------------------------------------

Json policy_to_json(const TimeVaryingPolicy& pol, const PartitionValue& z) {
    Json j;
    j["schema"] = kPolicySchema;
    j["horizon"] = pol.horizon;
    j["log_z"] = z.log_z;
    j["state_log_value"] = z.state_log_value;
    // Probabilities materialize only here, at the API boundary.
    Json slices = Json::array();
    for (int t = 0; t < pol.steps(); ++t) {
        Json per_state = Json::array();
        for (size_t s = 0; s < pol.log_pi[t].size(); ++s) {
            Json row = Json::array();
            for (size_t a = 0; a < pol.log_pi[t][s].size(); ++a)
                row.push_back(pol.prob(t, static_cast<int>(s), static_cast<int>(a)));
            per_state.push_back(row);
        }
        slices.push_back(per_state);
    }
    j["policy"] = slices;
    return j;
}

// --- results -------------------------------------------------------------------------

Json result_to_json(const InferenceResult& r, const RunManifest& manifest) {
    Json j;
    j["schema"] = kResultSchema;
    Json selected = Json::array();
    for (const auto& c : r.selected) selected.push_back(constraint_to_json(c));
    j["selected"] = selected;
    Json iterations = Json::array();
    for (const auto& rec : r.iterations) iterations.push_back(iteration_to_json(rec));
    j["iterations"] = iterations;
    j["stop_reason"] = to_string(r.stop_reason);
    j["initial_kl"] = r.initial_kl;
    j["final_kl"] = r.final_kl;
    if (r.rejected) j["rejected"] = iteration_to_json(*r.rejected);
    j["manifest"] = manifest.to_json();
    return j;
}

InferenceResult result_from_json(const Json& j) {
    InferenceResult r;
    try {
        for (const auto& entry : j.at("selected"))
            r.selected.push_back(constraint_from_json(entry));
        for (const auto& entry : j.at("iterations"))
            r.iterations.push_back(iteration_from_json(entry));
        r.stop_reason = stop_reason_from_string(j.at("stop_reason").get<std::string>());
        r.initial_kl = j.at("initial_kl").get<double>();
        r.final_kl = j.at("final_kl").get<double>();
        if (j.contains("rejected")) r.rejected = iteration_from_json(j.at("rejected"));
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed result file: ") + e.what());
    }
    return r;
}

// --- accrual history ---------------------------------------------------------------

Json accrual_to_json(const AccrualHistory& h) {
    Json j;
    j["schema"] = kAccrualSchema;
    j["n_indicators"] = h.n_indicators;
    j["horizon"] = h.horizon;
    j["layout"] = Json{{"n_native", h.n_native},
                       {"n_states", h.n_states},
                       {"n_actions", h.n_actions}};
    j["accrued"] = h.accrued;
    j["visitation"] = h.visitation;
    return j;
}

AccrualHistory accrual_from_json(const Json& j) {
    AccrualHistory h;
    try {
        h.n_indicators = j.at("n_indicators").get<int>();
        h.horizon = j.at("horizon").get<int>();
        h.n_native = j.at("layout").at("n_native").get<int>();
        h.n_states = j.at("layout").at("n_states").get<int>();
        h.n_actions = j.at("layout").at("n_actions").get<int>();
        h.accrued = j.at("accrued").get<std::vector<std::vector<double>>>();
        h.visitation = j.at("visitation").get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed accrual file: ") + e.what());
    }
    if (h.accrued.empty() || static_cast<int>(h.accrued.back().size()) != h.n_indicators)
        throw SchemaError("accrual table does not match its declared layout");
    return h;
}

// --- weights -----------------------------------------------------------------------

Json weights_to_json(const std::vector<double>& w, const std::vector<double>& loglik,
                     bool diverged, const RunManifest& manifest) {
    Json j;
    j["schema"] = kWeightsSchema;
    j["weights"] = w;
    j["mean_log_likelihood"] = loglik;
    j["diverged"] = diverged;
    j["manifest"] = manifest.to_json();
    return j;
}

// --- grid configs --------------------------------------------------------------------

GridConfig grid_config_from_json(const Json& j) {
    GridConfig cfg;
    try {
        cfg.name = j.value("name", std::string{"grid"});
        cfg.width = j.at("width").get<int>();
        cfg.height = j.at("height").get<int>();
        cfg.start = {j.at("start").at(0).get<int>(), j.at("start").at(1).get<int>()};
        cfg.goal = {j.at("goal").at(0).get<int>(), j.at("goal").at(1).get<int>()};
        cfg.horizon = j.value("horizon", -1);
        cfg.diagonal_cost = j.value("diagonal_cost", -1.0);
        cfg.distance_weight = j.value("distance_weight", -1.0);
        cfg.discount = j.value("discount", 1.0);
        cfg.rationality = j.value("rationality", 1.0);
        cfg.slip = j.value("slip", 0.0);
        for (const auto& color : j.value("colors", Json::array())) {
            ColorFeature f;
            f.name = color.at("name").get<std::string>();
            for (const auto& cell : color.at("cells"))
                f.cells.push_back({cell.at(0).get<int>(), cell.at(1).get<int>()});
            for (const auto& a : color.value("actions", Json::array()))
                f.actions.push_back(a.is_string() ? grid_action_from_name(a.get<std::string>())
                                                  : a.get<int>());
            cfg.colors.push_back(std::move(f));
        }
        for (const auto& entry : j.value("true_constraints", Json::array())) {
            GridConstraint gc;
            gc.kind = kind_from_string(entry.at("kind").get<std::string>());
            switch (gc.kind) {
            case ConstraintKind::State:
                gc.cell = {entry.at("cell").at(0).get<int>(), entry.at("cell").at(1).get<int>()};
                break;
            case ConstraintKind::Action: {
                const auto& a = entry.at("action");
                gc.action = a.is_string() ? grid_action_from_name(a.get<std::string>())
                                          : a.get<int>();
                break;
            }
            case ConstraintKind::Feature:
                gc.feature = entry.at("feature").get<std::string>();
                break;
            }
            cfg.true_constraints.push_back(std::move(gc));
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed grid config: ") + e.what());
    }
    return cfg;
}

GridConfig load_grid_config(const std::string& path) {
    return grid_config_from_json(parse_with_schema(read_file(path), kGridSchema));
}

// --- external demo ingestion (declared in gridworld.hpp) -----------------------------

DemoSet ingest_demo_file(const std::string& path, const Mdp& mdp) {
    const auto j = parse_with_schema(read_file(path), kDemosSchema);
    auto trajs = trajectories_from_json(j);
    const int want = mdp.horizon + 1;

    auto goal_loop_action = [&](int s) -> int {
        for (int g : mdp.goal_states)
            if (g == s && mdp.available_actions[s].size() == 1)
                return mdp.available_actions[s][0];
        return -1;
    };

    std::vector<std::string> problems;
    for (size_t i = 0; i < trajs.size(); ++i) {
        auto& t = trajs[i];
        // Accept sequences without the final action when they end on an
        // absorbing goal, then pad short goal-terminated trajectories.
        int loop = t.states.empty() ? -1 : goal_loop_action(t.states.back());
        if (static_cast<int>(t.actions.size()) == static_cast<int>(t.states.size()) - 1 &&
            loop >= 0)
            t.actions.push_back(loop);
        if (t.states.size() != t.actions.size()) {
            problems.push_back("demo " + std::to_string(i) +
                               ": needs one action per state (got " +
                               std::to_string(t.actions.size()) + " actions for " +
                               std::to_string(t.states.size()) + " states)");
            continue;
        }
        while (loop >= 0 && static_cast<int>(t.states.size()) < want) {
            t.states.push_back(t.states.back());
            t.actions.push_back(loop);
        }
        auto feas = validate_trajectory(mdp, t);
        if (!feas) problems.push_back("demo " + std::to_string(i) + ": " + feas.describe());
    }
    if (!problems.empty()) {
        std::string msg = problems[0];
        for (size_t i = 1; i < problems.size(); ++i) msg += "; " + problems[i];
        throw InfeasibleDemo(0, msg);
    }
    auto map = augment_features(mdp);
    return make_demo_set(mdp, map, std::move(trajs));
}

DemoSet ingest_external_demos(const std::string& path, const Gridworld& gw) {
    return ingest_demo_file(path, gw.nominal);
}

DemoSet ingest_external_demos(const std::string& path, const GridConfig& cfg) {
    return ingest_external_demos(path, build_gridworld(cfg));
}

} // namespace mlci

#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "dlsched/core_model.hpp"

namespace dlsched {

// Config schema (JSON):
//
//   {
//     "n": 10, "m": 5, "beta": 0.999,
//     "penalty": {"kind": "quadratic", "kappa": 0.2},
//     "arrivals": [{"t": 0, "b": 0, "prob": 0.3}, {"t": 12, "b": 9, "prob": 0.7}],
//     "cost_chain": {"states": [0.5], "transition": [[1.0]]}
//   }
//
// A tabulated penalty uses {"kind": "tabulated", "values": [0, 0.2, ...]}.
// Doubles are written with shortest round-trip formatting, so
// parse(dump(spec)) reproduces spec exactly.

nlohmann::json to_json(const ProblemSpec& spec);
ProblemSpec spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CostChain& chain);
CostChain cost_chain_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PenaltyFunction& penalty);
PenaltyFunction penalty_from_json(const nlohmann::json& j);

ProblemSpec load_spec(const std::filesystem::path& path);
void save_spec(const ProblemSpec& spec, const std::filesystem::path& path);

/// Hash of the single-arm problem (beta, arrivals, penalty, cost chain).
/// N and M do not enter the Whittle indices, so they are excluded; one
/// index table serves every (N, M) of the same arm dynamics.
std::string arm_hash(const ProblemSpec& spec);

} // namespace dlsched

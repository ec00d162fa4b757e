#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dlsched/core_model.hpp"
#include "dlsched/policies.hpp"

namespace dlsched {

enum class ArrivalMode {
	/// Each freed position draws its next occupant from Q independently.
	independent,
	/// Poisson arrivals pooled over the system, assigned uniformly to free
	/// positions; surplus jobs are dropped.
	poisson_uniform,
};

std::string to_string(ArrivalMode mode);
ArrivalMode arrival_mode_from_string(const std::string& name);

struct SimConfig {
	/// 0 picks the horizon whose truncation error is at most 1e-3.
	std::size_t horizon = 0;
	std::size_t replications = 100;
	std::uint64_t seed = 1;
	ArrivalMode arrival_mode = ArrivalMode::independent;
	/// Mean number of arrivals per window of T̄ slots (poisson_uniform only).
	double poisson_mean = 0.0;
	/// Defaults to an empty system in cost state 0.
	std::optional<SystemState> initial_state;
	unsigned threads = 1;
	bool keep_traces = false;
};

/// Horizon H with β^H R_max/(1-β) <= epsilon.
std::size_t auto_horizon(const ProblemSpec& spec, double epsilon = 1e-3);
double truncation_error(const ProblemSpec& spec, std::size_t horizon);

struct ReplicationRecord {
	std::size_t replication = 0;
	std::uint64_t seed = 0;
	double discounted_reward = 0.0;
	/// Over jobs whose deadline passed inside the horizon; 1 when none did.
	double completion_ratio = 1.0;
	std::size_t arrived = 0;
	std::size_t completed = 0;
	std::size_t missed = 0;
	std::size_t dropped = 0;
	std::vector<double> trace; // per-slot reward, when requested
};

struct SimReport {
	std::string policy;
	std::size_t horizon = 0;
	double truncation_error = 0.0;
	std::vector<ReplicationRecord> records;
	double mean = 0.0;
	double stderr_mean = 0.0;
	/// Pooled completed / (completed + missed).
	double completion_ratio = 1.0;
	double completion_stderr = 0.0;
	/// Set when no deadline expired in any replication.
	bool no_arrivals = false;
};

SimReport run(const ProblemSpec& spec, const Policy& policy, const SimConfig& cfg);

struct PairedDifference {
	std::string first;
	std::string second;
	double mean = 0.0; // first minus second
	double stderr_mean = 0.0;
};

struct PairedReport {
	std::vector<SimReport> reports;
	std::vector<PairedDifference> differences; // every pair i < j
};

/// Runs every policy on the same random streams, so each replication sees
/// identical cost and arrival paths under every policy.
PairedReport paired_compare(const ProblemSpec& spec, const std::vector<Policy>& policies, const SimConfig& cfg);

/// policy,replication,seed,discounted_reward,completion_ratio,truncation_error
void write_replications_csv(const std::vector<SimReport>& reports, std::ostream& out);
/// policy,mean,stderr,completion_ratio,completion_stderr,horizon,truncation_error,replications,no_arrivals
void write_summary_csv(const std::vector<SimReport>& reports, std::ostream& out);

} // namespace dlsched

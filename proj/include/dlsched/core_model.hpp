#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dlsched/rng.hpp"

namespace dlsched {

/// State of one queue position: slots until the deadline and slots of
/// processing still owed. (0,0) is an empty position.
struct JobState {
	int lead_time = 0;
	int remaining_work = 0;

	constexpr bool empty() const noexcept { return lead_time == 0; }
	constexpr bool unfinished() const noexcept { return remaining_work > 0; }
	constexpr int laxity() const noexcept { return lead_time - remaining_work; }

	friend constexpr bool operator==(const JobState&, const JobState&) = default;
};

/// Finite Markov chain over marginal processing costs.
class CostChain {
public:
	CostChain() : CostChain({0.0}, {{1.0}}) {}
	CostChain(std::vector<double> states, std::vector<std::vector<double>> transition);

	static CostChain constant(double cost) { return CostChain({cost}, {{1.0}}); }

	std::size_t size() const noexcept { return states_.size(); }
	double cost(std::size_t j) const { return states_.at(j); }
	double probability(std::size_t from, std::size_t to) const { return transition_[from][to]; }
	const std::vector<double>& states() const noexcept { return states_; }
	const std::vector<std::vector<double>>& transition() const noexcept { return transition_; }

	double min_cost() const noexcept { return states_.front(); }
	double max_cost() const noexcept { return states_.back(); }

	std::size_t sample_next(std::size_t from, Rng& rng) const;

private:
	std::vector<double> states_;
	std::vector<std::vector<double>> transition_;
	std::vector<std::vector<double>> cumulative_;
};

struct ArrivalOutcome {
	JobState job;
	double probability = 0.0;
};

/// Distribution Q(T,B) of what lands in a freed position, including the
/// empty outcome (0,0).
class ArrivalDistribution {
public:
	ArrivalDistribution() : ArrivalDistribution({{JobState{0, 0}, 1.0}}) {}
	explicit ArrivalDistribution(std::vector<ArrivalOutcome> outcomes);

	static ArrivalDistribution point_mass(JobState job) { return ArrivalDistribution({{job, 1.0}}); }

	/// Outcomes with positive mass in canonical (T,B) order; the empty
	/// outcome is listed only when its mass is positive.
	const std::vector<ArrivalOutcome>& outcomes() const noexcept { return outcomes_; }
	double empty_probability() const noexcept { return empty_probability_; }
	double probability(JobState job) const;

	int max_lead_time() const noexcept { return max_lead_time_; }
	int max_work() const noexcept { return max_work_; }
	double mean_lead_time_given_job() const;

	JobState sample(Rng& rng) const;
	/// Sample conditioned on a job arriving (used by pooled arrivals).
	JobState sample_job(Rng& rng) const;

private:
	std::vector<ArrivalOutcome> outcomes_;
	std::vector<double> cumulative_;
	std::vector<double> job_cumulative_;
	std::vector<JobState> jobs_;
	double empty_probability_ = 0.0;
	int max_lead_time_ = 0;
	int max_work_ = 0;
};

/// Convex nondecreasing non-completion penalty with F(0)=0.
class PenaltyFunction {
public:
	enum class Kind { quadratic, linear, tabulated };

	PenaltyFunction() : PenaltyFunction(Kind::quadratic, 0.0) {}
	PenaltyFunction(Kind kind, double kappa);
	explicit PenaltyFunction(std::vector<double> table);

	static PenaltyFunction quadratic(double kappa) { return {Kind::quadratic, kappa}; }
	static PenaltyFunction linear(double kappa) { return {Kind::linear, kappa}; }
	static PenaltyFunction tabulated(std::vector<double> table) { return PenaltyFunction(std::move(table)); }

	Kind kind() const noexcept { return kind_; }
	double kappa() const noexcept { return kappa_; }
	const std::vector<double>& table() const noexcept { return table_; }
	/// Largest B the function is defined on (unbounded for closed forms).
	int domain_limit() const noexcept;

	double operator()(int unfinished) const;

private:
	Kind kind_;
	double kappa_ = 0.0;
	std::vector<double> table_;
};

std::string to_string(PenaltyFunction::Kind kind);
PenaltyFunction::Kind penalty_kind_from_string(const std::string& name);

struct ProblemSpec {
	int n = 1;
	int m = 1;
	double beta = 0.9;
	ArrivalDistribution arrivals;
	PenaltyFunction penalty;
	CostChain costs;
	// Optional floors on the state-space bounds, for instances whose
	// initial jobs are larger than anything the arrivals produce.
	int lead_time_floor = 0;
	int work_floor = 0;

	int max_lead_time() const noexcept { return std::max(arrivals.max_lead_time(), lead_time_floor); }
	int max_work() const noexcept { return std::max(arrivals.max_work(), work_floor); }

	/// Throws ConfigError on a violated invariant.
	void validate() const;
};

struct SystemState {
	std::size_t cost_index = 0;
	std::vector<JobState> jobs;

	static SystemState empty(int n, std::size_t cost_index = 0)
	{
		return {cost_index, std::vector<JobState>(static_cast<std::size_t>(n))};
	}
};

struct Action {
	std::vector<std::uint8_t> active;

	static Action none(std::size_t n) { return {std::vector<std::uint8_t>(n, 0)}; }
	int count() const noexcept;
};

// Transition of a single position. Activation of an empty or finished
// position is a no-op.
JobState step_job(JobState job, int active, const ArrivalDistribution& arrivals, Rng& rng);

double reward(JobState job, double cost, int active, const PenaltyFunction& penalty);

std::size_t step_cost(std::size_t cost_index, const CostChain& chain, Rng& rng);

struct StepResult {
	SystemState state;
	double reward = 0.0;
};

/// One slot of the joint system. Throws CapacityViolation when more than
/// spec.m positions are active.
StepResult system_step(const SystemState& state, const Action& action, const ProblemSpec& spec, Rng& rng);

/// Same transition with one stream for the cost chain and one per
/// position, so that sample paths are shared across policies.
StepResult system_step(const SystemState& state, const Action& action, const ProblemSpec& spec,
                       Rng& cost_rng, std::span<Rng> position_rngs);

/// Bound on |slot reward| for any state and action.
double max_slot_reward(const ProblemSpec& spec);

} // namespace dlsched

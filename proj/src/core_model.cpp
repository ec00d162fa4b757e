#include "dlsched/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <utility>

#include <fmt/format.h>

#include "dlsched/error.hpp"

namespace dlsched {

namespace {

constexpr double mass_tolerance = 1e-12;

std::size_t sample_cumulative(const std::vector<double>& cumulative, Rng& rng)
{
	const double u = uniform01(rng) * cumulative.back();
	auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
	if (it == cumulative.end())
		--it;
	return static_cast<std::size_t>(it - cumulative.begin());
}

} // namespace

CostChain::CostChain(std::vector<double> states, std::vector<std::vector<double>> transition)
	: states_(std::move(states)), transition_(std::move(transition))
{
	if (states_.empty())
		throw ConfigError("cost chain needs at least one state");
	for (double c : states_)
		if (!std::isfinite(c))
			throw ConfigError("cost states must be finite");
	for (std::size_t j = 1; j < states_.size(); ++j)
		if (!(states_[j] > states_[j - 1]))
			throw ConfigError("cost states must be strictly increasing");
	if (transition_.size() != states_.size())
		throw ConfigError("transition matrix must be square with one row per cost state");

	cumulative_.reserve(states_.size());
	for (std::size_t j = 0; j < transition_.size(); ++j) {
		const auto& row = transition_[j];
		if (row.size() != states_.size())
			throw ConfigError("transition matrix must be square with one row per cost state");
		double sum = 0.0;
		std::vector<double> cum;
		cum.reserve(row.size());
		for (double p : row) {
			if (!(p >= 0.0 && p <= 1.0))
				throw ConfigError(fmt::format("transition row {} has an entry outside [0,1]", j));
			sum += p;
			cum.push_back(sum);
		}
		if (std::abs(sum - 1.0) > mass_tolerance)
			throw ConfigError(fmt::format("transition row {} sums to {} instead of 1", j, sum));
		cumulative_.push_back(std::move(cum));
	}
}

std::size_t CostChain::sample_next(std::size_t from, Rng& rng) const
{
	return sample_cumulative(cumulative_.at(from), rng);
}

ArrivalDistribution::ArrivalDistribution(std::vector<ArrivalOutcome> outcomes)
{
	std::map<std::pair<int, int>, double> merged;
	for (const auto& o : outcomes) {
		const auto& j = o.job;
		if (!(o.probability >= 0.0) || !std::isfinite(o.probability))
			throw ConfigError("arrival probabilities must be finite and nonnegative");
		if (j.lead_time < 0 || j.remaining_work < 0)
			throw ConfigError("arrival (T,B) must be nonnegative");
		if (j.lead_time == 0 && j.remaining_work != 0)
			throw ConfigError("arrival with T=0 must have B=0");
		if (j.lead_time >= 1 && j.remaining_work < 1)
			throw ConfigError(fmt::format("arrival ({},{}) carries no work", j.lead_time, j.remaining_work));
		merged[{j.lead_time, j.remaining_work}] += o.probability;
	}
	double total = 0.0;
	for (const auto& [key, p] : merged)
		total += p;
	if (std::abs(total - 1.0) > mass_tolerance)
		throw ConfigError(fmt::format("arrival distribution sums to {} instead of 1", total));

	double cum = 0.0;
	double job_cum = 0.0;
	for (const auto& [key, p] : merged) {
		if (p <= 0.0)
			continue;
		const JobState job{key.first, key.second};
		outcomes_.push_back({job, p});
		cum += p;
		cumulative_.push_back(cum);
		if (job.empty()) {
			empty_probability_ = p;
		} else {
			job_cum += p;
			job_cumulative_.push_back(job_cum);
			jobs_.push_back(job);
			max_lead_time_ = std::max(max_lead_time_, job.lead_time);
			max_work_ = std::max(max_work_, job.remaining_work);
		}
	}
}

double ArrivalDistribution::probability(JobState job) const
{
	for (const auto& o : outcomes_)
		if (o.job == job)
			return o.probability;
	return 0.0;
}

double ArrivalDistribution::mean_lead_time_given_job() const
{
	if (jobs_.empty())
		return 0.0;
	double mass = 0.0;
	double acc = 0.0;
	for (const auto& o : outcomes_) {
		if (o.job.empty())
			continue;
		mass += o.probability;
		acc += o.probability * o.job.lead_time;
	}
	return acc / mass;
}

JobState ArrivalDistribution::sample(Rng& rng) const
{
	return outcomes_[sample_cumulative(cumulative_, rng)].job;
}

JobState ArrivalDistribution::sample_job(Rng& rng) const
{
	if (jobs_.empty())
		throw DomainError("arrival distribution has no job outcomes");
	return jobs_[sample_cumulative(job_cumulative_, rng)];
}

PenaltyFunction::PenaltyFunction(Kind kind, double kappa) : kind_(kind), kappa_(kappa)
{
	if (kind == Kind::tabulated)
		throw ConfigError("tabulated penalty needs a table");
	if (!(kappa >= 0.0) || !std::isfinite(kappa))
		throw ConfigError("penalty coefficient must be finite and nonnegative");
}

PenaltyFunction::PenaltyFunction(std::vector<double> table)
	: kind_(Kind::tabulated), table_(std::move(table))
{
	if (table_.empty() || table_[0] != 0.0)
		throw ConfigError("tabulated penalty must start with F(0)=0");
	for (std::size_t b = 1; b < table_.size(); ++b) {
		if (!std::isfinite(table_[b]) || table_[b] < table_[b - 1])
			throw ConfigError("tabulated penalty must be finite and nondecreasing");
		if (b >= 2 && (table_[b] - table_[b - 1]) < (table_[b - 1] - table_[b - 2]) - 1e-12)
			throw ConfigError("tabulated penalty must be convex");
	}
}

int PenaltyFunction::domain_limit() const noexcept
{
	if (kind_ == Kind::tabulated)
		return static_cast<int>(table_.size()) - 1;
	return std::numeric_limits<int>::max();
}

double PenaltyFunction::operator()(int unfinished) const
{
	if (unfinished < 0)
		throw DomainError("penalty evaluated at negative workload");
	switch (kind_) {
	case Kind::quadratic:
		return kappa_ * static_cast<double>(unfinished) * static_cast<double>(unfinished);
	case Kind::linear:
		return kappa_ * static_cast<double>(unfinished);
	case Kind::tabulated:
		if (static_cast<std::size_t>(unfinished) >= table_.size())
			throw DomainError(fmt::format("tabulated penalty undefined at B={}", unfinished));
		return table_[static_cast<std::size_t>(unfinished)];
	}
	return 0.0;
}

std::string to_string(PenaltyFunction::Kind kind)
{
	switch (kind) {
	case PenaltyFunction::Kind::quadratic: return "quadratic";
	case PenaltyFunction::Kind::linear: return "linear";
	case PenaltyFunction::Kind::tabulated: return "tabulated";
	}
	return "?";
}

PenaltyFunction::Kind penalty_kind_from_string(const std::string& name)
{
	if (name == "quadratic")
		return PenaltyFunction::Kind::quadratic;
	if (name == "linear")
		return PenaltyFunction::Kind::linear;
	if (name == "tabulated")
		return PenaltyFunction::Kind::tabulated;
	throw ConfigError("unknown penalty kind '" + name + "'");
}

void ProblemSpec::validate() const
{
	if (n < 1)
		throw ConfigError("n must be at least 1");
	if (m < 1)
		throw ConfigError("m must be at least 1");
	if (!(beta > 0.0 && beta < 1.0))
		throw ConfigError("beta must lie in (0,1)");
	if (penalty.domain_limit() < max_work())
		throw ConfigError("penalty table does not cover the maximum workload");
}

int Action::count() const noexcept
{
	return static_cast<int>(std::count(active.begin(), active.end(), std::uint8_t{1}));
}

JobState step_job(JobState job, int active, const ArrivalDistribution& arrivals, Rng& rng)
{
	if (job.lead_time > 1)
		return {job.lead_time - 1, std::max(job.remaining_work - active, 0)};
	return arrivals.sample(rng);
}

double reward(JobState job, double cost, int active, const PenaltyFunction& penalty)
{
	if (job.remaining_work <= 0 || job.lead_time <= 0)
		return 0.0;
	const double processing = (1.0 - cost) * active;
	if (job.lead_time == 1)
		return processing - penalty(job.remaining_work - active);
	return processing;
}

std::size_t step_cost(std::size_t cost_index, const CostChain& chain, Rng& rng)
{
	return chain.sample_next(cost_index, rng);
}

namespace {

double checked_slot_reward(const SystemState& state, const Action& action, const ProblemSpec& spec)
{
	if (action.active.size() != state.jobs.size())
		throw InvalidArgument("action length differs from the number of positions");
	if (action.count() > spec.m)
		throw CapacityViolation(fmt::format("{} positions active with capacity {}", action.count(), spec.m));
	const double c = spec.costs.cost(state.cost_index);
	double total = 0.0;
	for (std::size_t i = 0; i < state.jobs.size(); ++i)
		total += reward(state.jobs[i], c, action.active[i], spec.penalty);
	return total;
}

} // namespace

StepResult system_step(const SystemState& state, const Action& action, const ProblemSpec& spec, Rng& rng)
{
	StepResult out;
	out.reward = checked_slot_reward(state, action, spec);
	out.state.jobs.resize(state.jobs.size());
	for (std::size_t i = 0; i < state.jobs.size(); ++i)
		out.state.jobs[i] = step_job(state.jobs[i], action.active[i], spec.arrivals, rng);
	out.state.cost_index = step_cost(state.cost_index, spec.costs, rng);
	return out;
}

StepResult system_step(const SystemState& state, const Action& action, const ProblemSpec& spec,
                       Rng& cost_rng, std::span<Rng> position_rngs)
{
	if (position_rngs.size() != state.jobs.size())
		throw InvalidArgument("one random stream per position is required");
	StepResult out;
	out.reward = checked_slot_reward(state, action, spec);
	out.state.jobs.resize(state.jobs.size());
	for (std::size_t i = 0; i < state.jobs.size(); ++i)
		out.state.jobs[i] = step_job(state.jobs[i], action.active[i], spec.arrivals, position_rngs[i]);
	out.state.cost_index = step_cost(state.cost_index, spec.costs, cost_rng);
	return out;
}

double max_slot_reward(const ProblemSpec& spec)
{
	const double profit = std::max(std::abs(1.0 - spec.costs.min_cost()), std::abs(1.0 - spec.costs.max_cost()));
	return spec.n * (profit + spec.penalty(spec.max_work()));
}

} // namespace dlsched

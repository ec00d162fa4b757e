#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dlsched/core_model.hpp"

namespace dlsched {

/// Dense layout of the single-arm extended state space (T, B, cost index)
/// with T in [0, max_lead], B in [0, max_work]. Rows with T=0 and B>0 are
/// unreachable and hold zeros.
struct ArmGrid {
	int max_lead = 0;
	int max_work = 0;
	std::size_t costs = 1;

	static ArmGrid of(const ProblemSpec& spec)
	{
		return {spec.max_lead_time(), spec.max_work(), spec.costs.size()};
	}

	std::size_t size() const noexcept
	{
		return static_cast<std::size_t>(max_lead + 1) * static_cast<std::size_t>(max_work + 1) * costs;
	}
	friend bool operator==(const ArmGrid&, const ArmGrid&) = default;
	std::size_t at(int lead, int work, std::size_t cost) const noexcept
	{
		return (static_cast<std::size_t>(lead) * static_cast<std::size_t>(max_work + 1) +
		        static_cast<std::size_t>(work)) * costs + cost;
	}
	bool contains(JobState job) const noexcept
	{
		return job.lead_time >= 0 && job.lead_time <= max_lead && job.remaining_work >= 0 &&
		       job.remaining_work <= max_work && (job.lead_time > 0 || job.remaining_work == 0);
	}
};

enum class SubsidySolver {
	/// Howard iteration on the refill values; exact up to round-off.
	policy_iteration,
	/// Plain value iteration over all states from V=0.
	value_iteration,
};

struct SubsidyOptions {
	double tol = 1e-9;
	SubsidySolver solver = SubsidySolver::policy_iteration;
	std::size_t max_iterations = 5'000'000;
};

/// Solution of the single-arm problem in which the passive action earns
/// an extra `subsidy` per slot.
struct SubsidyValueTable {
	double subsidy = 0.0;
	ArmGrid grid;
	std::vector<double> values;
	/// passive minus active continuation value; >= 0 means passive is optimal
	std::vector<double> preference;
	/// V(T,B+1,c) - V(T,B,c), defined for B < max_work
	std::vector<double> difference;
	double residual = 0.0;
	std::size_t iterations = 0;

	double value(int lead, int work, std::size_t cost) const { return values[grid.at(lead, work, cost)]; }
	double value(JobState job, std::size_t cost) const { return value(job.lead_time, job.remaining_work, cost); }
	double preference_at(int lead, int work, std::size_t cost) const
	{
		return preference[grid.at(lead, work, cost)];
	}
	double difference_at(int lead, int work, std::size_t cost) const
	{
		return difference[grid.at(lead, work, cost)];
	}
	bool passive_optimal(int lead, int work, std::size_t cost) const
	{
		return preference_at(lead, work, cost) >= 0.0;
	}
};

SubsidyValueTable subsidy_value_iteration(const ProblemSpec& spec, double subsidy, const SubsidyOptions& options = {});

/// Whittle index under a constant processing cost c0.
double closed_form_index(int lead, int work, double cost, double beta, const PenaltyFunction& penalty);

/// Bracket wide enough for every index of `spec`.
std::pair<double, double> default_bracket(const ProblemSpec& spec);

/// Smallest subsidy at which passivity is optimal at (job, cost), to within
/// `tol`. Throws BracketError when [lo, hi] does not contain the switch.
double index_by_bisection(const ProblemSpec& spec, JobState job, std::size_t cost_index, double lo, double hi,
                          double tol = 1e-7, const SubsidyOptions& options = {});

/// Optimal action (true = active, ties passive) at one state for each
/// subsidy of a strictly increasing grid.
std::vector<bool> single_crossing_probe(const ProblemSpec& spec, JobState job, std::size_t cost_index,
                                        std::span<const double> subsidies, const SubsidyOptions& options = {});

enum class IndexMethod { automatic, closed_form, bisection };

std::string to_string(IndexMethod method);
IndexMethod index_method_from_string(const std::string& name);

class IndexTable {
public:
	IndexTable() = default;
	IndexTable(ArmGrid grid, std::vector<double> indices, std::string spec_hash, double tolerance,
	           IndexMethod method);

	const ArmGrid& grid() const noexcept { return grid_; }
	const std::vector<double>& indices() const noexcept { return indices_; }
	const std::string& spec_hash() const noexcept { return spec_hash_; }
	double tolerance() const noexcept { return tolerance_; }
	IndexMethod method() const noexcept { return method_; }

	double at(int lead, int work, std::size_t cost) const { return indices_[grid_.at(lead, work, cost)]; }
	/// Index of a position; empty and finished positions score 0 like the
	/// dummy arms.
	double index(JobState job, std::size_t cost) const;

	friend bool operator==(const IndexTable&, const IndexTable&) = default;

private:
	ArmGrid grid_;
	std::vector<double> indices_;
	std::string spec_hash_;
	double tolerance_ = 0.0;
	IndexMethod method_ = IndexMethod::closed_form;
};

struct IndexBuildOptions {
	double tol = 1e-7;
	IndexMethod method = IndexMethod::automatic;
	unsigned threads = 1;
	SubsidyOptions subsidy{};
};

IndexTable build_index_table(const ProblemSpec& spec, const IndexBuildOptions& options = {});

} // namespace dlsched

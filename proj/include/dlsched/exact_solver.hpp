#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dlsched/core_model.hpp"
#include "dlsched/whittle_index.hpp"

namespace dlsched {

struct JointSolveOptions {
	/// Target sup-norm distance of the returned values from the optimum.
	double tol = 1e-9;
	std::size_t max_states = 5'000'000;
	std::size_t max_iterations = 1'000'000;
	unsigned threads = 1;
};

/// Optimal values of the capacity-constrained joint problem over every
/// combination of position states and the cost state.
class JointValueTable {
public:
	/// Throws DomainError for a state outside the solved grid.
	double value(const SystemState& state) const;
	/// Best action at `state`; among equally good actions the one with the
	/// smallest bitmask over positions wins.
	Action greedy(const SystemState& state) const;

	std::size_t state_count() const noexcept { return values_.size(); }
	double tolerance() const noexcept { return tol_; }
	double residual() const noexcept { return residual_; }
	std::size_t iterations() const noexcept { return iterations_; }
	int positions() const noexcept { return n_; }

	std::size_t encode(const SystemState& state) const;

private:
	friend JointValueTable solve_joint(const ProblemSpec&, const JointSolveOptions&);

	int n_ = 0;
	int max_lead_ = 0;
	int max_work_ = 0;
	std::size_t costs_ = 1;
	std::size_t per_position_ = 1;
	std::vector<double> values_;
	std::vector<std::uint32_t> greedy_;
	double tol_ = 0.0;
	double residual_ = 0.0;
	std::size_t iterations_ = 0;
};

/// Number of joint states K * (1 + T(B+1))^N for the problem's state grid.
double joint_state_count(const ProblemSpec& spec);

/// Value iteration over the full product space. Throws StateSpaceTooLarge
/// above options.max_states and NonConvergence if the sweep budget runs out.
JointValueTable solve_joint(const ProblemSpec& spec, const JointSolveOptions& options = {});

/// Subsidy grid of `points` evenly spaced values on [0, max index + 1].
std::vector<double> default_dual_grid(const IndexTable& table, std::size_t points = 200);

struct DualBound {
	double value = 0.0;
	double subsidy = 0.0;
};

/// Upper bound on the optimal value at `initial` obtained by relaxing the
/// per-slot capacity to a discounted average and pricing it with subsidy
/// nu. The minimum over the grid is refined by golden-section search on
/// the bracketing grid cell when `refine` is set.
DualBound lagrangian_upper_bound(const ProblemSpec& spec, const SystemState& initial, std::span<const double> grid,
                                 bool refine = true, const SubsidyOptions& options = {});

/// The dual objective at a single subsidy.
double dual_objective(const ProblemSpec& spec, const SystemState& initial, double subsidy,
                      const SubsidyOptions& options = {});

} // namespace dlsched

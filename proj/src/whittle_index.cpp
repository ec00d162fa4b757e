#include "dlsched/whittle_index.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "dlsched/config.hpp"
#include "dlsched/error.hpp"
#include "dlsched/parallel.hpp"

namespace dlsched {

namespace {

// Flattened single-arm dynamics. Lead time falls by one every slot, so
// every value is a finite backward recursion in T once the expected
// value of a refill, W_c = sum_k P_ck sum_s Q(s) V(s,k), is known.
struct ArmModel {
	ArmGrid grid;
	double beta = 0.0;
	std::vector<double> profit;              // 1 - c_j
	std::vector<std::vector<double>> P;
	std::vector<std::pair<JobState, double>> refill;
	std::vector<double> penalty;             // F(0..max_work)

	explicit ArmModel(const ProblemSpec& spec) : grid(ArmGrid::of(spec)), beta(spec.beta), P(spec.costs.transition())
	{
		for (double c : spec.costs.states())
			profit.push_back(1.0 - c);
		for (const auto& o : spec.arrivals.outcomes())
			refill.emplace_back(o.job, o.probability);
		for (int b = 0; b <= grid.max_work; ++b)
			penalty.push_back(spec.penalty(b));
	}

	std::size_t K() const { return grid.costs; }

	// Immediate rewards of the two actions at a valid state, subsidy excluded.
	std::pair<double, double> rewards(int lead, int work, std::size_t c) const
	{
		if (lead == 0 || work == 0)
			return {0.0, 0.0};
		if (lead == 1)
			return {-penalty[work], profit[c] - penalty[work - 1]};
		return {0.0, profit[c]};
	}

	double expected(const std::vector<double>& V, int lead, int work, std::size_t c) const
	{
		double acc = 0.0;
		for (std::size_t k = 0; k < K(); ++k)
			acc += P[c][k] * V[grid.at(lead, work, k)];
		return acc;
	}

	std::vector<double> refill_value(const std::vector<double>& V) const
	{
		std::vector<double> inner(K(), 0.0);
		for (std::size_t k = 0; k < K(); ++k)
			for (const auto& [job, q] : refill)
				inner[k] += q * V[grid.at(job.lead_time, job.remaining_work, k)];
		std::vector<double> W(K(), 0.0);
		for (std::size_t c = 0; c < K(); ++c)
			for (std::size_t k = 0; k < K(); ++k)
				W[c] += P[c][k] * inner[k];
		return W;
	}

	// Continuation values (passive, active) at a state, given a value table
	// for lead time T-1 and refill values W.
	std::pair<double, double> q_values(const std::vector<double>& V, const std::vector<double>& W, double nu,
	                                   int lead, int work, std::size_t c) const
	{
		const auto [r0, r1] = rewards(lead, work, c);
		if (lead <= 1)
			return {r0 + nu + beta * W[c], r1 + beta * W[c]};
		return {r0 + nu + beta * expected(V, lead - 1, work, c),
		        r1 + beta * expected(V, lead - 1, std::max(work - 1, 0), c)};
	}

	template <class Fn>
	void for_each_state(Fn&& fn) const
	{
		for (int t = 0; t <= grid.max_lead; ++t)
			for (int b = 0; b <= (t == 0 ? 0 : grid.max_work); ++b)
				for (std::size_t c = 0; c < K(); ++c)
					fn(t, b, c);
	}
};

// Greedy backward pass: V and preference given refill values W.
void greedy_pass(const ArmModel& m, double nu, const std::vector<double>& W, std::vector<double>& V,
                 std::vector<double>* preference)
{
	m.for_each_state([&](int t, int b, std::size_t c) {
		const auto [passive, active] = m.q_values(V, W, nu, t, b, c);
		const auto s = m.grid.at(t, b, c);
		V[s] = std::max(passive, active);
		if (preference)
			(*preference)[s] = passive - active;
	});
}

struct Solution {
	std::vector<double> W;
	std::size_t iterations = 0;
};

Solution solve_policy_iteration(const ArmModel& m, double nu, const SubsidyOptions& options)
{
	const auto S = m.grid.size();
	const auto K = m.K();
	std::vector<double> V(S, 0.0);
	std::vector<std::uint8_t> active(S, 0);
	std::vector<double> W(K, 0.0);

	greedy_pass(m, nu, W, V, nullptr);
	m.for_each_state([&](int t, int b, std::size_t c) {
		const auto [passive, act] = m.q_values(V, W, nu, t, b, c);
		active[m.grid.at(t, b, c)] = act > passive;
	});

	std::vector<double> alpha(S, 0.0);
	std::vector<double> gamma(S * K, 0.0);
	for (std::size_t iter = 1; iter <= options.max_iterations; ++iter) {
		// Policy evaluation: V(s) = alpha(s) + gamma(s) . W
		m.for_each_state([&](int t, int b, std::size_t c) {
			const auto s = m.grid.at(t, b, c);
			const auto [r0, r1] = m.rewards(t, b, c);
			const bool a = active[s];
			alpha[s] = a ? r1 : r0 + nu;
			double* g = &gamma[s * K];
			std::fill(g, g + K, 0.0);
			if (t <= 1) {
				g[c] = m.beta;
				return;
			}
			const int next_work = a ? std::max(b - 1, 0) : b;
			for (std::size_t k = 0; k < K; ++k) {
				const auto s2 = m.grid.at(t - 1, next_work, k);
				const double w = m.beta * m.P[c][k];
				alpha[s] += w * alpha[s2];
				for (std::size_t l = 0; l < K; ++l)
					g[l] += w * gamma[s2 * K + l];
			}
		});
		Eigen::VectorXd a_vec = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
		Eigen::MatrixXd G = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
		for (std::size_t k = 0; k < K; ++k)
			for (const auto& [job, q] : m.refill) {
				const auto s = m.grid.at(job.lead_time, job.remaining_work, k);
				a_vec(static_cast<Eigen::Index>(k)) += q * alpha[s];
				for (std::size_t l = 0; l < K; ++l)
					G(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) += q * gamma[s * K + l];
			}
		Eigen::MatrixXd P(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
		for (std::size_t c = 0; c < K; ++c)
			for (std::size_t k = 0; k < K; ++k)
				P(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) = m.P[c][k];
		const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(K),
		                                                      static_cast<Eigen::Index>(K)) - P * G;
		const Eigen::VectorXd sol = lhs.partialPivLu().solve(P * a_vec);
		for (std::size_t k = 0; k < K; ++k)
			W[k] = sol(static_cast<Eigen::Index>(k));

		for (std::size_t s = 0; s < S; ++s) {
			V[s] = alpha[s];
			for (std::size_t l = 0; l < K; ++l)
				V[s] += gamma[s * K + l] * W[l];
		}

		// Improvement against the evaluated policy's values; switch only on
		// a strict gain so that ties cannot cycle.
		bool changed = false;
		m.for_each_state([&](int t, int b, std::size_t c) {
			const auto s = m.grid.at(t, b, c);
			const auto [passive, act] = m.q_values(V, W, nu, t, b, c);
			const double slack = 1e-12 * (1.0 + std::abs(V[s]));
			if (active[s] && passive > act + slack) {
				active[s] = 0;
				changed = true;
			} else if (!active[s] && act > passive + slack) {
				active[s] = 1;
				changed = true;
			}
		});
		if (!changed)
			return {std::move(W), iter};
	}
	throw NonConvergence(fmt::format("policy iteration did not settle within {} iterations", options.max_iterations));
}

} // namespace

SubsidyValueTable subsidy_value_iteration(const ProblemSpec& spec, double subsidy, const SubsidyOptions& options)
{
	if (!(options.tol > 0.0))
		throw InvalidArgument("tolerance must be positive");
	const ArmModel m(spec);
	SubsidyValueTable out;
	out.subsidy = subsidy;
	out.grid = m.grid;
	out.values.assign(m.grid.size(), 0.0);
	out.preference.assign(m.grid.size(), 0.0);
	out.difference.assign(m.grid.size(), 0.0);

	std::vector<double> W(m.K(), 0.0);
	if (options.solver == SubsidySolver::policy_iteration) {
		auto sol = solve_policy_iteration(m, subsidy, options);
		W = std::move(sol.W);
		out.iterations = sol.iterations;
		greedy_pass(m, subsidy, W, out.values, &out.preference);
		// Polish with refill updates until the contraction rule is met.
		for (std::size_t extra = 0;; ++extra) {
			const auto W2 = m.refill_value(out.values);
			double delta = 0.0;
			for (std::size_t c = 0; c < m.K(); ++c)
				delta = std::max(delta, std::abs(W2[c] - W[c]));
			out.residual = m.beta * delta;
			if (out.residual <= options.tol)
				break;
			if (extra >= options.max_iterations)
				throw NonConvergence("refill polishing did not converge");
			W = W2;
			greedy_pass(m, subsidy, W, out.values, &out.preference);
			++out.iterations;
		}
	} else {
		std::vector<double> V(m.grid.size(), 0.0);
		std::vector<double> next(m.grid.size(), 0.0);
		for (std::size_t iter = 1;; ++iter) {
			if (iter > options.max_iterations)
				throw NonConvergence(fmt::format("value iteration exceeded {} sweeps", options.max_iterations));
			W = m.refill_value(V);
			double delta = 0.0;
			m.for_each_state([&](int t, int b, std::size_t c) {
				const auto s = m.grid.at(t, b, c);
				const auto [passive, active] = m.q_values(V, W, subsidy, t, b, c);
				next[s] = std::max(passive, active);
				out.preference[s] = passive - active;
				delta = std::max(delta, std::abs(next[s] - V[s]));
			});
			V.swap(next);
			out.iterations = iter;
			out.residual = delta;
			if (delta <= options.tol)
				break;
		}
		out.values = std::move(V);
	}

	m.for_each_state([&](int t, int b, std::size_t c) {
		if (t >= 1 && b < m.grid.max_work)
			out.difference[m.grid.at(t, b, c)] = out.values[m.grid.at(t, b + 1, c)] - out.values[m.grid.at(t, b, c)];
	});
	return out;
}

double closed_form_index(int lead, int work, double cost, double beta, const PenaltyFunction& penalty)
{
	if (lead <= 0 || work <= 0)
		return 0.0;
	const double profit = 1.0 - cost;
	if (work <= lead - 1)
		return profit;
	const double weight = std::pow(beta, lead - 1);
	return profit + weight * (penalty(work - lead + 1) - penalty(work - lead));
}

std::pair<double, double> default_bracket(const ProblemSpec& spec)
{
	double profit = 0.0;
	for (double c : spec.costs.states())
		profit = std::max(profit, std::abs(1.0 - c));
	const double half = 2.0 + spec.penalty(spec.max_work()) + profit;
	return {-half, half};
}

namespace {

double preference_at(const ProblemSpec& spec, JobState job, std::size_t cost_index, double nu,
                     const SubsidyOptions& options)
{
	return subsidy_value_iteration(spec, nu, options).preference_at(job.lead_time, job.remaining_work, cost_index);
}

} // namespace

double index_by_bisection(const ProblemSpec& spec, JobState job, std::size_t cost_index, double lo, double hi,
                          double tol, const SubsidyOptions& options)
{
	const auto grid = ArmGrid::of(spec);
	if (!grid.contains(job) || cost_index >= grid.costs)
		throw InvalidArgument(fmt::format("state ({},{},{}) outside the arm's state space", job.lead_time,
		                                  job.remaining_work, cost_index));
	if (job.remaining_work == 0)
		return 0.0;
	if (!(lo < hi) || !(tol > 0.0))
		throw InvalidArgument("bisection needs lo < hi and tol > 0");

	// The preference grows with slope at least (1 - beta) in the subsidy, so
	// accepting preference >= -(1 - beta) tol moves the root by at most tol.
	const double slack = (1.0 - spec.beta) * tol;
	auto passive = [&](double nu) { return preference_at(spec, job, cost_index, nu, options) >= -slack; };
	if (passive(lo) || !passive(hi))
		throw BracketError(fmt::format("no active/passive switch in [{}, {}] at ({},{},{})", lo, hi, job.lead_time,
		                               job.remaining_work, cost_index));
	while (hi - lo > tol) {
		const double mid = 0.5 * (lo + hi);
		if (passive(mid))
			hi = mid;
		else
			lo = mid;
	}
	return hi;
}

std::vector<bool> single_crossing_probe(const ProblemSpec& spec, JobState job, std::size_t cost_index,
                                        std::span<const double> subsidies, const SubsidyOptions& options)
{
	for (std::size_t i = 1; i < subsidies.size(); ++i)
		if (!(subsidies[i] > subsidies[i - 1]))
			throw InvalidArgument("subsidy grid must be strictly increasing");
	std::vector<bool> active;
	active.reserve(subsidies.size());
	for (double nu : subsidies)
		active.push_back(preference_at(spec, job, cost_index, nu, options) < 0.0);
	return active;
}

std::string to_string(IndexMethod method)
{
	switch (method) {
	case IndexMethod::automatic: return "automatic";
	case IndexMethod::closed_form: return "closed_form";
	case IndexMethod::bisection: return "bisection";
	}
	return "?";
}

IndexMethod index_method_from_string(const std::string& name)
{
	if (name == "automatic")
		return IndexMethod::automatic;
	if (name == "closed_form")
		return IndexMethod::closed_form;
	if (name == "bisection")
		return IndexMethod::bisection;
	throw InvalidArgument("unknown index method '" + name + "'");
}

IndexTable::IndexTable(ArmGrid grid, std::vector<double> indices, std::string spec_hash, double tolerance,
                       IndexMethod method)
	: grid_(grid), indices_(std::move(indices)), spec_hash_(std::move(spec_hash)), tolerance_(tolerance),
	  method_(method)
{
	if (indices_.size() != grid_.size())
		throw InvalidArgument("index table size does not match its grid");
}

double IndexTable::index(JobState job, std::size_t cost) const
{
	if (job.remaining_work <= 0 || job.lead_time <= 0)
		return 0.0;
	if (!grid_.contains(job) || cost >= grid_.costs)
		throw DomainError(fmt::format("no index for state ({},{},{})", job.lead_time, job.remaining_work, cost));
	return at(job.lead_time, job.remaining_work, cost);
}

IndexTable build_index_table(const ProblemSpec& spec, const IndexBuildOptions& options)
{
	spec.validate();
	const auto grid = ArmGrid::of(spec);
	IndexMethod method = options.method;
	if (method == IndexMethod::automatic)
		method = grid.costs == 1 ? IndexMethod::closed_form : IndexMethod::bisection;
	if (method == IndexMethod::closed_form && grid.costs != 1)
		throw MethodInvalid("closed-form indices need a single cost state");

	std::vector<double> indices(grid.size(), 0.0);
	std::vector<std::size_t> cells;
	for (int t = 1; t <= grid.max_lead; ++t)
		for (int b = 1; b <= grid.max_work; ++b)
			for (std::size_t c = 0; c < grid.costs; ++c)
				cells.push_back(grid.at(t, b, c));

	const auto bracket = default_bracket(spec);
	parallel_for(cells.size(), options.threads, [&](std::size_t i) {
		const auto s = cells[i];
		const auto c = s % grid.costs;
		const auto tb = s / grid.costs;
		const int t = static_cast<int>(tb / static_cast<std::size_t>(grid.max_work + 1));
		const int b = static_cast<int>(tb % static_cast<std::size_t>(grid.max_work + 1));
		if (method == IndexMethod::closed_form) {
			indices[s] = closed_form_index(t, b, spec.costs.cost(0), spec.beta, spec.penalty);
			return;
		}
		auto [lo, hi] = bracket;
		for (int widen = 0;; ++widen) {
			try {
				indices[s] = index_by_bisection(spec, {t, b}, c, lo, hi, options.tol, options.subsidy);
				return;
			} catch (const BracketError&) {
				if (widen >= 8)
					throw;
				lo *= 2.0;
				hi *= 2.0;
			}
		}
	});
	return IndexTable(grid, std::move(indices), arm_hash(spec), options.tol, method);
}

} // namespace dlsched

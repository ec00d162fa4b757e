#include "dlsched/exact_solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <fmt/format.h>

#include "dlsched/error.hpp"
#include "dlsched/parallel.hpp"

namespace dlsched {

namespace {

// Per-position encoding: code 0 is the empty position, and (T,B) with T>=1
// maps to 1 + (T-1)(Bmax+1) + B. After a decision the same codes describe
// the post-decision position, with code 0 standing for "vacated, waiting
// for a fresh arrival".
struct PositionCodec {
	int max_lead = 0;
	int max_work = 0;

	std::size_t size() const { return 1 + static_cast<std::size_t>(max_lead) * static_cast<std::size_t>(max_work + 1); }

	std::size_t code(JobState job) const
	{
		if (job.lead_time == 0)
			return 0;
		return 1 + static_cast<std::size_t>(job.lead_time - 1) * static_cast<std::size_t>(max_work + 1) +
		       static_cast<std::size_t>(job.remaining_work);
	}

	JobState job(std::size_t code) const
	{
		if (code == 0)
			return {};
		const auto k = code - 1;
		return {static_cast<int>(k / static_cast<std::size_t>(max_work + 1)) + 1,
		        static_cast<int>(k % static_cast<std::size_t>(max_work + 1))};
	}

	bool valid(JobState job) const
	{
		if (job.lead_time == 0)
			return job.remaining_work == 0;
		return job.lead_time > 0 && job.lead_time <= max_lead && job.remaining_work >= 0 &&
		       job.remaining_work <= max_work;
	}
};

std::size_t post_code(const PositionCodec& codec, JobState job, int active)
{
	if (job.lead_time <= 1)
		return 0;
	return codec.code({job.lead_time - 1, std::max(job.remaining_work - active, 0)});
}

} // namespace

double joint_state_count(const ProblemSpec& spec)
{
	const PositionCodec codec{spec.max_lead_time(), spec.max_work()};
	return static_cast<double>(spec.costs.size()) * std::pow(static_cast<double>(codec.size()), spec.n);
}

std::size_t JointValueTable::encode(const SystemState& state) const
{
	const PositionCodec codec{max_lead_, max_work_};
	if (state.jobs.size() != static_cast<std::size_t>(n_))
		throw DomainError(fmt::format("state has {} positions, table has {}", state.jobs.size(), n_));
	if (state.cost_index >= costs_)
		throw DomainError("cost index outside the solved chain");
	std::size_t idx = 0;
	for (std::size_t i = state.jobs.size(); i-- > 0;) {
		if (!codec.valid(state.jobs[i]))
			throw DomainError(fmt::format("job ({},{}) outside the solved grid", state.jobs[i].lead_time,
			                              state.jobs[i].remaining_work));
		idx = idx * per_position_ + codec.code(state.jobs[i]);
	}
	return idx * costs_ + state.cost_index;
}

double JointValueTable::value(const SystemState& state) const
{
	return values_[encode(state)];
}

Action JointValueTable::greedy(const SystemState& state) const
{
	const auto mask = greedy_[encode(state)];
	Action action = Action::none(static_cast<std::size_t>(n_));
	for (int i = 0; i < n_; ++i)
		action.active[static_cast<std::size_t>(i)] = (mask >> i) & 1u;
	return action;
}

JointValueTable solve_joint(const ProblemSpec& spec, const JointSolveOptions& options)
{
	spec.validate();
	const double count = joint_state_count(spec);
	if (count > static_cast<double>(options.max_states))
		throw StateSpaceTooLarge(fmt::format("{:.0f} joint states exceed the cap of {}", count, options.max_states));
	if (spec.n > 30)
		throw StateSpaceTooLarge("too many positions for subset enumeration");

	const PositionCodec codec{spec.max_lead_time(), spec.max_work()};
	const std::size_t p = codec.size();
	const std::size_t K = spec.costs.size();
	const auto n = static_cast<std::size_t>(spec.n);
	const auto S = static_cast<std::size_t>(count);
	const double beta = spec.beta;

	// Per code and action: post-decision code and reward for each cost state.
	std::vector<std::size_t> post(p * 2);
	std::vector<double> gain(p * 2 * K);
	std::vector<std::uint8_t> unfinished(p);
	for (std::size_t code = 0; code < p; ++code) {
		const JobState job = codec.job(code);
		unfinished[code] = job.unfinished();
		for (int a = 0; a < 2; ++a) {
			post[code * 2 + static_cast<std::size_t>(a)] = post_code(codec, job, a);
			for (std::size_t c = 0; c < K; ++c)
				gain[(code * 2 + static_cast<std::size_t>(a)) * K + c] =
					reward(job, spec.costs.cost(c), a, spec.penalty);
		}
	}
	std::vector<std::size_t> stride(n);
	for (std::size_t i = 0; i < n; ++i)
		stride[i] = i == 0 ? K : stride[i - 1] * p;
	std::vector<std::pair<std::size_t, double>> refill;
	for (const auto& o : spec.arrivals.outcomes())
		refill.emplace_back(codec.code(o.job), o.probability);

	// Masks of at most M positions, in increasing order.
	std::vector<std::uint32_t> masks;
	for (std::uint32_t mask = 0; mask < (1u << n); ++mask)
		if (std::popcount(mask) <= spec.m)
			masks.push_back(mask);

	auto decode = [&](std::size_t idx, std::vector<std::size_t>& codes) {
		idx /= K;
		for (std::size_t i = 0; i < n; ++i) {
			codes[i] = idx % p;
			idx /= p;
		}
	};

	// H(y, c) = sum_k P_ck E_Q[G(fill(y), k)] for post-decision states y.
	std::vector<double> H(S);
	auto expectation = [&](const std::vector<double>& G) {
		H = G;
		std::vector<std::size_t> codes(n);
		for (std::size_t i = 0; i < n; ++i) {
			for (std::size_t idx = 0; idx < S; ++idx) {
				if ((idx / stride[i]) % p != 0)
					continue;
				double acc = 0.0;
				for (const auto& [code, q] : refill)
					acc += q * H[idx + code * stride[i]];
				H[idx] = acc;
			}
		}
		std::vector<double> row(K);
		for (std::size_t base = 0; base < S; base += K) {
			for (std::size_t c = 0; c < K; ++c) {
				double acc = 0.0;
				for (std::size_t k = 0; k < K; ++k)
					acc += spec.costs.probability(c, k) * H[base + k];
				row[c] = acc;
			}
			std::copy(row.begin(), row.end(), H.begin() + static_cast<std::ptrdiff_t>(base));
		}
	};

	auto sweep = [&](std::vector<double>& out, std::vector<std::uint32_t>* best_masks) {
		const std::size_t chunk = 4096;
		const std::size_t chunks = (S + chunk - 1) / chunk;
		parallel_for(chunks, options.threads, [&](std::size_t ch) {
			std::vector<std::size_t> codes(n);
			const std::size_t end = std::min(S, (ch + 1) * chunk);
			for (std::size_t idx = ch * chunk; idx < end; ++idx) {
				decode(idx, codes);
				const std::size_t c = idx % K;
				std::uint32_t allowed = 0;
				for (std::size_t i = 0; i < n; ++i)
					if (unfinished[codes[i]])
						allowed |= 1u << i;
				double best = 0.0;
				std::uint32_t best_mask = 0;
				bool first = true;
				for (const auto mask : masks) {
					if (mask & ~allowed)
						continue;
					double r = 0.0;
					std::size_t y = c;
					for (std::size_t i = 0; i < n; ++i) {
						const std::size_t a = (mask >> i) & 1u;
						r += gain[(codes[i] * 2 + a) * K + c];
						y += post[codes[i] * 2 + a] * stride[i];
					}
					const double v = r + beta * H[y];
					if (first || v > best + 1e-12 * (1.0 + std::abs(best))) {
						best = v;
						best_mask = mask;
						first = false;
					}
				}
				out[idx] = best;
				if (best_masks)
					(*best_masks)[idx] = best_mask;
			}
		});
	};

	JointValueTable table;
	table.n_ = spec.n;
	table.max_lead_ = codec.max_lead;
	table.max_work_ = codec.max_work;
	table.costs_ = K;
	table.per_position_ = p;
	table.tol_ = options.tol;

	std::vector<double> G(S, 0.0), next(S, 0.0);
	// Stopping at sup|G' - G| <= tol (1-beta)/beta puts G' within tol of the
	// fixed point.
	const double stop = options.tol * (1.0 - beta) / beta;
	bool converged = false;
	for (std::size_t iter = 1; iter <= options.max_iterations; ++iter) {
		expectation(G);
		sweep(next, nullptr);
		double diff = 0.0;
		for (std::size_t s = 0; s < S; ++s)
			diff = std::max(diff, std::abs(next[s] - G[s]));
		G.swap(next);
		table.iterations_ = iter;
		table.residual_ = diff;
		if (diff <= stop) {
			converged = true;
			break;
		}
	}
	if (!converged)
		throw NonConvergence(fmt::format("joint value iteration did not reach {} in {} sweeps", options.tol,
		                                 options.max_iterations));

	table.greedy_.assign(S, 0);
	expectation(G);
	sweep(next, &table.greedy_);
	table.values_ = std::move(G);
	return table;
}

std::vector<double> default_dual_grid(const IndexTable& table, std::size_t points)
{
	double top = 0.0;
	for (double v : table.indices())
		top = std::max(top, v);
	top += 1.0;
	std::vector<double> grid(std::max<std::size_t>(points, 2));
	for (std::size_t i = 0; i < grid.size(); ++i)
		grid[i] = top * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
	return grid;
}

double dual_objective(const ProblemSpec& spec, const SystemState& initial, double subsidy,
                      const SubsidyOptions& options)
{
	if (initial.jobs.size() != static_cast<std::size_t>(spec.n))
		throw InvalidArgument("initial state has the wrong number of positions");
	const auto arm = subsidy_value_iteration(spec, subsidy, options);
	double total = 0.0;
	for (const auto& job : initial.jobs) {
		if (!arm.grid.contains(job))
			throw DomainError(fmt::format("job ({},{}) outside the arm grid", job.lead_time, job.remaining_work));
		total += arm.value(job, initial.cost_index);
	}
	const double horizon = 1.0 / (1.0 - spec.beta);
	return total + spec.m * std::max(subsidy, 0.0) * horizon - subsidy * spec.n * horizon;
}

DualBound lagrangian_upper_bound(const ProblemSpec& spec, const SystemState& initial, std::span<const double> grid,
                                 bool refine, const SubsidyOptions& options)
{
	if (grid.empty())
		throw InvalidArgument("empty subsidy grid");
	std::vector<double> values(grid.size());
	for (std::size_t i = 0; i < grid.size(); ++i)
		values[i] = dual_objective(spec, initial, grid[i], options);
	const auto k = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
	DualBound best{values[k], grid[k]};
	if (!refine || grid.size() < 2)
		return best;

	// The dual is convex in the subsidy, so its minimum lies between the
	// neighbours of the best grid point.
	double lo = grid[k == 0 ? 0 : k - 1];
	double hi = grid[std::min(k + 1, grid.size() - 1)];
	const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
	double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
	double f1 = dual_objective(spec, initial, x1, options);
	double f2 = dual_objective(spec, initial, x2, options);
	for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
		if (f1 <= f2) {
			hi = x2;
			x2 = x1;
			f2 = f1;
			x1 = hi - phi * (hi - lo);
			f1 = dual_objective(spec, initial, x1, options);
		} else {
			lo = x1;
			x1 = x2;
			f1 = f2;
			x2 = lo + phi * (hi - lo);
			f2 = dual_objective(spec, initial, x2, options);
		}
	}
	if (f1 < best.value)
		best = {f1, x1};
	if (f2 < best.value)
		best = {f2, x2};
	return best;
}

} // namespace dlsched

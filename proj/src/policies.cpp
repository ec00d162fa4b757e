#include "dlsched/policies.hpp"

#include <algorithm>
#include <cmath>

#include "dlsched/config.hpp"
#include "dlsched/error.hpp"

namespace dlsched {

namespace {

constexpr double tie_tolerance = 1e-9;

struct Keyed {
	Candidate c;
	std::uint64_t shuffle = 0;
};

std::vector<Keyed> with_random_keys(std::vector<Candidate> candidates, Rng& rng)
{
	std::vector<Keyed> out;
	out.reserve(candidates.size());
	for (const auto& c : candidates)
		out.push_back({c, rng()});
	return out;
}

Action activate_prefix(const std::vector<Keyed>& ordered, std::size_t positions, int capacity, bool positive_only)
{
	Action action = Action::none(positions);
	int used = 0;
	for (const auto& k : ordered) {
		if (used >= capacity)
			break;
		if (positive_only && !(k.c.index > 0.0))
			break;
		action.active[k.c.position] = 1;
		++used;
	}
	return action;
}

} // namespace

std::string to_string(PolicyKind kind)
{
	switch (kind) {
	case PolicyKind::whittle: return "whittle";
	case PolicyKind::whittle_lllp: return "whittle-lllp";
	case PolicyKind::whittle_llsp: return "whittle-llsp";
	case PolicyKind::edf: return "edf";
	case PolicyKind::llf: return "llf";
	}
	return "?";
}

PolicyKind policy_kind_from_string(const std::string& raw)
{
	std::string name = raw;
	std::replace(name.begin(), name.end(), '_', '-');
	for (auto kind : all_policy_kinds())
		if (to_string(kind) == name)
			return kind;
	throw InvalidArgument("unknown policy '" + raw + "'");
}

const std::vector<PolicyKind>& all_policy_kinds()
{
	static const std::vector<PolicyKind> kinds{PolicyKind::whittle, PolicyKind::whittle_lllp,
	                                           PolicyKind::whittle_llsp, PolicyKind::edf, PolicyKind::llf};
	return kinds;
}

Action lllp_reorder(std::vector<Candidate> candidates, std::size_t positions, int capacity, TieRule rule, Rng& rng)
{
	auto keyed = with_random_keys(std::move(candidates), rng);
	std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
		if (a.c.index != b.c.index)
			return a.c.index > b.c.index;
		return a.shuffle < b.shuffle;
	});
	// Refine each run of (near-)equal indices.
	for (std::size_t begin = 0; begin < keyed.size();) {
		std::size_t end = begin + 1;
		while (end < keyed.size() && keyed[begin].c.index - keyed[end].c.index <= tie_tolerance)
			++end;
		std::sort(keyed.begin() + static_cast<std::ptrdiff_t>(begin), keyed.begin() + static_cast<std::ptrdiff_t>(end),
		          [rule](const Keyed& a, const Keyed& b) {
			          if (rule != TieRule::random) {
				          if (a.c.laxity != b.c.laxity)
					          return a.c.laxity < b.c.laxity;
				          if (a.c.remaining_work != b.c.remaining_work)
					          return rule == TieRule::lllp ? a.c.remaining_work > b.c.remaining_work
					                                       : a.c.remaining_work < b.c.remaining_work;
			          }
			          return a.shuffle < b.shuffle;
		          });
		begin = end;
	}
	return activate_prefix(keyed, positions, capacity, true);
}

Policy::Policy(PolicyKind kind) : kind_(kind)
{
	if (uses_index())
		throw IncompatiblePolicy(to_string(kind) + " needs an index table");
}

Policy::Policy(PolicyKind kind, const ProblemSpec& spec, std::shared_ptr<const IndexTable> table)
	: kind_(kind), table_(std::move(table))
{
	if (!uses_index())
		return;
	if (!table_)
		throw IncompatiblePolicy(to_string(kind) + " needs an index table");
	if (table_->spec_hash() != arm_hash(spec))
		throw IncompatiblePolicy("index table was built for a different problem (hash " + table_->spec_hash() +
		                         ", expected " + arm_hash(spec) + ")");
}

bool Policy::uses_index() const noexcept
{
	return kind_ == PolicyKind::whittle || kind_ == PolicyKind::whittle_lllp || kind_ == PolicyKind::whittle_llsp;
}

Action Policy::choose(const SystemState& state, int capacity, Rng& rng) const
{
	const auto n = state.jobs.size();
	std::vector<Candidate> candidates;
	candidates.reserve(n);

	if (uses_index()) {
		// Bisection indices carry an error of up to the table tolerance, so
		// anything within it of the dummy index counts as zero.
		const double floor = table_->method() == IndexMethod::bisection ? table_->tolerance() : 0.0;
		for (std::size_t i = 0; i < n; ++i) {
			const auto& job = state.jobs[i];
			if (!job.unfinished())
				continue;
			const double nu = table_->index(job, state.cost_index);
			if (nu > floor)
				candidates.push_back({i, nu, job.laxity(), job.remaining_work});
		}
		const TieRule rule = kind_ == PolicyKind::whittle_lllp   ? TieRule::lllp
		                     : kind_ == PolicyKind::whittle_llsp ? TieRule::llsp
		                                                         : TieRule::random;
		return lllp_reorder(std::move(candidates), n, capacity, rule, rng);
	}

	for (std::size_t i = 0; i < n; ++i) {
		const auto& job = state.jobs[i];
		if (job.unfinished())
			candidates.push_back({i, 0.0, job.laxity(), job.remaining_work});
	}
	auto keyed = with_random_keys(std::move(candidates), rng);
	const bool edf = kind_ == PolicyKind::edf;
	std::sort(keyed.begin(), keyed.end(), [&](const Keyed& a, const Keyed& b) {
		const int ka = edf ? a.c.laxity + a.c.remaining_work : a.c.laxity;
		const int kb = edf ? b.c.laxity + b.c.remaining_work : b.c.laxity;
		if (ka != kb)
			return ka < kb;
		return a.shuffle < b.shuffle;
	});
	return activate_prefix(keyed, n, capacity, false);
}

} // namespace dlsched

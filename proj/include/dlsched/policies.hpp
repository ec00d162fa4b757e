#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dlsched/core_model.hpp"
#include "dlsched/whittle_index.hpp"

namespace dlsched {

enum class PolicyKind { whittle, whittle_lllp, whittle_llsp, edf, llf };

std::string to_string(PolicyKind kind);
/// Accepts both the CLI spelling (whittle-lllp) and the enum spelling.
PolicyKind policy_kind_from_string(const std::string& name);
const std::vector<PolicyKind>& all_policy_kinds();

/// One arm as seen by the ranking step.
struct Candidate {
	std::size_t position = 0;
	double index = 0.0;
	int laxity = 0;
	int remaining_work = 0;
};

enum class TieRule { random, lllp, llsp };

/// Orders candidates by descending index; runs of indices within 1e-9 of
/// each other are refined by (laxity ascending, then work descending for
/// lllp or ascending for llsp), with leftover ties broken at random. The
/// random rule skips the refinement (plain Whittle ordering).
/// Activates the first M candidates whose index is positive.
Action lllp_reorder(std::vector<Candidate> candidates, std::size_t positions, int capacity, TieRule rule, Rng& rng);

class Policy {
public:
	/// EDF and LLF need no table.
	explicit Policy(PolicyKind kind);
	/// Whittle variants; `spec` is used to check the table was built for
	/// the same arm dynamics.
	Policy(PolicyKind kind, const ProblemSpec& spec, std::shared_ptr<const IndexTable> table);

	PolicyKind kind() const noexcept { return kind_; }
	std::string name() const { return to_string(kind_); }
	bool uses_index() const noexcept;
	const IndexTable* table() const noexcept { return table_.get(); }

	/// At most `capacity` positions are activated; tie-breaks draw from rng.
	Action choose(const SystemState& state, int capacity, Rng& rng) const;

private:
	PolicyKind kind_;
	std::shared_ptr<const IndexTable> table_;
};

} // namespace dlsched

#include "dlsched/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "dlsched/error.hpp"
#include "dlsched/parallel.hpp"

namespace dlsched {

std::string to_string(WindowMethod method)
{
	return method == WindowMethod::exact_binomial ? "exact_binomial" : "monte_carlo";
}

WindowMethod window_method_from_string(const std::string& name)
{
	if (name == "exact_binomial" || name == "exact-binomial")
		return WindowMethod::exact_binomial;
	if (name == "monte_carlo" || name == "monte-carlo")
		return WindowMethod::monte_carlo;
	throw InvalidArgument("unknown window method '" + name + "'");
}

namespace {

std::vector<double> binomial_pmf(int n, double p)
{
	std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
	if (p <= 0.0) {
		pmf[0] = 1.0;
		return pmf;
	}
	if (p >= 1.0) {
		pmf.back() = 1.0;
		return pmf;
	}
	for (int k = 0; k <= n; ++k)
		pmf[static_cast<std::size_t>(k)] =
			std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(p) +
			         (n - k) * std::log1p(-p));
	return pmf;
}

// Histogram of per-window admission counts for one independent run of the
// queue. A position that admits several short jobs inside one window is
// counted once, which keeps the support inside {0, ..., N}.
std::vector<std::size_t> window_counts(const ProblemSpec& spec, int window, std::size_t windows, Rng& rng)
{
	const auto n = static_cast<std::size_t>(spec.n);
	std::vector<int> lead(n, 0);
	std::vector<std::uint8_t> admitted(n, 0);
	auto slot = [&]() {
		for (std::size_t i = 0; i < n; ++i) {
			if (lead[i] > 1) {
				--lead[i];
				continue;
			}
			lead[i] = spec.arrivals.sample(rng).lead_time;
			admitted[i] |= lead[i] > 0;
		}
	};
	for (int s = 0; s < 10 * window; ++s)
		slot();
	std::vector<std::size_t> counts(n + 1, 0);
	for (std::size_t w = 0; w < windows; ++w) {
		std::fill(admitted.begin(), admitted.end(), 0);
		for (int s = 0; s < window; ++s)
			slot();
		std::size_t total = 0;
		for (auto a : admitted)
			total += a;
		++counts[total];
	}
	return counts;
}

} // namespace

ArrivalWindowStats arrival_window_distribution(const ProblemSpec& spec, WindowMethod method,
                                               const WindowOptions& options)
{
	spec.validate();
	ArrivalWindowStats stats;
	stats.window = std::max(spec.arrivals.max_lead_time(), 1);
	stats.method = method;
	const auto n = static_cast<std::size_t>(spec.n);

	if (method == WindowMethod::exact_binomial) {
		for (const auto& o : spec.arrivals.outcomes())
			if (o.job.lead_time != 0 && o.job.lead_time != stats.window)
				throw MethodInvalid("exact_binomial needs every arriving job to have lead time T̄");
		// Alternating renewal: busy for T̄ slots with probability q, idle for
		// one slot otherwise. A window admits a job exactly when the position
		// is busy at its last slot.
		const double q = 1.0 - spec.arrivals.empty_probability();
		const double T = stats.window;
		const double busy = q * T / (q * T + 1.0 - q);
		stats.pmf = binomial_pmf(spec.n, busy);
		stats.stderr_pmf.assign(n + 1, 0.0);
		return stats;
	}

	if (options.samples == 0)
		throw InvalidArgument("monte_carlo needs at least one sample");
	// Fixed chunking keeps the estimate independent of the thread count.
	const std::size_t chunks = std::min<std::size_t>(16, options.samples);
	std::vector<std::vector<std::size_t>> partial(chunks);
	parallel_for(chunks, options.threads, [&](std::size_t ch) {
		const std::size_t share = options.samples / chunks + (ch < options.samples % chunks ? 1 : 0);
		Rng rng(derive_seed(options.seed, 0x77696e64ULL, ch));
		partial[ch] = window_counts(spec, stats.window, share, rng);
	});
	std::vector<double> counts(n + 1, 0.0);
	for (const auto& p : partial)
		for (std::size_t k = 0; k <= n; ++k)
			counts[k] += static_cast<double>(p[k]);
	const double total = static_cast<double>(options.samples);
	stats.samples = options.samples;
	stats.pmf.resize(n + 1);
	stats.stderr_pmf.resize(n + 1);
	for (std::size_t k = 0; k <= n; ++k) {
		const double p = counts[k] / total;
		stats.pmf[k] = p;
		stats.stderr_pmf[k] = std::sqrt(p * (1.0 - p) / total);
	}
	return stats;
}

double gap_constant(const ProblemSpec& spec)
{
	return std::abs(1.0 - spec.costs.min_cost()) + spec.penalty(spec.max_work()) +
	       std::abs(1.0 - spec.costs.max_cost());
}

double gap_bound(const ProblemSpec& spec, const ArrivalWindowStats& stats)
{
	if (stats.pmf.size() != static_cast<std::size_t>(spec.n) + 1)
		throw InvalidArgument("window statistics were computed for a different N");
	double tail = 0.0;
	for (std::size_t k = static_cast<std::size_t>(spec.m) + 1; k < stats.pmf.size(); ++k)
		tail += static_cast<double>(k) * stats.pmf[k];
	if (tail == 0.0)
		return 0.0;
	return gap_constant(spec) / (1.0 - spec.beta) * tail;
}

PoissonTail poisson_tail_bound(double mu, int m)
{
	if (!(mu >= 0.0) || !std::isfinite(mu))
		throw DomainError("Poisson mean must be finite and nonnegative");
	if (m < 1)
		throw DomainError("M must be at least 1");
	if (!(m > mu - 1.0))
		throw DomainError(fmt::format("bound needs M > mu - 1 (mu={}, M={})", mu, m));

	PoissonTail out;
	if (mu == 0.0)
		return out;

	double pmf = std::exp(-mu);
	for (int k = 1; k <= m; ++k)
		pmf *= mu / k;
	const double pmf_m = pmf;

	// Terms shrink geometrically once k exceeds mu.
	double tail = 0.0, moment = 0.0;
	for (int k = m;; ++k) {
		tail += pmf;
		if (k >= m + 1)
			moment += k * pmf;
		if (k > mu && pmf < 1e-18 * std::max(tail, 1e-300))
			break;
		if (k > m + 100000)
			break;
		pmf *= mu / (k + 1);
	}
	out.exact_tail = mu * tail;
	out.tail_moment = moment;
	out.klar_bound = mu * pmf_m / (1.0 - mu / (m + 1));

	const double M = m;
	const double log_stirling = (M + 1.0) * std::log(mu) + M - mu + std::log(M + 1.0) -
	                            0.5 * std::log(2.0 * std::numbers::pi) - (M + 0.5) * std::log(M) -
	                            std::log(M + 1.0 - mu);
	out.stirling_bound = std::exp(log_stirling);
	return out;
}

} // namespace dlsched

#include "dlsched/simulator.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "dlsched/error.hpp"
#include "dlsched/parallel.hpp"

namespace dlsched {

std::string to_string(ArrivalMode mode)
{
	return mode == ArrivalMode::independent ? "independent" : "poisson_uniform";
}

ArrivalMode arrival_mode_from_string(const std::string& name)
{
	if (name == "independent")
		return ArrivalMode::independent;
	if (name == "poisson_uniform" || name == "poisson-uniform" || name == "poisson")
		return ArrivalMode::poisson_uniform;
	throw InvalidArgument("unknown arrival mode '" + name + "'");
}

std::size_t auto_horizon(const ProblemSpec& spec, double epsilon)
{
	const double rmax = max_slot_reward(spec);
	if (rmax <= 0.0)
		return 1;
	const double h = std::log(epsilon * (1.0 - spec.beta) / rmax) / std::log(spec.beta);
	return static_cast<std::size_t>(std::max(1.0, std::ceil(h)));
}

double truncation_error(const ProblemSpec& spec, std::size_t horizon)
{
	return std::pow(spec.beta, static_cast<double>(horizon)) * max_slot_reward(spec) / (1.0 - spec.beta);
}

namespace {

enum Stream : std::uint64_t { cost_stream = 0, tie_stream = 1, arrival_stream = 2, position_base = 16 };

int sample_poisson(double rate, Rng& rng)
{
	// Inversion; rates here are a few jobs per slot at most.
	const double u = uniform01(rng);
	double p = std::exp(-rate);
	double cdf = p;
	int k = 0;
	while (u >= cdf && k < 100000) {
		++k;
		p *= rate / k;
		cdf += p;
		if (p == 0.0 && cdf < u)
			break;
	}
	return k;
}

double mean_of(const std::vector<double>& xs)
{
	return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stderr_of(const std::vector<double>& xs)
{
	if (xs.size() < 2)
		return 0.0;
	const double m = mean_of(xs);
	double ss = 0.0;
	for (double x : xs)
		ss += (x - m) * (x - m);
	return std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
}

ReplicationRecord run_replication(const ProblemSpec& spec, const Policy& policy, const SimConfig& cfg,
                                  std::size_t horizon, std::size_t replication)
{
	ReplicationRecord rec;
	rec.replication = replication;
	rec.seed = derive_seed(cfg.seed, replication);
	const auto n = static_cast<std::size_t>(spec.n);

	Rng cost_rng(derive_seed(rec.seed, cost_stream));
	Rng tie_rng(derive_seed(rec.seed, tie_stream));
	Rng arrival_rng(derive_seed(rec.seed, arrival_stream));
	std::vector<Rng> position_rngs;
	position_rngs.reserve(n);
	for (std::size_t i = 0; i < n; ++i)
		position_rngs.emplace_back(derive_seed(rec.seed, position_base + i));

	SystemState state = cfg.initial_state ? *cfg.initial_state : SystemState::empty(spec.n);
	if (state.jobs.size() != n)
		throw InvalidArgument("initial state has the wrong number of positions");
	if (state.cost_index >= spec.costs.size())
		throw InvalidArgument("initial cost index outside the chain");
	for (const auto& job : state.jobs)
		rec.arrived += job.lead_time > 0;

	const double slot_rate = cfg.poisson_mean / std::max(spec.max_lead_time(), 1);
	std::vector<std::size_t> free_positions;
	if (cfg.keep_traces)
		rec.trace.reserve(horizon);

	double discount = 1.0;
	for (std::size_t t = 0; t < horizon; ++t) {
		const Action action = policy.choose(state, spec.m, tie_rng);
		for (std::size_t i = 0; i < n; ++i) {
			const auto& job = state.jobs[i];
			if (job.lead_time == 1) {
				if (job.remaining_work - action.active[i] <= 0)
					++rec.completed;
				else
					++rec.missed;
			}
		}

		StepResult next;
		if (cfg.arrival_mode == ArrivalMode::independent) {
			next = system_step(state, action, spec, cost_rng, position_rngs);
			for (std::size_t i = 0; i < n; ++i)
				rec.arrived += state.jobs[i].lead_time <= 1 && next.state.jobs[i].lead_time > 0;
		} else {
			if (action.active.size() != n)
				throw InvalidArgument("action length differs from the number of positions");
			if (action.count() > spec.m)
				throw CapacityViolation(fmt::format("{} positions active with capacity {}", action.count(), spec.m));
			const double c = spec.costs.cost(state.cost_index);
			next.state.jobs.resize(n);
			free_positions.clear();
			for (std::size_t i = 0; i < n; ++i) {
				const auto& job = state.jobs[i];
				next.reward += reward(job, c, action.active[i], spec.penalty);
				if (job.lead_time > 1)
					next.state.jobs[i] = {job.lead_time - 1, std::max(job.remaining_work - action.active[i], 0)};
				else
					free_positions.push_back(i);
			}
			const auto arrivals = static_cast<std::size_t>(sample_poisson(slot_rate, arrival_rng));
			const std::size_t placed = std::min(arrivals, free_positions.size());
			for (std::size_t k = 0; k < placed; ++k) {
				const auto remaining = free_positions.size() - k;
				const auto pick = k + static_cast<std::size_t>(uniform01(arrival_rng) * static_cast<double>(remaining));
				std::swap(free_positions[k], free_positions[std::min(pick, free_positions.size() - 1)]);
				next.state.jobs[free_positions[k]] = spec.arrivals.sample_job(arrival_rng);
			}
			rec.arrived += placed;
			rec.dropped += arrivals - placed;
			next.state.cost_index = step_cost(state.cost_index, spec.costs, cost_rng);
		}

		rec.discounted_reward += discount * next.reward;
		if (cfg.keep_traces)
			rec.trace.push_back(next.reward);
		discount *= spec.beta;
		state = std::move(next.state);
	}
	const auto expired = rec.completed + rec.missed;
	rec.completion_ratio = expired == 0 ? 1.0 : static_cast<double>(rec.completed) / static_cast<double>(expired);
	return rec;
}

} // namespace

SimReport run(const ProblemSpec& spec, const Policy& policy, const SimConfig& cfg)
{
	spec.validate();
	if (cfg.replications == 0)
		throw InvalidArgument("at least one replication is required");
	if (cfg.arrival_mode == ArrivalMode::poisson_uniform && !(cfg.poisson_mean >= 0.0))
		throw InvalidArgument("poisson_uniform needs a nonnegative poisson_mean");

	SimReport report;
	report.policy = policy.name();
	report.horizon = cfg.horizon == 0 ? auto_horizon(spec) : cfg.horizon;
	report.truncation_error = truncation_error(spec, report.horizon);
	report.records.resize(cfg.replications);
	parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
		report.records[r] = run_replication(spec, policy, cfg, report.horizon, r);
	});

	std::vector<double> rewards, ratios;
	std::size_t completed = 0, expired = 0;
	for (const auto& rec : report.records) {
		rewards.push_back(rec.discounted_reward);
		ratios.push_back(rec.completion_ratio);
		completed += rec.completed;
		expired += rec.completed + rec.missed;
	}
	report.mean = mean_of(rewards);
	report.stderr_mean = stderr_of(rewards);
	report.no_arrivals = expired == 0;
	report.completion_ratio =
		expired == 0 ? 1.0 : static_cast<double>(completed) / static_cast<double>(expired);
	report.completion_stderr = stderr_of(ratios);
	return report;
}

PairedReport paired_compare(const ProblemSpec& spec, const std::vector<Policy>& policies, const SimConfig& cfg)
{
	PairedReport out;
	for (const auto& policy : policies)
		out.reports.push_back(run(spec, policy, cfg));
	for (std::size_t i = 0; i < out.reports.size(); ++i) {
		for (std::size_t j = i + 1; j < out.reports.size(); ++j) {
			std::vector<double> diff;
			for (std::size_t r = 0; r < cfg.replications; ++r)
				diff.push_back(out.reports[i].records[r].discounted_reward -
				               out.reports[j].records[r].discounted_reward);
			out.differences.push_back({out.reports[i].policy, out.reports[j].policy, mean_of(diff), stderr_of(diff)});
		}
	}
	return out;
}

void write_replications_csv(const std::vector<SimReport>& reports, std::ostream& out)
{
	out << "policy,replication,seed,discounted_reward,completion_ratio,truncation_error\n";
	for (const auto& rep : reports)
		for (const auto& rec : rep.records)
			out << fmt::format("{},{},{},{:.17g},{:.17g},{:.17g}\n", rep.policy, rec.replication, rec.seed,
			                   rec.discounted_reward, rec.completion_ratio, rep.truncation_error);
}

void write_summary_csv(const std::vector<SimReport>& reports, std::ostream& out)
{
	out << "policy,mean,stderr,completion_ratio,completion_stderr,horizon,truncation_error,replications,no_arrivals\n";
	for (const auto& rep : reports)
		out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{},{:.17g},{},{}\n", rep.policy, rep.mean,
		                   rep.stderr_mean, rep.completion_ratio, rep.completion_stderr, rep.horizon,
		                   rep.truncation_error, rep.records.size(), rep.no_arrivals ? 1 : 0);
}

} // namespace dlsched

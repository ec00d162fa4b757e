// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.
//
// usage: acceptance <path to dlsched CLI> <scratch directory>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "dlsched/bounds.hpp"
#include "dlsched/config.hpp"
#include "dlsched/exact_solver.hpp"
#include "dlsched/presets.hpp"
#include "dlsched/price_data.hpp"
#include "dlsched/simulator.hpp"
#include "dlsched/whittle_index.hpp"

namespace fs = std::filesystem;
using namespace dlsched;

namespace {

struct Outcome {
	bool pass = false;
	std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
	return std::chrono::duration<double>(Clock::now() - start).count();
}

std::shared_ptr<const IndexTable> shared_table(const ProblemSpec& spec)
{
	return std::make_shared<const IndexTable>(build_index_table(spec));
}

// Closed-form index against the bisection table on the constant-cost preset
// grid (T̄ = 12, B̄ = 9).
Outcome closed_form_agreement()
{
	const auto start = Clock::now();
	const auto spec = builtin_preset("constant-cost-ratio").spec;
	IndexBuildOptions opts;
	opts.method = IndexMethod::bisection;
	const auto table = build_index_table(spec, opts);
	double worst = 0.0;
	int states = 0;
	const double c = spec.costs.cost(0);
	for (int t = 1; t <= spec.max_lead_time(); ++t)
		for (int b = 0; b <= spec.max_work(); ++b) {
			// Written out here rather than calling the library's closed form.
			double expected = 0.0;
			if (b > 0 && b <= t - 1)
				expected = 1.0 - c;
			else if (b > 0)
				expected = 1.0 - c + std::pow(spec.beta, t - 1) * (spec.penalty(b - t + 1) - spec.penalty(b - t));
			worst = std::max(worst, std::abs(table.at(t, b, 0) - expected));
			++states;
		}
	const double elapsed = seconds_since(start);
	return {spec.max_lead_time() == 12 && spec.max_work() == 9 && worst <= 1e-6 && elapsed < 60.0,
	        fmt::format("{} states, max |bisection - closed form| = {:.3g}, {:.2f} s", states, worst, elapsed)};
}

ProblemSpec counterexample_spec()
{
	ProblemSpec spec;
	spec.n = 3;
	spec.m = 1;
	spec.beta = 0.4;
	spec.arrivals = ArrivalDistribution({{JobState{1, 1}, 0.5}, {JobState{2, 2}, 0.5}});
	spec.penalty = PenaltyFunction::quadratic(1.0);
	spec.costs = CostChain::constant(1.0);
	return spec;
}

Outcome counterexample()
{
	const auto start = Clock::now();
	const auto spec = counterexample_spec();
	const auto table = solve_joint(spec);
	const SystemState s{0, {{1, 1}, {2, 2}, {2, 2}}};
	const SystemState s2{0, {{1, 1}, {1, 1}, {2, 2}}};
	const auto a = table.greedy(s);
	const auto a2 = table.greedy(s2);
	auto picked = [](const SystemState& st, const Action& act) {
		for (std::size_t i = 0; i < act.active.size(); ++i)
			if (act.active[i])
				return st.jobs[i];
		return JobState{};
	};
	const bool ok = a.count() == 1 && picked(s, a) == JobState{2, 2} && a2.count() == 1 &&
	                picked(s2, a2) == JobState{1, 1};
	const double elapsed = seconds_since(start);
	return {ok && elapsed < 300.0,
	        fmt::format("first state runs ({},{}), second runs ({},{}), {:.2f} s", picked(s, a).lead_time,
	                    picked(s, a).remaining_work, picked(s2, a2).lead_time, picked(s2, a2).remaining_work, elapsed)};
}

Outcome full_capacity_optimality()
{
	ProblemSpec spec;
	spec.n = 2;
	spec.m = 2;
	spec.beta = 0.9;
	spec.arrivals = ArrivalDistribution({{JobState{0, 0}, 0.3},
	                                     {JobState{4, 3}, 0.25},
	                                     {JobState{3, 2}, 0.2},
	                                     {JobState{2, 1}, 0.15},
	                                     {JobState{4, 1}, 0.1}});
	spec.penalty = PenaltyFunction::quadratic(0.2);
	spec.costs = CostChain({0.4, 1.2}, {{0.7, 0.3}, {0.4, 0.6}});
	const auto exact = solve_joint(spec);
	const SystemState initial = SystemState::empty(2);
	SimConfig cfg;
	cfg.replications = 1000;
	cfg.seed = 3;
	cfg.initial_state = initial;
	const auto report = run(spec, Policy(PolicyKind::whittle, spec, shared_table(spec)), cfg);
	const double g = exact.value(initial);
	const double diff = std::abs(report.mean - g);
	const double allowed = 2 * report.stderr_mean + report.truncation_error + exact.tolerance();
	return {diff <= allowed,
	        fmt::format("exact {:.5f}, simulated {:.5f} (stderr {:.5f}, truncation {:.1e}), |diff| {:.5f} <= {:.5f}", g,
	                    report.mean, report.stderr_mean, report.truncation_error, diff, allowed)};
}

struct SmallInstance {
	ProblemSpec spec;
	SystemState initial;
	double exact = 0.0;
	double upper = 0.0;
	double simulated = 0.0;
	double stderr_mean = 0.0;
	double truncation = 0.0;
	double tol = 0.0;
	double gap_bound = 0.0;
};

ProblemSpec random_small_spec(Rng& rng)
{
	auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };
	auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };
	ProblemSpec spec;
	spec.n = pick(2, 3);
	spec.m = pick(1, spec.n);
	spec.beta = uniform(0.7, 0.9);
	const double empty = uniform(0.1, 0.5);
	const int types = pick(1, 3);
	std::vector<ArrivalOutcome> outcomes{{JobState{0, 0}, empty}};
	std::vector<double> weights;
	for (int k = 0; k < types; ++k) {
		JobState job{pick(1, 3), pick(1, 3)};
		bool seen = false;
		for (auto& o : outcomes)
			seen |= o.job == job;
		if (!seen) {
			outcomes.push_back({job, 0.0});
			weights.push_back(uniform(0.2, 1.0));
		}
	}
	double total = 0.0;
	for (double w : weights)
		total += w;
	for (std::size_t k = 0; k < weights.size(); ++k)
		outcomes[k + 1].probability = (1.0 - empty) * weights[k] / total;
	spec.arrivals = ArrivalDistribution(outcomes);
	spec.penalty = uniform01(rng) < 0.5 ? PenaltyFunction::quadratic(uniform(0.1, 1.0))
	                                    : PenaltyFunction::linear(uniform(0.1, 1.0));
	if (uniform01(rng) < 0.4) {
		spec.costs = CostChain::constant(uniform(0.2, 0.9));
	} else {
		double lo = uniform(0.1, 0.7), hi = uniform(0.8, 1.3);
		double p = uniform(0.2, 0.8), r = uniform(0.2, 0.8);
		spec.costs = CostChain({lo, hi}, {{p, 1 - p}, {r, 1 - r}});
	}
	spec.lead_time_floor = 3;
	spec.work_floor = 3;
	return spec;
}

SystemState random_initial(const ProblemSpec& spec, Rng& rng)
{
	SystemState s;
	s.cost_index = rng() % spec.costs.size();
	for (int i = 0; i < spec.n; ++i) {
		const int t = static_cast<int>(rng() % 4);
		const int b = t == 0 ? 0 : static_cast<int>(rng() % 4);
		s.jobs.push_back({t, b});
	}
	return s;
}

std::vector<SmallInstance> small_instances(int count)
{
	Rng rng(2024);
	std::vector<SmallInstance> out;
	for (int k = 0; k < count; ++k) {
		SmallInstance inst;
		inst.spec = random_small_spec(rng);
		inst.initial = random_initial(inst.spec, rng);
		const auto table = shared_table(inst.spec);
		const auto joint = solve_joint(inst.spec);
		inst.exact = joint.value(inst.initial);
		inst.tol = joint.tolerance();
		inst.upper = lagrangian_upper_bound(inst.spec, inst.initial, default_dual_grid(*table)).value;
		SimConfig cfg;
		cfg.replications = 500;
		cfg.seed = 100 + static_cast<std::uint64_t>(k);
		cfg.initial_state = inst.initial;
		const auto report = run(inst.spec, Policy(PolicyKind::whittle, inst.spec, table), cfg);
		inst.simulated = report.mean;
		inst.stderr_mean = report.stderr_mean;
		inst.truncation = report.truncation_error;
		WindowOptions wo;
		wo.seed = 7 + static_cast<std::uint64_t>(k);
		inst.gap_bound = gap_bound(inst.spec, arrival_window_distribution(inst.spec, WindowMethod::monte_carlo, wo));
		out.push_back(std::move(inst));
	}
	return out;
}

Outcome sandwich(const std::vector<SmallInstance>& instances)
{
	int violations = 0;
	double worst_lower = -1e300, worst_upper = -1e300;
	for (const auto& inst : instances) {
		const double lower_excess = inst.simulated - inst.exact;
		const double lower_allowed = 3 * inst.stderr_mean + inst.truncation + inst.tol;
		const double upper_excess = inst.exact - inst.upper;
		const double upper_allowed = inst.tol + 1e-6;
		worst_lower = std::max(worst_lower, lower_excess - lower_allowed);
		worst_upper = std::max(worst_upper, upper_excess - upper_allowed);
		violations += lower_excess > lower_allowed;
		violations += upper_excess > upper_allowed;
	}
	return {instances.size() >= 20 && violations == 0,
	        fmt::format("{} instances, {} violations; worst slack use: lower {:.3g}, upper {:.3g}", instances.size(),
	                    violations, worst_lower, worst_upper)};
}

// Passive-minus-active preference at every state for one subsidy, written
// from the model's one-step lookahead.
std::vector<double> preferences(const ProblemSpec& spec, const SubsidyValueTable& table,
                                std::vector<std::tuple<int, int, std::size_t>>& states)
{
	const auto& g = table.grid;
	const std::size_t K = g.costs;
	std::vector<double> refill(K, 0.0);
	for (std::size_t c = 0; c < K; ++c)
		for (std::size_t k = 0; k < K; ++k)
			for (const auto& o : spec.arrivals.outcomes())
				refill[c] += spec.costs.probability(c, k) * o.probability *
				             table.value(o.job.lead_time, o.job.remaining_work, k);
	states.clear();
	std::vector<double> pref;
	for (int t = 0; t <= g.max_lead; ++t)
		for (int b = 0; b <= (t == 0 ? 0 : g.max_work); ++b)
			for (std::size_t c = 0; c < K; ++c) {
				const double profit = 1.0 - spec.costs.cost(c);
				double passive = table.subsidy, active = 0.0;
				if (t <= 1) {
					if (b > 0) {
						passive -= spec.penalty(b);
						active += profit - spec.penalty(b - 1);
					}
				} else {
					double stay = 0.0, work = 0.0;
					for (std::size_t k = 0; k < K; ++k) {
						stay += spec.costs.probability(c, k) * table.value(t - 1, b, k);
						work += spec.costs.probability(c, k) * table.value(t - 1, std::max(b - 1, 0), k);
					}
					passive += spec.beta * stay;
					active += (b > 0 ? profit : 0.0) + spec.beta * work;
				}
				states.emplace_back(t, b, c);
				pref.push_back(passive - active);
			}
	return pref;
}

Outcome indexability()
{
	const auto start = Clock::now();
	Rng rng(77);
	auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };
	int specs = 0, crossing_violations = 0, monotone_violations = 0, concavity_violations = 0;
	std::size_t states_checked = 0;
	for (int k = 0; k < 6; ++k) {
		ProblemSpec spec;
		spec.beta = uniform(0.8, 0.99);
		const int tmax = 3 + static_cast<int>(rng() % 4);
		const int bmax = 2 + static_cast<int>(rng() % 4);
		std::vector<ArrivalOutcome> outcomes{{JobState{0, 0}, 0.3}};
		outcomes.push_back({JobState{tmax, bmax}, 0.35});
		outcomes.push_back({JobState{std::max(1, tmax - 1), std::max(1, bmax - 2)}, 0.35});
		spec.arrivals = ArrivalDistribution(outcomes);
		spec.penalty = k % 2 == 0 ? PenaltyFunction::quadratic(uniform(0.1, 0.5)) : PenaltyFunction::linear(uniform(0.5, 2));
		const std::size_t K = 2 + static_cast<std::size_t>(k % 2);
		std::vector<double> costs;
		for (std::size_t i = 0; i < K; ++i)
			costs.push_back(uniform(0.1, 1.2));
		std::sort(costs.begin(), costs.end());
		std::vector<std::vector<double>> p(K, std::vector<double>(K));
		for (auto& row : p) {
			double total = 0.0;
			for (auto& x : row)
				total += x = uniform(0.05, 1.0);
			for (auto& x : row)
				x /= total;
		}
		spec.costs = CostChain(costs, p);
		++specs;

		const auto table = build_index_table(spec);
		double top = 0.0;
		for (double v : table.indices())
			top = std::max(top, v);
		const double lo = -(top + 1.0), hi = top + 1.0;
		std::vector<double> grid;
		for (int i = 0; i < 400; ++i)
			grid.push_back(lo + (hi - lo) * i / 399.0);

		// Per state: has the preference already turned passive?
		std::vector<std::tuple<int, int, std::size_t>> states;
		std::vector<char> gone_passive;
		for (double nu : grid) {
			const auto values = subsidy_value_iteration(spec, nu);
			const auto pref = preferences(spec, values, states);
			if (gone_passive.empty())
				gone_passive.assign(pref.size(), 0);
			for (std::size_t s = 0; s < pref.size(); ++s) {
				const bool active = pref[s] < -1e-9;
				if (active && gone_passive[s])
					++crossing_violations;
				if (pref[s] > 1e-9)
					gone_passive[s] = 1;
			}
			if (nu > 0) {
				const auto& g = values.grid;
				for (std::size_t c = 0; c < g.costs; ++c)
					for (int t = 1; t <= g.max_lead; ++t)
						for (int b = 1; b < g.max_work; ++b) {
							const double second = values.value(t, b + 1, c) - 2 * values.value(t, b, c) +
							                      values.value(t, b - 1, c);
							concavity_violations += second > 1e-6;
						}
			}
		}
		states_checked += states.size();

		// Cross-check the library's own probe on a few states.
		for (std::size_t s = 0; s < states.size(); s += 7) {
			const auto [t, b, c] = states[s];
			const auto probe = single_crossing_probe(spec, {t, b}, c, grid);
			bool off = false;
			for (bool a : probe) {
				if (a && off)
					++crossing_violations;
				off |= !a;
			}
		}

		const auto& g = table.grid();
		for (std::size_t c = 0; c < g.costs; ++c)
			for (int t = 1; t <= g.max_lead; ++t)
				for (int b = 1; b < g.max_work; ++b) {
					const double here = table.at(t, b, c), next = table.at(t, b + 1, c);
					if (here > 0 && next > 0 && next < here - 1e-6)
						++monotone_violations;
				}
	}
	const double elapsed = seconds_since(start);
	return {specs >= 5 && crossing_violations == 0 && monotone_violations == 0 && concavity_violations == 0 &&
	            elapsed < 600.0,
	        fmt::format("{} specs, {} states x 400 subsidies; violations: crossing {}, monotone {}, concavity {}; {:.1f} s",
	                    specs, states_checked, crossing_violations, monotone_violations, concavity_violations, elapsed)};
}

Outcome poisson_bound()
{
	int cases = 0, bound_failures = 0, identity_failures = 0;
	double worst_identity = 0.0;
	for (int m = 1; m <= 50; ++m) {
		const std::vector<double> mus{0.1, 0.5, 1.0, m / std::exp(1.0), m - 1 + 0.01, m + 0.99};
		for (double mu : mus) {
			if (!(m > mu - 1) || mu < 0)
				continue;
			const auto p = poisson_tail_bound(mu, m);
			++cases;
			bound_failures += !(p.exact_tail < p.stirling_bound);
			// Independent evaluation of Σ_{k≥M+1} k·pmf(k) = μ Σ_{j≥M} pmf(j).
			double pmf = std::exp(-mu), head = 0.0;
			for (int j = 0; j < m; ++j) {
				head += pmf;
				pmf *= mu / (j + 1);
			}
			const double oracle = mu * (1.0 - head);
			const double diff = std::max(std::abs(p.exact_tail - p.tail_moment), std::abs(p.exact_tail - oracle));
			worst_identity = std::max(worst_identity, diff);
			identity_failures += diff > 1e-12;
		}
	}
	return {bound_failures == 0 && identity_failures == 0,
	        fmt::format("{} (mu, M) pairs; bound failures {}, identity failures {} (worst {:.2g})", cases, bound_failures,
	                    identity_failures, worst_identity)};
}

Outcome gap_dominance(const std::vector<SmallInstance>& instances)
{
	int violations = 0;
	double largest_gap = -1e300;
	for (const auto& inst : instances) {
		const double gap = inst.exact - inst.simulated;
		largest_gap = std::max(largest_gap, gap);
		violations += gap > inst.gap_bound + 3 * inst.stderr_mean + inst.truncation;
	}

	// Empty tail: N = M leaves no mass above M.
	ProblemSpec spec = instances.front().spec;
	spec.m = spec.n;
	const auto stats = arrival_window_distribution(spec, WindowMethod::monte_carlo);
	const double empty_tail = gap_bound(spec, stats);

	return {violations == 0 && empty_tail == 0.0,
	        fmt::format("{} instances, {} violations (largest exact - simulated {:.4f}); empty-tail bound = {}",
	                    instances.size(), violations, largest_gap, empty_tail)};
}

Outcome asymptotic_trend()
{
	const auto start = Clock::now();
	auto preset = builtin_preset("asymptotic-gap");
	preset.policies = {PolicyKind::whittle};
	preset.sim.replications = 200;
	const auto rows = evaluate_preset(preset);
	bool ok = rows.size() == 4;
	std::string detail;
	for (std::size_t i = 0; ok && i < rows.size(); ++i) {
		const auto& r = rows[i];
		ok &= r.gap_per_job.has_value() && r.gap_bound_per_job.has_value();
		if (!ok)
			break;
		const double se = r.stderr_mean / r.mean_arrived;
		detail += fmt::format("M={} gap/job {:.3g} (se {:.2g}, bound {:.3g}); ", r.m, *r.gap_per_job, se,
		                      *r.gap_bound_per_job);
		ok &= *r.gap <= *r.gap_bound;
		if (i > 0) {
			const auto& prev = rows[i - 1];
			const double prev_se = prev.stderr_mean / prev.mean_arrived;
			ok &= *r.gap_per_job <= *prev.gap_per_job + 2 * std::hypot(se, prev_se);
		}
	}
	detail += fmt::format("{:.1f} s", seconds_since(start));
	return {ok, detail};
}

Outcome constant_cost_equality()
{
	auto preset = builtin_preset("constant-cost-ratio");
	preset.sweep.values = {1.0};
	const auto rows = evaluate_preset(preset);
	bool ok = rows.size() == 5;
	double worst = 0.0;
	for (const auto& r : rows) {
		ok &= std::abs(r.diff_vs_first) <= 2 * r.diff_stderr;
		worst = std::max(worst, std::abs(r.diff_vs_first));
	}
	return {ok, fmt::format("{} policies at M/N = 1, largest |paired difference| = {:.3g}", rows.size(), worst)};
}

std::string slurp(const fs::path& path)
{
	std::ifstream in(path, std::ios::binary);
	std::ostringstream s;
	s << in.rdbuf();
	return s.str();
}

Outcome cli_determinism(const std::string& cli, const fs::path& work)
{
	fs::remove_all(work);
	fs::create_directories(work);

	ProblemSpec sim_spec;
	sim_spec.n = 4;
	sim_spec.m = 2;
	sim_spec.beta = 0.95;
	sim_spec.arrivals = ArrivalDistribution({{JobState{0, 0}, 0.3}, {JobState{4, 3}, 0.4}, {JobState{3, 1}, 0.3}});
	sim_spec.penalty = PenaltyFunction::quadratic(0.2);
	sim_spec.costs = CostChain({0.3, 0.9}, {{0.8, 0.2}, {0.3, 0.7}});
	{
		std::ofstream(work / "spec.json") << to_json(sim_spec).dump(2);
	}
	auto small = sim_spec;
	small.n = 2;
	small.m = 1;
	{
		std::ofstream(work / "small.json") << to_json(small).dump(2);
	}
	{
		std::ofstream trace(work / "trace.csv");
		trace << "timestamp,price\n";
		const auto t = synthetic_diurnal_trace(20, 9);
		for (std::size_t i = 0; i < t.size(); ++i)
			trace << i << ',' << fmt::format("{:.6f}", t.prices[i]) << '\n';
	}
	auto tiny = builtin_preset("constant-cost-ratio");
	tiny.name = "tiny";
	tiny.spec.n = 4;
	tiny.sweep.values = {0.5, 1.0};
	tiny.sim.replications = 3;
	tiny.sim.horizon = 300;
	{
		std::ofstream(work / "tiny.json") << to_json(tiny).dump(2);
	}

	const std::string w = work.string();
	const std::vector<std::pair<std::string, std::string>> commands{
		{"fit-costs", "fit-costs --synthetic-days 30 --n-states 4 --quantizer equal_frequency"},
		{"fit-costs-trace", "fit-costs --trace " + w + "/trace.csv --n-states 3 --quantizer equal_width --json OUT/chain.json"},
		{"build-index", "--config " + w + "/spec.json build-index --method bisection"},
		{"simulate", "--config " + w + "/spec.json --seed 5 simulate --policy whittle --policy whittle-lllp --policy edf "
		             "--policy llf --replications 6 --horizon 200"},
		{"simulate-poisson", "--config " + w + "/spec.json --seed 6 --threads 2 simulate --policy whittle-llsp "
		                     "--replications 4 --horizon 150 --arrival-mode poisson_uniform --poisson-mean 2"},
		{"exact", "--config " + w + "/small.json exact --state 4:3,3:1 --state 0:0,2:2@1 --dual"},
		{"bounds", "bounds --mu 0.5 --mu 1 --mu 3.5 --m 1 --m 2 --m 5"},
		{"bounds-gap", "--config " + w + "/spec.json --seed 4 bounds --mu 2 --m 2 --m 3 --window-method monte_carlo "
		               "--samples 3000"},
		{"preset", "--seed 2 preset --file " + w + "/tiny.json"},
		{"preset-named", "preset --name hard-deadline --values 0.5 --replications 2 --horizon 100"},
	};

	int failures = 0;
	std::size_t files = 0;
	std::string first_problem;
	for (const auto& [label, args] : commands) {
		std::vector<fs::path> dirs;
		for (int run = 0; run < 2; ++run) {
			const auto dir = work / fmt::format("{}_{}", label, run);
			fs::create_directories(dir);
			std::string a = args;
			for (auto pos = a.find("OUT"); pos != std::string::npos; pos = a.find("OUT"))
				a.replace(pos, 3, dir.string());
			const std::string cmd =
				fmt::format("\"{}\" --out \"{}\" {} > \"{}\" 2>&1", cli, dir.string(), a, (work / (label + ".log")).string());
			const int rc = std::system(cmd.c_str());
			if (rc != 0) {
				++failures;
				if (first_problem.empty())
					first_problem = fmt::format("{} exited with {}: {}", label, rc, slurp(work / (label + ".log")));
			}
			dirs.push_back(dir);
		}
		std::vector<fs::path> names;
		for (const auto& e : fs::directory_iterator(dirs[0]))
			names.push_back(e.path().filename());
		std::sort(names.begin(), names.end());
		std::size_t other = 0;
		for ([[maybe_unused]] const auto& e : fs::directory_iterator(dirs[1]))
			++other;
		if (names.empty() || other != names.size()) {
			++failures;
			if (first_problem.empty())
				first_problem = label + " produced no output or differing file sets";
		}
		for (const auto& name : names) {
			++files;
			const auto x = slurp(dirs[0] / name), y = slurp(dirs[1] / name);
			if (x.empty() || x != y) {
				++failures;
				if (first_problem.empty())
					first_problem = fmt::format("{}: {} differs between runs", label, name.string());
			}
		}
	}
	return {failures == 0, fmt::format("{} invocations x 2, {} output files compared, {} mismatches{}", commands.size(),
	                                   files, failures, first_problem.empty() ? "" : "; " + first_problem)};
}

} // namespace

int main(int argc, char** argv)
{
	if (argc < 3) {
		std::cerr << "usage: acceptance <dlsched cli> <work dir>\n";
		return 2;
	}
	const std::string cli = argv[1];
	const fs::path work = argv[2];

	int failed = 0;
	auto report = [&](int id, const std::string& name, const std::function<Outcome()>& check) {
		Outcome o;
		try {
			o = check();
		} catch (const std::exception& e) {
			o = {false, std::string("exception: ") + e.what()};
		}
		failed += !o.pass;
		std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << name << " -- " << o.detail
		          << std::endl;
	};

	std::vector<SmallInstance> instances;
	std::string instance_error;
	try {
		instances = small_instances(24);
	} catch (const std::exception& e) {
		instance_error = e.what();
	}
	auto needs_instances = [&](auto fn) {
		return [&, fn]() -> Outcome {
			if (instances.empty())
				return {false, "small instances unavailable: " + instance_error};
			return fn(instances);
		};
	};

	report(1, "closed-form index agreement", closed_form_agreement);
	report(2, "counterexample actions", counterexample);
	report(3, "full-capacity optimality", full_capacity_optimality);
	report(4, "sandwich property", needs_instances(sandwich));
	report(5, "indexability properties", indexability);
	report(6, "Poisson tail bound", poisson_bound);
	report(7, "gap-bound dominance", needs_instances(gap_dominance));
	report(8, "asymptotic gap trend", asymptotic_trend);
	report(9, "constant-cost equality at M/N = 1", constant_cost_equality);
	report(10, "CLI determinism", [&] { return cli_determinism(cli, work); });
	return failed == 0 ? 0 : 1;
}

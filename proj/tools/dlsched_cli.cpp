// Command-line front end. Every subcommand writes CSV into --out and prints
// the paths it wrote; failures print "error: <code>: <message>" to stderr.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "dlsched/bounds.hpp"
#include "dlsched/config.hpp"
#include "dlsched/error.hpp"
#include "dlsched/exact_solver.hpp"
#include "dlsched/index_io.hpp"
#include "dlsched/policies.hpp"
#include "dlsched/presets.hpp"
#include "dlsched/price_data.hpp"
#include "dlsched/simulator.hpp"
#include "dlsched/whittle_index.hpp"

namespace fs = std::filesystem;
using namespace dlsched;

namespace {

struct Globals {
	std::string config;
	std::uint64_t seed = 1;
	std::string out = ".";
	unsigned threads = 1;
	std::string index_cache;
};

ProblemSpec require_spec(const Globals& g)
{
	if (g.config.empty())
		throw ConfigError("this subcommand needs --config");
	return load_spec(g.config);
}

fs::path write_file(const Globals& g, const std::string& name, const std::string& content)
{
	fs::create_directories(g.out);
	const auto path = fs::path(g.out) / name;
	const auto tmp = fs::path(path.string() + ".tmp");
	{
		std::ofstream out(tmp, std::ios::binary);
		if (!out)
			throw ConfigError("cannot write " + tmp.string());
		out << content;
	}
	fs::rename(tmp, path);
	std::cout << path.string() << '\n';
	return path;
}

IndexTable index_for(const Globals& g, const ProblemSpec& spec, double tol, IndexMethod method)
{
	IndexBuildOptions opts;
	opts.tol = tol;
	opts.method = method;
	opts.threads = g.threads;
	if (g.index_cache.empty())
		return build_index_table(spec, opts);
	return cached_index_table(spec, opts, g.index_cache);
}

// "T:B,T:B,...[@cost_index]"
SystemState parse_state(const std::string& text, int n)
{
	SystemState state;
	std::string jobs = text;
	if (const auto at = text.find('@'); at != std::string::npos) {
		state.cost_index = std::stoul(text.substr(at + 1));
		jobs = text.substr(0, at);
	}
	std::stringstream ss(jobs);
	std::string item;
	while (std::getline(ss, item, ',')) {
		const auto colon = item.find(':');
		if (colon == std::string::npos)
			throw InvalidArgument("state entries look like T:B, got '" + item + "'");
		state.jobs.push_back({std::stoi(item.substr(0, colon)), std::stoi(item.substr(colon + 1))});
	}
	if (static_cast<int>(state.jobs.size()) != n)
		throw InvalidArgument(fmt::format("state '{}' has {} positions, config has {}", text, state.jobs.size(), n));
	return state;
}

std::string format_state(const SystemState& s)
{
	std::string out;
	for (std::size_t i = 0; i < s.jobs.size(); ++i)
		out += fmt::format("{}{}:{}", i ? " " : "", s.jobs[i].lead_time, s.jobs[i].remaining_work);
	return out;
}

std::string format_action(const Action& a)
{
	std::string out;
	for (auto v : a.active)
		out += v ? '1' : '0';
	return out;
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"Deadline scheduling with Whittle index policies"};
	app.require_subcommand(1);
	Globals g;
	app.add_option("--config", g.config, "problem config (JSON)");
	app.add_option("--seed", g.seed, "base random seed");
	app.add_option("--out", g.out, "output directory");
	app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
	app.add_option("--index-cache", g.index_cache, "directory for cached index tables");

	// fit-costs
	auto* fit = app.add_subcommand("fit-costs", "fit a cost Markov chain to a price trace");
	std::string trace_path;
	std::size_t synthetic_days = 0;
	int n_states = 5;
	std::string quantizer = "equal_frequency";
	std::string chain_json;
	fit->add_option("--trace", trace_path, "CSV with header timestamp,price");
	fit->add_option("--synthetic-days", synthetic_days, "use a generated diurnal trace of this many days");
	fit->add_option("--n-states", n_states, "number of price states");
	fit->add_option("--quantizer", quantizer, "equal_width or equal_frequency");
	fit->add_option("--json", chain_json, "also write the chain as a cost_chain JSON object");

	// build-index
	auto* build = app.add_subcommand("build-index", "compute the index table");
	double index_tol = 1e-7;
	std::string index_method = "automatic";
	build->add_option("--tol", index_tol, "index tolerance");
	build->add_option("--method", index_method, "automatic, closed_form or bisection");

	// simulate
	auto* sim = app.add_subcommand("simulate", "Monte-Carlo evaluation of policies");
	std::vector<std::string> policy_names;
	SimConfig cfg;
	std::string arrival_mode = "independent";
	sim->add_option("--policy", policy_names, "whittle, whittle-lllp, whittle-llsp, edf, llf (repeatable)");
	sim->add_option("--replications", cfg.replications, "independent replications");
	sim->add_option("--horizon", cfg.horizon, "slots per replication (0 = automatic)");
	sim->add_option("--arrival-mode", arrival_mode, "independent or poisson_uniform");
	sim->add_option("--poisson-mean", cfg.poisson_mean, "arrivals per window of max lead time slots");
	sim->add_option("--tol", index_tol, "index tolerance");

	// exact
	auto* exact = app.add_subcommand("exact", "solve the joint problem exactly on a small instance");
	std::vector<std::string> states;
	double exact_tol = 1e-9;
	bool with_dual = false;
	exact->add_option("--state", states, "T:B,T:B,...[@cost] (repeatable)")->required();
	exact->add_option("--tol", exact_tol, "value tolerance");
	exact->add_flag("--dual", with_dual, "add the dual upper bound column");

	// bounds
	auto* bnd = app.add_subcommand("bounds", "Poisson tail and gap bounds");
	std::vector<double> mus;
	std::vector<int> ms;
	std::string window_method = "monte_carlo";
	std::size_t window_samples = 100'000;
	bnd->add_option("--mu", mus, "Poisson means")->required();
	bnd->add_option("--m", ms, "capacities")->required();
	bnd->add_option("--window-method", window_method, "exact_binomial or monte_carlo (gap bound, needs --config)");
	bnd->add_option("--samples", window_samples, "Monte-Carlo windows");

	// preset
	auto* pre = app.add_subcommand("preset", "run a named experiment preset");
	std::string preset_name;
	std::string preset_file;
	std::string dump_preset;
	bool list = false;
	std::size_t preset_reps = 0;
	std::size_t preset_horizon = 0;
	std::vector<double> preset_values;
	pre->add_option("--name", preset_name, "built-in preset");
	pre->add_option("--file", preset_file, "preset JSON");
	pre->add_option("--dump", dump_preset, "write the preset JSON to this file and exit");
	pre->add_flag("--list", list, "list built-in presets");
	pre->add_option("--replications", preset_reps, "override replications");
	pre->add_option("--horizon", preset_horizon, "override horizon");
	pre->add_option("--values", preset_values, "override the sweep grid");

	try {
		app.parse(argc, argv);
	} catch (const CLI::CallForHelp& e) {
		return app.exit(e);
	} catch (const CLI::ParseError& e) {
		std::cerr << "error: usage: " << e.what() << '\n';
		return 64;
	}

	try {
		if (*fit) {
			PriceTrace trace;
			if (!trace_path.empty())
				trace = load_price_trace(trace_path);
			else if (synthetic_days > 0)
				trace = synthetic_diurnal_trace(synthetic_days, g.seed);
			else
				throw InvalidArgument("fit-costs needs --trace or --synthetic-days");
			const auto result = fit_cost_chain(trace, n_states, quantizer_from_string(quantizer));
			for (const auto& w : result.warnings)
				std::cerr << "warning: " << w << '\n';
			if (trace.dropped_rows > 0)
				std::cerr << "warning: dropped " << trace.dropped_rows << " rows with missing prices\n";
			const auto& chain = result.chain;
			std::string csv = "state,cost,occupancy,smoothed";
			for (std::size_t k = 0; k < chain.size(); ++k)
				csv += fmt::format(",p_{}", k);
			csv += '\n';
			for (std::size_t j = 0; j < chain.size(); ++j) {
				const bool smoothed = std::find(result.smoothed_rows.begin(), result.smoothed_rows.end(), j) !=
				                      result.smoothed_rows.end();
				csv += fmt::format("{},{:.17g},{},{}", j, chain.cost(j), result.occupancy[j], smoothed ? 1 : 0);
				for (std::size_t k = 0; k < chain.size(); ++k)
					csv += fmt::format(",{:.17g}", chain.probability(j, k));
				csv += '\n';
			}
			write_file(g, "cost_chain.csv", csv);
			if (!chain_json.empty()) {
				std::ofstream out(chain_json);
				out << to_json(chain).dump(2) << '\n';
			}
		} else if (*build) {
			const auto spec = require_spec(g);
			const auto table = index_for(g, spec, index_tol, index_method_from_string(index_method));
			std::ostringstream csv;
			write_index_csv(table, csv);
			write_file(g, "index.csv", csv.str());
		} else if (*sim) {
			const auto spec = require_spec(g);
			if (policy_names.empty())
				policy_names = {"whittle"};
			cfg.seed = g.seed;
			cfg.threads = g.threads;
			cfg.arrival_mode = arrival_mode_from_string(arrival_mode);
			std::shared_ptr<const IndexTable> table;
			std::vector<Policy> policies;
			for (const auto& name : policy_names) {
				const auto kind = policy_kind_from_string(name);
				if (kind == PolicyKind::edf || kind == PolicyKind::llf) {
					policies.emplace_back(kind);
				} else {
					if (!table)
						table = std::make_shared<const IndexTable>(
							index_for(g, spec, index_tol, IndexMethod::automatic));
					policies.emplace_back(kind, spec, table);
				}
			}
			const auto paired = paired_compare(spec, policies, cfg);
			std::ostringstream reps, summary, diffs;
			write_replications_csv(paired.reports, reps);
			write_summary_csv(paired.reports, summary);
			diffs << "first,second,mean_difference,stderr\n";
			for (const auto& d : paired.differences)
				diffs << fmt::format("{},{},{:.17g},{:.17g}\n", d.first, d.second, d.mean, d.stderr_mean);
			write_file(g, "simulate_replications.csv", reps.str());
			write_file(g, "simulate_summary.csv", summary.str());
			write_file(g, "simulate_paired.csv", diffs.str());
		} else if (*exact) {
			const auto spec = require_spec(g);
			JointSolveOptions opts;
			opts.tol = exact_tol;
			opts.threads = g.threads;
			const auto solved = solve_joint(spec, opts);
			std::vector<double> dual_grid;
			if (with_dual)
				dual_grid = default_dual_grid(build_index_table(spec));
			std::string csv = "state,cost_index,value,action";
			csv += with_dual ? ",dual_upper_bound\n" : "\n";
			for (const auto& text : states) {
				const auto s = parse_state(text, spec.n);
				csv += fmt::format("{},{},{:.17g},{}", format_state(s), s.cost_index, solved.value(s),
				                   format_action(solved.greedy(s)));
				if (with_dual)
					csv += fmt::format(",{:.17g}", lagrangian_upper_bound(spec, s, dual_grid).value);
				csv += '\n';
			}
			write_file(g, "exact.csv", csv);
		} else if (*bnd) {
			std::optional<ProblemSpec> spec;
			if (!g.config.empty())
				spec = load_spec(g.config);
			std::string csv = "mu,M,exact_tail,stirling_bound,klar_bound,gap_bound\n";
			std::optional<ArrivalWindowStats> stats;
			if (spec) {
				WindowOptions wo;
				wo.samples = window_samples;
				wo.seed = g.seed;
				wo.threads = g.threads;
				stats = arrival_window_distribution(*spec, window_method_from_string(window_method), wo);
			}
			std::size_t rows = 0;
			for (double mu : mus) {
				for (int m : ms) {
					// The grid is a cartesian product; pairs outside the bound's
					// range are reported and left out rather than aborting the run.
					if (m >= 1 && mu >= 0.0 && !(m > mu - 1.0)) {
						std::cerr << fmt::format("warning: skipping mu={} M={} (needs M > mu - 1)\n", mu, m);
						continue;
					}
					const auto tail = poisson_tail_bound(mu, m);
					++rows;
					std::string gap;
					if (spec) {
						auto with_m = *spec;
						with_m.m = m;
						gap = fmt::format("{:.17g}", gap_bound(with_m, *stats));
					}
					csv += fmt::format("{},{},{:.17g},{:.17g},{:.17g},{}\n", mu, m, tail.exact_tail,
					                   tail.stirling_bound, tail.klar_bound, gap);
				}
			}
			if (rows == 0)
				throw DomainError("no (mu, M) pair satisfies M > mu - 1");
			write_file(g, "bounds.csv", csv);
		} else if (*pre) {
			if (list) {
				for (const auto& name : preset_names())
					std::cout << name << '\n';
				return 0;
			}
			ExperimentPreset preset;
			if (!preset_file.empty())
				preset = load_preset(preset_file);
			else if (!preset_name.empty())
				preset = builtin_preset(preset_name);
			else
				throw InvalidArgument("preset needs --name, --file or --list");
			preset.sim.seed = g.seed;
			if (preset_reps > 0)
				preset.sim.replications = preset_reps;
			if (preset_horizon > 0)
				preset.sim.horizon = preset_horizon;
			if (!preset_values.empty())
				preset.sweep.values = preset_values;
			if (!dump_preset.empty()) {
				std::ofstream out(dump_preset);
				out << to_json(preset).dump(2) << '\n';
				return 0;
			}
			PresetOptions opts;
			opts.threads = g.threads;
			opts.index_cache = g.index_cache;
			std::cout << run_preset(preset, g.out, opts).string() << '\n';
		}
	} catch (const Error& e) {
		std::cerr << "error: " << e.code() << ": " << e.what() << '\n';
		return 2;
	} catch (const std::exception& e) {
		std::cerr << "error: internal: " << e.what() << '\n';
		return 1;
	}
	return 0;
}

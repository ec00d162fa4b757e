#include "dlsched/presets.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <fmt/format.h>

#include "dlsched/bounds.hpp"
#include "dlsched/config.hpp"
#include "dlsched/error.hpp"
#include "dlsched/exact_solver.hpp"
#include "dlsched/index_io.hpp"
#include "dlsched/price_data.hpp"

namespace dlsched {

using nlohmann::json;

namespace {

// Q(0,0) = empty; remaining mass uniform over jobs with B <= min(T, max_work).
ArrivalDistribution feasible_arrivals(double empty, int max_lead, int max_work)
{
	std::vector<ArrivalOutcome> outcomes{{JobState{0, 0}, empty}};
	int count = 0;
	for (int t = 1; t <= max_lead; ++t)
		count += std::min(t, max_work);
	for (int t = 1; t <= max_lead; ++t)
		for (int b = 1; b <= std::min(t, max_work); ++b)
			outcomes.push_back({JobState{t, b}, (1.0 - empty) / count});
	return ArrivalDistribution(std::move(outcomes));
}

CostChain diurnal_chain()
{
	return fit_cost_chain(synthetic_diurnal_trace(120, 2024), 5, Quantizer::equal_frequency).chain;
}

ProblemSpec base_spec(int n, CostChain costs)
{
	ProblemSpec spec;
	spec.n = n;
	spec.m = std::max(1, n / 2);
	spec.beta = 0.999;
	spec.arrivals = feasible_arrivals(0.3, 12, 9);
	spec.penalty = PenaltyFunction::quadratic(0.2);
	spec.costs = std::move(costs);
	return spec;
}

int rounded_capacity(double ratio, int n)
{
	return std::max(1, static_cast<int>(std::lround(ratio * n)));
}

void atomic_write(const std::filesystem::path& path, const std::string& content)
{
	const auto tmp = std::filesystem::path(path.string() + ".tmp");
	try {
		{
			std::ofstream out(tmp, std::ios::binary);
			if (!out)
				throw ConfigError("cannot write " + tmp.string());
			out << content;
			if (!out)
				throw ConfigError("failed writing " + tmp.string());
		}
		std::filesystem::rename(tmp, path);
	} catch (...) {
		std::error_code ec;
		std::filesystem::remove(tmp, ec);
		throw;
	}
}

std::string optional_cell(const std::optional<double>& v)
{
	return v ? fmt::format("{:.17g}", *v) : std::string();
}

} // namespace

json to_json(const ExperimentPreset& p)
{
	json modes = json::array();
	for (auto m : p.arrival_modes)
		modes.push_back(to_string(m));
	json policies = json::array();
	for (auto k : p.policies)
		policies.push_back(to_string(k));
	return json{
		{"name", p.name},
		{"description", p.description},
		{"spec", to_json(p.spec)},
		{"sweep", {{"variable", p.sweep.variable}, {"values", p.sweep.values}, {"fixed_ratio", p.sweep.fixed_ratio}}},
		{"sim",
		 {{"horizon", p.sim.horizon},
		  {"replications", p.sim.replications},
		  {"seed", p.sim.seed},
		  {"poisson_mean", p.sim.poisson_mean}}},
		{"arrival_modes", std::move(modes)},
		{"policies", std::move(policies)},
		{"index_tol", p.index_tol},
		{"bounds", p.bounds},
		{"window_samples", p.window_samples},
		{"dual_points", p.dual_points},
	};
}

ExperimentPreset preset_from_json(const json& j)
{
	try {
		ExperimentPreset p;
		p.name = j.at("name").get<std::string>();
		p.description = j.value("description", "");
		p.spec = spec_from_json(j.at("spec"));
		const auto& sw = j.at("sweep");
		p.sweep.variable = sw.at("variable").get<std::string>();
		p.sweep.values = sw.at("values").get<std::vector<double>>();
		p.sweep.fixed_ratio = sw.value("fixed_ratio", 0.5);
		if (const auto sim = j.find("sim"); sim != j.end()) {
			p.sim.horizon = sim->value("horizon", std::size_t{0});
			p.sim.replications = sim->value("replications", std::size_t{20});
			p.sim.seed = sim->value("seed", std::uint64_t{1});
			p.sim.poisson_mean = sim->value("poisson_mean", 0.0);
		}
		if (j.contains("arrival_modes")) {
			p.arrival_modes.clear();
			for (const auto& m : j.at("arrival_modes"))
				p.arrival_modes.push_back(arrival_mode_from_string(m.get<std::string>()));
		}
		for (const auto& k : j.at("policies"))
			p.policies.push_back(policy_kind_from_string(k.get<std::string>()));
		p.index_tol = j.value("index_tol", 1e-7);
		p.bounds = j.value("bounds", false);
		p.window_samples = j.value("window_samples", std::size_t{20'000});
		p.dual_points = j.value("dual_points", std::size_t{200});

		if (p.sweep.values.empty())
			throw ConfigError("preset sweep grid is empty");
		if (p.policies.empty())
			throw ConfigError("preset lists no policies");
		if (p.arrival_modes.empty())
			throw ConfigError("preset lists no arrival modes");
		static const std::vector<std::string> variables{"m_ratio", "n", "m_mu", "n_mu"};
		if (std::find(variables.begin(), variables.end(), p.sweep.variable) == variables.end())
			throw ConfigError("unknown sweep variable '" + p.sweep.variable + "'");
		return p;
	} catch (const json::exception& e) {
		throw ConfigError(std::string("bad preset: ") + e.what());
	}
}

ExperimentPreset load_preset(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if (!in)
		throw ConfigError("cannot open preset " + path.string());
	try {
		return preset_from_json(json::parse(in));
	} catch (const json::parse_error& e) {
		throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
	}
}

const std::vector<std::string>& preset_names()
{
	static const std::vector<std::string> names{
		"constant-cost-ratio", "constant-cost-size", "dynamic-cost-ratio", "dynamic-cost-size",
		"asymptotic-gap",      "hard-deadline",      "arrival-validation",
	};
	return names;
}

ExperimentPreset builtin_preset(const std::string& name)
{
	ExperimentPreset p;
	p.name = name;
	p.sim.replications = 20;
	p.sim.seed = 1;
	const std::vector<PolicyKind> all = all_policy_kinds();
	const std::vector<double> ratios{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
	const std::vector<double> sizes{10, 20, 40, 60, 80, 100};

	if (name == "constant-cost-ratio" || name == "dynamic-cost-ratio") {
		const bool dynamic = name.starts_with("dynamic");
		p.description = dynamic ? "reward vs M/N, Markov-modulated cost, N=10"
		                        : "reward vs M/N, constant cost 0.5, N=10";
		p.spec = base_spec(10, dynamic ? diurnal_chain() : CostChain::constant(0.5));
		p.sweep = {"m_ratio", ratios, 0.5};
		p.policies = all;
	} else if (name == "constant-cost-size" || name == "dynamic-cost-size") {
		const bool dynamic = name.starts_with("dynamic");
		p.description = dynamic ? "reward vs N at M/N=0.5, Markov-modulated cost"
		                        : "reward vs N at M/N=0.5, constant cost 0.5";
		p.spec = base_spec(10, dynamic ? diurnal_chain() : CostChain::constant(0.5));
		p.sweep = {"n", sizes, 0.5};
		p.policies = all;
	} else if (name == "asymptotic-gap") {
		p.description = "gap to the dual upper bound vs M with M jobs per window, N=100";
		p.spec = base_spec(100, diurnal_chain());
		p.sweep = {"m_mu", {5, 10, 20, 40}, 0.5};
		p.policies = {PolicyKind::whittle, PolicyKind::whittle_lllp, PolicyKind::edf, PolicyKind::llf};
		p.bounds = true;
	} else if (name == "hard-deadline") {
		p.description = "completion ratio vs M/N, cost 0.95, linear penalty 10B, N=100";
		p.spec = base_spec(100, CostChain::constant(0.95));
		p.spec.penalty = PenaltyFunction::linear(10.0);
		p.sweep = {"m_ratio", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0}, 0.5};
		p.policies = {PolicyKind::whittle, PolicyKind::whittle_llsp, PolicyKind::whittle_lllp, PolicyKind::edf,
		              PolicyKind::llf};
	} else if (name == "arrival-validation") {
		p.description = "independent vs pooled Poisson arrivals, M=10, M jobs per window";
		p.spec = base_spec(20, diurnal_chain());
		p.spec.m = 10;
		p.sweep = {"n_mu", {20, 50, 100, 200}, 0.5};
		p.policies = {PolicyKind::whittle, PolicyKind::edf, PolicyKind::llf};
		p.arrival_modes = {ArrivalMode::independent, ArrivalMode::poisson_uniform};
	} else {
		throw InvalidArgument("unknown preset '" + name + "'");
	}
	return p;
}

ArrivalDistribution calibrate_arrivals(const ArrivalDistribution& arrivals, int n, int window, double mu)
{
	const double job_mass = 1.0 - arrivals.empty_probability();
	if (job_mass <= 0.0)
		throw InvalidArgument("arrival distribution has no jobs to rescale");
	const double mean_lead = arrivals.mean_lead_time_given_job();
	// Per position, one admission per renewal cycle of mean length
	// q E[T] + (1 - q); solve n * window * q / (q E[T] + 1 - q) = mu for q.
	const double q = mu / (n * static_cast<double>(window) - mu * (mean_lead - 1.0));
	if (!(q > 0.0) || q > 1.0)
		throw InvalidArgument(fmt::format("cannot reach {} arrivals per window with {} positions", mu, n));
	std::vector<ArrivalOutcome> outcomes{{JobState{0, 0}, 1.0 - q}};
	for (const auto& o : arrivals.outcomes())
		if (!o.job.empty())
			outcomes.push_back({o.job, q * o.probability / job_mass});
	return ArrivalDistribution(std::move(outcomes));
}

SweepPoint instantiate(const ExperimentPreset& preset, double value)
{
	SweepPoint point{value, preset.spec, preset.sim};
	auto& spec = point.spec;
	const auto& var = preset.sweep.variable;
	if (var == "m_ratio") {
		spec.m = rounded_capacity(value, spec.n);
	} else if (var == "n") {
		spec.n = static_cast<int>(std::lround(value));
		spec.m = rounded_capacity(preset.sweep.fixed_ratio, spec.n);
	} else if (var == "m_mu") {
		spec.m = static_cast<int>(std::lround(value));
		spec.arrivals = calibrate_arrivals(preset.spec.arrivals, spec.n, spec.max_lead_time(), spec.m);
		point.sim.poisson_mean = spec.m;
	} else if (var == "n_mu") {
		spec.n = static_cast<int>(std::lround(value));
		spec.arrivals = calibrate_arrivals(preset.spec.arrivals, spec.n, spec.max_lead_time(), spec.m);
		point.sim.poisson_mean = spec.m;
	} else {
		throw ConfigError("unknown sweep variable '" + var + "'");
	}
	spec.validate();
	return point;
}

std::vector<PresetRow> evaluate_preset(const ExperimentPreset& preset, const PresetOptions& options)
{
	std::map<std::string, std::shared_ptr<const IndexTable>> tables;
	auto table_for = [&](const ProblemSpec& spec) {
		const auto hash = arm_hash(spec);
		if (auto it = tables.find(hash); it != tables.end())
			return it->second;
		IndexBuildOptions build;
		build.tol = preset.index_tol;
		build.threads = options.threads;
		auto table = options.index_cache.empty() ? build_index_table(spec, build)
		                                         : cached_index_table(spec, build, options.index_cache);
		auto shared = std::make_shared<const IndexTable>(std::move(table));
		tables.emplace(hash, shared);
		return shared;
	};

	std::vector<PresetRow> rows;
	for (double value : preset.sweep.values) {
		auto point = instantiate(preset, value);
		point.sim.threads = options.threads;
		std::shared_ptr<const IndexTable> table;
		std::vector<Policy> policies;
		for (auto kind : preset.policies) {
			if (kind == PolicyKind::edf || kind == PolicyKind::llf) {
				policies.emplace_back(kind);
			} else {
				if (!table)
					table = table_for(point.spec);
				policies.emplace_back(kind, point.spec, table);
			}
		}

		for (auto mode : preset.arrival_modes) {
			SimConfig sim = point.sim;
			sim.arrival_mode = mode;
			const auto paired = paired_compare(point.spec, policies, sim);

			std::optional<double> upper, window_bound;
			if (preset.bounds && mode == ArrivalMode::independent) {
				const auto initial = sim.initial_state ? *sim.initial_state : SystemState::empty(point.spec.n);
				const auto grid = default_dual_grid(*table_for(point.spec), preset.dual_points);
				upper = lagrangian_upper_bound(point.spec, initial, grid).value;
				bool binomial = true;
				for (const auto& o : point.spec.arrivals.outcomes())
					binomial &= o.job.empty() || o.job.lead_time == point.spec.max_lead_time();
				WindowOptions wo;
				wo.samples = preset.window_samples;
				wo.seed = sim.seed;
				wo.threads = options.threads;
				const auto stats = arrival_window_distribution(
					point.spec, binomial ? WindowMethod::exact_binomial : WindowMethod::monte_carlo, wo);
				window_bound = gap_bound(point.spec, stats);
			}

			for (std::size_t i = 0; i < paired.reports.size(); ++i) {
				const auto& rep = paired.reports[i];
				PresetRow row;
				row.sweep_value = value;
				row.policy = rep.policy;
				row.arrival_mode = mode;
				row.n = point.spec.n;
				row.m = point.spec.m;
				row.mean = rep.mean;
				row.stderr_mean = rep.stderr_mean;
				row.completion_ratio = rep.completion_ratio;
				row.completion_stderr = rep.completion_stderr;
				if (i > 0) {
					const auto& d = paired.differences[i - 1];
					row.diff_vs_first = -d.mean;
					row.diff_stderr = d.stderr_mean;
				}
				double arrived = 0.0;
				for (const auto& rec : rep.records)
					arrived += static_cast<double>(rec.arrived);
				row.mean_arrived = arrived / static_cast<double>(rep.records.size());
				if (upper) {
					row.upper_bound = upper;
					row.gap = *upper - rep.mean;
					row.gap_bound = window_bound;
					if (row.mean_arrived > 0.0) {
						row.gap_per_job = *row.gap / row.mean_arrived;
						row.gap_bound_per_job = *window_bound / row.mean_arrived;
					}
				}
				rows.push_back(std::move(row));
			}
		}
	}
	return rows;
}

void write_preset_csv(const std::vector<PresetRow>& rows, std::ostream& out)
{
	out << "sweep_value,policy,arrival_mode,n,m,mean,stderr,completion_ratio,completion_stderr,diff_vs_first,"
	       "diff_stderr,mean_arrived,upper_bound,gap,gap_per_job,gap_bound,gap_bound_per_job\n";
	for (const auto& r : rows)
		out << fmt::format("{},{},{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{},{},{}\n",
		                   r.sweep_value, r.policy, to_string(r.arrival_mode), r.n, r.m, r.mean, r.stderr_mean,
		                   r.completion_ratio, r.completion_stderr, r.diff_vs_first, r.diff_stderr, r.mean_arrived,
		                   optional_cell(r.upper_bound), optional_cell(r.gap), optional_cell(r.gap_per_job),
		                   optional_cell(r.gap_bound), optional_cell(r.gap_bound_per_job));
}

std::filesystem::path run_preset(const ExperimentPreset& preset, const std::filesystem::path& out_dir,
                                 const PresetOptions& options)
{
	const auto rows = evaluate_preset(preset, options);
	std::ostringstream csv;
	write_preset_csv(rows, csv);
	std::filesystem::create_directories(out_dir);
	const auto path = out_dir / (preset.name + ".csv");
	atomic_write(path, csv.str());
	return path;
}

} // namespace dlsched

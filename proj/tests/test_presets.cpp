#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dlsched/error.hpp"
#include "dlsched/presets.hpp"

using namespace dlsched;

namespace {

ExperimentPreset tiny_preset()
{
	ExperimentPreset p;
	p.name = "tiny";
	p.description = "three positions";
	p.spec.n = 3;
	p.spec.m = 1;
	p.spec.beta = 0.9;
	p.spec.arrivals = ArrivalDistribution({{JobState{0, 0}, 0.4}, {JobState{3, 2}, 0.6}});
	p.spec.penalty = PenaltyFunction::quadratic(0.2);
	p.spec.costs = CostChain({0.3, 0.7}, {{0.6, 0.4}, {0.4, 0.6}});
	p.sweep.variable = "m_ratio";
	p.sweep.values = {0.34, 1.0};
	p.sim.replications = 3;
	p.sim.horizon = 40;
	p.policies = {PolicyKind::whittle, PolicyKind::edf};
	return p;
}

std::string slurp(const std::filesystem::path& path)
{
	std::ifstream in(path, std::ios::binary);
	std::ostringstream s;
	s << in.rdbuf();
	return s.str();
}

} // namespace

TEST_CASE("built-in presets")
{
	const auto& names = preset_names();
	CHECK(names.size() == 7);
	for (const auto& name : names) {
		const auto p = builtin_preset(name);
		CHECK(p.name == name);
		CHECK_FALSE(p.policies.empty());
		const auto j = to_json(p);
		CHECK(to_json(preset_from_json(j)) == j);
		for (double v : p.sweep.values)
			CHECK_NOTHROW(instantiate(p, v));
	}
	CHECK_THROWS_AS(builtin_preset("fig9"), InvalidArgument);

	auto j = to_json(builtin_preset("hard-deadline"));
	j["sweep"]["variable"] = "beta";
	CHECK_THROWS_AS(preset_from_json(j), ConfigError);
	j = to_json(builtin_preset("hard-deadline"));
	j["policies"] = nlohmann::json::array();
	CHECK_THROWS_AS(preset_from_json(j), ConfigError);
}

TEST_CASE("sweep instantiation")
{
	auto p = tiny_preset();
	CHECK(instantiate(p, 0.34).spec.m == 1);
	CHECK(instantiate(p, 1.0).spec.m == 3);

	const auto size = builtin_preset("constant-cost-size");
	const auto pt = instantiate(size, 40);
	CHECK(pt.spec.n == 40);
	CHECK(pt.spec.m == 20);

	const auto gap = builtin_preset("asymptotic-gap");
	const auto g = instantiate(gap, 10);
	CHECK(g.spec.m == 10);
	CHECK(g.sim.poisson_mean == 10.0);
	CHECK(gap.bounds);
}

TEST_CASE("arrival calibration matches simulated admissions")
{
	const ArrivalDistribution mix({{JobState{0, 0}, 0.5}, {JobState{4, 2}, 0.3}, {JobState{2, 1}, 0.2}});
	const int n = 10, window = 4;
	const double mu = 3.0;
	const auto q = calibrate_arrivals(mix, n, window, mu);
	// Job mix is preserved.
	CHECK(q.probability({4, 2}) / q.probability({2, 1}) == doctest::Approx(1.5));

	// Count admissions into one position over a long run.
	Rng rng(31);
	JobState s{};
	const int slots = 400000;
	long admitted = 0;
	for (int t = 0; t < slots; ++t) {
		const JobState next = step_job(s, 0, q, rng);
		admitted += s.lead_time <= 1 && !next.empty();
		s = next;
	}
	const double per_window = static_cast<double>(admitted) / slots * window * n;
	CHECK(per_window == doctest::Approx(mu).epsilon(0.02));

	CHECK_THROWS_AS(calibrate_arrivals(mix, 2, window, 50.0), InvalidArgument);
	CHECK_THROWS_AS(calibrate_arrivals(ArrivalDistribution::point_mass({0, 0}), n, window, mu), InvalidArgument);
}

TEST_CASE("preset evaluation and output")
{
	const auto p = tiny_preset();
	const auto rows = evaluate_preset(p);
	REQUIRE(rows.size() == 4);
	CHECK(rows[0].policy == "whittle");
	CHECK(rows[0].diff_vs_first == 0.0);
	CHECK(rows[1].diff_vs_first == doctest::Approx(rows[1].mean - rows[0].mean));
	CHECK_FALSE(rows[0].upper_bound.has_value());

	const auto dir = std::filesystem::temp_directory_path() / "dlsched_preset_test";
	std::filesystem::remove_all(dir);
	const auto path = run_preset(p, dir);
	CHECK(path == dir / "tiny.csv");
	CHECK_FALSE(std::filesystem::exists(dir / "tiny.csv.tmp"));
	const auto first = slurp(path);
	CHECK(first.rfind("sweep_value,policy,arrival_mode,n,m,mean,stderr,", 0) == 0);
	CHECK(std::count(first.begin(), first.end(), '\n') == 5);
	run_preset(p, dir);
	CHECK(slurp(path) == first);

	// A failing evaluation leaves no file behind.
	auto broken = p;
	broken.name = "broken";
	broken.sweep.variable = "n";
	broken.sweep.values = {0};
	CHECK_THROWS(run_preset(broken, dir));
	CHECK_FALSE(std::filesystem::exists(dir / "broken.csv"));
	CHECK_FALSE(std::filesystem::exists(dir / "broken.csv.tmp"));

	// Bound columns.
	auto bounded = p;
	bounded.bounds = true;
	bounded.window_samples = 2000;
	bounded.sweep.values = {0.34};
	const auto b = evaluate_preset(bounded);
	REQUIRE(b[0].upper_bound.has_value());
	CHECK(*b[0].gap == doctest::Approx(*b[0].upper_bound - b[0].mean));
	CHECK(*b[0].gap_bound >= 0.0);
	std::filesystem::remove_all(dir);
}

TEST_CASE("preset files")
{
	const auto dir = std::filesystem::temp_directory_path() / "dlsched_preset_file_test";
	std::filesystem::create_directories(dir);
	const auto file = dir / "p.json";
	{
		std::ofstream out(file);
		out << to_json(tiny_preset()).dump(2);
	}
	CHECK(to_json(load_preset(file)) == to_json(tiny_preset()));
	{
		std::ofstream out(file);
		out << "{ not json";
	}
	CHECK_THROWS_AS(load_preset(file), ConfigError);
	CHECK_THROWS_AS(load_preset(dir / "missing.json"), ConfigError);
	std::filesystem::remove_all(dir);
}

TEST_CASE("least slack first helps completion under hard deadlines")
{
	auto preset = builtin_preset("hard-deadline");
	const auto point = instantiate(preset, 0.3);
	auto cfg = point.sim;
	cfg.replications = 10;
	auto table = std::make_shared<const IndexTable>(build_index_table(point.spec));
	const auto paired = paired_compare(
		point.spec, {Policy(PolicyKind::whittle_llsp, point.spec, table), Policy(PolicyKind::whittle, point.spec, table)},
		cfg);
	const auto& llsp = paired.reports[0];
	const auto& plain = paired.reports[1];
	const double se = std::hypot(llsp.completion_stderr, plain.completion_stderr);
	CHECK(llsp.completion_ratio >= plain.completion_ratio - 2 * se);
}

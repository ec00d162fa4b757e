#include "dlsched/config.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "dlsched/error.hpp"

namespace dlsched {

using nlohmann::json;

namespace {

template <class T>
T required(const json& j, const char* key)
{
	if (!j.contains(key))
		throw ConfigError(fmt::format("missing key '{}'", key));
	try {
		return j.at(key).get<T>();
	} catch (const json::exception& e) {
		throw ConfigError(fmt::format("bad value for '{}': {}", key, e.what()));
	}
}

std::uint64_t fnv1a(const std::string& bytes)
{
	std::uint64_t h = 0xcbf29ce484222325ULL;
	for (unsigned char ch : bytes) {
		h ^= ch;
		h *= 0x100000001b3ULL;
	}
	return h;
}

} // namespace

json to_json(const CostChain& chain)
{
	return json{{"states", chain.states()}, {"transition", chain.transition()}};
}

CostChain cost_chain_from_json(const json& j)
{
	return CostChain(required<std::vector<double>>(j, "states"),
	                 required<std::vector<std::vector<double>>>(j, "transition"));
}

json to_json(const PenaltyFunction& penalty)
{
	json j{{"kind", to_string(penalty.kind())}};
	if (penalty.kind() == PenaltyFunction::Kind::tabulated)
		j["values"] = penalty.table();
	else
		j["kappa"] = penalty.kappa();
	return j;
}

PenaltyFunction penalty_from_json(const json& j)
{
	const auto kind = penalty_kind_from_string(required<std::string>(j, "kind"));
	if (kind == PenaltyFunction::Kind::tabulated)
		return PenaltyFunction::tabulated(required<std::vector<double>>(j, "values"));
	return PenaltyFunction(kind, required<double>(j, "kappa"));
}

json to_json(const ProblemSpec& spec)
{
	json arrivals = json::array();
	for (const auto& o : spec.arrivals.outcomes())
		arrivals.push_back({{"t", o.job.lead_time}, {"b", o.job.remaining_work}, {"prob", o.probability}});
	json j{
		{"n", spec.n},
		{"m", spec.m},
		{"beta", spec.beta},
		{"penalty", to_json(spec.penalty)},
		{"arrivals", std::move(arrivals)},
		{"cost_chain", to_json(spec.costs)},
	};
	if (spec.lead_time_floor > 0)
		j["max_lead_time"] = spec.lead_time_floor;
	if (spec.work_floor > 0)
		j["max_work"] = spec.work_floor;
	return j;
}

ProblemSpec spec_from_json(const json& j)
{
	if (!j.is_object())
		throw ConfigError("config must be a JSON object");
	ProblemSpec spec;
	spec.n = required<int>(j, "n");
	spec.m = required<int>(j, "m");
	spec.beta = required<double>(j, "beta");
	if (!j.contains("penalty"))
		throw ConfigError("missing key 'penalty'");
	spec.penalty = penalty_from_json(j.at("penalty"));
	if (!j.contains("arrivals") || !j.at("arrivals").is_array())
		throw ConfigError("'arrivals' must be an array");
	std::vector<ArrivalOutcome> outcomes;
	for (const auto& a : j.at("arrivals"))
		outcomes.push_back({JobState{required<int>(a, "t"), required<int>(a, "b")}, required<double>(a, "prob")});
	spec.arrivals = ArrivalDistribution(std::move(outcomes));
	if (!j.contains("cost_chain"))
		throw ConfigError("missing key 'cost_chain'");
	spec.costs = cost_chain_from_json(j.at("cost_chain"));
	spec.lead_time_floor = j.value("max_lead_time", 0);
	spec.work_floor = j.value("max_work", 0);
	spec.validate();
	return spec;
}

ProblemSpec load_spec(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if (!in)
		throw ConfigError("cannot open config " + path.string());
	try {
		return spec_from_json(json::parse(in));
	} catch (const json::parse_error& e) {
		throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
	}
}

void save_spec(const ProblemSpec& spec, const std::filesystem::path& path)
{
	std::ofstream out(path);
	if (!out)
		throw ConfigError("cannot write config " + path.string());
	out << to_json(spec).dump(2) << '\n';
}

std::string arm_hash(const ProblemSpec& spec)
{
	json j = to_json(spec);
	j.erase("n");
	j.erase("m");
	return fmt::format("{:016x}", fnv1a(j.dump()));
}

} // namespace dlsched

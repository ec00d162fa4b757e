#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dlsched/core_model.hpp"
#include "dlsched/policies.hpp"
#include "dlsched/simulator.hpp"

namespace dlsched {

/// What a sweep value changes:
///   m_ratio  M = round(v N)
///   n        N = v, M = round(fixed_ratio N)
///   m_mu     M = v, arrivals rescaled so that M jobs arrive per window
///   n_mu     N = v, M fixed, arrivals rescaled to M jobs per window
struct Sweep {
	std::string variable = "m_ratio";
	std::vector<double> values;
	double fixed_ratio = 0.5;
};

struct ExperimentPreset {
	std::string name;
	std::string description;
	ProblemSpec spec;
	Sweep sweep;
	SimConfig sim;
	std::vector<ArrivalMode> arrival_modes{ArrivalMode::independent};
	std::vector<PolicyKind> policies;
	double index_tol = 1e-7;
	/// Adds the dual upper bound and the gap bound to every row.
	bool bounds = false;
	std::size_t window_samples = 20'000;
	std::size_t dual_points = 200;
};

nlohmann::json to_json(const ExperimentPreset& preset);
ExperimentPreset preset_from_json(const nlohmann::json& j);
ExperimentPreset load_preset(const std::filesystem::path& path);

const std::vector<std::string>& preset_names();
/// Throws InvalidArgument for an unknown name.
ExperimentPreset builtin_preset(const std::string& name);

/// Arrival distribution with the same job mix as `arrivals` but an empty
/// probability chosen so that `n` positions admit `mu` jobs per window of
/// T̄ slots on average.
ArrivalDistribution calibrate_arrivals(const ArrivalDistribution& arrivals, int n, int window, double mu);

/// Spec, simulation settings, and Poisson mean for one sweep value.
struct SweepPoint {
	double value = 0.0;
	ProblemSpec spec;
	SimConfig sim;
};

SweepPoint instantiate(const ExperimentPreset& preset, double value);

struct PresetRow {
	double sweep_value = 0.0;
	std::string policy;
	ArrivalMode arrival_mode = ArrivalMode::independent;
	int n = 0;
	int m = 0;
	double mean = 0.0;
	double stderr_mean = 0.0;
	double completion_ratio = 1.0;
	double completion_stderr = 0.0;
	/// Paired difference against the first policy of the preset.
	double diff_vs_first = 0.0;
	double diff_stderr = 0.0;
	double mean_arrived = 0.0;
	std::optional<double> upper_bound;
	std::optional<double> gap;
	std::optional<double> gap_per_job;
	std::optional<double> gap_bound;
	std::optional<double> gap_bound_per_job;
};

struct PresetOptions {
	unsigned threads = 1;
	/// Directory for on-disk index caches; empty keeps them in memory.
	std::filesystem::path index_cache;
};

std::vector<PresetRow> evaluate_preset(const ExperimentPreset& preset, const PresetOptions& options = {});

void write_preset_csv(const std::vector<PresetRow>& rows, std::ostream& out);

/// Writes <out_dir>/<name>.csv atomically and returns its path. Nothing is
/// left behind when evaluation fails.
std::filesystem::path run_preset(const ExperimentPreset& preset, const std::filesystem::path& out_dir,
                                 const PresetOptions& options = {});

} // namespace dlsched

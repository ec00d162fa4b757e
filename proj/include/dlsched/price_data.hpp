#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "dlsched/core_model.hpp"

namespace dlsched {

/// Ordered price samples. Timestamps are seconds since the epoch for
/// ISO-8601 input and raw slot indices for integer input.
struct PriceTrace {
	std::vector<std::int64_t> timestamps;
	std::vector<double> prices;
	/// Spacing of the first two samples, in timestamp units.
	std::int64_t slot_duration = 1;
	/// Rows dropped during cleaning because the price was missing.
	std::size_t dropped_rows = 0;

	std::size_t size() const noexcept { return prices.size(); }
};

/// Reads CSV with header "timestamp,price". Rows with an empty or
/// non-numeric price are dropped; timestamps must be strictly increasing.
PriceTrace read_price_trace(std::istream& in);
PriceTrace load_price_trace(const std::filesystem::path& path);

/// Hourly prices with a daily cycle and AR(1) noise, for presets and tests
/// that need a realistic cost process without external data.
PriceTrace synthetic_diurnal_trace(std::size_t days, std::uint64_t seed);

enum class Quantizer { equal_width, equal_frequency };

std::string to_string(Quantizer q);
Quantizer quantizer_from_string(const std::string& name);

struct CostChainFit {
	CostChain chain;
	/// Samples per state after merging.
	std::vector<std::size_t> occupancy;
	/// States whose row had no observed transition and was smoothed.
	std::vector<std::size_t> smoothed_rows;
	std::vector<std::string> warnings;
};

/// Needs n_states >= 2 and at least 10 * n_states transitions
/// (InsufficientData). A constant trace yields a one-state chain and a
/// warning.
CostChainFit fit_cost_chain(const PriceTrace& trace, int n_states, Quantizer quantizer);

} // namespace dlsched

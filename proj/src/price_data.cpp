#include "dlsched/price_data.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "dlsched/error.hpp"

namespace dlsched {

namespace {

std::string trim(std::string s)
{
	const auto notspace = [](unsigned char c) { return !std::isspace(c); };
	s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
	s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
	return s;
}

bool is_integer(const std::string& s)
{
	if (s.empty())
		return false;
	const std::size_t start = s[0] == '-' ? 1 : 0;
	return start < s.size() && std::all_of(s.begin() + static_cast<std::ptrdiff_t>(start), s.end(),
	                                       [](unsigned char c) { return std::isdigit(c); });
}

// YYYY-MM-DD[(T| )HH:MM[:SS]][Z]
bool parse_iso(const std::string& s, std::int64_t& seconds)
{
	int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
	char sep = 0;
	int used = 0;
	if (std::sscanf(s.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &used) != 3 || used != 10)
		return false;
	std::string rest = s.substr(10);
	if (!rest.empty()) {
		int more = 0;
		if (std::sscanf(rest.c_str(), "%c%2d:%2d%n", &sep, &h, &mi, &more) != 3 || (sep != 'T' && sep != ' '))
			return false;
		rest = rest.substr(static_cast<std::size_t>(more));
		if (!rest.empty() && rest[0] == ':') {
			int more2 = 0;
			if (std::sscanf(rest.c_str(), ":%2d%n", &sec, &more2) != 1)
				return false;
			rest = rest.substr(static_cast<std::size_t>(more2));
		}
		if (!(rest.empty() || rest == "Z"))
			return false;
	}
	using namespace std::chrono;
	const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
	if (!ymd.ok() || h > 23 || mi > 59 || sec > 60)
		return false;
	seconds = sys_days{ymd}.time_since_epoch().count() * 86400LL + h * 3600LL + mi * 60LL + sec;
	return true;
}

double normal(Rng& rng)
{
	const double u1 = 1.0 - uniform01(rng);
	const double u2 = uniform01(rng);
	return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace

PriceTrace read_price_trace(std::istream& in)
{
	std::string line;
	if (!std::getline(in, line) || trim(line) != "timestamp,price")
		throw ConfigError("price trace must start with the header 'timestamp,price'");
	PriceTrace trace;
	int kind = 0; // 1 integer, 2 ISO
	std::size_t row = 1;
	while (std::getline(in, line)) {
		++row;
		line = trim(line);
		if (line.empty())
			continue;
		const auto comma = line.find(',');
		if (comma == std::string::npos)
			throw ConfigError(fmt::format("row {}: expected two columns", row));
		const std::string ts = trim(line.substr(0, comma));
		const std::string price_text = trim(line.substr(comma + 1));

		std::int64_t stamp = 0;
		int this_kind = 0;
		if (is_integer(ts)) {
			stamp = std::stoll(ts);
			this_kind = 1;
		} else if (parse_iso(ts, stamp)) {
			this_kind = 2;
		} else {
			throw ConfigError(fmt::format("row {}: unreadable timestamp '{}'", row, ts));
		}
		if (kind != 0 && kind != this_kind)
			throw ConfigError(fmt::format("row {}: mixed timestamp formats", row));
		kind = this_kind;

		double price = 0.0;
		bool ok = !price_text.empty();
		if (ok) {
			try {
				std::size_t used = 0;
				price = std::stod(price_text, &used);
				ok = used == price_text.size() && std::isfinite(price);
			} catch (const std::exception&) {
				ok = false;
			}
		}
		if (!ok) {
			++trace.dropped_rows;
			continue;
		}
		if (!trace.timestamps.empty() && stamp <= trace.timestamps.back())
			throw ConfigError(fmt::format("row {}: timestamps must be strictly increasing", row));
		trace.timestamps.push_back(stamp);
		trace.prices.push_back(price);
	}
	if (trace.timestamps.size() >= 2)
		trace.slot_duration = trace.timestamps[1] - trace.timestamps[0];
	return trace;
}

PriceTrace load_price_trace(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if (!in)
		throw ConfigError("cannot open price trace " + path.string());
	return read_price_trace(in);
}

PriceTrace synthetic_diurnal_trace(std::size_t days, std::uint64_t seed)
{
	Rng rng(derive_seed(seed, 0x7072696365ULL));
	PriceTrace trace;
	const std::size_t hours = days * 24;
	trace.timestamps.reserve(hours);
	trace.prices.reserve(hours);
	double noise = 0.0;
	for (std::size_t t = 0; t < hours; ++t) {
		const double hour = static_cast<double>(t % 24);
		// Evening peak around 18h, overnight trough.
		const double cycle = 0.55 + 0.25 * std::sin(2.0 * std::numbers::pi * (hour - 12.0) / 24.0);
		noise = 0.8 * noise + 0.06 * normal(rng);
		trace.timestamps.push_back(static_cast<std::int64_t>(t));
		trace.prices.push_back(std::clamp(cycle + noise, 0.05, 1.5));
	}
	return trace;
}

std::string to_string(Quantizer q)
{
	return q == Quantizer::equal_width ? "equal_width" : "equal_frequency";
}

Quantizer quantizer_from_string(const std::string& name)
{
	if (name == "equal_width" || name == "equal-width")
		return Quantizer::equal_width;
	if (name == "equal_frequency" || name == "equal-frequency")
		return Quantizer::equal_frequency;
	throw InvalidArgument("unknown quantizer '" + name + "'");
}

CostChainFit fit_cost_chain(const PriceTrace& trace, int n_states, Quantizer quantizer)
{
	if (n_states < 2)
		throw InvalidArgument("at least two price states are required");
	const std::size_t len = trace.size();
	const auto n = static_cast<std::size_t>(n_states);
	if (len < 1 || len - 1 < 10 * n)
		throw InsufficientData(
			fmt::format("{} transitions available, {} needed for {} states", len == 0 ? 0 : len - 1, 10 * n, n));

	CostChainFit fit;
	const auto [lo_it, hi_it] = std::minmax_element(trace.prices.begin(), trace.prices.end());
	if (*lo_it == *hi_it) {
		fit.chain = CostChain::constant(*lo_it);
		fit.occupancy = {len};
		fit.warnings.push_back("constant price trace; returning a single-state chain");
		return fit;
	}

	std::vector<std::size_t> bin(len);
	if (quantizer == Quantizer::equal_width) {
		const double lo = *lo_it, width = (*hi_it - *lo_it) / static_cast<double>(n);
		for (std::size_t t = 0; t < len; ++t)
			bin[t] = std::min(static_cast<std::size_t>((trace.prices[t] - lo) / width), n - 1);
	} else {
		std::vector<std::size_t> order(len);
		std::iota(order.begin(), order.end(), std::size_t{0});
		std::stable_sort(order.begin(), order.end(),
		                 [&](std::size_t a, std::size_t b) { return trace.prices[a] < trace.prices[b]; });
		for (std::size_t r = 0; r < len; ++r)
			bin[order[r]] = r * n / len;
	}

	// Bin means; empty bins disappear and bins with equal means merge so the
	// state values are strictly increasing.
	std::vector<double> sum(n, 0.0);
	std::vector<std::size_t> count(n, 0);
	for (std::size_t t = 0; t < len; ++t) {
		sum[bin[t]] += trace.prices[t];
		++count[bin[t]];
	}
	std::vector<std::size_t> relabel(n, 0);
	std::vector<double> states;
	std::vector<double> merged_sum;
	for (std::size_t b = 0; b < n; ++b) {
		if (count[b] == 0)
			continue;
		const double mean = sum[b] / static_cast<double>(count[b]);
		if (!states.empty() && mean <= states.back()) {
			merged_sum.back() += sum[b];
			fit.occupancy.back() += count[b];
			states.back() = merged_sum.back() / static_cast<double>(fit.occupancy.back());
		} else {
			states.push_back(mean);
			merged_sum.push_back(sum[b]);
			fit.occupancy.push_back(count[b]);
		}
		relabel[b] = states.size() - 1;
	}
	if (states.size() < n)
		fit.warnings.push_back(fmt::format("{} of {} price states were empty or merged", n - states.size(), n));

	const std::size_t k = states.size();
	std::vector<std::vector<double>> counts(k, std::vector<double>(k, 0.0));
	for (std::size_t t = 0; t + 1 < len; ++t)
		counts[relabel[bin[t]]][relabel[bin[t + 1]]] += 1.0;
	for (std::size_t i = 0; i < k; ++i) {
		double total = std::accumulate(counts[i].begin(), counts[i].end(), 0.0);
		if (total == 0.0) {
			std::fill(counts[i].begin(), counts[i].end(), 1.0);
			total = static_cast<double>(k);
			fit.smoothed_rows.push_back(i);
		}
		for (auto& v : counts[i])
			v /= total;
	}
	fit.chain = CostChain(std::move(states), std::move(counts));
	return fit;
}

} // namespace dlsched

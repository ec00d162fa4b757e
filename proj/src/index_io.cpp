#include "dlsched/index_io.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "dlsched/config.hpp"
#include "dlsched/error.hpp"

namespace dlsched {

namespace {

constexpr std::array<char, 8> magic{'D', 'L', 'S', 'I', 'D', 'X', '0', '1'};

template <class T>
void put(std::ostream& out, const T& value)
{
	out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
bool get(std::istream& in, T& value)
{
	return static_cast<bool>(in.read(reinterpret_cast<char*>(&value), sizeof(T)));
}

} // namespace

void write_index_csv(const IndexTable& table, std::ostream& out)
{
	const auto& g = table.grid();
	out << "T,B,cost_index,nu\n";
	for (int t = 0; t <= g.max_lead; ++t)
		for (int b = 0; b <= (t == 0 ? 0 : g.max_work); ++b)
			for (std::size_t c = 0; c < g.costs; ++c)
				out << fmt::format("{},{},{},{:.17g}\n", t, b, c, table.at(t, b, c));
}

void save_index_cache(const IndexTable& table, const std::filesystem::path& path)
{
	const auto tmp = path.string() + ".tmp";
	{
		std::ofstream out(tmp, std::ios::binary);
		if (!out)
			throw ConfigError("cannot write index cache " + path.string());
		out.write(magic.data(), magic.size());
		const auto& g = table.grid();
		put(out, static_cast<std::uint32_t>(g.max_lead));
		put(out, static_cast<std::uint32_t>(g.max_work));
		put(out, static_cast<std::uint32_t>(g.costs));
		put(out, table.tolerance());
		put(out, static_cast<std::uint32_t>(table.method()));
		put(out, static_cast<std::uint32_t>(table.spec_hash().size()));
		out.write(table.spec_hash().data(), static_cast<std::streamsize>(table.spec_hash().size()));
		out.write(reinterpret_cast<const char*>(table.indices().data()),
		          static_cast<std::streamsize>(table.indices().size() * sizeof(double)));
		if (!out)
			throw ConfigError("failed writing index cache " + path.string());
	}
	std::filesystem::rename(tmp, path);
}

std::optional<IndexTable> load_index_cache(const std::filesystem::path& path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in)
		return std::nullopt;
	std::array<char, 8> head{};
	if (!in.read(head.data(), head.size()) || head != magic)
		return std::nullopt;
	std::uint32_t lead = 0, work = 0, costs = 0, method = 0, hash_len = 0;
	double tol = 0.0;
	if (!get(in, lead) || !get(in, work) || !get(in, costs) || !get(in, tol) || !get(in, method) ||
	    !get(in, hash_len) || hash_len > 256 || method > 2)
		return std::nullopt;
	std::string hash(hash_len, '\0');
	if (!in.read(hash.data(), hash_len))
		return std::nullopt;
	ArmGrid grid{static_cast<int>(lead), static_cast<int>(work), costs};
	std::vector<double> indices(grid.size());
	if (!in.read(reinterpret_cast<char*>(indices.data()), static_cast<std::streamsize>(indices.size() * sizeof(double))))
		return std::nullopt;
	return IndexTable(grid, std::move(indices), std::move(hash), tol, static_cast<IndexMethod>(method));
}

std::filesystem::path index_cache_path(const std::filesystem::path& dir, const ProblemSpec& spec, double tol)
{
	return dir / fmt::format("index-{}-{:.3g}.bin", arm_hash(spec), tol);
}

IndexTable cached_index_table(const ProblemSpec& spec, const IndexBuildOptions& options,
                              const std::filesystem::path& dir)
{
	const auto path = index_cache_path(dir, spec, options.tol);
	if (auto cached = load_index_cache(path)) {
		const auto g = ArmGrid::of(spec);
		if (cached->spec_hash() == arm_hash(spec) && cached->tolerance() == options.tol &&
		    cached->grid().max_lead == g.max_lead && cached->grid().max_work == g.max_work &&
		    cached->grid().costs == g.costs)
			return *cached;
	}
	auto table = build_index_table(spec, options);
	std::filesystem::create_directories(dir);
	save_index_cache(table, path);
	return table;
}

} // namespace dlsched

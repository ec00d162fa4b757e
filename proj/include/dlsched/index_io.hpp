#pragma once

#include <filesystem>
#include <optional>
#include <ostream>

#include "dlsched/whittle_index.hpp"

namespace dlsched {

/// CSV with header "T,B,cost_index,nu", one row per reachable state.
void write_index_csv(const IndexTable& table, std::ostream& out);

// Binary cache layout (little-endian host order):
//   "DLSIDX01" | u32 max_lead | u32 max_work | u32 costs | f64 tol |
//   u32 method | u32 hash_len | hash bytes | f64 x size
void save_index_cache(const IndexTable& table, const std::filesystem::path& path);
std::optional<IndexTable> load_index_cache(const std::filesystem::path& path);

std::filesystem::path index_cache_path(const std::filesystem::path& dir, const ProblemSpec& spec, double tol);

/// Loads the table for `spec` from `dir` when a matching cache exists and
/// builds (and stores) it otherwise.
IndexTable cached_index_table(const ProblemSpec& spec, const IndexBuildOptions& options,
                              const std::filesystem::path& dir);

} // namespace dlsched

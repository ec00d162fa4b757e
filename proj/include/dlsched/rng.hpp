#pragma once

#include <cstdint>
#include <random>

namespace dlsched {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent seeds from (seed, ids).
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
	x += 0x9e3779b97f4a7c15ULL;
	x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
	x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
	return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b = 0) noexcept
{
	return mix64(mix64(mix64(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

// Uniform double in [0,1) from the top 53 bits. Independent of the
// standard library's distribution implementations, so sample paths are
// identical across toolchains.
inline double uniform01(Rng& rng) noexcept
{
	return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace dlsched

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dlsched/core_model.hpp"

namespace dlsched {

enum class WindowMethod { exact_binomial, monte_carlo };

std::string to_string(WindowMethod method);
WindowMethod window_method_from_string(const std::string& name);

/// Distribution of the number of jobs admitted into the N positions during
/// a window of T̄ consecutive slots, in the stationary regime.
struct ArrivalWindowStats {
	int window = 0;
	std::vector<double> pmf; // over {0, ..., N}
	WindowMethod method = WindowMethod::exact_binomial;
	std::size_t samples = 0;
	std::vector<double> stderr_pmf; // zero for the exact method
};

struct WindowOptions {
	std::size_t samples = 100'000;
	std::uint64_t seed = 1;
	unsigned threads = 1;
};

/// exact_binomial requires every arriving job to carry lead time T̄ (then
/// each position is busy for whole windows and the count is binomial);
/// MethodInvalid otherwise.
ArrivalWindowStats arrival_window_distribution(const ProblemSpec& spec, WindowMethod method,
                                               const WindowOptions& options = {});

/// |1 - c_min| + F(B̄) + |1 - c_max|
double gap_constant(const ProblemSpec& spec);

/// C/(1-β) · Σ_{k>M} k·Pr(I=k)
double gap_bound(const ProblemSpec& spec, const ArrivalWindowStats& stats);

struct PoissonTail {
	/// μ·Pr(I ≥ M) for I ~ Poisson(μ)
	double exact_tail = 0.0;
	/// Σ_{k≥M+1} k·Pr(I=k), summed directly
	double tail_moment = 0.0;
	/// μ·Pr(I=M) / (1 - μ/(M+1))
	double klar_bound = 0.0;
	/// μ^{M+1} e^{M-μ} (M+1) / (√(2π) M^{M+1/2} (M+1-μ))
	double stirling_bound = 0.0;
};

/// Requires μ ≥ 0, M ≥ 1 and M > μ - 1; DomainError otherwise.
PoissonTail poisson_tail_bound(double mu, int m);

} // namespace dlsched

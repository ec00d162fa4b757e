#pragma once

#include <stdexcept>
#include <string>

namespace dlsched {

// Every library failure carries a short machine-readable code; the CLI
// prints it verbatim on the error line.
class Error : public std::runtime_error {
public:
	Error(std::string code, const std::string& what)
		: std::runtime_error(what), code_(std::move(code)) {}

	const std::string& code() const noexcept { return code_; }

private:
	std::string code_;
};

#define DLSCHED_ERROR(Name, Code)                                   \
	class Name : public Error {                                      \
	public:                                                          \
		explicit Name(const std::string& what) : Error(Code, what) {} \
	}

DLSCHED_ERROR(InvalidArgument, "invalid_argument");
DLSCHED_ERROR(ConfigError, "config_error");
DLSCHED_ERROR(CapacityViolation, "capacity_violation");
DLSCHED_ERROR(NonConvergence, "non_convergence");
DLSCHED_ERROR(BracketError, "bracket_error");
DLSCHED_ERROR(StateSpaceTooLarge, "state_space_too_large");
DLSCHED_ERROR(MethodInvalid, "method_invalid");
DLSCHED_ERROR(DomainError, "domain_error");
DLSCHED_ERROR(InsufficientData, "insufficient_data");
DLSCHED_ERROR(IncompatiblePolicy, "incompatible_policy");

#undef DLSCHED_ERROR

} // namespace dlsched

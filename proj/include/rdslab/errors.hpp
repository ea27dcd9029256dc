#pragma once

#include <stdexcept>
#include <string>

namespace rdslab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: syntax errors, constraint violations, unknown keys.
struct ConfigError : Error {
  using Error::Error;
};

// Requested enumeration exceeds the word budget (N^n too large).
struct BudgetError : Error {
  using Error::Error;
};

// A generator matrix (or an accumulated product core) fell below det_floor.
struct SingularityError : Error {
  using Error::Error;
};

// Point outside [0,1), symbol outside {1..N}, index out of range.
struct DomainError : Error {
  using Error::Error;
};

// Matrix dimension outside the supported range (d <= 16).
struct DimensionError : Error {
  using Error::Error;
};

// Exit codes used by the CLI. 0 = success.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfigError = 2,
  kExitBudgetError = 3,
  kExitSingularity = 4,
};

}  // namespace rdslab

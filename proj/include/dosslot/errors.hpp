#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dosslot {

// Raised by pure numeric routines on inputs outside their domain.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GroupingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LookupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file row; line is 1-based and counts the header.
struct LoadError : std::runtime_error {
  LoadError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

// No available location to place a pallet.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SearchLimitExceeded : std::runtime_error {
  SearchLimitExceeded(double bound, double limit)
      : std::runtime_error("search space bound " + std::to_string(bound) +
                           " exceeds limit " + std::to_string(limit)),
        bound(bound), limit(limit) {}
  double bound;
  double limit;
};

}  // namespace dosslot

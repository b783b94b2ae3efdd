#pragma once

#include <stdexcept>
#include <string>

namespace omnitopo {

// Bad inputs raise std::invalid_argument. The two runtime failures below are
// data-dependent outcomes that callers (the CLI in particular) map to exit
// codes.

/// Not enough samples for a fit or a decomposition to be well-posed.
class InsufficientDataError : public std::runtime_error {
 public:
  explicit InsufficientDataError(const std::string& what) : std::runtime_error(what) {}
};

/// A search or clustering stage produced nothing usable.
class EmptyResultError : public std::runtime_error {
 public:
  explicit EmptyResultError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace omnitopo

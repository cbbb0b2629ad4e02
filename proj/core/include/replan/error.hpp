#pragma once

#include <stdexcept>

namespace replan {

/// Base type for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input data violates the file schema or a map invariant.
struct ParseError : Error {
  using Error::Error;
};

/// An argument lies outside the operation's domain (bad class id, empty map).
struct DomainError : Error {
  using Error::Error;
};

/// A requested configuration cannot be satisfied by the given inputs.
struct ConfigError : Error {
  using Error::Error;
};

/// Synthetic generation cannot realize the requested scene.
struct GenerationError : Error {
  using Error::Error;
};

}  // namespace replan

#pragma once

#include <stdexcept>

namespace xstable {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid numeric input: nonpositive coordinates, parameters out of range.
struct DomainError : Error {
  using Error::Error;
};

// Malformed containers: wrong table kind, empty ground set, size mismatches.
struct StructuralError : Error {
  using Error::Error;
};

// A model violated a property it advertises (moment conditions, positivity,
// smoothness flags).
struct ModelError : Error {
  using Error::Error;
};

// Model specification files: JSON syntax or schema violations.
struct SchemaError : Error {
  using Error::Error;
};

}  // namespace xstable

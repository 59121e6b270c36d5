#pragma once

#include <stdexcept>
#include <string>

namespace stx {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Arguments outside an operation's mathematical domain (bad bounds, empty
/// samples, divergent exponents, incompatible units).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Input bytes are not an STXG container (bad magic, unknown version or dtype).
class FormatError : public Error {
public:
  using Error::Error;
};

/// Declared dimensions disagree with the payload.
class CorruptionError : public Error {
public:
  using Error::Error;
};

/// Structurally readable data violating a grid invariant.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Bad pipeline configuration (unknown keys or structures, missing paths).
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace stx

#pragma once

#include <stdexcept>
#include <string>

namespace robinlab {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct UnsupportedDimension : Error {
  using Error::Error;
};
struct SingularLattice : Error {
  using Error::Error;
};
struct TruncationTooLargeForGrid : Error {
  using Error::Error;
};
struct SBelowOne : Error {
  using Error::Error;
};
struct ExtrapolationUnstable : Error {
  using Error::Error;
};
struct DiagonalPoint : Error {
  using Error::Error;
};
struct ZeroMass : Error {
  using Error::Error;
};
struct NonpositiveF : Error {
  using Error::Error;
};
struct ConcentratedInput : Error {
  using Error::Error;
};
struct InequalityViolated : Error {
  using Error::Error;
};
struct IdentityCheckFailed : Error {
  using Error::Error;
};
struct LineSearchFailed : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace robinlab

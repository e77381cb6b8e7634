#ifndef RESIDKIT_ERRORS_HPP
#define RESIDKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace residkit {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error("DomainError: " + msg) {}
};

// A required scale is zero (e.g. sd of a point mass).
struct DegenerateError : Error {
  explicit DegenerateError(const std::string& msg) : Error("DegenerateError: " + msg) {}
};

struct RootNotBracketed : Error {
  explicit RootNotBracketed(const std::string& msg) : Error("RootNotBracketed: " + msg) {}
};

struct DensityZero : Error {
  explicit DensityZero(const std::string& msg) : Error("DensityZero: " + msg) {}
};

struct EmptyInput : Error {
  explicit EmptyInput(const std::string& msg) : Error("EmptyInput: " + msg) {}
};

struct TooFewPoints : Error {
  explicit TooFewPoints(const std::string& msg) : Error("TooFewPoints: " + msg) {}
};

struct ZeroVariance : Error {
  explicit ZeroVariance(const std::string& msg) : Error("ZeroVariance: " + msg) {}
};

struct MissingDistribution : Error {
  explicit MissingDistribution(const std::string& unit)
      : Error("MissingDistribution: no predictive distribution for unit '" + unit + "'"),
        unit_id(unit) {}
  std::string unit_id;
};

struct ParseError : Error {
  explicit ParseError(const std::string& msg) : Error("ParseError: " + msg) {}
};

}  // namespace residkit

#endif

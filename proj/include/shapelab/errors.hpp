#pragma once

#include <stdexcept>
#include <string>

namespace shapelab {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidDimensionError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

// Thrown when hull input is affinely degenerate; carries the affine rank.
struct FlatHullError : Error {
  FlatHullError(const std::string& msg, int rank_) : Error(msg), rank(rank_) {}
  int rank;
};

struct OracleError : Error {
  using Error::Error;
};

// Carries the smallest sample size that would make the construction valid,
// when that is computable (0 otherwise).
struct InfeasiblePackingError : Error {
  explicit InfeasiblePackingError(const std::string& msg, double minimal_n_ = 0)
      : Error(msg), minimal_n(minimal_n_) {}
  double minimal_n;
};

struct InvalidFamilyError : Error {
  using Error::Error;
};

struct EnvelopeError : Error {
  using Error::Error;
};

struct DegenerateSampleError : Error {
  using Error::Error;
};

struct OutOfRegimeError : Error {
  using Error::Error;
};

struct RankDeficiencyError : Error {
  RankDeficiencyError(const std::string& msg, int rank_) : Error(msg), rank(rank_) {}
  int rank;
};

struct InsufficientDataError : Error {
  using Error::Error;
};

struct UsageError : Error {
  using Error::Error;
};

struct OutOfRangeError : Error {
  using Error::Error;
};

}  // namespace shapelab

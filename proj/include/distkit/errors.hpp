// Error taxonomy shared by the whole library.
#pragma once

#include <stdexcept>
#include <string>

namespace distkit {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Shape-level failures: bad ranks, mismatched events, impossible reshapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Right-aligned broadcasting failed on a pair of extents.
class IncompatibleShapesError : public ShapeError {
 public:
  using ShapeError::ShapeError;
};

class RankError : public ShapeError {
 public:
  using ShapeError::ShapeError;
};

// Mixed-dtype arithmetic is never promoted silently.
class DTypeError : public Error {
 public:
  using Error::Error;
};

// Argument outside a function's mathematical domain (validation enabled).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Constructor parameter violates the family schema.
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

// Requested statistic or method has no analytic implementation.
class NotImplementedError : public Error {
 public:
  using Error::Error;
};

// A statistic evaluated to NaN while allow_nan_stats=false.
class NaNError : public Error {
 public:
  using Error::Error;
};

class NotReparameterizedError : public Error {
 public:
  using Error::Error;
};

class NotInvertibleError : public Error {
 public:
  using Error::Error;
};

// An AutoregressiveFn read coordinates it must not depend on.
class DependenceViolationError : public Error {
 public:
  using Error::Error;
};

// make_dist changed the event shape between autoregressive iterations.
class NonConvergentSpecError : public Error {
 public:
  using Error::Error;
};

class EmptyPointsError : public Error {
 public:
  using Error::Error;
};

// Model-spec files that fail to parse.
class SpecParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace distkit

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace psgm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A problem lacks an oracle the operation needs (e.g. no deterministic g).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// A point lies outside dom r.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid numeric parameter (nonpositive step, lambda >= 1/rho, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// The stochastic oracle returned a non-finite vector.
class OracleError : public Error {
 public:
  OracleError(const std::string& what, std::size_t iteration)
      : Error(what), iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

/// An inner solver stopped before reaching the requested accuracy.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

/// Closed convex set of the form {base + G u : lower <= u <= upper}.
///
/// Bounds may be infinite, which lets the same type describe the
/// subdifferential of an absolute-value composition (u in [-1, 1]) and
/// the normal cone of a box or ball (u in [0, inf)).
struct SubdifferentialSet {
  Vector base;
  Matrix generators;  // d x k
  Vector lower;       // k
  Vector upper;       // k

  static SubdifferentialSet point(const Vector& v) {
    return {v, Matrix(v.size(), 0), Vector(0), Vector(0)};
  }

  Eigen::Index dim() const { return base.size(); }
  Eigen::Index size() const { return generators.cols(); }

  /// Minkowski sum.
  SubdifferentialSet operator+(const SubdifferentialSet& other) const;

  Vector element(const Vector& u) const { return base + generators * u; }
};

/// Result of projecting a target onto a SubdifferentialSet.
struct SetProjection {
  Vector coefficients;
  Vector point;
  double distance = 0.0;
};

/// Closest point of `set` to `target`, by cyclic coordinate descent on the
/// box-constrained least-squares problem in the generator coefficients.
SetProjection project_onto(const SubdifferentialSet& set, const Vector& target,
                           int max_sweeps = 20000, double tol = 1e-15);

}  // namespace psgm

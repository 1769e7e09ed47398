#pragma once

#include "psgm/prox.hpp"
#include "psgm/rng.hpp"
#include "psgm/types.hpp"

#include <functional>
#include <optional>
#include <string>

namespace psgm {

/// One realization G(x, xi) of the stochastic subgradient oracle.
struct StochasticSample {
  Vector vector;
  std::uint64_t draw_id = 0;
};

/// Stochastic oracle for g: E[G(x, xi)] lies in dg(x).
struct StochasticOracle {
  std::function<StochasticSample(const Vector&, Rng&)> sample;
  /// Closed-form E_xi[G(x, xi)] where available.
  std::function<Vector(const Vector&)> unbiased_mean;
};

/// min phi(x) = g(x) + r(x) with g rho-weakly convex and r prox-friendly.
///
/// Immutable once built; problem generators in problems.hpp fill in the
/// certified constants. Optional oracles are empty std::functions.
struct CompositeProblem {
  std::string id;
  std::string family;
  Eigen::Index dim = 0;
  Eigen::Index rows = 0;  // data size m, 0 when not applicable

  StochasticOracle g_oracle;
  std::function<double(const Vector&)> g_value;
  /// Deterministic selection from dg(x); zero element at kinks.
  std::function<Vector(const Vector&)> g_full_subgradient;
  /// Exact gradient, present only when g is C^1 with rho-Lipschitz gradient.
  std::function<Vector(const Vector&)> g_gradient;
  /// Full subdifferential with kinks detected within the given radius.
  std::function<SubdifferentialSet(const Vector&, double)> g_subdifferential;

  Regularizer regularizer = Regularizer::zero();

  double rho = 0.0;
  std::optional<double> lipschitz_L;
  std::optional<double> sigma;
  std::optional<double> domain_diameter;

  /// Documented starting point for Algorithm runs.
  Vector initial_point;
  /// phi at a planted solution: an upper bound on min phi.
  std::optional<double> reference_value;
  /// Exact min phi when it is computable.
  std::optional<double> minimum_value;

  bool has_deterministic_oracles() const {
    return static_cast<bool>(g_value) && static_cast<bool>(g_full_subgradient);
  }
  bool is_smooth() const { return static_cast<bool>(g_gradient); }

  /// phi(x) = g(x) + r(x); infinite outside dom r.
  ExtendedValue phi(const Vector& x) const;

  /// Throws CapabilityError unless g_value and g_full_subgradient exist.
  void require_deterministic(const char* operation) const;
  /// dg(x) from g_subdifferential when present, else the selection (or gradient).
  SubdifferentialSet g_subdifferential_or_selection(const Vector& x, double radius) const;
};

/// Outcome of a pairwise inequality check over sampled points.
struct ViolationReport {
  double max_violation = -std::numeric_limits<double>::infinity();
  bool violated = false;
  std::size_t pairs_tested = 0;
  Vector worst_x;
  Vector worst_y;
};

/// Samples pairs and measures g(x) + <v, y-x> - (rho/2)|y-x|^2 - g(y) with
/// v = g_full_subgradient(x). Flags a violation above 1e-9 (1 + |g(y)|).
ViolationReport check_weak_convexity(const CompositeProblem& problem, std::size_t n_pairs,
                                     double radius, Rng& rng);

/// Samples pairs and measures -rho|x-y|^2 - <v - w, x - y>.
ViolationReport check_hypomonotonicity(const CompositeProblem& problem, std::size_t n_pairs,
                                       double radius, Rng& rng);

/// Same two checks at explicitly supplied points (used for boundary cases).
double weak_convexity_gap(const CompositeProblem& problem, const Vector& x, const Vector& y);
double hypomonotonicity_gap(const CompositeProblem& problem, const Vector& x, const Vector& y);

/// Monte-Carlo estimate of E|G(x, xi)|^2.
double estimate_second_moment(const CompositeProblem& problem, const Vector& x,
                              std::size_t n_samples, Rng& rng);

/// Monte-Carlo mean of G(x, xi) and the per-coordinate standard error.
struct OracleMean {
  Vector mean;
  double standard_error = 0.0;  // sqrt(trace(Cov) / N)
};
OracleMean estimate_oracle_mean(const CompositeProblem& problem, const Vector& x,
                                std::size_t n_samples, Rng& rng);

}  // namespace psgm

#pragma once

#include "psgm/core.hpp"

#include <optional>

namespace psgm {

enum class MoreauMethod { IterativeInner, GridBruteForce };

/// The proximal point x_hat = prox_{lambda phi}(x) and the envelope data
/// derived from it.
struct MoreauPoint {
  Vector x;
  double lambda = 0.0;
  Vector x_hat;
  double envelope_value = 0.0;
  /// (x - x_hat) / lambda, computed from x_hat by construction.
  Vector envelope_grad;
  /// zeta_hat in dg(x_hat) with (x - x_hat)/lambda - zeta_hat in dr(x_hat).
  std::optional<Vector> zeta_hat;
  /// Distance from (x - x_hat)/lambda to dg(x_hat) + dr(x_hat).
  double inclusion_residual = 0.0;
  /// Certified subproblem optimality gap (IterativeInner) or final grid
  /// spacing (GridBruteForce).
  double inner_tol = 0.0;
  /// Radius used to detect kinks and active constraints at x_hat.
  double certificate_radius = 0.0;
  std::size_t inner_iterations = 0;
  MoreauMethod method = MoreauMethod::IterativeInner;
};

/// Near-stationarity data attached to a Moreau point.
struct StationarityReport {
  double grad_norm = 0.0;
  double grad_norm_sq = 0.0;
  double dist_to_xhat = 0.0;
  /// Right side of dist(0; dphi(x_hat)) <= |grad phi_lambda(x)|.
  double subdiff_dist_bound = 0.0;
  /// Left side, when the problem exposes its full subdifferential.
  std::optional<double> subdiff_dist_exact;
};

struct InnerSolverOptions {
  double tol = 1e-10;
  std::size_t max_iterations = 1'000'000;
  /// When positive, also certify |x_hat - exact prox point| <= x_tol by
  /// tightening the gap target to mu x_tol^2 / 2.
  double x_tol = 0.0;
};

/// Grid brute force over a window around proj_dom(x). Zero fields select
/// defaults: the window half-width from a strong-convexity bound, 2001 points
/// for the first scan in 1-D and 201 per axis in 2-D.
struct GridSpec {
  double half_width = 0.0;
  int points_per_axis = 0;
  /// Points per later scan; each scan covers the two cells around the previous best.
  int zoom_points = 21;
  /// Stop once the spacing falls below resolution * (1 + half_width).
  double resolution = 1e-12;
};

/// Solves min_y phi(y) + |y - x|^2 / (2 lambda) for 0 < lambda < 1/rho.
///
/// Nonsmooth g: deep-cut ellipsoid method on the strongly convex subproblem,
/// stopped on the certified gap F(best) - lower bound <= tol. Smooth g:
/// proximal gradient with step 1/(1/lambda + rho), stopped when the
/// strong-convexity gap bound of the fixed-point residual is <= tol.
/// Throws ParameterError for lambda >= 1/rho and AccuracyError when the
/// iteration cap is hit first.
MoreauPoint moreau_prox(const CompositeProblem& problem, const Vector& x, double lambda,
                        const InnerSolverOptions& options = {});

/// Grid minimization of the same subproblem, dim <= 2, restricted to dom r.
/// In 2-D the scan is nested: y1 -> min over y2 of the subproblem, which is
/// convex in y1, so each zoom keeps the minimizer inside the scanned window.
MoreauPoint moreau_grid_oracle(const CompositeProblem& problem, const Vector& x, double lambda,
                               const GridSpec& spec = {});

/// Callable bundle of method + options.
class MoreauOracle {
 public:
  explicit MoreauOracle(MoreauMethod method = MoreauMethod::IterativeInner,
                        InnerSolverOptions inner = {}, GridSpec grid = {})
      : method_(method), inner_(inner), grid_(grid) {}

  MoreauPoint evaluate(const CompositeProblem& problem, const Vector& x, double lambda) const;
  MoreauMethod method() const { return method_; }
  const InnerSolverOptions& inner_options() const { return inner_; }

 private:
  MoreauMethod method_;
  InnerSolverOptions inner_;
  GridSpec grid_;
};

/// Recovers zeta_hat by projecting (x - x_hat)/lambda onto dg(x_hat) + dr(x_hat).
struct ProxCertificate {
  Vector zeta_hat;
  double inclusion_residual = 0.0;
};
ProxCertificate certify_prox_point(const CompositeProblem& problem, const Vector& x, double lambda,
                                   const Vector& x_hat, double radius);

StationarityReport stationarity_report(const CompositeProblem& problem, const MoreauPoint& point);

/// Central differences of phi_lambda against (x - x_hat)/lambda. Returns
/// max_i |fd_i - grad_i| / max(|grad|_inf, 1).
double envelope_grad_fd_check(const CompositeProblem& problem, const Vector& x, double lambda,
                              double h, double tol = 1e-10);

/// G_lambda(x) = (x - prox_{lambda r}(x - lambda grad g(x))) / lambda.
Vector prox_gradient_mapping(const CompositeProblem& problem, const Vector& x, double lambda);

/// Subproblem objective y -> phi(y) + |y - x|^2 / (2 lambda); infinite off dom r.
ExtendedValue moreau_objective(const CompositeProblem& problem, const Vector& x, double lambda,
                               const Vector& y);

}  // namespace psgm

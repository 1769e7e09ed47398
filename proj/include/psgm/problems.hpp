#pragma once

#include "psgm/core.hpp"

#include <string>
#include <vector>

namespace psgm {

enum class Family { PhaseRetrieval, RobustRegression, SmoothLeastSquaresNoisy, Toy1D };
enum class Toy1DKind { AbsQuadratic, Abs };

/// Dense-noise and outlier model for robust regression data.
struct RobustRegressionOptions {
  double row_scale = 1.0;  // rows a_i ~ N(0, row_scale^2 I)
  double noise_std = 1.0;
  double outlier_fraction = 0.1;
  double outlier_scale = 10.0;
  double box_half_width = 2.0;
};

/// Addressable benchmark: "family:m:d:seed", "smooth_ls:m:d:seed[:sigma]",
/// or "toy1d:abs_quadratic" / "toy1d:abs".
struct ProblemSpec {
  Family family = Family::PhaseRetrieval;
  Eigen::Index m = 0;
  Eigen::Index d = 0;
  std::uint64_t seed = 0;
  double sigma = 0.1;
  Toy1DKind toy = Toy1DKind::AbsQuadratic;

  std::string id() const;
  std::string family_name() const;
};

/// Benchmarks exercised by the property suites.
const std::vector<std::string>& shipped_problem_ids();

ProblemSpec parse_problem_id(const std::string& id);
CompositeProblem make_problem(const ProblemSpec& spec);
CompositeProblem make_problem(const std::string& id);

/// g(x) = (1/m) sum |<a_i, x>^2 - b_i| on the ball of radius 2 (D = 4).
/// Rows a_i standard Gaussian, planted x# uniform on the unit sphere,
/// b_i = <a_i, x#>^2. Certified rho = 2 max|a_i|^2, L = 2 radius max|a_i|^2.
CompositeProblem make_phase_retrieval(Eigen::Index m, Eigen::Index d, Rng& rng);
CompositeProblem make_phase_retrieval(const Matrix& A, const Vector& b, double radius = 2.0);

/// g(x) = (1/m) sum |<a_i, x> - b_i| on the box [-w, w]^d; convex, L = max|a_i|.
/// b = A x# + dense Gaussian noise + sparse large outliers.
CompositeProblem make_robust_regression(Eigen::Index m, Eigen::Index d, Rng& rng,
                                        const RobustRegressionOptions& options = {});
CompositeProblem make_robust_regression(const Matrix& A, const Vector& b, double box_half_width);

/// g(x) = |Ax - b|^2 / (2m) with r = weight |x|_1; the oracle adds
/// sigma_coord * N(0, I) to the exact gradient, so the certified variance
/// constant is sigma_coord * sqrt(d). rho = lambda_max(A^T A) / m.
CompositeProblem make_smooth_ls_noisy(Eigen::Index m, Eigen::Index d, double sigma_coord, Rng& rng,
                                      double l1_weight = 0.05);
CompositeProblem make_smooth_ls(const Matrix& A, const Vector& b, double sigma_coord,
                                Regularizer regularizer);

/// AbsQuadratic: g(x) = |x^2 - 1|, r = indicator[-2, 2], rho = 2, L = 4.
/// Abs: g(x) = |x|, r = 0, rho = 0, L = 1. Both oracles are exact.
CompositeProblem make_toy1d(Toy1DKind kind);

/// min over [lo, hi] of (1/m) sum |a_i x - b_i| by breakpoint enumeration.
double robust_regression_min_1d(const Vector& a, const Vector& b, double lo, double hi);

}  // namespace psgm

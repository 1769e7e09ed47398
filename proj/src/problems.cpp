#include "psgm/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace psgm {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Oracles for g(y) = (1/m) sum_i |c_i(y)| with smooth scalar maps c_i.
// `residuals(y)` returns c(y) in R^m and `jacobian(y)` the m x d Jacobian.
template <typename Residuals, typename Jacobian, typename Row>
void install_abs_sum(CompositeProblem& p, Residuals residuals, Jacobian jacobian, Row row_terms) {
  const auto m = static_cast<double>(p.rows);
  p.g_value = [residuals, m](const Vector& y) { return residuals(y).template lpNorm<1>() / m; };
  p.g_full_subgradient = [residuals, jacobian, m](const Vector& y) {
    const Vector c = residuals(y);
    Vector s(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) s[i] = sign(c[i]);
    return Vector(jacobian(y).transpose() * s / m);
  };
  p.g_subdifferential = [residuals, jacobian, m](const Vector& y, double radius) {
    const Vector c = residuals(y);
    const Matrix J = jacobian(y);
    SubdifferentialSet set = SubdifferentialSet::point(Vector::Zero(y.size()));
    std::vector<Eigen::Index> kinks;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      const double slope = J.row(i).norm();
      if (std::abs(c[i]) <= radius * slope)
        kinks.push_back(i);
      else
        set.base += sign(c[i]) * J.row(i).transpose() / m;
    }
    const auto k = static_cast<Eigen::Index>(kinks.size());
    set.generators.resize(y.size(), k);
    for (Eigen::Index j = 0; j < k; ++j) set.generators.col(j) = J.row(kinks[j]).transpose() / m;
    set.lower = Vector::Constant(k, -1.0);
    set.upper = Vector::Constant(k, 1.0);
    return set;
  };
  // Stochastic oracle: sample one term uniformly.
  p.g_oracle.sample = [row_terms, n = p.rows](const Vector& y, Rng& rng) {
    const std::uint64_t tag = rng.draws();
    const std::size_t i = rng.index(static_cast<std::size_t>(n));
    const auto [c, grad] = row_terms(y, static_cast<Eigen::Index>(i));
    return StochasticSample{sign(c) * grad, tag};
  };
  p.g_oracle.unbiased_mean = p.g_full_subgradient;
}

Vector unit_vector(Eigen::Index d, Rng& rng) {
  Vector v = rng.normal_vector(d);
  return v / v.norm();
}

}  // namespace

std::string ProblemSpec::family_name() const {
  switch (family) {
    case Family::PhaseRetrieval:
      return "phase_retrieval";
    case Family::RobustRegression:
      return "robust_regression";
    case Family::SmoothLeastSquaresNoisy:
      return "smooth_ls";
    case Family::Toy1D:
      return "toy1d";
  }
  return "unknown";
}

std::string ProblemSpec::id() const {
  std::ostringstream os;
  if (family == Family::Toy1D) {
    os << "toy1d:" << (toy == Toy1DKind::AbsQuadratic ? "abs_quadratic" : "abs");
    return os.str();
  }
  os << family_name() << ':' << m << ':' << d << ':' << seed;
  if (family == Family::SmoothLeastSquaresNoisy) os << ':' << sigma;
  return os.str();
}

const std::vector<std::string>& shipped_problem_ids() {
  static const std::vector<std::string> ids{
      "phase_retrieval:50:10:8", "phase_retrieval:30:2:1", "robust_regression:200:5:1",
      "robust_regression:50:2:1", "robust_regression:40:1:3", "smooth_ls:100:5:1:0.1",
      "toy1d:abs_quadratic",      "toy1d:abs"};
  return ids;
}

ProblemSpec parse_problem_id(const std::string& id) {
  std::vector<std::string> parts;
  std::stringstream ss(id);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.empty()) throw ParameterError("empty problem id");

  ProblemSpec spec;
  if (parts[0] == "toy1d") {
    spec.family = Family::Toy1D;
    spec.m = 1;
    spec.d = 1;
    if (parts.size() != 2) throw ParameterError("toy1d id must be toy1d:<kind>");
    if (parts[1] == "abs_quadratic")
      spec.toy = Toy1DKind::AbsQuadratic;
    else if (parts[1] == "abs")
      spec.toy = Toy1DKind::Abs;
    else
      throw ParameterError("unknown toy1d kind: " + parts[1]);
    return spec;
  }
  if (parts[0] == "phase_retrieval")
    spec.family = Family::PhaseRetrieval;
  else if (parts[0] == "robust_regression")
    spec.family = Family::RobustRegression;
  else if (parts[0] == "smooth_ls")
    spec.family = Family::SmoothLeastSquaresNoisy;
  else
    throw ParameterError("unknown problem family: " + parts[0]);

  const bool sigma_allowed = spec.family == Family::SmoothLeastSquaresNoisy;
  if (parts.size() != 4 && !(sigma_allowed && parts.size() == 5))
    throw ParameterError("problem id must be family:m:d:seed");
  try {
    spec.m = std::stoll(parts[1]);
    spec.d = std::stoll(parts[2]);
    spec.seed = std::stoull(parts[3]);
    if (parts.size() == 5) spec.sigma = std::stod(parts[4]);
  } catch (const std::exception&) {
    throw ParameterError("malformed number in problem id: " + id);
  }
  if (spec.m < 1 || spec.d < 1) throw ParameterError("m and d must be positive");
  if (spec.sigma < 0.0) throw ParameterError("sigma must be nonnegative");
  return spec;
}

CompositeProblem make_problem(const ProblemSpec& spec) {
  Rng rng(spec.seed);
  CompositeProblem p;
  switch (spec.family) {
    case Family::PhaseRetrieval:
      p = make_phase_retrieval(spec.m, spec.d, rng);
      break;
    case Family::RobustRegression:
      p = make_robust_regression(spec.m, spec.d, rng);
      break;
    case Family::SmoothLeastSquaresNoisy:
      p = make_smooth_ls_noisy(spec.m, spec.d, spec.sigma, rng);
      break;
    case Family::Toy1D:
      p = make_toy1d(spec.toy);
      break;
  }
  p.id = spec.id();
  return p;
}

CompositeProblem make_problem(const std::string& id) { return make_problem(parse_problem_id(id)); }

CompositeProblem make_phase_retrieval(const Matrix& A, const Vector& b, double radius) {
  CompositeProblem p;
  p.family = "phase_retrieval";
  p.dim = A.cols();
  p.rows = A.rows();
  const double max_row_sq = A.rowwise().squaredNorm().maxCoeff();
  p.rho = 2.0 * max_row_sq;
  p.lipschitz_L = 2.0 * radius * max_row_sq;
  p.domain_diameter = 2.0 * radius;
  p.regularizer = Regularizer::ball(Vector::Zero(p.dim), radius);
  install_abs_sum(
      p, [A, b](const Vector& y) { return Vector((A * y).array().square().matrix() - b); },
      [A](const Vector& y) { return Matrix(2.0 * (A * y).asDiagonal() * A); },
      [A, b](const Vector& y, Eigen::Index i) {
        const double ay = A.row(i).dot(y);
        return std::pair<double, Vector>{ay * ay - b[i], 2.0 * ay * A.row(i).transpose()};
      });
  p.initial_point = Vector::Zero(p.dim);
  if (p.dim > 0) p.initial_point[0] = 1.0;
  return p;
}

CompositeProblem make_phase_retrieval(Eigen::Index m, Eigen::Index d, Rng& rng) {
  Matrix A(m, d);
  for (Eigen::Index i = 0; i < m; ++i) A.row(i) = rng.normal_vector(d).transpose();
  const Vector planted = unit_vector(d, rng);
  const Vector b = (A * planted).array().square().matrix();
  CompositeProblem p = make_phase_retrieval(A, b);
  // Spectral initializer: leading eigenvector of (1/m) sum b_i a_i a_i^T,
  // scaled to the norm estimate sqrt(mean b).
  const Matrix Y = A.transpose() * b.asDiagonal() * A / static_cast<double>(m);
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(Y);
  p.initial_point = eig.eigenvectors().col(d - 1) * std::sqrt(b.mean());
  p.initial_point = p.regularizer.project_domain(p.initial_point);
  p.reference_value = 0.0;
  p.minimum_value = 0.0;
  return p;
}

CompositeProblem make_robust_regression(const Matrix& A, const Vector& b, double box_half_width) {
  CompositeProblem p;
  p.family = "robust_regression";
  p.dim = A.cols();
  p.rows = A.rows();
  p.rho = 0.0;
  p.lipschitz_L = A.rowwise().norm().maxCoeff();
  p.regularizer = Regularizer::box(p.dim, box_half_width);
  p.domain_diameter = p.regularizer.domain_diameter();
  install_abs_sum(
      p, [A, b](const Vector& y) { return Vector(A * y - b); }, [A](const Vector&) { return A; },
      [A, b](const Vector& y, Eigen::Index i) {
        return std::pair<double, Vector>{A.row(i).dot(y) - b[i], A.row(i).transpose()};
      });
  p.initial_point = Vector::Zero(p.dim);
  if (p.dim == 1)
    p.minimum_value = robust_regression_min_1d(A.col(0), b, -box_half_width, box_half_width);
  return p;
}

CompositeProblem make_robust_regression(Eigen::Index m, Eigen::Index d, Rng& rng,
                                        const RobustRegressionOptions& options) {
  Matrix A(m, d);
  for (Eigen::Index i = 0; i < m; ++i) A.row(i) = options.row_scale * rng.normal_vector(d).transpose();
  const Vector planted = unit_vector(d, rng);
  Vector b = A * planted;
  for (Eigen::Index i = 0; i < m; ++i) {
    b[i] += options.noise_std * rng.normal();
    if (rng.uniform() < options.outlier_fraction) b[i] += options.outlier_scale * rng.normal();
  }
  CompositeProblem p = make_robust_regression(A, b, options.box_half_width);
  p.reference_value = p.g_value(planted);
  return p;
}

CompositeProblem make_smooth_ls(const Matrix& A, const Vector& b, double sigma_coord,
                                Regularizer regularizer) {
  CompositeProblem p;
  p.family = "smooth_ls";
  p.dim = A.cols();
  p.rows = A.rows();
  const double m = static_cast<double>(A.rows());
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(A.transpose() * A / m);
  p.rho = eig.eigenvalues().maxCoeff();
  p.sigma = sigma_coord * std::sqrt(static_cast<double>(p.dim));
  p.regularizer = std::move(regularizer);
  p.domain_diameter = p.regularizer.domain_diameter();
  p.g_value = [A, b, m](const Vector& y) { return (A * y - b).squaredNorm() / (2.0 * m); };
  p.g_gradient = [A, b, m](const Vector& y) { return Vector(A.transpose() * (A * y - b) / m); };
  p.g_full_subgradient = p.g_gradient;
  p.g_oracle.unbiased_mean = p.g_gradient;
  p.g_oracle.sample = [grad = p.g_gradient, sigma_coord](const Vector& y, Rng& rng) {
    const std::uint64_t tag = rng.draws();
    Vector g = grad(y);
    if (sigma_coord > 0.0) g += sigma_coord * rng.normal_vector(y.size());
    return StochasticSample{g, tag};
  };
  p.initial_point = Vector::Zero(p.dim);
  return p;
}

CompositeProblem make_smooth_ls_noisy(Eigen::Index m, Eigen::Index d, double sigma_coord, Rng& rng,
                                      double l1_weight) {
  Matrix A(m, d);
  for (Eigen::Index i = 0; i < m; ++i) A.row(i) = rng.normal_vector(d).transpose();
  const Vector planted = unit_vector(d, rng);
  Vector b = A * planted;
  for (Eigen::Index i = 0; i < m; ++i) b[i] += 0.1 * rng.normal();
  CompositeProblem p = make_smooth_ls(A, b, sigma_coord, Regularizer::l1(l1_weight));
  p.reference_value = p.phi(planted).value;
  return p;
}

CompositeProblem make_toy1d(Toy1DKind kind) {
  CompositeProblem p;
  p.family = "toy1d";
  p.dim = 1;
  p.rows = 1;
  if (kind == Toy1DKind::AbsQuadratic) {
    p.id = "toy1d:abs_quadratic";
    p.rho = 2.0;
    p.lipschitz_L = 4.0;
    p.regularizer = Regularizer::box(1, 2.0);
    p.domain_diameter = 4.0;
    install_abs_sum(
        p, [](const Vector& y) { return Vector::Constant(1, y[0] * y[0] - 1.0); },
        [](const Vector& y) { return Matrix::Constant(1, 1, 2.0 * y[0]); },
        [](const Vector& y, Eigen::Index) {
          return std::pair<double, Vector>{y[0] * y[0] - 1.0, Vector::Constant(1, 2.0 * y[0])};
        });
    p.initial_point = Vector::Constant(1, 0.3);
  } else {
    p.id = "toy1d:abs";
    p.rho = 0.0;
    p.lipschitz_L = 1.0;
    install_abs_sum(
        p, [](const Vector& y) { return Vector(y); },
        [](const Vector&) { return Matrix::Identity(1, 1); },
        [](const Vector& y, Eigen::Index) {
          return std::pair<double, Vector>{y[0], Vector::Ones(1)};
        });
    p.initial_point = Vector::Constant(1, 1.0);
  }
  p.reference_value = 0.0;
  p.minimum_value = 0.0;
  return p;
}

double robust_regression_min_1d(const Vector& a, const Vector& b, double lo, double hi) {
  std::vector<double> candidates{lo, hi};
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a[i] != 0.0) candidates.push_back(std::clamp(b[i] / a[i], lo, hi));
  double best = std::numeric_limits<double>::infinity();
  for (double x : candidates) best = std::min(best, (a * x - b).lpNorm<1>() / a.size());
  return best;
}

}  // namespace psgm

#include "psgm/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace psgm {

SubdifferentialSet SubdifferentialSet::operator+(const SubdifferentialSet& other) const {
  SubdifferentialSet out;
  out.base = base + other.base;
  out.generators.resize(dim(), size() + other.size());
  out.generators << generators, other.generators;
  out.lower.resize(size() + other.size());
  out.lower << lower, other.lower;
  out.upper.resize(size() + other.size());
  out.upper << upper, other.upper;
  return out;
}

SetProjection project_onto(const SubdifferentialSet& set, const Vector& target, int max_sweeps,
                           double tol) {
  const Eigen::Index k = set.size();
  SetProjection out;
  out.coefficients = Vector::Zero(k);
  for (Eigen::Index j = 0; j < k; ++j)
    out.coefficients[j] = std::clamp(0.0, set.lower[j], set.upper[j]);
  Vector residual = set.element(out.coefficients) - target;
  const Vector col_sq = set.generators.colwise().squaredNorm().transpose();
  for (int sweep = 0; sweep < max_sweeps && k > 0; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (col_sq[j] == 0.0) continue;
      const double old = out.coefficients[j];
      const double step = -set.generators.col(j).dot(residual) / col_sq[j];
      const double updated = std::clamp(old + step, set.lower[j], set.upper[j]);
      const double delta = updated - old;
      if (delta != 0.0) {
        residual += delta * set.generators.col(j);
        out.coefficients[j] = updated;
        max_change = std::max(max_change, std::abs(delta) * std::sqrt(col_sq[j]));
      }
    }
    if (max_change <= tol * (1.0 + target.norm())) break;
  }
  out.point = set.element(out.coefficients);
  out.distance = (out.point - target).norm();
  return out;
}

ExtendedValue CompositeProblem::phi(const Vector& x) const {
  require_deterministic("phi");
  const ExtendedValue r = regularizer.value(x);
  if (r.infinite) return r;
  return ExtendedValue::finite(g_value(x) + r.value);
}

void CompositeProblem::require_deterministic(const char* operation) const {
  if (!has_deterministic_oracles())
    throw CapabilityError(std::string(operation) +
                          " needs deterministic g_value and g_full_subgradient");
}

SubdifferentialSet CompositeProblem::g_subdifferential_or_selection(const Vector& x,
                                                                    double radius) const {
  if (g_subdifferential) return g_subdifferential(x, radius);
  if (g_gradient) return SubdifferentialSet::point(g_gradient(x));
  require_deterministic("subdifferential");
  return SubdifferentialSet::point(g_full_subgradient(x));
}

namespace {

Vector sample_point(const CompositeProblem& problem, double radius, Rng& rng) {
  return problem.regularizer.project_domain(rng.uniform_ball(problem.dim, radius));
}

template <typename Gap, typename Tol>
ViolationReport pairwise_check(const CompositeProblem& problem, std::size_t n_pairs, double radius,
                               Rng& rng, Gap gap, Tol tolerance) {
  if (!(radius > 0.0)) throw ParameterError("radius must be positive");
  problem.require_deterministic("pairwise inequality check");
  ViolationReport report;
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const Vector x = sample_point(problem, radius, rng);
    const Vector y = sample_point(problem, radius, rng);
    const double excess = gap(x, y);
    if (excess > report.max_violation) {
      report.max_violation = excess;
      report.worst_x = x;
      report.worst_y = y;
    }
    if (excess > tolerance(x, y)) report.violated = true;
    ++report.pairs_tested;
  }
  return report;
}

}  // namespace

double weak_convexity_gap(const CompositeProblem& problem, const Vector& x, const Vector& y) {
  const Vector v = problem.g_full_subgradient(x);
  return problem.g_value(x) + v.dot(y - x) - 0.5 * problem.rho * (y - x).squaredNorm() -
         problem.g_value(y);
}

double hypomonotonicity_gap(const CompositeProblem& problem, const Vector& x, const Vector& y) {
  const Vector v = problem.g_full_subgradient(x);
  const Vector w = problem.g_full_subgradient(y);
  return -problem.rho * (x - y).squaredNorm() - (v - w).dot(x - y);
}

ViolationReport check_weak_convexity(const CompositeProblem& problem, std::size_t n_pairs,
                                     double radius, Rng& rng) {
  return pairwise_check(
      problem, n_pairs, radius, rng,
      [&](const Vector& x, const Vector& y) { return weak_convexity_gap(problem, x, y); },
      [&](const Vector&, const Vector& y) {
        return 1e-9 * (1.0 + std::abs(problem.g_value(y)));
      });
}

ViolationReport check_hypomonotonicity(const CompositeProblem& problem, std::size_t n_pairs,
                                       double radius, Rng& rng) {
  return pairwise_check(
      problem, n_pairs, radius, rng,
      [&](const Vector& x, const Vector& y) { return hypomonotonicity_gap(problem, x, y); },
      [&](const Vector& x, const Vector& y) {
        const Vector v = problem.g_full_subgradient(x);
        const Vector w = problem.g_full_subgradient(y);
        return 1e-9 * (1.0 + std::abs((v - w).dot(x - y)) + problem.rho * (x - y).squaredNorm());
      });
}

double estimate_second_moment(const CompositeProblem& problem, const Vector& x,
                              std::size_t n_samples, Rng& rng) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i)
    acc += problem.g_oracle.sample(x, rng).vector.squaredNorm();
  return acc / static_cast<double>(n_samples);
}

OracleMean estimate_oracle_mean(const CompositeProblem& problem, const Vector& x,
                                std::size_t n_samples, Rng& rng) {
  Vector sum = Vector::Zero(problem.dim);
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vector g = problem.g_oracle.sample(x, rng).vector;
    sum += g;
    sum_sq += g.squaredNorm();
  }
  const auto n = static_cast<double>(n_samples);
  OracleMean out;
  out.mean = sum / n;
  const double trace_cov = std::max(0.0, sum_sq / n - out.mean.squaredNorm()) * n / (n - 1.0);
  out.standard_error = std::sqrt(trace_cov / n);
  return out;
}

}  // namespace psgm

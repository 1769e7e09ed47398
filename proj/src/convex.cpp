#include "psgm/convex.hpp"

#include <algorithm>
#include <cmath>

namespace psgm {

namespace {

void require_convex_with_constants(const CompositeProblem& p, const char* what) {
  if (p.rho != 0.0) throw ParameterError(std::string(what) + " needs a convex problem (rho = 0)");
  if (!p.lipschitz_L) throw CapabilityError(std::string(what) + " needs L");
  if (!p.domain_diameter) throw CapabilityError(std::string(what) + " needs a bounded domain");
}

// gamma with gamma/sqrt(T+1) <= 1/rho_hat enforced.
double clip_gamma(double gamma, std::size_t horizon, double rho_hat) {
  return std::min(gamma, std::sqrt(static_cast<double>(horizon) + 1.0) / rho_hat);
}

}  // namespace

RegularizedProblem regularize(const CompositeProblem& base, double mu, const Vector& x_c) {
  if (!(mu >= 0.0)) throw ParameterError("mu must be nonnegative");
  if (x_c.size() != base.dim) throw ParameterError("anchor has wrong dimension");
  RegularizedProblem reg{base, mu, x_c, base};
  CompositeProblem& d = reg.derived;
  d.id = base.id + "+reg";
  d.rho = 0.0;
  if (base.lipschitz_L && base.domain_diameter)
    d.lipschitz_L = *base.lipschitz_L + mu * *base.domain_diameter;
  else
    d.lipschitz_L.reset();
  if (base.sigma) d.sigma = base.sigma;
  d.reference_value.reset();
  d.minimum_value.reset();

  auto shift = [mu, x_c](const Vector& x) -> Vector { return mu * (x - x_c); };
  if (base.g_value)
    d.g_value = [f = base.g_value, mu, x_c](const Vector& x) {
      return f(x) + 0.5 * mu * (x - x_c).squaredNorm();
    };
  if (base.g_full_subgradient)
    d.g_full_subgradient = [f = base.g_full_subgradient, shift](const Vector& x) {
      return Vector(f(x) + shift(x));
    };
  if (base.g_gradient)
    d.g_gradient = [f = base.g_gradient, shift](const Vector& x) { return Vector(f(x) + shift(x)); };
  if (base.g_subdifferential)
    d.g_subdifferential = [f = base.g_subdifferential, shift](const Vector& x, double radius) {
      SubdifferentialSet s = f(x, radius);
      s.base += shift(x);
      return s;
    };
  d.g_oracle.sample = [f = base.g_oracle.sample, shift](const Vector& x, Rng& rng) {
    StochasticSample s = f(x, rng);
    s.vector += shift(x);
    return s;
  };
  if (base.g_oracle.unbiased_mean)
    d.g_oracle.unbiased_mean = [f = base.g_oracle.unbiased_mean, shift](const Vector& x) {
      return Vector(f(x) + shift(x));
    };
  return reg;
}

Vector map_back(const Vector& x, double mu, double lambda, const Vector& x_c) {
  if (!(mu >= 0.0) || !(lambda > 0.0)) throw ParameterError("map_back needs mu >= 0, lambda > 0");
  return (mu * x_c + lambda * x) / (mu + lambda);
}

double envelope_shift_identity_check(const CompositeProblem& base, double mu, const Vector& x_c,
                                     double lambda, const Vector& x, const MoreauOracle& moreau) {
  if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
  const RegularizedProblem reg = regularize(base, mu, x_c);
  const double lhs = moreau.evaluate(reg.derived, x, 1.0 / lambda).envelope_value;
  const Vector z = map_back(x, mu, lambda, x_c);
  const double rhs = moreau.evaluate(base, z, 1.0 / (lambda + mu)).envelope_value +
                     lambda * mu / (2.0 * (mu + lambda)) * (x - x_c).squaredNorm();
  return std::abs(lhs - rhs);
}

double optimal_gamma(double R, double rho, double L) {
  if (!(R > 0.0) || !(rho > 0.0) || !(L > 0.0))
    throw ParameterError("optimal_gamma needs positive R, rho, L");
  return std::sqrt(R / (rho * L * L));
}

std::uint64_t iteration_bound(double rho, double L, double D, double eps) {
  if (!(rho > 0.0) || !(L > 0.0) || !(D > 0.0) || !(eps > 0.0))
    throw ParameterError("iteration_bound needs positive inputs");
  const double v = 16.0 * std::pow(rho * L * D, 2) * std::min(1.0, L / (rho * D)) / std::pow(eps, 4);
  // Guard against round-up of values that are integers in exact arithmetic.
  return static_cast<std::uint64_t>(std::ceil(v * (1.0 - 1e-12)));
}

StronglyConvexStageResult strongly_convex_stage(const RegularizedProblem& reg, std::size_t T,
                                                std::uint64_t seed) {
  if (!(reg.mu > 0.0)) throw ParameterError("strongly convex stage needs mu > 0");
  const CompositeProblem& p = reg.derived;
  if (!reg.base.lipschitz_L || !reg.base.domain_diameter)
    throw CapabilityError("strongly convex stage needs L and D");
  if (T == 0) throw ParameterError("strongly convex stage needs T >= 1");

  Rng rng(seed);
  Vector x = p.regularizer.project_domain(reg.x_c);
  Vector avg = Vector::Zero(p.dim);
  double weight_sum = 0.0;
  StronglyConvexStageResult out;
  for (std::size_t t = 1; t <= T; ++t) {
    const double w = static_cast<double>(t);
    weight_sum += w;
    avg += (w / weight_sum) * (x - avg);
    const double a = 2.0 / (reg.mu * (static_cast<double>(t) + 1.0));
    const Vector g = p.g_oracle.sample(x, rng).vector;
    ++out.oracle_calls;
    x = p.regularizer.prox(x - a * g, a);
  }
  const double L = *reg.base.lipschitz_L;
  const double D = *reg.base.domain_diameter;
  out.point = avg;
  out.gap_bound = 4.0 * (L * L + reg.mu * reg.mu * D * D) / (reg.mu * (static_cast<double>(T) + 1.0));
  return out;
}

TwoStageResult two_stage_convex(const CompositeProblem& base, const Vector& x0, std::size_t T,
                                double rho, std::uint64_t seed) {
  require_convex_with_constants(base, "two-stage scheme");
  if (!(rho > 0.0)) throw ParameterError("rho must be positive");
  const double L = *base.lipschitz_L;
  const double D = *base.domain_diameter;
  const double sqrtT = std::sqrt(static_cast<double>(T) + 1.0);

  TwoStageResult out;
  // L = 0 means g is constant: any step works and the iterates stay put.
  out.gamma1 = clip_gamma(L > 0.0 ? D / L : D, T, 2.0 * rho);
  out.stage1 = run_psgm(base, x0, StepSchedule::constant(out.gamma1, T), seed);
  out.gap_estimate = L * D / sqrtT;
  out.gamma2 = out.gap_estimate > 0.0 ? optimal_gamma(out.gap_estimate, rho, L) : 1.0 / (2.0 * rho);
  out.gamma2 = clip_gamma(out.gamma2, T, 2.0 * rho);
  out.stage2 = run_psgm(base, out.stage1.x_star, StepSchedule::constant(out.gamma2, T),
                        mix_seed(seed, 2));
  out.oracle_calls = out.stage1.oracle_calls + out.stage2.oracle_calls;
  return out;
}

RunResult single_stage_convex(const CompositeProblem& base, const Vector& x0, std::size_t T,
                              double rho, std::uint64_t seed) {
  require_convex_with_constants(base, "single-stage baseline");
  if (!(rho > 0.0)) throw ParameterError("rho must be positive");
  const double L = *base.lipschitz_L;
  const double D = *base.domain_diameter;
  const std::size_t horizon = 2 * T + 1;
  const double R = std::min(rho * D * D, D * L);
  double gamma = R > 0.0 ? optimal_gamma(R, rho, L) : 1.0 / (2.0 * rho);
  gamma = clip_gamma(gamma, horizon, 2.0 * rho);
  return run_psgm(base, x0, StepSchedule::constant(gamma, horizon), seed);
}

PipelineResult regularized_pipeline(const CompositeProblem& base, const Vector& x0, double eps,
                                    double rho, std::size_t T, std::uint64_t seed) {
  require_convex_with_constants(base, "regularized pipeline");
  if (!(rho > 0.0) || !(eps > 0.0)) throw ParameterError("rho and eps must be positive");
  const double L = *base.lipschitz_L;
  const double D = *base.domain_diameter;
  if (eps > 2.0 * rho * D) throw ParameterError("pipeline needs eps <= 2 rho D");

  PipelineResult out;
  out.mu = eps / (2.0 * D);
  out.lambda = 2.0 * rho - out.mu;
  const RegularizedProblem reg = regularize(base, out.mu, x0);
  const StronglyConvexStageResult warm = strongly_convex_stage(reg, T, mix_seed(seed, 1));
  out.gap_bound = warm.gap_bound;
  // phi_hat is convex: Algorithm 1 with rho_hat = lambda uses modulus lambda/2.
  out.gamma = clip_gamma(optimal_gamma(out.gap_bound, 0.5 * out.lambda, L + out.mu * D), T,
                         out.lambda);
  const RunResult run =
      run_psgm(reg.derived, warm.point, StepSchedule::constant(out.gamma, T), mix_seed(seed, 2));
  out.x = run.x_star;
  out.z = map_back(out.x, out.mu, out.lambda, x0);
  out.oracle_calls = warm.oracle_calls + run.oracle_calls;
  return out;
}

}  // namespace psgm

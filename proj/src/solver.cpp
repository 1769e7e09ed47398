#include "psgm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace psgm {

namespace {

// Stream tag for the t* selection variate.
constexpr std::uint64_t kSelectionStream = 0x7e1ec7ULL;

}  // namespace

StepSchedule StepSchedule::constant(double gamma, std::size_t horizon) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma must be positive");
  StepSchedule s;
  s.kind_ = Kind::Constant;
  s.gamma_ = gamma;
  s.alphas_.assign(horizon + 1, gamma / std::sqrt(static_cast<double>(horizon) + 1.0));
  return s;
}

StepSchedule StepSchedule::explicit_steps(std::vector<double> alphas) {
  if (alphas.empty()) throw ParameterError("step schedule is empty");
  for (double a : alphas)
    if (!(a > 0.0) || !std::isfinite(a)) throw ParameterError("step sizes must be positive");
  StepSchedule s;
  s.kind_ = Kind::Explicit;
  s.alphas_ = std::move(alphas);
  return s;
}

double StepSchedule::gamma() const {
  if (kind_ != Kind::Constant) throw ParameterError("gamma is defined for constant schedules only");
  return gamma_;
}

double StepSchedule::sum() const { return std::accumulate(alphas_.begin(), alphas_.end(), 0.0); }

double StepSchedule::sum_squares() const {
  double s = 0.0;
  for (double a : alphas_) s += a * a;
  return s;
}

double StepSchedule::max() const { return *std::max_element(alphas_.begin(), alphas_.end()); }

std::size_t sample_tstar(std::span<const double> alphas, Rng& rng) {
  if (alphas.empty()) throw ParameterError("cannot sample t* from an empty step list");
  double total = 0.0;
  for (double a : alphas) {
    if (!(a > 0.0)) throw ParameterError("step sizes must be positive");
    total += a;
  }
  const double target = rng.uniform() * total;
  double running = 0.0;
  for (std::size_t t = 0; t < alphas.size(); ++t) {
    running += alphas[t];
    if (target < running) return t;
  }
  return alphas.size() - 1;
}

RunResult run_psgm(const CompositeProblem& problem, const Vector& x0, const StepSchedule& schedule,
                   std::uint64_t seed, const RunOptions& options) {
  if (x0.size() != problem.dim) throw ParameterError("x0 has wrong dimension");
  if (problem.regularizer.value(x0).infinite) throw DomainError("x0 lies outside dom r");
  if (!problem.g_oracle.sample) throw CapabilityError("problem has no stochastic oracle");
  if (options.declared_rho_hat) {
    const double limit = 1.0 / *options.declared_rho_hat;
    if (schedule.max() > limit * (1.0 + 1e-12))
      throw ParameterError("step size exceeds 1/rho_hat");
  }

  RunResult result;
  result.seed = seed;
  result.schedule_used = schedule;
  Rng selection(mix_seed(seed, kSelectionStream));
  result.t_star = sample_tstar(schedule.alphas(), selection);

  const std::size_t n_points = schedule.size() + 1;
  const bool keep = n_points <= options.trajectory_cap;
  result.trajectory_truncated = !keep;
  if (keep) result.iterates.reserve(n_points);

  Rng rng(seed);
  Vector x = x0;
  for (std::size_t t = 0; t < schedule.size(); ++t) {
    if (keep) result.iterates.push_back(x);
    if (t == result.t_star) result.x_star = x;
    const StochasticSample sample = problem.g_oracle.sample(x, rng);
    ++result.oracle_calls;
    if (!sample.vector.allFinite())
      throw OracleError("oracle returned a non-finite vector at iteration " + std::to_string(t), t);
    const double a = schedule.alpha(t);
    x = problem.regularizer.prox(x - a * sample.vector, a);
  }
  if (keep) result.iterates.push_back(x);
  result.x_final = x;
  return result;
}

double effective_rho(const CompositeProblem& problem, double rho_hat) {
  return problem.rho > 0.0 ? problem.rho : 0.5 * rho_hat;
}

double default_rho_hat(const CompositeProblem& problem) {
  return problem.rho > 0.0 ? 2.0 * problem.rho : 1.0;
}

LemmaReport check_descent_lemma(const CompositeProblem& problem, const Vector& x_t, double rho_hat,
                                double alpha, std::size_t n_samples, Rng& rng,
                                const MoreauOracle& moreau,
                                std::optional<DescentVariant> variant) {
  const DescentVariant v =
      variant.value_or(problem.is_smooth() && problem.sigma ? DescentVariant::Smooth
                                                            : DescentVariant::Nonsmooth);
  const double rho = effective_rho(problem, rho_hat);
  if (!(rho_hat > rho)) throw ParameterError("descent lemma needs rho_hat > rho");
  if (v == DescentVariant::Nonsmooth && rho_hat > 2.0 * rho * (1.0 + 1e-12))
    throw ParameterError("descent lemma needs rho_hat <= 2 rho");
  if (alpha < 0.0 || alpha > (1.0 / rho_hat) * (1.0 + 1e-12))
    throw ParameterError("descent lemma needs 0 <= alpha <= 1/rho_hat");
  if (n_samples < 2) throw ParameterError("need at least two samples");
  if (v == DescentVariant::Nonsmooth && !problem.lipschitz_L)
    throw CapabilityError("nonsmooth descent lemma needs L");
  if (v == DescentVariant::Smooth && !problem.sigma)
    throw CapabilityError("smooth descent lemma needs sigma");

  const MoreauPoint mp = moreau.evaluate(problem, x_t, 1.0 / rho_hat);
  LemmaReport rep;
  rep.variant = v;
  rep.n_samples = n_samples;
  rep.dist_sq = (x_t - mp.x_hat).squaredNorm();

  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    double q;
    if (alpha == 0.0) {
      q = (problem.regularizer.project_domain(x_t) - mp.x_hat).squaredNorm();
    } else {
      const Vector g = problem.g_oracle.sample(x_t, rng).vector;
      q = (problem.regularizer.prox(x_t - alpha * g, alpha) - mp.x_hat).squaredNorm();
    }
    sum += q;
    sum_sq += q * q;
  }
  const auto n = static_cast<double>(n_samples);
  rep.estimate = sum / n;
  const double var = std::max(0.0, (sum_sq / n - rep.estimate * rep.estimate) * n / (n - 1.0));
  rep.ci_half_width = 1.96 * std::sqrt(var / n);

  if (v == DescentVariant::Nonsmooth) {
    const double L = *problem.lipschitz_L;
    rep.bound = rep.dist_sq + 2.0 * alpha * alpha * L * L - 2.0 * alpha * (rho_hat - rho) * rep.dist_sq;
  } else {
    const double s = *problem.sigma;
    rep.bound = rep.dist_sq + alpha * alpha * s * s - alpha * (rho_hat - rho) * rep.dist_sq;
  }
  rep.violated = rep.estimate - rep.ci_half_width > rep.bound + 1e-12 * (1.0 + rep.bound);
  return rep;
}

double check_prox_identity(const CompositeProblem& problem, const MoreauPoint& point,
                           double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
  if (!point.zeta_hat) throw CapabilityError("Moreau point carries no zeta_hat certificate");
  const double rho_hat = 1.0 / point.lambda;
  const Vector arg = alpha * rho_hat * point.x - alpha * *point.zeta_hat +
                     (1.0 - alpha * rho_hat) * point.x_hat;
  return (point.x_hat - problem.regularizer.prox(arg, alpha)).norm();
}

double check_prox_identity(const CompositeProblem& problem, const Vector& x, double rho_hat,
                           double alpha, const MoreauOracle& moreau) {
  return check_prox_identity(problem, moreau.evaluate(problem, x, 1.0 / rho_hat), alpha);
}

}  // namespace psgm

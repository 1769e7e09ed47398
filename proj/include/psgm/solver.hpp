#pragma once

#include "psgm/core.hpp"
#include "psgm/moreau.hpp"

#include <optional>
#include <span>
#include <vector>

namespace psgm {

/// Step sizes alpha_0..alpha_T.
class StepSchedule {
 public:
  enum class Kind { Constant, Explicit };

  /// alpha_t = gamma / sqrt(T + 1) for t = 0..T.
  static StepSchedule constant(double gamma, std::size_t horizon);
  static StepSchedule explicit_steps(std::vector<double> alphas);

  Kind kind() const { return kind_; }
  /// gamma of a constant schedule.
  double gamma() const;
  /// T: the last iteration index.
  std::size_t horizon() const { return alphas_.size() - 1; }
  std::size_t size() const { return alphas_.size(); }
  double alpha(std::size_t t) const { return alphas_[t]; }
  std::span<const double> alphas() const { return alphas_; }
  double sum() const;
  double sum_squares() const;
  double max() const;

 private:
  Kind kind_ = Kind::Explicit;
  double gamma_ = 0.0;
  std::vector<double> alphas_;
};

struct RunOptions {
  /// When set, every alpha_t must satisfy alpha_t <= 1/rho_hat.
  std::optional<double> declared_rho_hat;
  /// Maximum number of stored iterates; longer runs keep only x_{t*}.
  std::size_t trajectory_cap = 1'000'000;
};

/// Output of the proximal stochastic subgradient method.
struct RunResult {
  /// x_0..x_{T+1}; empty when the run exceeded the trajectory cap.
  std::vector<Vector> iterates;
  bool trajectory_truncated = false;
  std::size_t t_star = 0;
  Vector x_star;
  Vector x_final;
  std::size_t oracle_calls = 0;
  std::uint64_t seed = 0;
  StepSchedule schedule_used;
};

/// Index t drawn with probability alpha_t / sum(alpha) by inverse CDF on the
/// running sum, using a single uniform variate.
std::size_t sample_tstar(std::span<const double> alphas, Rng& rng);

/// Proximal stochastic subgradient method:
///   x_{t+1} = prox_{alpha_t r}(x_t - alpha_t G(x_t, xi_t)),  t = 0..T,
/// then returns x_{t*} with P(t* = t) proportional to alpha_t.
///
/// The oracle stream is Rng(seed); t* comes from an independent stream
/// derived from the same seed, so identical inputs reproduce the result bit
/// for bit and the trajectory cap never changes which index is returned.
RunResult run_psgm(const CompositeProblem& problem, const Vector& x0, const StepSchedule& schedule,
                   std::uint64_t seed, const RunOptions& options = {});

/// Weak-convexity modulus used by the bounds. Convex g (rho = 0) may use any
/// positive modulus; we take rho_hat / 2 so that rho_hat = 2 rho.
double effective_rho(const CompositeProblem& problem, double rho_hat);
/// 2 rho, or 1 when g is convex.
double default_rho_hat(const CompositeProblem& problem);

enum class DescentVariant { Nonsmooth, Smooth };

struct LemmaReport {
  DescentVariant variant = DescentVariant::Nonsmooth;
  double estimate = 0.0;       // Monte-Carlo E_t |x_{t+1} - x_hat_t|^2
  double ci_half_width = 0.0;  // 95%, normal approximation
  double bound = 0.0;          // right-hand side of the descent inequality
  double dist_sq = 0.0;        // |x_t - x_hat_t|^2
  bool violated = false;
  std::size_t n_samples = 0;
};

/// One-step descent inequality around x_hat_t = prox_{phi/rho_hat}(x_t).
///
/// Nonsmooth: E|x_{t+1} - x_hat|^2 <= D + 2 a^2 L^2 - 2 a (rho_hat - rho) D,
/// needs rho_hat in (rho, 2 rho] and a <= 1/rho_hat.
/// Smooth:    E|x_{t+1} - x_hat|^2 <= D + a^2 sigma^2 - a (rho_hat - rho) D,
/// needs rho_hat > rho and a <= 1/rho_hat.
/// Flags a violation when estimate - CI exceeds the bound.
LemmaReport check_descent_lemma(const CompositeProblem& problem, const Vector& x_t, double rho_hat,
                                double alpha, std::size_t n_samples, Rng& rng,
                                const MoreauOracle& moreau,
                                std::optional<DescentVariant> variant = std::nullopt);

/// |x_hat - prox_{alpha r}(alpha rho_hat x - alpha zeta_hat + (1 - alpha rho_hat) x_hat)|
/// with (x_hat, zeta_hat) taken from `point` (lambda = 1/rho_hat).
double check_prox_identity(const CompositeProblem& problem, const MoreauPoint& point,
                           double alpha);
double check_prox_identity(const CompositeProblem& problem, const Vector& x, double rho_hat,
                           double alpha, const MoreauOracle& moreau);

}  // namespace psgm

#pragma once

#include "psgm/core.hpp"
#include "psgm/moreau.hpp"
#include "psgm/solver.hpp"

namespace psgm {

/// phi_hat = phi + (mu/2)|. - x_c|^2 for convex phi.
///
/// `derived` carries the regularized problem: every oracle output is shifted
/// by mu (x - x_c) and the quadratic is folded into g. Its certified L is
/// L + mu D.
struct RegularizedProblem {
  CompositeProblem base;
  double mu = 0.0;
  Vector x_c;
  CompositeProblem derived;
};

RegularizedProblem regularize(const CompositeProblem& base, double mu, const Vector& x_c);

/// |phi_hat_{1/lambda}(x) - phi_{1/(lambda+mu)}(z) - lambda mu/(2(lambda+mu)) |x - x_c|^2|
/// with z = map_back(x, mu, lambda, x_c); both envelopes from `moreau`.
double envelope_shift_identity_check(const CompositeProblem& base, double mu, const Vector& x_c,
                                     double lambda, const Vector& x, const MoreauOracle& moreau);

/// z = mu/(mu+lambda) x_c + lambda/(mu+lambda) x.
Vector map_back(const Vector& x, double mu, double lambda, const Vector& x_c);

/// argmin over gamma of (R + rho L^2 gamma^2)/gamma = sqrt(R/(rho L^2)).
double optimal_gamma(double R, double rho, double L);

/// ceil(16 (rho L D)^2 min{1, L/(rho D)} / eps^4).
std::uint64_t iteration_bound(double rho, double L, double D, double eps);

struct StronglyConvexStageResult {
  Vector point;      // weighted average of the iterates
  double gap_bound;  // 4 (L^2 + mu^2 D^2) / (mu (T+1))
  std::size_t oracle_calls = 0;
};

/// Stochastic proximal subgradient method for the mu-strongly convex phi_hat:
/// step 2/(mu (t+1)) at the t-th iteration (t = 1..T), average weighted by t.
StronglyConvexStageResult strongly_convex_stage(const RegularizedProblem& reg, std::size_t T,
                                                std::uint64_t seed);

struct TwoStageResult {
  RunResult stage1;
  RunResult stage2;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gap_estimate = 0.0;  // R = L D / sqrt(T+1)
  std::size_t oracle_calls = 0;
};

/// Warm start with gamma = D/L for T iterations, then Algorithm 1 from the
/// selected point with gamma = optimal_gamma(R, rho, L), clipped so that each
/// step stays <= 1/(2 rho). `rho` is the user's weak-convexity parameter.
TwoStageResult two_stage_convex(const CompositeProblem& base, const Vector& x0, std::size_t T,
                                double rho, std::uint64_t seed);

/// Baseline with the same oracle budget: a single run of 2(T+1) steps with
/// gamma = optimal_gamma(min{rho D^2, D L}, rho, L), same clipping.
RunResult single_stage_convex(const CompositeProblem& base, const Vector& x0, std::size_t T,
                              double rho, std::uint64_t seed);

struct PipelineResult {
  Vector x;  // output of Algorithm 1 on phi_hat
  Vector z;  // map_back(x)
  double mu = 0.0;
  double lambda = 0.0;
  double gap_bound = 0.0;
  double gamma = 0.0;
  std::size_t oracle_calls = 0;
};

/// Regularize with mu = eps/(2D) around x0, run strongly_convex_stage for T
/// steps, then Algorithm 1 on phi_hat (rho_hat = lambda = 2 rho - mu) with
/// gamma = optimal_gamma(R, lambda/2, L + mu D) for T steps, and map back.
/// The result z targets |grad phi_{1/(2 rho)}(z)| <= eps. Requires eps <= 2 rho D.
PipelineResult regularized_pipeline(const CompositeProblem& base, const Vector& x0, double eps,
                                    double rho, std::size_t T, std::uint64_t seed);

}  // namespace psgm

#include "psgm/problems.hpp"
#include "psgm/solver.hpp"
#include "psgm/stats.hpp"

#include <doctest.h>

#include <cmath>

using namespace psgm;

TEST_CASE("constant schedule") {
  const StepSchedule s = StepSchedule::constant(2.0, 3);
  CHECK(s.size() == 4);
  CHECK(s.alpha(0) == 1.0);
  CHECK(s.sum() == doctest::Approx(4.0));
  CHECK(s.sum_squares() == doctest::Approx(4.0));
  CHECK(s.gamma() == 2.0);
  const StepSchedule e = StepSchedule::explicit_steps({0.1, 0.2, 0.3});
  CHECK(e.horizon() == 2);
  CHECK(e.max() == 0.3);
  CHECK(e.sum_squares() == doctest::Approx(0.14));
  CHECK_THROWS_AS(StepSchedule::constant(-1.0, 3), ParameterError);
  CHECK_THROWS_AS(StepSchedule::explicit_steps({}), ParameterError);
  CHECK_THROWS_AS(StepSchedule::explicit_steps({0.1, 0.0}), ParameterError);
}

TEST_CASE("iterates match a hand-rolled loop") {
  const CompositeProblem p = make_problem("robust_regression:40:3:2");
  const StepSchedule s = StepSchedule::constant(0.5, 30);
  const RunResult r = run_psgm(p, p.initial_point, s, 11);
  Rng rng(11);
  Vector x = p.initial_point;
  REQUIRE(r.iterates.size() == 32);
  for (std::size_t t = 0; t <= 30; ++t) {
    CHECK(r.iterates[t] == x);
    x = p.regularizer.prox(x - s.alpha(t) * p.g_oracle.sample(x, rng).vector, s.alpha(t));
  }
  CHECK(r.x_final == x);
  CHECK(r.x_star == r.iterates[r.t_star]);
  CHECK(r.oracle_calls == 31);
}

TEST_CASE("determinism and trajectory cap") {
  const CompositeProblem p = make_problem("phase_retrieval:30:2:1");
  const StepSchedule s = StepSchedule::constant(0.05, 200);
  const RunResult a = run_psgm(p, p.initial_point, s, 3);
  const RunResult b = run_psgm(p, p.initial_point, s, 3, {std::nullopt, 10});
  CHECK(b.trajectory_truncated);
  CHECK(b.iterates.empty());
  CHECK(a.t_star == b.t_star);
  CHECK(a.x_star == b.x_star);
  CHECK(a.x_final == b.x_final);
  CHECK(run_psgm(p, p.initial_point, s, 4).x_final != a.x_final);
}

TEST_CASE("declared rho_hat caps the step") {
  const CompositeProblem p = make_toy1d(Toy1DKind::AbsQuadratic);
  const StepSchedule s = StepSchedule::explicit_steps({0.1, 0.6});
  CHECK_THROWS_AS(run_psgm(p, p.initial_point, s, 1, {4.0}), ParameterError);
  CHECK_NOTHROW(run_psgm(p, p.initial_point, s, 1, {1.0}));
  CHECK_THROWS_AS(run_psgm(p, Vector::Zero(2), s, 1), ParameterError);
}

TEST_CASE("t* follows the step weights") {
  const std::vector<double> alphas{1.0, 2.0, 3.0, 4.0};
  Rng rng(9);
  const std::size_t n = 100'000;
  std::vector<double> observed(4, 0.0), expected(4);
  for (std::size_t k = 0; k < n; ++k) observed[sample_tstar(alphas, rng)] += 1.0;
  for (int i = 0; i < 4; ++i) expected[i] = n * alphas[i] / 10.0;
  CHECK(chi_square_statistic(observed, expected) < chi_square_critical(3, 0.001));
}

TEST_CASE("descent lemma holds and detects a wrong L") {
  const CompositeProblem p = make_problem("phase_retrieval:30:2:1");
  Rng rng(12);
  const double rho_hat = 2.0 * p.rho;
  const MoreauOracle oracle(MoreauMethod::IterativeInner, {1e-10, 1'000'000, 1e-7});
  const Vector x = p.initial_point;
  const LemmaReport ok = check_descent_lemma(p, x, rho_hat, 0.5 / rho_hat, 2000, rng, oracle);
  CHECK_FALSE(ok.violated);
  CHECK(ok.estimate <= ok.bound + ok.ci_half_width);

  // Understating L by a factor 100 turns the bound into a false statement.
  CompositeProblem wrong = p;
  wrong.lipschitz_L = *p.lipschitz_L / 100.0;
  const LemmaReport bad = check_descent_lemma(wrong, x, rho_hat, 1.0 / rho_hat, 2000, rng, oracle);
  CHECK(bad.violated);
}

TEST_CASE("prox identity of the descent step") {
  const CompositeProblem p = make_problem("phase_retrieval:30:2:1");
  const MoreauOracle oracle(MoreauMethod::IterativeInner, {1e-12, 1'000'000, 1e-9});
  const double rho_hat = 2.0 * p.rho;
  Rng rng(13);
  for (int k = 0; k < 10; ++k) {
    const Vector x = p.regularizer.project_domain(rng.uniform_ball(2, 2.0));
    CHECK(check_prox_identity(p, x, rho_hat, 0.7 / rho_hat, oracle) < 1e-6);
  }
}

TEST_CASE("effective modulus") {
  const CompositeProblem abs = make_toy1d(Toy1DKind::Abs);
  CHECK(effective_rho(abs, 1.0) == 0.5);
  CHECK(default_rho_hat(abs) == 1.0);
  const CompositeProblem aq = make_toy1d(Toy1DKind::AbsQuadratic);
  CHECK(effective_rho(aq, 3.0) == 2.0);
  CHECK(default_rho_hat(aq) == 4.0);
}

#include "psgm/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace psgm;

TEST_CASE("bound formulas on hand-worked inputs") {
  BoundInputs in;
  in.delta = 1.0;
  in.rho = 1.0;
  in.rho_hat = 2.0;
  in.L = 1.0;
  in.alphas = {1.0 / 2.0};
  // cor22 with gamma = 1/2, T = 0: 2 (1 + 1/4) / (1/2) = 5.
  CHECK(theoretical_bound(BoundVariant::Cor22, in) == doctest::Approx(5.0));

  in.alphas = {0.25, 0.25};  // S1 = 1/2, S2 = 1/8
  CHECK(theoretical_bound(BoundVariant::ProjectedThm21, in) == doctest::Approx(4.5));
  CHECK(theoretical_bound(BoundVariant::ProximalThm26, in) == doctest::Approx(5.0));
  CHECK(theoretical_bound(BoundVariant::Cor27, in) == doctest::Approx(4.5));
  in.sigma = 1.0;
  CHECK(theoretical_bound(BoundVariant::SmoothCor29, in) == doctest::Approx(9.0));
}

TEST_CASE("constant-step bound equals the projected bound at rho_hat = 2 rho") {
  BoundInputs in;
  in.delta = 0.7;
  in.rho = 3.0;
  in.rho_hat = 6.0;
  in.L = 2.5;
  in.alphas.assign(100, 0.1 / std::sqrt(100.0));
  CHECK(theoretical_bound(BoundVariant::Cor22, in) ==
        doctest::Approx(theoretical_bound(BoundVariant::ProjectedThm21, in)));
  // The proximal theorem pays a factor 2 on the variance term only.
  const double s1 = 1.0, s2 = 0.01;
  const double t21 = 2.0 * (0.7 + 3.0 * 6.25 * s2) / s1;
  const double t26 = 2.0 * (0.7 + 6.0 * 6.25 * s2) / s1;
  CHECK(theoretical_bound(BoundVariant::ProjectedThm21, in) == doctest::Approx(t21));
  CHECK(theoretical_bound(BoundVariant::ProximalThm26, in) == doctest::Approx(t26));
}

TEST_CASE("bound preconditions") {
  BoundInputs in;
  in.delta = 1.0;
  in.rho = 1.0;
  in.rho_hat = 3.0;
  in.L = 1.0;
  in.alphas = {0.1, 0.1};
  CHECK_THROWS_AS(theoretical_bound(BoundVariant::ProximalThm26, in), ParameterError);
  CHECK_THROWS_AS(theoretical_bound(BoundVariant::Cor22, in), ParameterError);
  CHECK_THROWS_AS(theoretical_bound(BoundVariant::SmoothCor29, in), ParameterError);
  in.projected = false;
  CHECK_THROWS_AS(theoretical_bound(BoundVariant::ProjectedThm21, in), ParameterError);
  in.rho_hat = 2.0;
  in.alphas = {0.1, 0.2};
  CHECK_THROWS_AS(theoretical_bound(BoundVariant::Cor27, in), ParameterError);
  in.alphas = {0.6};
  CHECK_THROWS_AS(theoretical_bound(BoundVariant::ProximalThm26, in), ParameterError);
  in.rho_hat = 0.5;
  in.alphas = {0.1};
  CHECK_THROWS_AS(theoretical_bound(BoundVariant::ProjectedThm21, in), ParameterError);
  CHECK(parse_bound_variant("cor29") == BoundVariant::SmoothCor29);
  CHECK(to_string(BoundVariant::ProximalThm26) == "thm26");
  CHECK_THROWS_AS(parse_bound_variant("thm99"), ParameterError);
}

TEST_CASE("default variant follows the problem") {
  CHECK(default_bound_variant(make_problem("smooth_ls:100:5:1:0.1"), 2.0) == BoundVariant::SmoothCor29);
  const CompositeProblem pr = make_problem("phase_retrieval:30:2:1");
  CHECK(default_bound_variant(pr, 2.0 * pr.rho) == BoundVariant::Cor22);
  CHECK(default_bound_variant(pr, 1.5 * pr.rho) == BoundVariant::ProjectedThm21);
}

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(
      "# comment\nproblem = toy1d:abs\nhorizons = 10, 20,40\ngamma = optimal\n"
      "n_seeds = 5  # trailing\ntiming = off\nbound = thm26\n");
  CHECK(c.problem_id == "toy1d:abs");
  CHECK(c.horizons == std::vector<std::size_t>{10, 20, 40});
  CHECK_FALSE(c.gamma);
  CHECK(c.n_seeds == 5);
  CHECK_FALSE(c.timing);
  CHECK(c.bound == BoundVariant::ProximalThm26);
  CHECK(parse_config("problem = toy1d:abs\nhorizons = 5\ngamma = 0.5\n").gamma == 0.5);

  CHECK_THROWS_AS(parse_config("problem = toy1d:abs\nstep = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("n_seeds = many\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("horizons = 10,,20\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("gamma 0.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("timing = maybe\n"), ConfigError);
  CHECK_THROWS_AS(validate_config(parse_config("horizons = 10\n")), ConfigError);
  CHECK_THROWS_AS(validate_config(parse_config("problem = toy1d:abs\n")), ConfigError);
  CHECK_THROWS_AS(validate_config(parse_config("problem = toy1d:abs\nhorizons = 10\nn_seeds = 0\n")),
                  ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/psgm.cfg"), ConfigError);
}

TEST_CASE("sweep is deterministic across thread counts and round-trips through CSV") {
  ExperimentConfig c = parse_config("problem = robust_regression:50:2:1\nhorizons = 10,40,160\n"
                                    "n_seeds = 6\ntiming = off\n");
  c.threads = 1;
  const ExperimentReport a = run_sweep(c);
  c.threads = 3;
  const ExperimentReport b = run_sweep(c);
  std::ostringstream sa, sb;
  write_csv(sa, a.rows);
  write_csv(sb, b.rows);
  CHECK(sa.str() == sb.str());
  REQUIRE(a.rows.size() == 18);
  CHECK(a.rows.front().T == 10);
  CHECK(a.rows.back().T == 160);

  std::istringstream in(sa.str());
  const std::vector<TrialRow> back = read_csv(in);
  REQUIRE(back.size() == a.rows.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].grad_norm_sq == a.rows[i].grad_norm_sq);
    CHECK(back[i].seed == a.rows[i].seed);
    CHECK(back[i].bound_satisfied == a.rows[i].bound_satisfied);
  }
  REQUIRE(a.fit);
  CHECK(fit_rate(summarize_rows(back)).slope == doctest::Approx(a.fit->slope));
  for (const auto& h : a.horizons) CHECK(h.bound_satisfied);
}

TEST_CASE("rate fit needs three horizons") {
  std::vector<HorizonSummary> h(2);
  h[0].T = 10;
  h[0].grad_norm_sq.mean = 1.0;
  h[1].T = 100;
  h[1].grad_norm_sq.mean = 0.1;
  CHECK_THROWS_AS(fit_rate(h), ParameterError);
  h.push_back(h[1]);
  h[2].T = 1000;
  h[2].grad_norm_sq.mean = 0.01;
  CHECK(fit_rate(h).slope == doctest::Approx(-1.0));
}

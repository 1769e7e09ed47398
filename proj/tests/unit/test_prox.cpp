#include "psgm/prox.hpp"
#include "psgm/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace psgm;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Independent 1-D prox by dense scan plus golden-section polish.
double brute_prox_1d(const Regularizer& r, double x, double alpha, double lo, double hi) {
  auto f = [&](double y) {
    const auto v = r.value(Vector::Constant(1, y));
    return v.infinite ? HUGE_VAL : v.value + (y - x) * (y - x) / (2.0 * alpha);
  };
  double best = lo, fb = f(lo);
  const int n = 20000;
  for (int i = 1; i <= n; ++i) {
    const double y = lo + (hi - lo) * i / n;
    if (f(y) < fb) fb = f(best = y);
  }
  double a = best - (hi - lo) / n, b = best + (hi - lo) / n;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (f(c) < f(d)) b = d; else a = c;
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("closed forms on hand-worked inputs") {
  // Soft thresholding at level alpha * weight = 1.
  CHECK(prox_l1(vec({3.0, -0.5, 1.0, -2.0}), 1.0, 1.0).isApprox(vec({2.0, 0.0, 0.0, -1.0})));
  // 3-4-5 triangle onto the unit ball.
  CHECK(proj_ball(vec({3.0, 4.0}), Vector::Zero(2), 1.0).isApprox(vec({0.6, 0.8})));
  CHECK(proj_ball(vec({0.1, 0.2}), Vector::Zero(2), 1.0) == vec({0.1, 0.2}));
  CHECK(proj_box(vec({-3.0, 0.5, 9.0}), vec({-1, -1, -1}), vec({1, 1, 1})) == vec({-1.0, 0.5, 1.0}));
  // (x + a w c) / (1 + a w) with a w = 2: (4 + 2*1)/3 = 2.
  CHECK(prox_quadratic(vec({4.0}), 1.0, 2.0, vec({1.0}))[0] == doctest::Approx(2.0));
  CHECK(prox_zero(vec({1.0, 2.0}), 5.0) == vec({1.0, 2.0}));
}

TEST_CASE("every kind agrees with a brute-force 1-D prox") {
  const Regularizer kinds[] = {Regularizer::zero(), Regularizer::box(vec({-0.5}), vec({1.5})),
                               Regularizer::ball(vec({0.2}), 0.7), Regularizer::l1(0.8),
                               Regularizer::quadratic(1.7, vec({-0.4}))};
  Rng rng(1);
  for (const auto& r : kinds) {
    for (int k = 0; k < 20; ++k) {
      const double x = 6.0 * rng.uniform() - 3.0;
      const double alpha = std::pow(10.0, 2.0 * rng.uniform() - 1.0);
      const double expect = brute_prox_1d(r, x, alpha, -10.0, 10.0);
      CHECK(r.prox(Vector::Constant(1, x), alpha)[0] == doctest::Approx(expect).epsilon(1e-7).scale(1.0));
    }
  }
}

TEST_CASE("values, domains and diameters") {
  const Regularizer box = Regularizer::box(vec({-1, -1}), vec({1, 1}));
  CHECK(box.value(vec({0.5, 0.5})).value == 0.0);
  CHECK(box.value(vec({1.5, 0.0})).infinite);
  CHECK(*box.domain_diameter() == doctest::Approx(2.0 * std::sqrt(2.0)));
  const Regularizer ball = Regularizer::ball(vec({1, 0}), 2.0);
  CHECK(*ball.domain_diameter() == 4.0);
  CHECK(ball.in_domain(ball.project_domain(vec({10, 10}))));
  CHECK_FALSE(Regularizer::l1(1.0).domain_diameter());
  CHECK(Regularizer::l1(0.5).value(vec({1, -2})).value == doctest::Approx(1.5));
  CHECK(Regularizer::quadratic(2.0, vec({1, 1})).value(vec({2, 1})).value == doctest::Approx(1.0));
  CHECK(box.is_indicator_or_zero());
  CHECK_FALSE(Regularizer::l1(1.0).is_indicator_or_zero());
}

TEST_CASE("indicator prox ignores alpha") {
  const Regularizer ball = Regularizer::ball(Vector::Zero(3), 1.0);
  const Vector x = vec({2, -1, 3});
  CHECK(ball.prox(x, 1e-3) == ball.prox(x, 1e3));
}

TEST_CASE("subdifferentials contain the optimality residual of prox") {
  // (x - prox(x)) / alpha lies in dr(prox(x)).
  const Regularizer kinds[] = {Regularizer::box(vec({-1, 0}), vec({1, 2})),
                               Regularizer::ball(vec({0, 0}), 1.0), Regularizer::l1(0.6),
                               Regularizer::quadratic(0.9, vec({1, -1}))};
  Rng rng(2);
  for (const auto& r : kinds) {
    for (int k = 0; k < 50; ++k) {
      const Vector x = 3.0 * rng.normal_vector(2);
      const double alpha = 0.5;
      const Vector p = r.prox(x, alpha);
      const SubdifferentialSet s = r.subdifferential(p, 1e-9);
      CHECK(project_onto(s, (x - p) / alpha).distance < 1e-9);
    }
  }
}

TEST_CASE("nonexpansiveness on random pairs") {
  Rng rng(3);
  const Regularizer kinds[] = {Regularizer::zero(), Regularizer::box(3, 0.5),
                               Regularizer::ball(Vector::Zero(3), 1.0), Regularizer::l1(0.3),
                               Regularizer::quadratic(2.0, Vector::Ones(3))};
  for (const auto& r : kinds)
    for (int k = 0; k < 1000; ++k) {
      const Vector x = 2.0 * rng.normal_vector(3), y = 2.0 * rng.normal_vector(3);
      CHECK((r.prox(x, 0.7) - r.prox(y, 0.7)).norm() <= (x - y).norm() + 1e-12);
    }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(Regularizer::ball(Vector::Zero(2), -1.0), ParameterError);
  CHECK_THROWS_AS(Regularizer::box(vec({1.0}), vec({0.0})), ParameterError);
  CHECK_THROWS_AS(Regularizer::l1(0.0), ParameterError);
  CHECK_THROWS_AS(prox_l1(vec({1.0}), -1.0, 1.0), ParameterError);
}

#include "psgm/stats.hpp"
#include "psgm/types.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace psgm;

TEST_CASE("log-log fit recovers an exact power law") {
  std::vector<double> T{100, 1000, 10000}, y;
  for (double t : T) y.push_back(3.0 * std::pow(t, -0.5));
  const LinearFit f = loglog_fit(T, y);
  CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(f.slope_stderr < 1e-12);
}

TEST_CASE("constant data has zero slope") {
  std::vector<double> T{1, 2, 4, 8}, y(4, 0.7);
  CHECK(std::abs(loglog_fit(T, y).slope) < 1e-14);
}

TEST_CASE("slope standard error matches the textbook formula") {
  // Worked by hand: x = (0,1,2), y = (0,2,2); slope 1, intercept 1/3, rss = 2/3, sxx = 2.
  std::vector<double> x{0, 1, 2}, y{0, 2, 2};
  const LinearFit f = least_squares_fit(x, y);
  CHECK(f.slope == doctest::Approx(1.0));
  CHECK(f.intercept == doctest::Approx(1.0 / 3.0));
  CHECK(f.slope_stderr == doctest::Approx(std::sqrt((2.0 / 3.0) / 1.0 / 2.0)));
}

TEST_CASE("fit input validation") {
  std::vector<double> one{1.0}, two{1.0, 2.0}, neg{-1.0, 2.0};
  CHECK_THROWS_AS(least_squares_fit(one, one), ParameterError);
  CHECK_THROWS_AS(least_squares_fit(two, one), ParameterError);
  CHECK_THROWS_AS(loglog_fit(neg, two), ParameterError);
  std::vector<double> same{1.0, 1.0};
  CHECK_THROWS_AS(least_squares_fit(same, two), ParameterError);
}

TEST_CASE("summary statistics") {
  std::vector<double> v{1, 2, 3, 4};
  const SampleSummary s = summarize(v);
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(s.ci95 == doctest::Approx(1.96 * std::sqrt(5.0 / 3.0) / 2.0));
}

TEST_CASE("chi-square critical values match tables") {
  // Standard table values.
  CHECK(chi_square_critical(9, 0.01) == doctest::Approx(21.666).epsilon(1e-4));
  CHECK(chi_square_critical(1, 0.05) == doctest::Approx(3.841).epsilon(1e-3));
  std::vector<double> o{10, 20}, e{15, 15};
  CHECK(chi_square_statistic(o, e) == doctest::Approx(25.0 / 15.0 * 2.0));
  CHECK_THROWS_AS(chi_square_critical(0, 0.05), ParameterError);
}

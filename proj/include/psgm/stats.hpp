#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace psgm {

struct SampleSummary {
  double mean = 0.0;
  double sd = 0.0;         // unbiased
  double ci95 = 0.0;       // 1.96 sd / sqrt(n)
  std::size_t n = 0;
};
SampleSummary summarize(std::span<const double> values);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;  // 0 when n == 2
};
/// Ordinary least squares y ~ a + b x.
LinearFit least_squares_fit(std::span<const double> x, std::span<const double> y);
/// Fit of log y against log x; all values must be positive.
LinearFit loglog_fit(std::span<const double> x, std::span<const double> y);

/// Pearson statistic sum (O - E)^2 / E.
double chi_square_statistic(std::span<const double> observed, std::span<const double> expected);
/// Upper quantile: P(X > q) = alpha for X ~ chi^2(dof).
double chi_square_critical(double dof, double alpha);

}  // namespace psgm

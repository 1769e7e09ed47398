#include "psgm/stats.hpp"

#include "psgm/types.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>

namespace psgm {

SampleSummary summarize(std::span<const double> values) {
  SampleSummary s;
  s.n = values.size();
  if (s.n == 0) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  if (s.n < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  s.ci95 = 1.96 * s.sd / std::sqrt(static_cast<double>(s.n));
  return s;
}

LinearFit least_squares_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("fit needs equally many x and y values");
  const std::size_t n = x.size();
  if (n < 2) throw ParameterError("fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ParameterError("fit needs at least two distinct x values");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.slope_stderr = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  }
  return f;
}

LinearFit loglog_fit(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (double v : x) {
    if (!(v > 0.0)) throw ParameterError("log-log fit needs positive values");
    lx.push_back(std::log(v));
  }
  for (double v : y) {
    if (!(v > 0.0)) throw ParameterError("log-log fit needs positive values");
    ly.push_back(std::log(v));
  }
  return least_squares_fit(lx, ly);
}

double chi_square_statistic(std::span<const double> observed, std::span<const double> expected) {
  if (observed.size() != expected.size()) throw ParameterError("bin count mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0.0)) throw ParameterError("expected counts must be positive");
    s += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
  }
  return s;
}

double chi_square_critical(double dof, double alpha) {
  if (!(dof > 0.0) || !(alpha > 0.0 && alpha < 1.0))
    throw ParameterError("chi-square quantile needs dof > 0 and alpha in (0, 1)");
  boost::math::chi_squared dist(dof);
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

}  // namespace psgm

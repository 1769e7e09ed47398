#include "psgm/moreau.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace psgm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_lambda(const CompositeProblem& problem, double lambda) {
  if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
  if (problem.rho > 0.0 && lambda * problem.rho >= 1.0)
    throw ParameterError("lambda must satisfy lambda < 1/rho");
}

// Strong-convexity modulus of the prox subproblem.
double subproblem_modulus(const CompositeProblem& problem, double lambda) {
  double mu = 1.0 / lambda - problem.rho;
  if (problem.regularizer.kind() == RegularizerKind::Quadratic) mu += problem.regularizer.weight();
  return mu;
}

// Finite part of the subproblem: g + finite r + quadratic penalty.
struct Subproblem {
  const CompositeProblem& problem;
  const Vector& x;
  double lambda;

  double value(const Vector& y) const {
    double v = problem.g_value(y) + (y - x).squaredNorm() / (2.0 * lambda);
    if (!problem.regularizer.is_indicator()) v += problem.regularizer.value(y).value;
    return v;
  }
  Vector subgradient(const Vector& y) const {
    return problem.g_full_subgradient(y) + problem.regularizer.subgradient(y) + (y - x) / lambda;
  }
};

// Distance from the true prox point implied by a certified gap.
double distance_bound(double gap, double mu) { return std::sqrt(2.0 * std::max(gap, 0.0) / mu); }

double kink_radius(double distance, const Vector& x_hat) {
  return 4.0 * distance + 1e-13 * (1.0 + x_hat.norm());
}

struct InnerResult {
  Vector y;
  double gap = 0.0;
  std::size_t iterations = 0;
};

InnerResult interval_search(const Subproblem& sub, const Vector& y0, double radius, double mu,
                            double tol, std::size_t max_iterations) {
  const Regularizer& r = sub.problem.regularizer;
  double lo = y0[0] - radius;
  double hi = y0[0] + radius;
  if (r.is_indicator()) {
    if (r.kind() == RegularizerKind::IndicatorBox) {
      lo = std::max(lo, r.lo()[0]);
      hi = std::min(hi, r.hi()[0]);
    } else {
      lo = std::max(lo, r.center()[0] - r.radius());
      hi = std::min(hi, r.center()[0] + r.radius());
    }
  }
  InnerResult best{y0, kInf, 0};
  double f_best = sub.value(y0);
  double lower = -kInf;
  Vector c(1);
  for (std::size_t k = 0; k < max_iterations; ++k) {
    best.iterations = k + 1;
    c[0] = 0.5 * (lo + hi);
    const double f = sub.value(c);
    const double w = sub.subgradient(c)[0];
    if (f < f_best) {
      f_best = f;
      best.y = c;
    }
    lower = std::max({lower, f + std::min(w * (lo - c[0]), w * (hi - c[0])), f - w * w / (2.0 * mu)});
    if (w == 0.0) lower = std::max(lower, f);
    best.gap = f_best - lower;
    if (best.gap <= tol || w == 0.0) break;
    // Deep cut with the incumbent value: F(y*) <= f_best.
    const double shift = (f_best - f) / w;
    if (w > 0.0)
      hi = std::min(c[0], c[0] + shift);
    else
      lo = std::max(c[0], c[0] + shift);
    if (!(hi - lo > 1e-16 * (1.0 + std::abs(c[0])))) {
      // Bracket exhausted: the minimizer is within one ulp-scale interval.
      c[0] = 0.5 * (lo + hi);
      const double fc = sub.value(c);
      if (fc < f_best) {
        f_best = fc;
        best.y = c;
      }
      const double wc = sub.subgradient(c)[0];
      lower = std::max(lower, fc - std::abs(wc) * (hi - lo));
      best.gap = std::max(0.0, f_best - lower);
      break;
    }
  }
  return best;
}

InnerResult ellipsoid_search(const Subproblem& sub, const Vector& y0, double radius, double mu,
                             double tol, std::size_t max_iterations) {
  const Regularizer& r = sub.problem.regularizer;
  const auto d = static_cast<double>(y0.size());
  Vector c = y0;
  Matrix P = Matrix::Identity(y0.size(), y0.size()) * (radius * radius);
  InnerResult best{y0, kInf, 0};
  double f_best = sub.value(y0);
  double lower = -kInf;
  Vector a(y0.size());
  for (std::size_t k = 0; k < max_iterations; ++k) {
    best.iterations = k + 1;
    double depth = 0.0;
    if (!r.in_domain(c)) {
      // Feasibility cut a^T y <= beta separating c from dom r.
      double beta = 0.0;
      if (r.kind() == RegularizerKind::IndicatorBall) {
        a = (c - r.center()).normalized();
        beta = a.dot(r.center()) + r.radius();
      } else {
        Eigen::Index worst = 0;
        double excess = -kInf;
        for (Eigen::Index i = 0; i < c.size(); ++i) {
          const double e = std::max(c[i] - r.hi()[i], r.lo()[i] - c[i]);
          if (e > excess) {
            excess = e;
            worst = i;
          }
        }
        a.setZero();
        if (c[worst] > r.hi()[worst]) {
          a[worst] = 1.0;
          beta = r.hi()[worst];
        } else {
          a[worst] = -1.0;
          beta = -r.lo()[worst];
        }
      }
      const double s = std::sqrt(a.dot(P * a));
      depth = (a.dot(c) - beta) / s;
    } else {
      const double f = sub.value(c);
      a = sub.subgradient(c);
      if (f < f_best) {
        f_best = f;
        best.y = c;
      }
      const double s2 = a.dot(P * a);
      if (!(s2 > 0.0) || !std::isfinite(s2)) {
        if (a.squaredNorm() == 0.0) lower = std::max(lower, f);
        best.gap = f_best - lower;
        break;
      }
      const double s = std::sqrt(s2);
      lower = std::max({lower, f - s, f - a.squaredNorm() / (2.0 * mu)});
      best.gap = f_best - lower;
      if (best.gap <= tol) break;
      depth = (f - f_best) / s;
    }
    if (!(depth < 1.0)) break;
    depth = std::max(depth, 0.0);
    const Vector Pa = P * a;
    const double s2 = a.dot(Pa);
    if (!(s2 > 0.0) || !std::isfinite(s2)) break;
    const Vector b = Pa / std::sqrt(s2);
    c -= ((1.0 + d * depth) / (d + 1.0)) * b;
    const double scale = d * d * (1.0 - depth * depth) / (d * d - 1.0);
    const double shrink = 2.0 * (1.0 + d * depth) / ((d + 1.0) * (1.0 + depth));
    P = scale * (P - shrink * b * b.transpose());
    P = 0.5 * (P + P.transpose()).eval();
  }
  best.gap = f_best - lower;
  return best;
}

InnerResult prox_gradient_search(const CompositeProblem& problem, const Vector& x, double lambda,
                                 const Vector& y0, double mu, double tol,
                                 std::size_t max_iterations) {
  const double step = 1.0 / (1.0 / lambda + problem.rho);
  auto grad = [&](const Vector& y) { return Vector(problem.g_gradient(y) + (y - x) / lambda); };
  InnerResult out{y0, kInf, 0};
  Vector y = y0;
  Vector gy = grad(y);
  double best_w = kInf;
  std::size_t stalled = 0;
  for (std::size_t k = 0; k < max_iterations; ++k) {
    out.iterations = k + 1;
    const Vector next = problem.regularizer.prox(y - step * gy, step);
    const Vector g_next = grad(next);
    // Element of dF(next): prox optimality plus the gradient correction.
    const Vector w = (y - next) / step + g_next - gy;
    const double wn = w.norm();
    y = next;
    gy = g_next;
    out.y = y;
    out.gap = wn * wn / (2.0 * mu);
    if (out.gap <= tol) break;
    if (wn < best_w * (1.0 - 1e-3)) {
      best_w = wn;
      stalled = 0;
    } else if (++stalled > 200) {
      break;  // rounding floor
    }
  }
  return out;
}

MoreauPoint finish_point(const CompositeProblem& problem, const Vector& x, double lambda,
                         const Vector& x_hat, double radius) {
  MoreauPoint p;
  p.x = x;
  p.lambda = lambda;
  p.x_hat = x_hat;
  p.envelope_value = moreau_objective(problem, x, lambda, x_hat).value;
  p.envelope_grad = (x - x_hat) / lambda;
  p.certificate_radius = radius;
  const ProxCertificate cert = certify_prox_point(problem, x, lambda, x_hat, radius);
  p.zeta_hat = cert.zeta_hat;
  p.inclusion_residual = cert.inclusion_residual;
  return p;
}

// Initial bound |y0 - x_hat| <= |w0| / mu for y0 = proj_dom(x) and any w0 in
// the finite part of dF(y0): 0 lies in the normal cone at y0.
double initial_radius(const Subproblem& sub, const Vector& y0, double mu) {
  return sub.subgradient(y0).norm() / mu;
}

}  // namespace

ExtendedValue moreau_objective(const CompositeProblem& problem, const Vector& x, double lambda,
                               const Vector& y) {
  const ExtendedValue phi = problem.phi(y);
  if (phi.infinite) return phi;
  return ExtendedValue::finite(phi.value + (y - x).squaredNorm() / (2.0 * lambda));
}

MoreauPoint moreau_prox(const CompositeProblem& problem, const Vector& x, double lambda,
                        const InnerSolverOptions& options) {
  check_lambda(problem, lambda);
  problem.require_deterministic("moreau_prox");
  if (x.size() != problem.dim) throw ParameterError("query point has wrong dimension");
  const double mu = subproblem_modulus(problem, lambda);
  const Vector y0 = problem.regularizer.project_domain(x);
  double tol = options.tol;
  if (options.x_tol > 0.0) tol = std::min(tol, 0.5 * mu * options.x_tol * options.x_tol);

  InnerResult inner;
  if (problem.is_smooth()) {
    inner = prox_gradient_search(problem, x, lambda, y0, mu, tol, options.max_iterations);
  } else {
    const Subproblem sub{problem, x, lambda};
    const double radius = initial_radius(sub, y0, mu);
    if (radius == 0.0) {
      inner = {y0, 0.0, 0};
    } else {
      const double padded = radius * (1.0 + 1e-9) + 1e-300;
      inner = problem.dim == 1
                  ? interval_search(sub, y0, padded, mu, tol, options.max_iterations)
                  : ellipsoid_search(sub, y0, padded, mu, tol, options.max_iterations);
    }
  }
  if (!(inner.gap <= tol))
    throw AccuracyError("inner solver stopped above the requested tolerance", inner.gap);

  MoreauPoint p = finish_point(problem, x, lambda, inner.y,
                               kink_radius(distance_bound(inner.gap, mu), inner.y));
  p.inner_tol = inner.gap;
  p.inner_iterations = inner.iterations;
  p.method = MoreauMethod::IterativeInner;
  return p;
}

namespace {

struct LineMin {
  double arg = 0.0;
  double value = kInf;
  double spacing = 0.0;
  std::size_t evaluations = 0;
};

// Grid scan of a convex (possibly +inf outside an interval) function on
// [a, b], zooming into the two cells around the best point until the
// spacing drops below `min_spacing`.
template <typename F>
LineMin grid_minimize_line(F&& f, double a, double b, int first, int zoom, double min_spacing) {
  LineMin out;
  if (!(b >= a)) return out;
  double lo = a, hi = b;
  int n = first;
  for (int level = 0; level < 200; ++level) {
    if (hi - lo <= 0.0) {
      const double v = f(lo);
      ++out.evaluations;
      if (v < out.value) {
        out.value = v;
        out.arg = lo;
      }
      break;
    }
    const double spacing = (hi - lo) / (n - 1);
    int best_i = -1;
    double best_v = kInf;
    for (int i = 0; i < n; ++i) {
      const double p = i == n - 1 ? hi : lo + spacing * i;
      const double v = f(p);
      ++out.evaluations;
      if (v < best_v) {
        best_v = v;
        best_i = i;
      }
    }
    out.spacing = spacing;
    if (best_i < 0) break;  // nothing finite on this window
    const double p_best = best_i == n - 1 ? hi : lo + spacing * best_i;
    if (best_v < out.value) {
      out.value = best_v;
      out.arg = p_best;
    }
    if (spacing <= min_spacing) break;
    const double new_lo = best_i > 0 ? lo + spacing * (best_i - 1) : lo;
    const double new_hi = best_i < n - 1 ? lo + spacing * (best_i + 1) : hi;
    lo = new_lo;
    hi = std::min(new_hi, hi);
    n = zoom;
  }
  return out;
}

// Feasible range of coordinate `axis` inside dom r, given the other
// coordinate for 2-D balls.
std::pair<double, double> domain_range(const Regularizer& r, int axis, const Vector* fixed) {
  switch (r.kind()) {
    case RegularizerKind::IndicatorBox:
      return {r.lo()[axis], r.hi()[axis]};
    case RegularizerKind::IndicatorBall: {
      double rad = r.radius();
      if (fixed) {
        const double off = (*fixed)[0] - r.center()[0];
        const double sq = rad * rad - off * off;
        if (sq < 0.0) return {1.0, -1.0};
        rad = std::sqrt(sq);
      }
      return {r.center()[axis] - rad, r.center()[axis] + rad};
    }
    default:
      return {-kInf, kInf};
  }
}

}  // namespace

MoreauPoint moreau_grid_oracle(const CompositeProblem& problem, const Vector& x, double lambda,
                               const GridSpec& spec) {
  check_lambda(problem, lambda);
  problem.require_deterministic("moreau_grid_oracle");
  const Eigen::Index d = problem.dim;
  if (d > 2) throw ParameterError("grid oracle supports dim <= 2 only");
  const double mu = subproblem_modulus(problem, lambda);
  const Vector y0 = problem.regularizer.project_domain(x);

  double half_width = spec.half_width;
  if (!(half_width > 0.0)) {
    const Subproblem sub{problem, x, lambda};
    half_width = 1.05 * initial_radius(sub, y0, mu) + 1e-12;
    if (problem.lipschitz_L) half_width = std::max(half_width, 2.0 * lambda * *problem.lipschitz_L);
  }
  const int first = spec.points_per_axis > 0 ? spec.points_per_axis : (d == 1 ? 2001 : 201);
  if (first < 3 || spec.zoom_points < 3) throw ParameterError("grid needs at least 3 points per scan");
  const double min_spacing = spec.resolution * (1.0 + half_width);
  const Regularizer& r = problem.regularizer;

  auto objective = [&](const Vector& p) { return moreau_objective(problem, x, lambda, p).value; };
  auto clip = [&](std::pair<double, double> range, int axis) {
    return std::pair<double, double>{std::max(range.first, y0[axis] - half_width),
                                     std::min(range.second, y0[axis] + half_width)};
  };

  Vector best(d);
  double spacing = 0.0;
  std::size_t evaluations = 0;
  if (d == 1) {
    const auto [a, b] = clip(domain_range(r, 0, nullptr), 0);
    Vector p(1);
    const LineMin m = grid_minimize_line(
        [&](double t) {
          p[0] = t;
          return objective(p);
        },
        a, b, first, spec.zoom_points, min_spacing);
    best[0] = m.arg;
    spacing = m.spacing;
    evaluations = m.evaluations;
  } else {
    double inner_spacing = 0.0;
    auto inner = [&](double t, double* arg) {
      Vector p(2);
      p[0] = t;
      const auto [a, b] = clip(domain_range(r, 1, &p), 1);
      const LineMin m = grid_minimize_line(
          [&](double s) {
            p[1] = s;
            return objective(p);
          },
          a, b, first, spec.zoom_points, min_spacing);
      evaluations += m.evaluations;
      inner_spacing = std::max(inner_spacing, m.spacing);
      if (arg) *arg = m.arg;
      return m.value;
    };
    const auto [a, b] = clip(domain_range(r, 0, nullptr), 0);
    const LineMin outer = grid_minimize_line([&](double t) { return inner(t, nullptr); }, a, b,
                                             first, spec.zoom_points, min_spacing);
    best[0] = outer.arg;
    inner_spacing = 0.0;
    inner(outer.arg, &best[1]);
    spacing = std::max(outer.spacing, inner_spacing);
  }
  const double f_best = objective(best);
  if (!std::isfinite(f_best))
    throw AccuracyError("grid oracle found no feasible point in its window", kInf);
  best = r.project_domain(best);

  // Below the spacing, rounding in F limits the location to about
  // sqrt(2 eps |F| / mu).
  const double rounding = std::sqrt(2.0 * 1e-15 * (1.0 + std::abs(f_best)) / mu);
  MoreauPoint out = finish_point(problem, x, lambda, best,
                                 2.0 * std::sqrt(static_cast<double>(d)) * spacing +
                                     4.0 * rounding + 1e-13 * (1.0 + best.norm()));
  out.inner_tol = spacing;
  out.inner_iterations = evaluations;
  out.method = MoreauMethod::GridBruteForce;
  return out;
}

MoreauPoint MoreauOracle::evaluate(const CompositeProblem& problem, const Vector& x,
                                   double lambda) const {
  if (method_ == MoreauMethod::GridBruteForce) return moreau_grid_oracle(problem, x, lambda, grid_);
  return moreau_prox(problem, x, lambda, inner_);
}

ProxCertificate certify_prox_point(const CompositeProblem& problem, const Vector& x, double lambda,
                                   const Vector& x_hat, double radius) {
  const SubdifferentialSet dg = problem.g_subdifferential_or_selection(x_hat, radius);
  const SubdifferentialSet dr = problem.regularizer.subdifferential(x_hat, radius);
  const SetProjection proj = project_onto(dg + dr, (x - x_hat) / lambda);
  ProxCertificate cert;
  cert.zeta_hat = dg.element(proj.coefficients.head(dg.size()));
  cert.inclusion_residual = proj.distance;
  return cert;
}

StationarityReport stationarity_report(const CompositeProblem& problem, const MoreauPoint& point) {
  StationarityReport rep;
  rep.grad_norm = point.envelope_grad.norm();
  rep.grad_norm_sq = point.envelope_grad.squaredNorm();
  rep.dist_to_xhat = (point.x - point.x_hat).norm();
  rep.subdiff_dist_bound = rep.grad_norm;
  if (problem.g_subdifferential || problem.is_smooth()) {
    const SubdifferentialSet set =
        problem.g_subdifferential_or_selection(point.x_hat, point.certificate_radius) +
        problem.regularizer.subdifferential(point.x_hat, point.certificate_radius);
    rep.subdiff_dist_exact = project_onto(set, Vector::Zero(problem.dim)).distance;
  }
  return rep;
}

double envelope_grad_fd_check(const CompositeProblem& problem, const Vector& x, double lambda,
                              double h, double tol) {
  if (!(h > 0.0)) throw ParameterError("finite-difference step must be positive");
  const InnerSolverOptions options{tol, 1'000'000};
  const Vector grad = moreau_prox(problem, x, lambda, options).envelope_grad;
  const double scale = std::max(grad.lpNorm<Eigen::Infinity>(), 1.0);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double fp = moreau_prox(problem, xp, lambda, options).envelope_value;
    const double fm = moreau_prox(problem, xm, lambda, options).envelope_value;
    worst = std::max(worst, std::abs((fp - fm) / (2.0 * h) - grad[i]) / scale);
  }
  return worst;
}

Vector prox_gradient_mapping(const CompositeProblem& problem, const Vector& x, double lambda) {
  if (!problem.is_smooth())
    throw CapabilityError("prox-gradient mapping needs a smooth g with an exact gradient");
  if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
  return (x - problem.regularizer.prox(x - lambda * problem.g_gradient(x), lambda)) / lambda;
}

}  // namespace psgm

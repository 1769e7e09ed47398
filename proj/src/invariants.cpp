#include "psgm/invariants.hpp"

#include "psgm/convex.hpp"
#include "psgm/harness.hpp"
#include "psgm/moreau.hpp"
#include "psgm/solver.hpp"
#include "psgm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace psgm {

namespace {

using Results = std::vector<InvariantResult>;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

struct Recorder {
  std::string suite;
  Results out;

  void add(std::string name, bool passed, std::string detail) {
    out.push_back({suite, std::move(name), passed, std::move(detail)});
  }
  // Runs a check and turns library exceptions into failures.
  void guard(const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      add(name, false, std::string("exception: ") + e.what());
    }
  }
};

std::vector<std::string> problem_ids(const InvariantOptions& o) {
  return o.problems.empty() ? shipped_problem_ids() : o.problems;
}

double sampling_radius(const CompositeProblem& p) {
  return p.domain_diameter ? 0.5 * *p.domain_diameter : 2.0;
}

std::vector<Regularizer> all_regularizers(Eigen::Index d) {
  Vector lo = Vector::LinSpaced(d, -1.0, -0.5);
  Vector hi = Vector::LinSpaced(d, 0.5, 2.0);
  Vector c = Vector::LinSpaced(d, -0.3, 0.7);
  return {Regularizer::zero(), Regularizer::box(lo, hi), Regularizer::ball(c, 1.5),
          Regularizer::l1(0.7), Regularizer::quadratic(2.0, c)};
}

// Choice of rho_hat in (rho, 2 rho] for the descent inequality; convex g uses 1.
double descent_rho_hat(const CompositeProblem& p, Rng& rng) {
  if (p.rho == 0.0) return 1.0;
  return p.rho * (1.0 + 0.05 + 0.95 * rng.uniform());
}

Results suite_core(const InvariantOptions& o) {
  Recorder r{"core", {}};
  Rng rng(mix_seed(o.seed, 1));
  for (const auto& id : problem_ids(o)) {
    r.guard("weak convexity " + id, [&] {
      const auto p = make_problem(id);
      const auto wc = check_weak_convexity(p, 1000, sampling_radius(p), rng);
      r.add("weak convexity " + id, !wc.violated, "max violation " + fmt(wc.max_violation));
      const auto hm = check_hypomonotonicity(p, 1000, sampling_radius(p), rng);
      r.add("hypomonotonicity " + id, !hm.violated, "max violation " + fmt(hm.max_violation));
    });
  }
  r.guard("oracle unbiasedness", [&] {
    const auto p = make_problem("phase_retrieval:50:10:8");
    const Vector x = sample_domain_point(p, rng);
    const Vector mean = p.g_oracle.unbiased_mean(x);
    int pass = 0;
    for (int rep = 0; rep < 20; ++rep) {
      const OracleMean est = estimate_oracle_mean(p, x, 10'000, rng);
      pass += (est.mean - mean).norm() <= 5.0 * est.standard_error;
    }
    r.add("oracle unbiasedness", pass >= 19, std::to_string(pass) + "/20 repeats within 5 SE");
  });
  for (const auto& id : problem_ids(o)) {
    const auto p = make_problem(id);
    if (!p.lipschitz_L) continue;
    r.guard("second moment " + id, [&] {
      double worst = 0.0;
      for (int i = 0; i < 100; ++i)
        worst = std::max(worst, estimate_second_moment(p, sample_domain_point(p, rng), 1000, rng));
      const double L2 = *p.lipschitz_L * *p.lipschitz_L;
      r.add("second moment " + id, worst <= 1.1 * L2,
            "max E|G|^2 " + fmt(worst) + " vs L^2 " + fmt(L2));
    });
  }
  return r.out;
}

Results suite_prox(const InvariantOptions& o) {
  Recorder r{"prox", {}};
  Rng rng(mix_seed(o.seed, 2));
  const Eigen::Index d = 4;
  for (const auto& reg : all_regularizers(d)) {
    const std::string kind = reg.describe();
    r.guard("nonexpansive " + kind, [&] {
      double worst = -1.0;
      for (double alpha : {1e-3, 1.0, 1e3})
        for (int i = 0; i < 10'000; ++i) {
          const Vector x = 3.0 * rng.normal_vector(d);
          const Vector y = 3.0 * rng.normal_vector(d);
          worst = std::max(worst, (reg.prox(x, alpha) - reg.prox(y, alpha)).norm() - (x - y).norm());
        }
      r.add("nonexpansive " + kind, worst <= 1e-12, "max excess " + fmt(worst));
    });
    r.guard("prox optimality " + kind, [&] {
      double worst = std::numeric_limits<double>::infinity();
      for (double alpha : {1e-3, 1.0, 1e3}) {
        const Vector x = 3.0 * rng.normal_vector(d);
        const Vector p = reg.prox(x, alpha);
        const double fp = reg.value(p).value + (p - x).squaredNorm() / (2.0 * alpha);
        for (int i = 0; i < 1000; ++i) {
          Vector y = p + rng.normal_vector(d) * std::pow(10.0, -3.0 + 4.0 * rng.uniform());
          if (reg.is_indicator()) y = reg.project_domain(y);
          const double fy = reg.value(y).value + (y - x).squaredNorm() / (2.0 * alpha);
          worst = std::min(worst, fy - fp);
        }
      }
      r.add("prox optimality " + kind, worst >= -1e-10, "min margin " + fmt(worst));
    });
  }
  r.guard("projection idempotence", [&] {
    double worst = 0.0;
    const Vector c = Vector::LinSpaced(d, -0.3, 0.7);
    const Vector lo = Vector::Constant(d, -1.0), hi = Vector::Constant(d, 0.5);
    for (int i = 0; i < 1000; ++i) {
      const Vector x = 3.0 * rng.normal_vector(d);
      const Vector pb = proj_ball(x, c, 1.5);
      const Vector px = proj_box(x, lo, hi);
      worst = std::max({worst, (proj_ball(pb, c, 1.5) - pb).norm(), (proj_box(px, lo, hi) - px).norm()});
    }
    r.add("projection idempotence", worst <= 1e-15, "max change " + fmt(worst));
  });
  r.guard("l1 weight to zero", [&] {
    const Vector x = 3.0 * rng.normal_vector(d);
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    double last = 0.0;
    for (double w : {1.0, 1e-2, 1e-4, 1e-8}) {
      last = (prox_l1(x, 1.0, w) - prox_zero(x, 1.0)).norm();
      monotone = monotone && last < prev;
      prev = last;
    }
    r.add("l1 weight to zero", monotone && last <= 1e-7, "final distance " + fmt(last));
  });
  return r.out;
}

Results suite_solver(const InvariantOptions& o) {
  Recorder r{"solver", {}};
  Rng rng(mix_seed(o.seed, 3));
  for (const auto& id : problem_ids(o)) {
    r.guard("trajectory " + id, [&] {
      const auto p = make_problem(id);
      const auto schedule = StepSchedule::constant(0.5 / default_rho_hat(p), 200);
      const RunResult a = run_psgm(p, p.initial_point, schedule, 99);
      const RunResult b = run_psgm(p, p.initial_point, schedule, 99);
      bool same = a.t_star == b.t_star && a.iterates.size() == b.iterates.size();
      for (std::size_t t = 0; same && t < a.iterates.size(); ++t)
        same = (a.iterates[t].array() == b.iterates[t].array()).all();
      r.add("reproducible " + id, same, "two runs with seed 99");

      bool feasible = true;
      for (const auto& x : a.iterates) feasible = feasible && !p.regularizer.value(x).infinite;
      r.add("feasible iterates " + id, feasible, std::to_string(a.iterates.size()) + " iterates");

      if (p.regularizer.is_indicator()) {
        // Replay the oracle stream: |x_{t+1} - x_t| <= alpha_t |G(x_t)|.
        Rng replay(99);
        double worst = -1.0;
        for (std::size_t t = 0; t + 1 < a.iterates.size(); ++t) {
          const Vector g = p.g_oracle.sample(a.iterates[t], replay).vector;
          worst = std::max(worst, (a.iterates[t + 1] - a.iterates[t]).norm() -
                                      schedule.alpha(t) * g.norm() * (1.0 + 1e-12));
        }
        r.add("step length " + id, worst <= 1e-14, "max excess " + fmt(worst));
      }
    });
  }
  const MoreauOracle moreau(MoreauMethod::IterativeInner, {1e-10, 1'000'000});
  for (const auto& id : problem_ids(o)) {
    r.guard("descent lemma " + id, [&] {
      const auto p = make_problem(id);
      int violations = 0;
      double worst_margin = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < 10; ++k) {
        const Vector x = sample_domain_point(p, rng);
        const double rho_hat = descent_rho_hat(p, rng);
        const double alpha = rng.uniform() / rho_hat;
        const LemmaReport rep = check_descent_lemma(p, x, rho_hat, alpha, 100'000, rng, moreau);
        violations += rep.violated;
        worst_margin = std::max(worst_margin, rep.estimate - rep.ci_half_width - rep.bound);
      }
      r.add("descent lemma " + id, violations == 0,
            std::to_string(violations) + "/10 violations, max (est - CI - bound) " + fmt(worst_margin));
    });
  }
  r.guard("t* uniform", [&] {
    const auto schedule = StepSchedule::constant(1.0, 9);
    std::vector<double> counts(10, 0.0), expected(10, 10'000.0);
    Rng draw(mix_seed(o.seed, 33));
    for (int i = 0; i < 100'000; ++i) counts[sample_tstar(schedule.alphas(), draw)] += 1.0;
    const double stat = chi_square_statistic(counts, expected);
    const double crit = chi_square_critical(9.0, 0.01);
    r.add("t* uniform", stat <= crit, "chi2 " + fmt(stat) + " vs critical " + fmt(crit));
  });
  return r.out;
}

Results suite_moreau(const InvariantOptions& o) {
  Recorder r{"moreau", {}};
  Rng rng(mix_seed(o.seed, 4));
  const MoreauOracle moreau(MoreauMethod::IterativeInner, {1e-10, 1'000'000});
  for (const auto& id : problem_ids(o)) {
    r.guard("envelope " + id, [&] {
      const auto p = make_problem(id);
      const double lambda = 1.0 / default_rho_hat(p);
      // Strong convexity of the subproblem quantifies "equality iff x_hat = x":
      // phi(x) - phi_lambda(x) >= (mu/2)|x - x_hat|^2 with mu = 1/lambda - rho.
      const double mu = 1.0 / lambda - p.rho;
      double env_excess = -1.0, descent_excess = -1.0, identity_err = 0.0, fd_err = 0.0;
      double gap_excess = -1.0;
      for (int k = 0; k < 10; ++k) {
        const Vector x = sample_domain_point(p, rng);
        const MoreauPoint mp = moreau.evaluate(p, x, lambda);
        const double phix = p.phi(x).value;
        const double tol = 1e-8 * (1.0 + std::abs(phix));
        env_excess = std::max(env_excess, mp.envelope_value - phix - tol);
        // x_hat is within delta of the exact prox point.
        const double delta = std::sqrt(2.0 * mp.inner_tol / mu);
        const double slack = mp.inner_tol + mu * ((x - mp.x_hat).norm() + delta) * delta;
        gap_excess = std::max(gap_excess, 0.5 * mu * (x - mp.x_hat).squaredNorm() -
                                              (phix - mp.envelope_value) - slack - tol);
        descent_excess = std::max(descent_excess, p.phi(mp.x_hat).value - phix - tol);
        identity_err = std::max(identity_err, std::abs((mp.x_hat - x).norm() - lambda * mp.envelope_grad.norm()) /
                                                  (1.0 + (mp.x_hat - x).norm()));
        if (k < 5) fd_err = std::max(fd_err, envelope_grad_fd_check(p, x, lambda, 1e-4, 1e-10));
      }
      r.add("envelope below phi " + id, env_excess <= 0.0, "max excess " + fmt(env_excess));
      r.add("envelope equality case " + id, gap_excess <= 0.0, "max excess " + fmt(gap_excess));
      r.add("prox point descent " + id, descent_excess <= 0.0, "max excess " + fmt(descent_excess));
      r.add("gradient identity " + id, identity_err <= 1e-12, "max error " + fmt(identity_err));
      r.add("finite differences " + id, fd_err <= 1e-4, "max relative error " + fmt(fd_err));
    });
  }
  for (const auto& id : problem_ids(o)) {
    const auto p = make_problem(id);
    if (!p.is_smooth()) continue;
    r.guard("sandwich " + id, [&] {
      const double lambda = 1.0 / (2.0 * p.rho);
      double worst = -1.0;
      for (int k = 0; k < 100; ++k) {
        const Vector x = sample_domain_point(p, rng);
        const double gm = prox_gradient_mapping(p, x, lambda).norm();
        const double ge = moreau.evaluate(p, x, lambda).envelope_grad.norm();
        const double slack = 1e-6 * (1.0 + gm);
        worst = std::max({worst, (1.0 - p.rho * lambda) * gm - ge - slack,
                          ge - (1.0 + p.rho * lambda) * gm - slack});
      }
      r.add("sandwich " + id, worst <= 0.0, "max excess " + fmt(worst));
    });
  }
  for (const auto& id : problem_ids(o)) {
    const auto p = make_problem(id);
    if (p.dim > 2) continue;
    r.guard("cross oracle " + id, [&] {
      const MoreauOracle grid(MoreauMethod::GridBruteForce);
      const MoreauOracle precise(MoreauMethod::IterativeInner, {1e-10, 1'000'000, 1e-6});
      double worst = 0.0;
      for (int k = 0; k < 10; ++k) {
        const Vector x = sample_domain_point(p, rng);
        const double lambda_max = p.rho > 0.0 ? 1.0 / p.rho : 1.0;
        const double lambda = (0.1 + 0.85 * rng.uniform()) * lambda_max;
        worst = std::max(worst, (precise.evaluate(p, x, lambda).x_hat - grid.evaluate(p, x, lambda).x_hat).norm());
      }
      r.add("cross oracle " + id, worst <= 1e-5, "max |x_hat difference| " + fmt(worst));
    });
  }
  return r.out;
}

Results suite_boost(const InvariantOptions& o) {
  Recorder r{"boost", {}};
  Rng rng(mix_seed(o.seed, 5));
  const double tol = 1e-10;
  const MoreauOracle moreau(MoreauMethod::IterativeInner, {tol, 1'000'000});
  for (const auto& id : problem_ids(o)) {
    const auto p = make_problem(id);
    if (p.rho != 0.0) continue;
    r.guard("shift identity " + id, [&] {
      double worst = 0.0, worst_map = -1.0;
      const double D = p.domain_diameter.value_or(4.0);
      for (int k = 0; k < 100; ++k) {
        const Vector x = sample_domain_point(p, rng);
        const Vector xc = sample_domain_point(p, rng);
        const double mu = 0.05 + 2.0 * rng.uniform();
        const double lambda = 0.1 + 2.0 * rng.uniform();
        worst = std::max(worst, envelope_shift_identity_check(p, mu, xc, lambda, x, moreau));
        if (k < 20 && p.domain_diameter) {
          const RegularizedProblem reg = regularize(p, mu, xc);
          const Vector z = map_back(x, mu, lambda, xc);
          const double lhs = moreau.evaluate(p, z, 1.0 / (lambda + mu)).envelope_grad.norm();
          const double rhs = (lambda + mu) / lambda * moreau.evaluate(reg.derived, x, 1.0 / lambda).envelope_grad.norm() + mu * D;
          worst_map = std::max(worst_map, lhs - rhs - 1e-8);
        }
      }
      r.add("shift identity " + id, worst <= 10.0 * tol, "max |LHS - RHS| " + fmt(worst));
      if (p.domain_diameter) r.add("map_back bound " + id, worst_map <= 0.0, "max excess " + fmt(worst_map));
    });
    if (!p.lipschitz_L || !p.domain_diameter) continue;
    r.guard("regularized second moment " + id, [&] {
      const double mu = 0.3;
      const RegularizedProblem reg = regularize(p, mu, sample_domain_point(p, rng));
      const double cap = std::pow(*p.lipschitz_L + mu * *p.domain_diameter, 2);
      double worst = 0.0;
      for (int i = 0; i < 100; ++i)
        worst = std::max(worst, estimate_second_moment(reg.derived, sample_domain_point(p, rng), 1000, rng));
      r.add("regularized second moment " + id, worst <= cap, "max " + fmt(worst) + " vs " + fmt(cap));
    });
  }
  r.guard("optimal gamma argmin", [&] {
    bool ok = true;
    for (int k = 0; k < 100; ++k) {
      const double R = std::exp(4.0 * rng.normal()), rho = std::exp(rng.normal()), L = std::exp(rng.normal());
      const double g = optimal_gamma(R, rho, L);
      auto f = [&](double x) { return (R + rho * L * L * x * x) / x; };
      ok = ok && f(g * 1.01) > f(g) && f(g * 0.99) > f(g);
    }
    r.add("optimal gamma argmin", ok, "100 random (R, rho, L), +-1% perturbations");
  });
  return r.out;
}

Results suite_problems(const InvariantOptions& o) {
  Recorder r{"problems", {}};
  Rng rng(mix_seed(o.seed, 6));
  for (const auto& id : problem_ids(o)) {
    r.guard("regeneration " + id, [&] {
      const auto a = make_problem(id);
      const auto b = make_problem(id);
      bool same = (a.initial_point.array() == b.initial_point.array()).all() && a.rho == b.rho &&
                  a.lipschitz_L == b.lipschitz_L;
      for (int k = 0; k < 20 && same; ++k) {
        const Vector x = sample_domain_point(a, rng);
        same = a.g_value(x) == b.g_value(x) &&
               (a.g_full_subgradient(x).array() == b.g_full_subgradient(x).array()).all();
      }
      r.add("regeneration " + id, same, "two builds from the same id agree bitwise");
    });
    const auto p = make_problem(id);
    if (p.is_smooth() && p.sigma) {
      r.guard("variance " + id, [&] {
        double worst = 0.0;
        for (int k = 0; k < 20; ++k) {
          const Vector x = sample_domain_point(p, rng);
          const Vector grad = p.g_gradient(x);
          double s = 0.0;
          for (int i = 0; i < 5000; ++i) s += (p.g_oracle.sample(x, rng).vector - grad).squaredNorm();
          worst = std::max(worst, s / 5000.0);
        }
        const double s2 = *p.sigma * *p.sigma;
        r.add("variance " + id, worst <= 1.1 * s2, "max " + fmt(worst) + " vs sigma^2 " + fmt(s2));
      });
    }
  }
  return r.out;
}

Results suite_harness(const InvariantOptions& o) {
  Recorder r{"harness", {}};
  r.guard("bound validity", [&] {
    for (const auto& id : problem_ids(o)) {
      const auto p = make_problem(id);
      ExperimentConfig c;
      c.problem_id = id;
      c.horizons = {100, 1000};
      c.n_seeds = 50;
      if (!p.lipschitz_L || !p.domain_diameter) c.gamma = 0.5 / default_rho_hat(p);
      const ExperimentReport rep = run_sweep(c, p);
      bool ok = true;
      std::string detail = to_string(rep.variant) + ":";
      for (const auto& h : rep.horizons) {
        ok = ok && h.bound_applicable && h.bound_satisfied && h.failures == 0;
        detail += " T=" + std::to_string(h.T) + " mean " + fmt(h.grad_norm_sq.mean) + " bound " + fmt(h.bound_value);
      }
      r.add("bound validity " + id, ok, detail);
    }
  });
  r.guard("rate", [&] {
    ExperimentConfig c;
    c.problem_id = "phase_retrieval:50:10:8";
    c.horizons = {100, 1000, 10000};
    c.n_seeds = 50;
    const ExperimentReport rep = run_sweep(c);
    const LinearFit f = *rep.fit;
    r.add("rate", f.slope <= -0.25 && f.slope_stderr < 0.1,
          "slope " + fmt(f.slope) + " stderr " + fmt(f.slope_stderr));
  });
  r.guard("csv determinism", [&] {
    ExperimentConfig c;
    c.problem_id = "toy1d:abs_quadratic";
    c.horizons = {10, 20, 40};
    c.n_seeds = 8;
    c.timing = false;
    auto to_text = [](const ExperimentReport& rep) {
      std::ostringstream os;
      write_csv(os, rep.rows);
      return os.str();
    };
    c.threads = 1;
    const std::string a = to_text(run_sweep(c));
    c.threads = 4;
    const std::string b = to_text(run_sweep(c));
    std::istringstream is(a);
    const auto rows = read_csv(is);
    std::ostringstream again;
    write_csv(again, rows);
    r.add("csv determinism", a == b && again.str() == a && rows.size() == 24,
          "1 vs 4 workers and write/read round trip");
  });
  return r.out;
}

}  // namespace

Vector sample_domain_point(const CompositeProblem& p, Rng& rng) {
  const Vector center = p.initial_point.size() == p.dim ? p.initial_point : Vector::Zero(p.dim);
  return p.regularizer.project_domain(center + rng.uniform_ball(p.dim, sampling_radius(p)));
}

const std::vector<std::string>& invariant_suites() {
  static const std::vector<std::string> names{"core",  "prox",     "solver", "moreau",
                                              "boost", "problems", "harness"};
  return names;
}

std::vector<InvariantResult> run_invariant_suite(const std::string& suite,
                                                 const InvariantOptions& options) {
  if (suite == "core") return suite_core(options);
  if (suite == "prox") return suite_prox(options);
  if (suite == "solver") return suite_solver(options);
  if (suite == "moreau") return suite_moreau(options);
  if (suite == "boost") return suite_boost(options);
  if (suite == "problems") return suite_problems(options);
  if (suite == "harness") return suite_harness(options);
  throw ParameterError("unknown invariant suite: " + suite);
}

std::vector<InvariantResult> run_all_invariants(const InvariantOptions& options) {
  std::vector<InvariantResult> all;
  for (const auto& s : invariant_suites()) {
    auto part = run_invariant_suite(s, options);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

}  // namespace psgm

#include "psgm/harness.hpp"

#include "psgm/convex.hpp"
#include "psgm/moreau.hpp"
#include "psgm/solver.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace psgm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool close_rel(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad number for '" + key + "': " + v);
  }
}

std::uint64_t parse_count(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("bad integer for '" + key + "': " + v);
  return x;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

void require_steps_at_most(const BoundInputs& in, double limit, const char* what) {
  for (double a : in.alphas)
    if (a > limit * (1.0 + 1e-12)) throw ParameterError(std::string(what) + ": step size too large");
}

double require_constant_gamma(const BoundInputs& in) {
  const double a = in.alphas.front();
  for (double b : in.alphas)
    if (!close_rel(a, b)) throw ParameterError("corollary bounds need a constant step size");
  return a * std::sqrt(static_cast<double>(in.alphas.size()));
}

}  // namespace

std::string to_string(BoundVariant v) {
  switch (v) {
    case BoundVariant::ProjectedThm21:
      return "thm21";
    case BoundVariant::ProximalThm26:
      return "thm26";
    case BoundVariant::Cor22:
      return "cor22";
    case BoundVariant::Cor27:
      return "cor27";
    case BoundVariant::SmoothCor29:
      return "cor29";
  }
  return "unknown";
}

BoundVariant parse_bound_variant(const std::string& name) {
  for (auto v : {BoundVariant::ProjectedThm21, BoundVariant::ProximalThm26, BoundVariant::Cor22,
                 BoundVariant::Cor27, BoundVariant::SmoothCor29})
    if (to_string(v) == name) return v;
  throw ConfigError("unknown bound variant: " + name);
}

double theoretical_bound(BoundVariant variant, const BoundInputs& in) {
  if (in.alphas.empty()) throw ParameterError("bound needs at least one step");
  for (double a : in.alphas)
    if (!(a > 0.0)) throw ParameterError("step sizes must be positive");
  if (!(in.rho >= 0.0) || !(in.rho_hat > in.rho)) throw ParameterError("bound needs rho_hat > rho >= 0");
  double s1 = 0.0, s2 = 0.0;
  for (double a : in.alphas) {
    s1 += a;
    s2 += a * a;
  }
  const double rh = in.rho_hat;
  const double factor = rh / (rh - in.rho);
  auto need_L = [&] {
    if (!in.L) throw ParameterError("bound needs L");
    return *in.L;
  };

  switch (variant) {
    case BoundVariant::ProjectedThm21: {
      if (!in.projected) throw ParameterError("thm21 bound applies to projected problems only");
      const double L = need_L();
      return factor * (in.delta + 0.5 * rh * L * L * s2) / s1;
    }
    case BoundVariant::ProximalThm26: {
      if (rh > 2.0 * in.rho * (1.0 + 1e-12)) throw ParameterError("thm26 needs rho_hat <= 2 rho");
      require_steps_at_most(in, 1.0 / rh, "thm26");
      const double L = need_L();
      return factor * (in.delta + rh * L * L * s2) / s1;
    }
    case BoundVariant::Cor22:
    case BoundVariant::Cor27: {
      if (!close_rel(rh, 2.0 * in.rho)) throw ParameterError("corollary bounds need rho_hat = 2 rho");
      if (variant == BoundVariant::Cor22 && !in.projected)
        throw ParameterError("cor22 applies to projected problems only");
      if (variant == BoundVariant::Cor27) require_steps_at_most(in, 1.0 / (2.0 * in.rho), "cor27");
      const double gamma = require_constant_gamma(in);
      const double L = need_L();
      const double sqrtT = std::sqrt(static_cast<double>(in.alphas.size()));
      return 2.0 * (in.delta + in.rho * L * L * gamma * gamma) / (gamma * sqrtT);
    }
    case BoundVariant::SmoothCor29: {
      if (!in.sigma) throw ParameterError("cor29 needs sigma");
      require_steps_at_most(in, 1.0 / rh, "cor29");
      const double s = *in.sigma;
      return 2.0 * factor * (in.delta + 0.5 * rh * s * s * s2) / s1;
    }
  }
  throw ParameterError("unknown bound variant");
}

BoundVariant default_bound_variant(const CompositeProblem& problem, double rho_hat) {
  if (problem.is_smooth() && problem.sigma) return BoundVariant::SmoothCor29;
  const bool projected = problem.regularizer.is_indicator_or_zero();
  const double rho = effective_rho(problem, rho_hat);
  if (close_rel(rho_hat, 2.0 * rho)) return projected ? BoundVariant::Cor22 : BoundVariant::Cor27;
  return projected ? BoundVariant::ProjectedThm21 : BoundVariant::ProximalThm26;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (key == "problem") {
      c.problem_id = v;
    } else if (key == "horizons") {
      c.horizons.clear();
      for (const auto& item : split(v, ',')) c.horizons.push_back(parse_count(key, trim(item)));
    } else if (key == "gamma") {
      if (v == "optimal")
        c.gamma.reset();
      else
        c.gamma = parse_double(key, v);
    } else if (key == "R") {
      c.R = parse_double(key, v);
    } else if (key == "rho_hat") {
      c.rho_hat = parse_double(key, v);
    } else if (key == "lambda") {
      c.lambda = parse_double(key, v);
    } else if (key == "n_seeds") {
      c.n_seeds = parse_count(key, v);
    } else if (key == "seed_offset") {
      c.seed_offset = parse_count(key, v);
    } else if (key == "inner_tol") {
      c.inner_tol = parse_double(key, v);
    } else if (key == "output") {
      c.output = v;
    } else if (key == "threads") {
      c.threads = parse_count(key, v);
    } else if (key == "timing") {
      if (v != "on" && v != "off") throw ConfigError("timing must be on or off");
      c.timing = v == "on";
    } else if (key == "bound") {
      c.bound = parse_bound_variant(v);
    } else {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate_config(const ExperimentConfig& c) {
  if (c.problem_id.empty()) throw ConfigError("config needs a problem id");
  if (c.horizons.empty()) throw ConfigError("config needs at least one horizon");
  for (std::size_t i = 0; i < c.horizons.size(); ++i) {
    if (c.horizons[i] < 1) throw ConfigError("horizons must be positive");
    if (i > 0 && c.horizons[i] <= c.horizons[i - 1])
      throw ConfigError("horizons must be strictly increasing");
  }
  if (c.n_seeds < 1) throw ConfigError("n_seeds must be positive");
  if (!(c.inner_tol > 0.0)) throw ConfigError("inner_tol must be positive");
  if (c.gamma && !(*c.gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (c.R && !(*c.R > 0.0)) throw ConfigError("R must be positive");
  if (c.rho_hat && !(*c.rho_hat > 0.0)) throw ConfigError("rho_hat must be positive");
  if (c.lambda && !(*c.lambda > 0.0)) throw ConfigError("lambda must be positive");
}

ExperimentReport run_sweep(const ExperimentConfig& config) {
  validate_config(config);
  CompositeProblem problem;
  try {
    problem = make_problem(config.problem_id);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  return run_sweep(config, problem);
}

ExperimentReport run_sweep(const ExperimentConfig& config, const CompositeProblem& p) {
  validate_config(config);
  ExperimentReport rep;
  rep.config = config;
  rep.rho_hat = config.rho_hat.value_or(default_rho_hat(p));
  rep.rho = effective_rho(p, rep.rho_hat);
  if (!(rep.rho_hat > rep.rho)) throw ConfigError("rho_hat must exceed the weak-convexity modulus");
  rep.lambda = config.lambda.value_or(1.0 / rep.rho_hat);
  if (p.rho > 0.0 && !(rep.lambda < 1.0 / p.rho)) throw ConfigError("lambda must be below 1/rho");

  if (config.gamma) {
    rep.gamma = *config.gamma;
  } else {
    double R;
    if (config.R) {
      R = *config.R;
    } else {
      if (!p.domain_diameter || !p.lipschitz_L)
        throw ConfigError("optimal gamma needs R, or a problem with known D and L");
      const double D = *p.domain_diameter;
      R = std::min(rep.rho * D * D, D * *p.lipschitz_L);
    }
    if (!p.lipschitz_L) throw ConfigError("optimal gamma needs L");
    rep.gamma = optimal_gamma(R, rep.rho, *p.lipschitz_L);
  }
  for (std::size_t T : config.horizons)
    if (rep.gamma / std::sqrt(static_cast<double>(T) + 1.0) > (1.0 / rep.rho_hat) * (1.0 + 1e-12))
      throw ConfigError("step gamma/sqrt(T+1) exceeds 1/rho_hat at T = " + std::to_string(T));

  rep.variant = config.bound.value_or(default_bound_variant(p, rep.rho_hat));
  const bool bound_applicable = close_rel(rep.lambda, 1.0 / rep.rho_hat);
  BoundInputs inputs;
  inputs.rho = rep.rho;
  inputs.rho_hat = rep.rho_hat;
  inputs.L = p.lipschitz_L;
  inputs.sigma = p.sigma;
  inputs.projected = p.regularizer.is_indicator_or_zero();
  auto alphas_for = [&](std::size_t T) {
    return std::vector<double>(T + 1, rep.gamma / std::sqrt(static_cast<double>(T) + 1.0));
  };
  if (bound_applicable) {
    // Validate the variant against the parameters before spending any time.
    try {
      inputs.alphas = alphas_for(config.horizons.front());
      (void)theoretical_bound(rep.variant, inputs);
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("bound variant mismatch: ") + e.what());
    }
  }

  const Vector x0 = p.initial_point;
  const MoreauOracle moreau(MoreauMethod::IterativeInner, {config.inner_tol, 1'000'000});
  const MoreauPoint mp0 = moreau.evaluate(p, x0, 1.0 / rep.rho_hat);
  double phi_best = std::min(p.phi(x0).value, p.phi(mp0.x_hat).value);
  if (p.reference_value) phi_best = std::min(phi_best, *p.reference_value);

  const std::size_t n_cells = config.horizons.size() * config.n_seeds;
  rep.rows.resize(n_cells);
  std::vector<double> cell_best(n_cells, std::numeric_limits<double>::infinity());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    RunOptions opts;
    opts.declared_rho_hat = rep.rho_hat;
    opts.trajectory_cap = 0;
    for (std::size_t k = next++; k < n_cells; k = next++) {
      const auto t0 = std::chrono::steady_clock::now();
      const std::size_t T = config.horizons[k / config.n_seeds];
      const std::uint64_t seed = config.seed_offset + k % config.n_seeds;
      TrialRow& row = rep.rows[k];
      row.problem_id = p.id;
      row.family = p.family;
      row.d = p.dim;
      row.m = p.rows;
      row.T = T;
      row.seed = seed;
      row.gamma = rep.gamma;
      row.rho = rep.rho;
      row.rho_hat = rep.rho_hat;
      row.lambda = rep.lambda;
      row.envelope_value_x0 = mp0.envelope_value;
      const RunResult run = run_psgm(p, x0, StepSchedule::constant(rep.gamma, T), seed, opts);
      row.oracle_calls = run.oracle_calls;
      try {
        const MoreauPoint mp = moreau.evaluate(p, run.x_star, rep.lambda);
        row.grad_norm_sq = mp.envelope_grad.squaredNorm();
        row.inner_tol_achieved = mp.inner_tol;
        cell_best[k] = std::min(p.phi(run.x_star).value, p.phi(mp.x_hat).value);
      } catch (const Error& e) {
        row.grad_norm_sq = kNaN;
        row.inner_tol_achieved = kNaN;
        cell_best[k] = p.phi(run.x_star).value;
      }
      if (config.timing)
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(
      1, std::min(n_cells, config.threads ? config.threads : std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (double v : cell_best) phi_best = std::min(phi_best, v);
  // An exact minimum is the best possible "best value".
  if (p.minimum_value) phi_best = *p.minimum_value;

  rep.horizons = summarize_rows(rep.rows);
  for (auto& h : rep.horizons) {
    h.bound_applicable = bound_applicable;
    if (bound_applicable) {
      inputs.delta = std::max(0.0, mp0.envelope_value - phi_best);
      inputs.alphas = alphas_for(h.T);
      h.bound_value = theoretical_bound(rep.variant, inputs);
      h.bound_satisfied = h.grad_norm_sq.mean - h.grad_norm_sq.ci95 <= h.bound_value;
    } else {
      h.bound_value = kNaN;
    }
  }
  for (auto& row : rep.rows) {
    const auto& h = *std::find_if(rep.horizons.begin(), rep.horizons.end(),
                                  [&](const HorizonSummary& s) { return s.T == row.T; });
    row.phi_best = phi_best;
    row.bound_value = h.bound_value;
    row.bound_satisfied = h.bound_satisfied;
  }
  if (rep.horizons.size() >= 3) rep.fit = fit_rate(rep.horizons);

  if (!config.output.empty()) {
    std::ofstream out(config.output);
    if (!out) throw ConfigError("cannot write output file: " + config.output);
    write_csv(out, rep.rows);
  }
  return rep;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "problem_id", "family",     "d",           "m",           "T",
      "seed",       "gamma",      "rho",         "rho_hat",     "lambda",
      "grad_norm_sq", "envelope_value_x0", "phi_best", "bound_value", "bound_satisfied",
      "oracle_calls", "inner_tol_achieved", "wall_ms"};
  return cols;
}

void write_csv(std::ostream& os, std::span<const TrialRow> rows) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : rows) {
    os << r.problem_id << ',' << r.family << ',' << r.d << ',' << r.m << ',' << r.T << ','
       << r.seed << ',' << format_double(r.gamma) << ',' << format_double(r.rho) << ','
       << format_double(r.rho_hat) << ',' << format_double(r.lambda) << ','
       << format_double(r.grad_norm_sq) << ',' << format_double(r.envelope_value_x0) << ','
       << format_double(r.phi_best) << ',' << format_double(r.bound_value) << ','
       << (r.bound_satisfied ? "true" : "false") << ',' << r.oracle_calls << ','
       << format_double(r.inner_tol_achieved) << ',' << format_double(r.wall_ms) << '\n';
  }
}

std::vector<TrialRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParameterError("empty CSV");
  const auto header = split(trim(line), ',');
  if (header != csv_columns()) throw ParameterError("CSV header does not match the report schema");
  std::vector<TrialRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size())
      throw ParameterError("CSV line " + std::to_string(lineno) + " has the wrong field count");
    try {
      TrialRow r;
      r.problem_id = f[0];
      r.family = f[1];
      r.d = std::stoll(f[2]);
      r.m = std::stoll(f[3]);
      r.T = std::stoull(f[4]);
      r.seed = std::stoull(f[5]);
      r.gamma = std::stod(f[6]);
      r.rho = std::stod(f[7]);
      r.rho_hat = std::stod(f[8]);
      r.lambda = std::stod(f[9]);
      r.grad_norm_sq = std::stod(f[10]);
      r.envelope_value_x0 = std::stod(f[11]);
      r.phi_best = std::stod(f[12]);
      r.bound_value = std::stod(f[13]);
      r.bound_satisfied = f[14] == "true";
      r.oracle_calls = std::stoull(f[15]);
      r.inner_tol_achieved = std::stod(f[16]);
      r.wall_ms = std::stod(f[17]);
      rows.push_back(std::move(r));
    } catch (const std::exception&) {
      throw ParameterError("CSV line " + std::to_string(lineno) + " is malformed");
    }
  }
  return rows;
}

std::vector<HorizonSummary> summarize_rows(std::span<const TrialRow> rows) {
  std::map<std::size_t, std::vector<double>> by_T;
  std::map<std::size_t, std::size_t> failures;
  for (const auto& r : rows) {
    auto& v = by_T[r.T];
    if (std::isnan(r.grad_norm_sq))
      ++failures[r.T];
    else
      v.push_back(r.grad_norm_sq);
  }
  std::vector<HorizonSummary> out;
  for (const auto& [T, values] : by_T) {
    HorizonSummary h;
    h.T = T;
    h.grad_norm_sq = summarize(values);
    h.failures = failures[T];
    out.push_back(h);
  }
  return out;
}

LinearFit fit_rate(std::span<const HorizonSummary> horizons) {
  if (horizons.size() < 3) throw ParameterError("rate fit needs at least three horizons");
  std::vector<double> x, y;
  for (const auto& h : horizons) {
    x.push_back(static_cast<double>(h.T));
    y.push_back(h.grad_norm_sq.mean);
  }
  return loglog_fit(x, y);
}

LinearFit fit_rate(const ExperimentReport& report) { return fit_rate(report.horizons); }

}  // namespace psgm

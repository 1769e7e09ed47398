#pragma once

#include "psgm/problems.hpp"
#include "psgm/stats.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace psgm {

class ConfigError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

enum class BoundVariant { ProjectedThm21, ProximalThm26, Cor22, Cor27, SmoothCor29 };

std::string to_string(BoundVariant v);
BoundVariant parse_bound_variant(const std::string& name);

/// Right-hand-side inputs. `delta` is (an estimate of) phi_{1/rho_hat}(x0) - min phi.
struct BoundInputs {
  double delta = 0.0;
  double rho = 0.0;
  double rho_hat = 0.0;
  std::optional<double> L;
  std::optional<double> sigma;
  std::vector<double> alphas;  // alpha_0..alpha_T
  /// Whether r is an indicator (or zero); the projected variants require it.
  bool projected = true;
};

/// Exact right-hand side of the chosen guarantee on E|grad phi_{1/rho_hat}(x_{t*})|^2.
///   thm21:  (rh/(rh-rho)) (delta + (rh L^2/2) S2) / S1,  rh > rho, projected
///   thm26:  (rh/(rh-rho)) (delta + rh L^2 S2) / S1,      rh in (rho, 2 rho], alpha <= 1/rh
///   cor22:  2 (delta + rho L^2 gamma^2) / (gamma sqrt(T+1)), rh = 2 rho, constant, projected
///   cor27:  same formula, rh = 2 rho, constant steps alpha <= 1/(2 rho)
///   cor29:  (2 rh/(rh-rho)) (delta + (rh sigma^2/2) S2) / S1, rh > rho, alpha <= 1/rh
/// with S1 = sum alpha_t, S2 = sum alpha_t^2. Throws ParameterError on a mismatch.
double theoretical_bound(BoundVariant variant, const BoundInputs& in);

/// Guarantee matching a problem: cor29 when smooth with sigma, cor22/cor27
/// at rho_hat = 2 rho, otherwise thm21/thm26.
BoundVariant default_bound_variant(const CompositeProblem& problem, double rho_hat);

struct ExperimentConfig {
  std::string problem_id;
  std::vector<std::size_t> horizons;
  std::optional<double> gamma;  // empty: optimal_gamma
  std::optional<double> R;      // initial-gap bound for the optimal gamma
  std::optional<double> rho_hat;
  std::optional<double> lambda;
  std::size_t n_seeds = 50;
  std::uint64_t seed_offset = 0;
  double inner_tol = 1e-6;
  std::string output;
  std::size_t threads = 0;  // 0: hardware concurrency
  bool timing = true;       // off writes wall_ms = 0 for byte-stable output
  std::optional<BoundVariant> bound;
};

/// Flat "key = value" text; '#' starts a comment. Keys: problem, horizons
/// (comma separated), gamma (number or "optimal"), R, rho_hat, lambda,
/// n_seeds, seed_offset, inner_tol, output, threads, timing (on/off), bound.
/// Unknown keys and malformed values throw ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
void validate_config(const ExperimentConfig& config);

struct TrialRow {
  std::string problem_id;
  std::string family;
  Eigen::Index d = 0;
  Eigen::Index m = 0;
  std::size_t T = 0;
  std::uint64_t seed = 0;
  double gamma = 0.0;
  double rho = 0.0;
  double rho_hat = 0.0;
  double lambda = 0.0;
  double grad_norm_sq = 0.0;  // NaN when the envelope oracle failed
  double envelope_value_x0 = 0.0;
  double phi_best = 0.0;
  double bound_value = 0.0;
  bool bound_satisfied = false;
  std::size_t oracle_calls = 0;
  double inner_tol_achieved = 0.0;
  double wall_ms = 0.0;
};

struct HorizonSummary {
  std::size_t T = 0;
  SampleSummary grad_norm_sq;
  std::size_t failures = 0;
  double bound_value = 0.0;
  bool bound_applicable = false;
  bool bound_satisfied = false;  // mean - CI <= bound
};

struct ExperimentReport {
  ExperimentConfig config;
  BoundVariant variant = BoundVariant::Cor27;
  double gamma = 0.0;
  double rho = 0.0;
  double rho_hat = 0.0;
  double lambda = 0.0;
  std::vector<TrialRow> rows;  // sorted by (T, seed)
  std::vector<HorizonSummary> horizons;
  std::optional<LinearFit> fit;  // present with >= 3 horizons
};

/// Runs every (T, seed) cell on a worker pool and merges by key.
ExperimentReport run_sweep(const ExperimentConfig& config);
ExperimentReport run_sweep(const ExperimentConfig& config, const CompositeProblem& problem);

const std::vector<std::string>& csv_columns();
void write_csv(std::ostream& os, std::span<const TrialRow> rows);
std::vector<TrialRow> read_csv(std::istream& is);

/// Per-horizon means of grad_norm_sq (failed rows skipped), sorted by T.
std::vector<HorizonSummary> summarize_rows(std::span<const TrialRow> rows);
/// Least-squares slope of log mean grad_norm_sq against log T; needs >= 3 horizons.
LinearFit fit_rate(std::span<const HorizonSummary> horizons);
LinearFit fit_rate(const ExperimentReport& report);

}  // namespace psgm

// Command-line front end: run sweeps, print bounds, run property suites,
// fit rates from CSV.
#include "psgm/harness.hpp"
#include "psgm/invariants.hpp"
#include "psgm/solver.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>

namespace {

constexpr int kConfigError = 2;
constexpr int kInvariantViolation = 3;

void print_summary(const psgm::ExperimentReport& rep) {
  std::cout << "problem " << rep.config.problem_id << "  gamma " << rep.gamma << "  rho " << rep.rho
            << "  rho_hat " << rep.rho_hat << "  lambda " << rep.lambda << "  bound "
            << psgm::to_string(rep.variant) << " (surrogate delta)\n";
  std::cout << std::setw(10) << "T" << std::setw(16) << "mean |grad|^2" << std::setw(14) << "ci95"
            << std::setw(16) << "bound" << std::setw(10) << "ok" << std::setw(10) << "failed" << '\n';
  for (const auto& h : rep.horizons)
    std::cout << std::setw(10) << h.T << std::setw(16) << h.grad_norm_sq.mean << std::setw(14)
              << h.grad_norm_sq.ci95 << std::setw(16) << h.bound_value << std::setw(10)
              << (h.bound_applicable ? (h.bound_satisfied ? "yes" : "NO") : "n/a") << std::setw(10)
              << h.failures << '\n';
  if (rep.fit)
    std::cout << "fitted slope " << rep.fit->slope << " (stderr " << rep.fit->slope_stderr << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proximal stochastic subgradient experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Execute an experiment config and write the CSV report");
  std::string config_path;
  std::string output_override;
  run->add_option("config", config_path, "key = value config file")->required();
  run->add_option("-o,--output", output_override, "CSV path (overrides the config)");

  auto* bounds = app.add_subcommand("bounds", "Print theoretical bounds for given constants");
  double delta = 1.0, rho = 1.0, L = 1.0, gamma = 1.0, sigma = 0.0;
  std::optional<double> rho_hat_opt;
  std::size_t horizon = 100;
  std::string variant_name = "all";
  bounds->add_option("--delta", delta, "phi_{1/rho_hat}(x0) - min phi")->capture_default_str();
  bounds->add_option("--rho", rho, "weak-convexity modulus")->capture_default_str();
  bounds->add_option("--rho-hat", rho_hat_opt, "envelope parameter (default 2 rho)");
  bounds->add_option("--L", L, "Lipschitz / second-moment constant")->capture_default_str();
  bounds->add_option("--sigma", sigma, "gradient noise level (smooth case)")->capture_default_str();
  bounds->add_option("--gamma", gamma, "constant-step scale")->capture_default_str();
  bounds->add_option("-T,--horizon", horizon, "last iteration index")->capture_default_str();
  bounds->add_option("--variant", variant_name, "thm21|thm26|cor22|cor27|cor29|all")->capture_default_str();

  auto* check = app.add_subcommand("check", "Run the property suites");
  std::vector<std::string> suites;
  std::uint64_t check_seed = 2017;
  check->add_option("--suite", suites, "suite names (default: all)");
  check->add_option("--seed", check_seed, "base seed")->capture_default_str();

  auto* rate = app.add_subcommand("rate", "Fit the log-log rate from a CSV report");
  std::string csv_path;
  rate->add_option("csv", csv_path, "CSV written by `run`")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) {
      auto config = psgm::load_config(config_path);
      if (!output_override.empty()) config.output = output_override;
      print_summary(psgm::run_sweep(config));
      if (!config.output.empty()) std::cout << "wrote " << config.output << '\n';
      return 0;
    }
    if (*bounds) {
      psgm::BoundInputs in;
      in.delta = delta;
      in.rho = rho;
      in.rho_hat = rho_hat_opt.value_or(2.0 * rho);
      in.L = L;
      if (sigma > 0.0) in.sigma = sigma;
      const auto schedule = psgm::StepSchedule::constant(gamma, horizon);
      in.alphas.assign(schedule.alphas().begin(), schedule.alphas().end());
      std::vector<psgm::BoundVariant> variants;
      if (variant_name == "all")
        variants = {psgm::BoundVariant::ProjectedThm21, psgm::BoundVariant::ProximalThm26,
                    psgm::BoundVariant::Cor22, psgm::BoundVariant::Cor27, psgm::BoundVariant::SmoothCor29};
      else
        variants = {psgm::parse_bound_variant(variant_name)};
      std::cout << std::setprecision(10);
      for (auto v : variants) {
        try {
          const double value = psgm::theoretical_bound(v, in);
          std::cout << psgm::to_string(v) << ' ' << value << '\n';
        } catch (const psgm::ParameterError& e) {
          if (variants.size() == 1) throw;
          std::cout << psgm::to_string(v) << " n/a (" << e.what() << ")\n";
        }
      }
      return 0;
    }
    if (*check) {
      psgm::InvariantOptions opts;
      opts.seed = check_seed;
      if (suites.empty()) suites = psgm::invariant_suites();
      int failed = 0;
      for (const auto& s : suites)
        for (const auto& r : psgm::run_invariant_suite(s, opts)) {
          std::cout << (r.passed ? "PASS " : "FAIL ") << r.suite << ": " << r.name << " -- " << r.detail << '\n';
          failed += !r.passed;
        }
      std::cout << (failed ? std::to_string(failed) + " invariant(s) violated" : "all invariants hold") << '\n';
      return failed ? kInvariantViolation : 0;
    }
    if (*rate) {
      std::ifstream in(csv_path);
      if (!in) throw psgm::ConfigError("cannot read " + csv_path);
      const auto rows = psgm::read_csv(in);
      const auto horizons = psgm::summarize_rows(rows);
      for (const auto& h : horizons)
        std::cout << "T " << h.T << " mean " << h.grad_norm_sq.mean << " ci95 " << h.grad_norm_sq.ci95 << '\n';
      const auto fit = psgm::fit_rate(horizons);
      std::cout << "slope " << fit.slope << " stderr " << fit.slope_stderr << '\n';
      return 0;
    }
  } catch (const psgm::ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

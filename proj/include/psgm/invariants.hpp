#pragma once

#include "psgm/problems.hpp"

#include <string>
#include <vector>

namespace psgm {

struct InvariantResult {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct InvariantOptions {
  std::uint64_t seed = 2017;
  /// Benchmarks to certify; defaults to shipped_problem_ids().
  std::vector<std::string> problems;
};

/// Suite names: core, prox, solver, moreau, boost, problems, harness.
const std::vector<std::string>& invariant_suites();

std::vector<InvariantResult> run_invariant_suite(const std::string& suite,
                                                 const InvariantOptions& options = {});
std::vector<InvariantResult> run_all_invariants(const InvariantOptions& options = {});

/// Random point of dom r near the problem's initial point.
Vector sample_domain_point(const CompositeProblem& problem, Rng& rng);

}  // namespace psgm

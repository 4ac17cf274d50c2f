// Verification suites shared by the CLI and the acceptance binary. Each suite
// returns structured pass/fail checks with numeric details; when an output
// directory is configured it also writes deterministic CSV/JSON artifacts and
// static SVG plots. Replica parallelism follows the per-replica stream
// convention, so results are identical for any worker count.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace gfmap {

struct SuiteParams {
  std::uint64_t seed = 20260826;
  int workers = 1;
  double scale = 1.0;    // replica-count multiplier (< 1 for smoke runs)
  std::string out_dir;   // empty: no artifacts written
};

struct CheckResult {
  std::string name;
  bool pass = false;
  nlohmann::json details;
};

struct SuiteResult {
  std::string name;
  std::vector<CheckResult> checks;

  bool pass() const;
  nlohmann::json to_json() const;
};

// Criterion 1: spectral identities (eigen residuals, chi(0) = 0, convexity,
// duality, tilting) on M2 and three random specs, timed.
SuiteResult suite_spectral(const SuiteParams& p);

// Criteria 2-3: Laplace-matrix Monte Carlo vs matrix exponential; Wald
// martingale means at the two admissible exponents.
SuiteResult suite_simulate_map(const SuiteParams& p);

// Criteria 6-7: genealogical martingale constancy for both admissible pairs
// and degeneracy of the upper martingale.
SuiteResult suite_simulate_gf(const SuiteParams& p);

// Criterion 5: admissibility residuals, the conservative-binary exact root,
// the two-exponent spine identity and the one-generation mean identity.
SuiteResult suite_exponents(const SuiteParams& p);

// Criterion 9: tagged-leaf vs direct spine, many-to-one moments, rebuild.
SuiteResult suite_spine_check(const SuiteParams& p);

// Criteria 4 and 8: exponential-functional oracles (Dufresne mean, weighted
// functional tail at the Cramér number) and the martingale-limit tail.
SuiteResult suite_tails(const SuiteParams& p);

// Criteria 10-11: temporal martingale decay (alpha > 0) and the empirical
// measure rho_t (alpha < 0) against the dual-spine prediction.
SuiteResult suite_empirical(const SuiteParams& p);

// Criterion 12: entrance-law importance sampling vs direct simulation from a
// small starting size, on the upward-drifting dual fixture.
SuiteResult suite_entrance(const SuiteParams& p);

// Criterion 13: cascade machinery (Pareto synthetic, Kesten affine fixture,
// cascade-vs-cell-tree fixed-point match).
SuiteResult suite_renewal(const SuiteParams& p);

// All suites in order; criterion 14 (byte-identical reruns) is a property of
// the artifacts these write.
std::vector<SuiteResult> run_all(const SuiteParams& p);

// Writes summary.json (all suites) into p.out_dir when set.
void write_summary(const std::vector<SuiteResult>& results, const SuiteParams& p);

}  // namespace gfmap

// Spine (tagged cell) construction, two ways:
//  * by tagging a leaf / particle in trees simulated under P, with exact
//    importance weights from the martingale change of measure, and
//  * directly, by simulating the MAP materialized from the spine matrix
//    exponent and applying the self-similar time change.
// The equivalence test compares the two in law at a fixed time.
#pragma once

#include <optional>

#include "gfmap/cellsystem.hpp"
#include "gfmap/cumulants.hpp"

namespace gfmap {

struct TaggedSpine {
  std::vector<int> leaf_prefix;        // cell indices from the root down
  std::vector<double> generation_times;  // birth time of each prefix cell
  double weight = 0.0;                 // importance weight M(n)/(v_i x^omega)
  bool flagged = false;                // truncation exhausted the candidates
};

// Leaf selection at generation n+1 proportional to v size^omega (its weight
// inside M(n)); the prefix is the selected cell's ancestor chain. The tree
// must have been simulated under P; the returned weight converts P-averages
// into tilted-law averages.
TaggedSpine sample_tagged_leaf(const CellTree& tree, const WeightPair& pair, int n,
                               RngStream& rng);

struct SpineSample {
  double value = 0.0;   // spine size at the query time
  TypeIndex type = 0;
  double weight = 0.0;  // importance weight; 0 when no particle is alive
  bool flagged = false; // selected particle was frozen/budget-truncated
};

// Time-t tagged particle: picks a particle of snapshot(t) proportionally to
// v X(t)^omega and weights the draw by M_t/(v_i x^omega); by the many-to-one
// identity this samples the spine marginal at t.
SpineSample tagged_particle_at(const CellTree& tree, const WeightPair& pair, double t,
                               RngStream& rng);

// Spine value at time t by direct simulation of the materialized spine MAP.
// nullopt when the spine is dead at t (finite lifetime for alpha > 0 with a
// downward-drifting spine).
std::optional<std::pair<double, TypeIndex>> direct_spine_value(
    const SpineExponent& spine, double x, TypeIndex i, double alpha, double t,
    RngStream& rng, double grid_step = 0.05);

struct SpineEquivalence {
  std::vector<KsResult> ks_per_type;   // arm A (weighted) vs arm B, per terminal type
  double flagged_weight_share = 0.0;   // flagged weight / total weight in arm A
  // Many-to-one cross-checks for f in {1, 1_{type=j}, x^0.1}: tree-side
  // estimate, spine-side estimate and pooled SE per entry.
  std::vector<std::array<double, 3>> moment_checks;  // {lhs, rhs, se}
  std::size_t arm_a_alive = 0;
  std::size_t arm_b_alive = 0;
};

SpineEquivalence spine_equivalence_test(const MapSpec& spec, const AdmissiblePair& pair,
                                        double x, TypeIndex i, double alpha, double t,
                                        std::size_t reps, const SimControls& controls,
                                        RngStream& rng, int workers = 1);

struct RebuildCheck {
  std::vector<KsResult> ks_per_type;  // off-spine offspring vs fresh trees
  std::size_t pooled = 0;
};

// Theorem check: subtrees hanging off the spine, re-rooted and rescaled, are
// P-trees. Compares the relative first-generation offspring sizes of
// off-spine subtree roots (pooled per root type, importance-weighted) against
// fresh simulations under P.
RebuildCheck rebuild_check(const MapSpec& spec, const AdmissiblePair& pair, double x,
                           TypeIndex i, std::size_t reps, const SimControls& controls,
                           RngStream& rng);

}  // namespace gfmap

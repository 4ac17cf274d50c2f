// Growth-fragmentation cell system on the Ulam tree.
//
// Each cell carries a positive size evolving as the self-similar transform of
// the MAP; every negative jump of the size spawns an independent child of
// that magnitude whose type is the jump's mark. Divisions are conservative.
//
// Two simulators:
//  * simulate_genealogy — sizes/types/generations only (no time change),
//    used by the martingale and tail suites; it streams per-generation
//    omega-weighted masses for a set of (omega, v) pairs and keeps an exact
//    truncation ledger so discarded mass can be added back.
//  * simulate_tree — full timed tree with per-cell trajectories, used by
//    snapshots, temporal martingales and the empirical measure.
//
// Truncation policy: children below min_size are not simulated and a cell is
// stopped once its own size falls below min_size; in both cases the stopped
// mass v_j s^omega is recorded with the first generation it would count
// towards, which makes martingale corrections unbiased (the expected future
// generation mass of a cell equals its current weighted size).
#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "gfmap/lamperti.hpp"
#include "gfmap/map_spec.hpp"

namespace gfmap {

struct SimControls {
  double min_size = 1e-3;   // absolute size cutoff
  int max_generation = 40;
  double horizon = std::numeric_limits<double>::infinity();
  double grid_step = std::numeric_limits<double>::infinity();  // Brownian clock refinement
  double chunk = 5.0;       // MAP-time chunk per cell simulation step
  int max_chunks = 4000;                 // per-cell safety budget
  std::size_t max_cells = 5'000'000;     // per-tree safety budget
};

struct WeightPair {
  double omega = 0.0;
  Vector v;
};

// Per-generation omega-weighted masses of one tree, for several weight pairs.
// mass[p][g] = sum over generation-g cells of v_type size^omega (g = 0 is the
// root), so the genealogical martingale M(n) is mass[p][n+1]. stub[p][g]
// accumulates truncated mass first countable at generation g; the corrected
// M(n) adds every stub with g <= n+1.
struct GenealogyStats {
  std::vector<std::vector<double>> mass;
  std::vector<std::vector<double>> stub;
  std::vector<std::size_t> cells_per_generation;
  bool budget_exhausted = false;

  double martingale(std::size_t p, int n) const;            // raw M(n)
  double martingale_corrected(std::size_t p, int n) const;  // + stubs
};

GenealogyStats simulate_genealogy(const MapSpec& spec, double x, TypeIndex i,
                                  const SimControls& controls,
                                  const std::vector<WeightPair>& pairs,
                                  RngStream rng);

// Monte Carlo estimate of the (H)-type moment
// E[sum_{|u|=1} v_{type} size^omega log(size)] for a root of size x and type
// i; the tail theory needs it finite and negative.
MeanSe assumption_h_estimate(const MapSpec& spec, double x, TypeIndex i,
                             const SimControls& controls, const WeightPair& pair,
                             std::size_t reps, RngStream& rng);

// Terminal (deepest available) corrected genealogical martingale value per
// replica tree; the raw and stub parts are also returned for bias reports.
struct MartingaleLimitSamples {
  std::vector<double> values;       // corrected M(max_generation - 1)
  std::vector<double> stub_share;   // stub mass / corrected value per tree
};

MartingaleLimitSamples martingale_limit_samples(const MapSpec& spec, double x,
                                                TypeIndex i, const WeightPair& pair,
                                                const SimControls& controls,
                                                std::size_t reps, RngStream& rng);

enum class CellEnd { Running, MinSize, Horizon, Killed, Budget };

struct CellRecord {
  int parent = -1;      // index into CellTree::cells, -1 for the root
  int generation = 0;
  int child_rank = 0;   // 1-based rank among siblings by descending size
  double birth = 0.0;   // absolute time
  double size0 = 0.0;
  TypeIndex type0 = 0;
  SsmpPath path;        // trajectory from birth (self-similar time)
  CellEnd end = CellEnd::Running;
  double end_time = 0.0;   // absolute time the stored trajectory ends
  double end_value = 0.0;  // size at end_time
  TypeIndex end_type = 0;
  std::vector<int> children;
};

struct TreeStub {
  int gen_min = 0;  // first generation this mass would count towards
  double size = 0.0;
  TypeIndex type = 0;
};

struct CellTree {
  double x0 = 0.0;
  TypeIndex root_type = 0;
  double alpha = 0.0;
  SimControls controls;
  std::vector<CellRecord> cells;
  std::vector<TreeStub> stubs;
  bool budget_exhausted = false;
};

// Full timed tree under P_{x,i}; deterministic from the stream (children use
// streams keyed by their Ulam labels).
CellTree simulate_tree(const MapSpec& spec, double x, TypeIndex i, double alpha,
                       const SimControls& controls, RngStream rng);

// Exact M(n) of a timed tree for an arbitrary weight pair (sum over
// generation-(n+1) cells), plus its truncation-corrected version.
double genealogical_martingale(const CellTree& tree, const WeightPair& pair, int n,
                               bool corrected = false);

struct Particle {
  double size = 0.0;
  TypeIndex type = 0;
  int generation = 0;
  int cell = 0;  // index into tree.cells
};

// Particles alive at absolute time t, sorted by descending size. A cell
// stopped by the min_size cutoff stays alive at its stopped value when
// alpha <= 0 (it would evolve ever more slowly) and is treated as dead when
// alpha > 0 (its remaining lifetime after the stop is o(min_size^alpha)).
std::vector<Particle> snapshot(const CellTree& tree, double t);

// M_t = sum v_{J(t)} X(t)^omega over a snapshot.
double temporal_martingale(const std::vector<Particle>& snap, const WeightPair& pair);

// <rho_t, f> = sum v_{J(t)} X(t)^{omega_-} f(t^{-1/alpha} X(t), J(t)).
double empirical_measure(const std::vector<Particle>& snap, double t, double alpha,
                         const WeightPair& pair_minus,
                         const std::function<double(double, TypeIndex)>& f);

}  // namespace gfmap

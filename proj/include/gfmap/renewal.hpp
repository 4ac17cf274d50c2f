// Multitype smoothing transforms and perpetuities: the fixed-point equations
// governing the martingale limit M(infinity) and related heavy-tailed
// quantities. The smoothing transform
//   R_i  =law=  sum_k (v_{J_k}/v_i) C_k R^{(J_k)}_k
// comes either from an explicit atomic offspring law or from a Monte Carlo
// bridge out of the first generation of a cell system (with C_k = size^omega).
// Tools: the moment matrix m(q), characteristic-root location (with the
// derivative condition from the implicit renewal theorem), a population
// dynamics solver for the fixed point, a truncated-series sampler for affine
// perpetuities, and a tail verification harness.
#pragma once

#include <cstddef>
#include <vector>

#include "gfmap/cellsystem.hpp"
#include "gfmap/map_spec.hpp"
#include "gfmap/spectral.hpp"
#include "gfmap/stats.hpp"

namespace gfmap {

struct OffspringChild {
  TypeIndex type = 0;
  double factor = 0.0;  // C_k > 0
};

struct OffspringAtom {
  double prob = 0.0;
  std::vector<OffspringChild> children;
};

struct SmoothingSpec {
  int n_types = 1;
  std::vector<std::vector<OffspringAtom>> law;  // law[i]: atoms for a type-i parent
  Vector v;                                     // weight vector in the v-ratios
};

// m_{i,j}(q) = E_i[ sum_k C_k^q 1_{J_k = j} ].
Matrix weight_matrix(const SmoothingSpec& spec, double q);

// Leading (Perron) eigenvalue of m(q); the characteristic function whose
// roots locate the smoothing-transform structure.
double smoothing_eigenvalue(const SmoothingSpec& spec, double q);

struct CharacteristicRoot {
  double alpha = 0.0;       // root of rho(m(q)) = 1
  double derivative = 0.0;  // d/dq rho(m(q)) at the root (must be finite, > 0 for the tail root)
};

// Root of rho(m(q)) = 1 in (q_lo, q_hi), bisection + secant; also reports the
// derivative entering condition (ii) of the implicit renewal theorem.
CharacteristicRoot find_alpha(const SmoothingSpec& spec, double q_lo, double q_hi);

// First-generation bridge out of a cell system: simulates reps one-generation
// trees per type from unit size and pools the offspring vectors into an
// atomic law with C_k = size^omega.
SmoothingSpec bridge_from_genealogy(const MapSpec& spec, const WeightPair& pair,
                                    const SimControls& controls, std::size_t reps,
                                    RngStream& rng);

struct PopulationDynamics {
  std::vector<std::vector<double>> pools;  // per-type samples of R_i
  bool stabilized = false;
  int iterations = 0;
  std::vector<double> pool_means;
};

// Population dynamics for the smoothing fixed point: per-type pools of
// candidate R_i samples, refreshed by resampling children from the pools and
// applying the transform. Stabilization: every pool mean within 3 SE of 1
// (the fixed point is normalized to mean 1) and the 0.9-quantile moving by
// less than 1% over an iteration.
PopulationDynamics population_dynamics(const SmoothingSpec& spec,
                                       std::size_t pool_size, int max_iters,
                                       RngStream& rng);

struct AffineAtom {
  double prob = 0.0;
  double a = 0.0;  // multiplicative factor
  double b = 0.0;  // additive term
  TypeIndex next = 0;
};

struct AffineSpec {
  int n_types = 1;
  std::vector<std::vector<AffineAtom>> law;  // law[i]: atoms for state i
  Vector v;
};

// Truncated-series sample of the perpetuity
//   X_i = B_1 + (v_{J_1}/v_i) A_1 (B_2 + (v_{J_2}/v_{J_1}) A_2 (...)),
// stopped once the geometric remainder bound falls below eps times the
// accumulated value. Requires contraction in the mean (throws otherwise).
double affine_perpetuity_sample(const AffineSpec& spec, TypeIndex start, double eps,
                                RngStream& rng, int max_terms = 100000);

struct TailVerdict {
  double expected = 0.0;
  std::vector<HillEstimate> hill;
  double rank_slope = 0.0;  // log-log rank regression slope (about -expected)
  bool in_ci = false;       // expected inside the bootstrap CI at some k-fraction
  bool within_15pct = false;
};

// Heavy-tail verification of a positive sample against an expected exponent:
// Hill over several top fractions with bootstrap CIs, plus rank regression.
TailVerdict tail_verify(const std::vector<double>& samples, double expected,
                        RngStream& rng,
                        const std::vector<double>& k_fracs = {0.005, 0.01, 0.02, 0.05});

}  // namespace gfmap

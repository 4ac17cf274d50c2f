// Lamperti-type transform between MAP paths and positive self-similar Markov
// processes with types: X(t) = x0 exp(xi(phi(t x0^{-alpha}))) where phi
// inverts the additive clock tau(s) = int_0^s e^{alpha xi(u)} du. The clock
// is integrated in closed form on each stored path segment (the ordinate is
// linear there), so queries and jump times are exact for the stored path.
//
// Also: exponential functionals I(alpha xi) = int_0^inf e^{alpha xi} ds,
// their moments and heavy tails, and entrance-law sampling through the dual
// MAP.
#pragma once

#include <optional>
#include <vector>

#include "gfmap/map_path.hpp"
#include "gfmap/stats.hpp"

namespace gfmap {

struct SsmpJump {
  double time = 0.0;       // absolute time of the jump of X
  double pre_value = 0.0;  // X just before
  double delta = 0.0;      // X after minus X before (negative spawns a child)
  TypeIndex type_mark = 0;
  bool transition = false;
};

class SsmpPath {
 public:
  SsmpPath() = default;  // empty path; covered_time() == 0
  SsmpPath(MapPath path, double x0, double alpha);

  double x0() const { return x0_; }
  double alpha() const { return alpha_; }
  const MapPath& map_path() const { return path_; }

  // Total clock of the stored (finite-horizon) path, i.e. the amount of
  // self-similar time the stored MAP trajectory covers, scaled by x0^alpha.
  double covered_time() const;

  // (X, J) at absolute time t; nullopt past the covered time (cemetery if the
  // underlying path was killed, otherwise simply beyond the simulated span).
  std::optional<std::pair<double, TypeIndex>> query(double t) const;

  // Jumps of X in absolute time with marks; negative deltas spawn children.
  std::vector<SsmpJump> jumps() const;

  // Inverse clock: MAP time s with tau(s) = u (u in clock units of the MAP,
  // i.e. already divided by x0^alpha). Used by tests for round-trip checks.
  double invert_clock(double u) const;
  double clock_at(double s) const;  // tau(s) along the stored path

 private:
  MapPath path_;
  double x0_ = 1.0;
  double alpha_ = 0.0;
  std::vector<double> cum_ = {0.0};  // clock at segment boundaries
};

struct ExpFunctionalSample {
  double value = 0.0;        // truncated I(alpha xi)
  double tail_bound = 0.0;   // estimated remainder beyond the truncation
  double trunc_time = 0.0;   // MAP time at which simulation stopped
  TypeIndex end_type = 0;
};

// Simulates I(alpha xi) = int_0^inf e^{alpha xi(s)} ds until the remainder
// estimate drops below eps_tail * accumulated value. Throws when the drift of
// alpha xi is nonnegative ("infinite exponential functional"). The remainder
// estimate is a Wald-supermartingale bound at a fixed exponent gamma* chosen
// inside the negative region of q -> chi(alpha q) (gamma* = 1 when
// chi(alpha) < 0, else half the positive root).
ExpFunctionalSample sample_exp_functional(const MapSpec& spec, TypeIndex start_type,
                                          double alpha, double eps_tail,
                                          RngStream& rng,
                                          double grid_step = 0.05);

// Monte Carlo E[I(alpha xi)^gamma]; refuses (throws) unless chi(alpha*gamma) < 0,
// the finite-moment criterion.
MeanSe exp_functional_moment(const MapSpec& spec, TypeIndex start_type,
                             double alpha, double gamma, std::size_t reps,
                             RngStream& rng);

// Weighted exponential functional J_i = int_0^inf (w_{Theta(s)}(Y)/w_i(Y))
// e^{xi(s)} ds whose tail exponent is exactly the Cramér number Y; used by
// the tail acceptance suite (the unweighted I is only bracketed).
double sample_weighted_exp_functional(const MapSpec& spec, TypeIndex start_type,
                                      double cramer, const Vector& w_cramer,
                                      double eps_tail, RngStream& rng,
                                      double grid_step = 0.05);

struct TailCrossSample {
  double value = 0.0;   // full weighted functional J along the path
  double weight = 0.0;  // Wald likelihood ratio (w_i/w_J(T)) e^{-Y xi(T)}
};

// Importance sample of J_i restricted to paths whose ordinator exceeds
// `level`: the MAP runs under the Cramér tilt until first passage above the
// level, the Wald martingale supplies the likelihood ratio, and the
// remainder of the integral is completed under the original law. Averaging
// weight * 1{value > t} estimates P_i(J > t, sup xi >= level); for
// t >> e^level this captures the polynomial tail far beyond plain
// Monte Carlo reach, so regressing log-probability against log t across a
// ladder of levels recovers the tail exponent.
TailCrossSample sample_weighted_exp_functional_crossing(
    const MapSpec& spec, const MapSpec& tilted, TypeIndex start_type,
    double cramer, const Vector& w_cramer, double level, double eps_tail,
    RngStream& rng, double grid_step = 0.05);

struct EntranceSample {
  double value = 0.0;   // position coordinate y = (t / I)^{1/alpha}
  TypeIndex type = 0;   // type coordinate
  double weight = 0.0;  // importance weight, 1/(alpha m I); mean ~ 1/reps
};

// Importance sampling of the entrance law at time t through the dual MAP:
// start types drawn from pi, I = I(alpha xi_dual), weight 1/(alpha m I) with
// m = chi'(0) > 0. Weights are normalized so their sum estimates total mass 1.
std::vector<EntranceSample> entrance_law_sample(const MapSpec& spec, double alpha,
                                                double t, std::size_t reps,
                                                RngStream& rng,
                                                double eps_tail = 1e-6);

struct ScalingCheckResult {
  std::vector<double> rescaled;          // c X(c^{-alpha} t) under P_{x,i}
  std::vector<TypeIndex> rescaled_type;
  std::vector<double> direct;            // X(t) under P_{cx,i}
  std::vector<TypeIndex> direct_type;
  KsResult ks;  // pooled over types; per-type splits are up to the caller
};

// Self-similarity check: the two sample sets should agree in law.
ScalingCheckResult scaling_check(const MapSpec& spec, double x, TypeIndex i,
                                 double c, double alpha, double t,
                                 std::size_t reps, RngStream& rng,
                                 double grid_step = 0.02);

// Value and type of the self-similar process at absolute time t, started
// from (x, i); simulates the underlying MAP in chunks until the clock covers
// t. Returns nullopt when the process is dead at t (killed, or t beyond its
// finite lifetime within the chunk budget).
std::optional<std::pair<double, TypeIndex>> simulate_ssmp_value(
    const MapSpec& spec, double x, TypeIndex i, double alpha, double t,
    RngStream& rng, double grid_step = 0.05);

}  // namespace gfmap

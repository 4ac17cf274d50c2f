// Exact piecewise simulation of MAP paths.
//
// A path is stored as contiguous segments (drift + Gaussian increment
// realized at the segment end) separated by jumps (Lévy atoms or transition
// jumps). Between stored nodes the ordinate is interpolated linearly; the
// optional grid_step control refines segments where the Brownian part is
// active so that downstream time-change integrals see the Gaussian
// fluctuations at a controlled resolution. When gauss_var = 0 the stored
// path is the exact trajectory.
#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "gfmap/map_spec.hpp"
#include "gfmap/rng.hpp"
#include "gfmap/spectral.hpp"

namespace gfmap {

struct PathSegment {
  double t0 = 0.0, t1 = 0.0;
  double x0 = 0.0, x1 = 0.0;
  double incr = 0.0;  // x1 - x0 as originally computed (drift + Gaussian)
  TypeIndex type = 0;
};

struct PathJump {
  double time = 0.0;
  double size = 0.0;          // jump of the ordinator (may be 0 for trivial U)
  double pre_value = 0.0;     // ordinate just before the jump
  TypeIndex type_mark = 0;    // mark carried by the atom
  TypeIndex type_after = 0;   // modulator state after the jump
  bool transition = false;    // true if the modulator switched here
};

struct MapPath {
  TypeIndex start_type = 0;
  double horizon = 0.0;
  std::vector<PathSegment> segments;
  std::vector<PathJump> jumps;
  bool killed = false;
  double kill_time = 0.0;

  double end_time() const;
  double end_value() const;      // ordinate at end_time (after any final jump)
  TypeIndex end_type() const;
  // Ordinate/type at time t (right-continuous). t must lie in [0, end_time].
  double value(double t) const;
  TypeIndex type_at(double t) const;

  // Recomputes the final ordinate by folding the stored per-segment
  // increments and jump sizes in order; bitwise-identical to end_value().
  double reconstruct_end() const;
};

// Exact simulation from type `start_type` up to `horizon` (or killing).
// grid_step > 0 inserts extra Gaussian nodes at that spacing inside segments
// of types with gauss_var > 0; pass +inf (default) for event-only nodes.
MapPath sample_map_path(const MapSpec& spec, TypeIndex start_type, double horizon,
                        RngStream& rng,
                        double grid_step = std::numeric_limits<double>::infinity());

struct LaplaceMatrixEstimate {
  Matrix mean;   // empirical E[e^{z xi(t)} 1{Theta(t)=j}] per start type i
  Matrix se;     // per-entry standard errors
  Matrix exact;  // expm(F(z) t)
};

// Monte Carlo Laplace matrix vs. the matrix-exponential oracle; `reps` paths
// per start type. Replica r of start type i uses rng.child(i).child(r).
LaplaceMatrixEstimate empirical_laplace_matrix(const MapSpec& spec, double z,
                                               double t, std::size_t reps,
                                               RngStream& rng);

struct WaldCheck {
  double mean = 0.0;
  double se = 0.0;
};

// Empirical mean of the Wald martingale
// (w_{Theta(t)}(gamma) / w_{Theta(0)}(gamma)) e^{gamma xi(t) - t chi(gamma)}
// over `reps` paths from start type i; should be 1 within MC error.
WaldCheck wald_martingale_check(const MapSpec& spec, TypeIndex start_type,
                                double gamma, double t, std::size_t reps,
                                RngStream& rng);

}  // namespace gfmap

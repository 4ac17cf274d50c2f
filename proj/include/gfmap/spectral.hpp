// Spectral layer of the MAP: matrix exponent F(z), Perron-Frobenius leading
// eigenvalue chi(z) with positive eigenvector w(z), stationary distribution
// of the modulator, time-reversal dual, positive root of chi (used for
// heavy-tail exponents), and exponential tilting.
#pragma once

#include <Eigen/Dense>
#include <functional>

#include "gfmap/map_spec.hpp"

namespace gfmap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// F(z): diagonal psi_i(z) + q_{i,i}; off-diagonal q_{i,j} G_{i,j}(z).
Matrix matrix_exponent(const MapSpec& spec, double z);

struct Spectral {
  double chi = 0.0;
  Vector w;  // strictly positive, normalized w[0] = 1
};

// Dominant (real, simple) eigenvalue and positive right eigenvector of an
// ML/Metzler matrix (nonnegative off-diagonals): diagonal shift to a
// nonnegative matrix, power iteration with Rayleigh-quotient stopping at
// relative tolerance 1e-12 (max 1e5 iterations), then a few inverse-iteration
// polish steps. Throws on non-convergence or a non-positive eigenvector.
Spectral leading_eigenvalue(const Matrix& m);

// Convenience: chi(z) and w(z) of the spec's matrix exponent.
Spectral spectral_data(const MapSpec& spec, double z);
double chi(const MapSpec& spec, double z);

// d/dz chi at z by central finite difference (default step 1e-5).
double chi_prime(const MapSpec& spec, double z, double step = 1e-5);

// Stationary distribution of the modulator: leading left eigenvector of Q,
// normalized to sum 1.
Vector stationary_distribution(const MapSpec& spec);

// Time-reversal dual: q'_{i,j} = (pi_j / pi_i) q_{j,i}; each Lévy component
// negated (drift and atom sizes flip sign, variance kept); the transition
// jump for (i,j) is the negation of U_{j,i}. Its matrix exponent satisfies
// F_dual(z) = diag(pi)^{-1} F(-z)^T diag(pi).
MapSpec dual_spec(const MapSpec& spec);

// Positive root of chi on (lo, hi): requires a sign change; bisection with
// secant acceleration to |chi| < 1e-10.
double cramer_number(const MapSpec& spec, double lo, double hi);

// Exponential tilt (Esscher/Wald change of measure) at gamma, returned as an
// explicit MapSpec: drift a + sigma^2 gamma, same variance, Lévy atoms
// reweighted by e^{gamma size}, kill rate adjusted so the diagonal matches
// psi_i(gamma + q) - psi_i(gamma) - chi(gamma) exactly, transition rates
// q_{i,j} G_{i,j}(gamma) w_j(gamma) / w_i(gamma), transition atoms reweighted
// by e^{gamma size} / G_{i,j}(gamma). Its exponent is
// diag(w)^{-1} (F(gamma + z) - chi(gamma) I) diag(w).
MapSpec tilt_spec(const MapSpec& spec, double gamma);

// Matrix exponential e^{M} (scaling-and-squaring with Padé approximant).
Matrix expm(const Matrix& m);

// Generic scalar root finder used for chi and cumulant-eigenvalue roots:
// bisection with secant acceleration; f(lo) and f(hi) must differ in sign.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double tol = 1e-10);

}  // namespace gfmap

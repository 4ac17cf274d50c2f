// Multitype cumulants of the growth-fragmentation layer.
//
// Pi_{i,k} collects the child-spawning (negative) jumps of a type-i cell that
// produce a type-k child: the negative, k-marked atoms of the Lévy measure
// plus the negative, k-marked transition atoms weighted by their intensity.
// From it: kappa_i(q), the multitype cumulant K_i(q) for a weight vector v,
// the cumulant matrix A(q) whose leading eigenvalue's roots give the
// admissible pairs (omega, v), and the spine matrix exponent Fhat together
// with a concrete MapSpec realizing the spine.
#pragma once

#include <vector>

#include "gfmap/map_spec.hpp"
#include "gfmap/spectral.hpp"

namespace gfmap {

struct PiAtom {
  double size = 0.0;    // < 0
  double weight = 0.0;  // rate
};

// atoms(i, k): child-spawning jump measure of type i producing type-k children.
class PiMeasure {
 public:
  explicit PiMeasure(const MapSpec& spec);
  const std::vector<PiAtom>& atoms(int i, int k) const {
    return atoms_[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  }
  // sum over atoms of weight * (1 - e^{size})^q
  double frag_integral(int i, int k, double q) const;
  int n_types() const { return static_cast<int>(atoms_.size()); }

 private:
  std::vector<std::vector<std::vector<PiAtom>>> atoms_;
};

// kappa_i(q) = psi_i(q) + q_{i,i} + int Pi_{i,i}(dx) (1-e^x)^q.
double kappa(const MapSpec& spec, int i, double q);

// K_i(q) = kappa_i(q) + sum_{j != i} (v_j/v_i)(int Pi_{i,j}(1-e^x)^q + q_{i,j} G_{i,j}(q)).
double multitype_cumulant(const MapSpec& spec, int i, double q, const Vector& v);

// A(q): diagonal kappa_i(q); off-diagonal int Pi_{i,j}(1-e^x)^q + q_{i,j} G_{i,j}(q).
// ML form; (A(q) v)_i / v_i = K_i(q).
Matrix cumulant_matrix(const MapSpec& spec, double q);

struct AdmissiblePair {
  double omega = 0.0;
  Vector v;          // strictly positive, v[0] = 1
  double residual = 0.0;  // max_i |K_i(omega)|
};

enum class AdmissibleWhich { Both, Lower, Upper };

// Roots of q -> leading eigenvalue of A(q) on [q_lo, q_hi], located by a
// geometric-grid scan for sign changes followed by bisection+secant to 1e-10.
// Convexity of the leading eigenvalue gives at most two roots; a convex
// function with a double root is reported as a single pair.
std::vector<AdmissiblePair> find_admissible(const MapSpec& spec,
                                            double q_lo = 1.0 / 16.0,
                                            double q_hi = 32.0,
                                            AdmissibleWhich which = AdmissibleWhich::Both);

// Spine matrix exponent built from an admissible pair:
//   Fhat_{i,i}(q) = kappa_i(q + omega),
//   Fhat_{i,j}(q) = (v_j/v_i)(int Pi_{i,j}(1-e^x)^{q+omega} + q_{i,j} G_{i,j}(q+omega)).
// Fhat(q) = diag(v)^{-1} A(q + omega) diag(v), so its leading eigenvalue
// vanishes at q = 0 (the spine MAP is conservative) and, when two admissible
// roots exist, also at q = omega_plus - omega_minus for the lower spine.
class SpineExponent {
 public:
  SpineExponent(const MapSpec& spec, const AdmissiblePair& pair);

  const AdmissiblePair& pair() const { return pair_; }
  Matrix fhat(double q) const;
  double chi_hat(double q) const;        // leading eigenvalue of Fhat(q)
  double chi_hat_prime(double q, double step = 1e-5) const;

  // Concrete MAP whose matrix exponent is Fhat: per type, the Esscher-tilted
  // Lévy part (drift + sigma^2 omega, atoms reweighted e^{omega size}) plus a
  // compound-Poisson part with atoms at log(1 - e^x) for each Pi_{i,i} atom x
  // (the spine keeps the parent side of a same-type split, its log drops by
  // log(1 - e^x)); transition intensities
  // qhat_{i,j} = (v_j/v_i)(q_{i,j} G_{i,j}(omega) + int Pi_{i,j}(1-e^x)^omega)
  // with jump law mixing the tilted U_{i,j} atoms and the Pi_{i,j} split
  // remainders. Same-type and cross-type child marks are preserved.
  const MapSpec& spine_spec() const { return spine_spec_; }

  // Geometric-sum sanity quantity of the same-type split chain:
  // mu_{i,i}(omega) = -(1/(q_{i,i}+psi_i(omega))) int Pi_{i,i}(1-e^x)^omega,
  // which must be < 1 for the spine construction to terminate.
  double mu_ii(int i) const;

 private:
  MapSpec base_;
  AdmissiblePair pair_;
  PiMeasure pi_;
  MapSpec spine_spec_;
};

}  // namespace gfmap

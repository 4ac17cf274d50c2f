// Parametrization of a finite-type Markov additive process (MAP):
// a modulating irreducible Markov chain with intensity matrix Q, a Lévy
// ordinator per type (drift, Brownian variance, finite atomic jump measure,
// kill rate), and atomic transition jumps U_{i,j} applied when the modulator
// switches type. Every jump atom carries a type mark used by the
// growth-fragmentation layer to type the children it spawns.
//
// Jump measures are finite and atomic (compound Poisson) throughout, so all
// transform-domain quantities (psi, G, cumulants) are exact finite sums.
#pragma once

#include <string>
#include <vector>

namespace gfmap {

using TypeIndex = int;

// One atom of a jump measure. For Lévy components `weight` is a Poisson rate;
// for transition jumps it is a probability. Child-spawning requires a
// negative size (a downward jump of the exponential of the ordinator).
struct JumpAtom {
  double size = 0.0;
  double weight = 0.0;
  TypeIndex type_mark = 0;
};

struct LevyComponent {
  double drift = 0.0;
  double gauss_var = 0.0;  // variance coefficient sigma^2
  double kill_rate = 0.0;
  std::vector<JumpAtom> atoms;

  double total_rate() const;
  // Laplace exponent psi(q) = drift q + gauss_var q^2/2
  //                           + sum w (e^{q size} - 1) - kill_rate.
  double psi(double q) const;
};

// Distribution of the extra jump applied when the modulator moves i -> j.
// Atoms' weights are probabilities summing to 1; an empty atom list means
// "no jump" (identically zero with mark j).
struct TransitionJump {
  std::vector<JumpAtom> atoms;

  bool trivial() const { return atoms.empty(); }
  // Laplace transform G(z) = E[e^{z U}]; equals 1 for the trivial jump.
  double laplace(double z) const;
};

struct MapSpec {
  int n_types = 1;
  std::vector<std::vector<double>> q_matrix;       // n x n intensity matrix
  std::vector<LevyComponent> levy;                 // per type
  std::vector<std::vector<TransitionJump>> trans;  // trans[i][j], i != j used

  double q(int i, int j) const { return q_matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
  double psi(int i, double q) const { return levy[static_cast<std::size_t>(i)].psi(q); }
  // G_{i,j}(z) with the convention G_{i,i} = 1.
  double g(int i, int j, double z) const;
  bool conservative() const;  // all kill rates zero

  std::string to_json() const;
  static MapSpec from_json(const std::string& text);
  static MapSpec load(const std::string& path);
  void save(const std::string& path) const;
};

// Throws std::invalid_argument describing the first violated invariant:
// matrix shape, negative rates, nonzero row sums, reducible Q, unnormalized
// transition laws, zero-size Lévy atoms, negative variances.
void validate_spec(const MapSpec& spec);

}  // namespace gfmap

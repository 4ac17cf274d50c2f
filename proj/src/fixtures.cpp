#include "gfmap/fixtures.hpp"

#include <cmath>

namespace gfmap {
namespace fixtures {

MapSpec m2() {
  MapSpec s;
  s.n_types = 2;
  s.q_matrix = {{-1.0, 1.0}, {2.0, -2.0}};
  s.levy.resize(2);
  s.levy[0].drift = 0.07;
  s.levy[0].gauss_var = 0.02;
  s.levy[0].atoms = {{-std::log(2.0), 0.8, 0}, {-std::log(3.0), 0.3, 1}};
  s.levy[1].drift = 0.12;
  s.levy[1].gauss_var = 0.0;
  s.levy[1].atoms = {{-std::log(2.0), 1.0, 1}};
  s.trans.assign(2, std::vector<TransitionJump>(2));
  s.trans[0][1].atoms = {{-0.2, 0.5, 0}, {0.1, 0.5, 1}};
  s.trans[1][0].atoms = {{0.0, 1.0, 0}};
  return s;
}

MapSpec binary_conservative() {
  MapSpec s;
  s.n_types = 1;
  s.q_matrix = {{0.0}};
  s.levy.resize(1);
  s.levy[0].atoms = {{-std::log(2.0), 1.0, 0}};
  s.trans.assign(1, std::vector<TransitionJump>(1));
  return s;
}

MapSpec drifted_split(double drift) {
  MapSpec s = binary_conservative();
  s.levy[0].drift = drift;
  return s;
}

MapSpec brownian_drift(double mu) {
  MapSpec s;
  s.n_types = 1;
  s.q_matrix = {{0.0}};
  s.levy.resize(1);
  s.levy[0].drift = -mu;
  s.levy[0].gauss_var = 1.0;
  s.trans.assign(1, std::vector<TransitionJump>(1));
  return s;
}

MapSpec random_spec(RngStream& rng) {
  int n = 1 + static_cast<int>(rng.uniform() * 3.0);
  if (n > 3) n = 3;
  MapSpec s;
  s.n_types = n;
  const auto un = static_cast<std::size_t>(n);
  s.q_matrix.assign(un, std::vector<double>(un, 0.0));
  for (std::size_t i = 0; i < un; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < un; ++j) {
      if (i == j) continue;
      // Strictly positive rates keep the chain irreducible.
      s.q_matrix[i][j] = 0.2 + 2.0 * rng.uniform();
      row += s.q_matrix[i][j];
    }
    s.q_matrix[i][i] = -row;
  }
  s.levy.resize(un);
  for (auto& l : s.levy) {
    l.drift = -1.0 + 2.0 * rng.uniform();
    l.gauss_var = rng.uniform() < 0.5 ? 0.0 : 0.5 * rng.uniform();
    int n_atoms = 1 + static_cast<int>(rng.uniform() * 3.0);
    for (int a = 0; a < n_atoms; ++a) {
      JumpAtom atom;
      atom.size = (rng.uniform() < 0.7 ? -1.0 : 1.0) * (0.1 + 1.5 * rng.uniform());
      atom.weight = 0.1 + rng.uniform();
      atom.type_mark = static_cast<TypeIndex>(rng.uniform() * n);
      if (atom.type_mark >= n) atom.type_mark = n - 1;
      l.atoms.push_back(atom);
    }
  }
  s.trans.assign(un, std::vector<TransitionJump>(un));
  for (std::size_t i = 0; i < un; ++i) {
    for (std::size_t j = 0; j < un; ++j) {
      if (i == j || rng.uniform() < 0.4) continue;  // some pairs keep U = 0
      TransitionJump t;
      double s1 = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.05 + rng.uniform());
      auto m1 = static_cast<TypeIndex>(rng.uniform() * n);
      if (m1 >= n) m1 = n - 1;
      t.atoms = {{s1, 1.0, m1}};
      s.trans[i][j] = t;
    }
  }
  return s;
}

}  // namespace fixtures
}  // namespace gfmap

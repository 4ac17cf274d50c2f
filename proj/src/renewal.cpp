#include "gfmap/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gfmap {

Matrix weight_matrix(const SmoothingSpec& spec, double q) {
  Matrix m = Matrix::Zero(spec.n_types, spec.n_types);
  for (int i = 0; i < spec.n_types; ++i) {
    for (const OffspringAtom& atom : spec.law[static_cast<std::size_t>(i)]) {
      for (const OffspringChild& child : atom.children) {
        m(i, child.type) += atom.prob * std::pow(child.factor, q);
      }
    }
  }
  return m;
}

double smoothing_eigenvalue(const SmoothingSpec& spec, double q) {
  const Matrix m = weight_matrix(spec, q);
  if (spec.n_types == 1) return m(0, 0);
  const Eigen::VectorXcd eig = m.eigenvalues();
  double best = 0.0;
  for (int k = 0; k < eig.size(); ++k) best = std::max(best, std::abs(eig(k)));
  return best;
}

CharacteristicRoot find_alpha(const SmoothingSpec& spec, double q_lo, double q_hi) {
  const auto f = [&](double q) { return smoothing_eigenvalue(spec, q) - 1.0; };
  const double root = find_root(f, q_lo, q_hi, 1e-10);
  const double step = 1e-5 * std::max(1.0, std::abs(root));
  CharacteristicRoot out;
  out.alpha = root;
  out.derivative =
      (smoothing_eigenvalue(spec, root + step) - smoothing_eigenvalue(spec, root - step)) /
      (2.0 * step);
  return out;
}

SmoothingSpec bridge_from_genealogy(const MapSpec& spec, const WeightPair& pair,
                                    const SimControls& controls, std::size_t reps,
                                    RngStream& rng) {
  SmoothingSpec out;
  out.n_types = spec.n_types;
  out.v = pair.v;
  out.law.resize(static_cast<std::size_t>(spec.n_types));
  SimControls one_gen = controls;
  one_gen.max_generation = 1;
  one_gen.horizon = std::numeric_limits<double>::infinity();
  for (TypeIndex i = 0; i < spec.n_types; ++i) {
    RngStream type_rng = rng.child(static_cast<std::uint64_t>(i));
    auto& atoms = out.law[static_cast<std::size_t>(i)];
    atoms.reserve(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      const CellTree tree =
          simulate_tree(spec, 1.0, i, 0.0, one_gen, type_rng.child(r));
      OffspringAtom atom;
      atom.prob = 1.0 / static_cast<double>(reps);
      for (int c : tree.cells[0].children) {
        const CellRecord& child = tree.cells[static_cast<std::size_t>(c)];
        atom.children.push_back({child.type0, std::pow(child.size0, pair.omega)});
      }
      atoms.push_back(std::move(atom));
    }
  }
  return out;
}

PopulationDynamics population_dynamics(const SmoothingSpec& spec,
                                       std::size_t pool_size, int max_iters,
                                       RngStream& rng) {
  PopulationDynamics out;
  out.pools.assign(static_cast<std::size_t>(spec.n_types),
                   std::vector<double>(pool_size, 1.0));
  std::vector<double> prev_q90(static_cast<std::size_t>(spec.n_types), 1.0);
  std::vector<std::vector<double>> atom_probs(static_cast<std::size_t>(spec.n_types));
  for (int i = 0; i < spec.n_types; ++i)
    for (const OffspringAtom& atom : spec.law[static_cast<std::size_t>(i)])
      atom_probs[static_cast<std::size_t>(i)].push_back(atom.prob);

  for (int iter = 0; iter < max_iters; ++iter) {
    RngStream iter_rng = rng.child(static_cast<std::uint64_t>(iter));
    std::vector<std::vector<double>> next(out.pools.size());
    for (int i = 0; i < spec.n_types; ++i) {
      RngStream pool_rng = iter_rng.child(static_cast<std::uint64_t>(i));
      auto& pool = next[static_cast<std::size_t>(i)];
      pool.resize(pool_size);
      const double vi = spec.v[i];
      for (std::size_t k = 0; k < pool_size; ++k) {
        const std::size_t a = pool_rng.categorical(atom_probs[static_cast<std::size_t>(i)]);
        const OffspringAtom& atom = spec.law[static_cast<std::size_t>(i)][a];
        KahanSum acc;
        for (const OffspringChild& child : atom.children) {
          const std::size_t pick = static_cast<std::size_t>(
              pool_rng.uniform() * static_cast<double>(pool_size));
          const double r = out.pools[static_cast<std::size_t>(child.type)]
                                    [std::min(pick, pool_size - 1)];
          acc.add((spec.v[child.type] / vi) * child.factor * r);
        }
        pool[k] = acc.value();
      }
      // Renormalize to mean 1: the fixed point is defined up to scale and the
      // iteration otherwise drifts on the critical martingale direction.
      const MeanSe ms = mean_se(pool);
      if (ms.mean > 0.0)
        for (double& r : pool) r /= ms.mean;
    }
    out.pools = std::move(next);
    out.iterations = iter + 1;

    bool stable = iter >= 4;
    for (int i = 0; i < spec.n_types && stable; ++i) {
      auto& pool = out.pools[static_cast<std::size_t>(i)];
      const double q90 = quantile(pool, 0.9);
      const double prev = prev_q90[static_cast<std::size_t>(i)];
      if (std::abs(q90 - prev) > 0.01 * std::max(1.0, std::abs(prev))) stable = false;
      prev_q90[static_cast<std::size_t>(i)] = q90;
    }
    if (iter < 4) {
      for (int i = 0; i < spec.n_types; ++i)
        prev_q90[static_cast<std::size_t>(i)] =
            quantile(out.pools[static_cast<std::size_t>(i)], 0.9);
    }
    if (stable) {
      out.stabilized = true;
      break;
    }
  }
  out.pool_means.clear();
  for (const auto& pool : out.pools) out.pool_means.push_back(mean_se(pool).mean);
  return out;
}

double affine_perpetuity_sample(const AffineSpec& spec, TypeIndex start, double eps,
                                RngStream& rng, int max_terms) {
  // Contraction rate and mean additive bound for the remainder estimate.
  double rate = 0.0;
  double b_max = 0.0;
  for (int i = 0; i < spec.n_types; ++i) {
    double r = 0.0;
    for (const AffineAtom& atom : spec.law[static_cast<std::size_t>(i)]) {
      r += atom.prob * (spec.v[atom.next] / spec.v[i]) * atom.a;
      b_max = std::max(b_max, atom.b);
    }
    rate = std::max(rate, r);
  }
  if (rate >= 1.0)
    throw std::invalid_argument("affine perpetuity: no contraction in the mean");
  const double tail_unit = b_max / (1.0 - rate);

  std::vector<std::vector<double>> atom_probs(static_cast<std::size_t>(spec.n_types));
  for (int i = 0; i < spec.n_types; ++i)
    for (const AffineAtom& atom : spec.law[static_cast<std::size_t>(i)])
      atom_probs[static_cast<std::size_t>(i)].push_back(atom.prob);

  KahanSum acc;
  double prod = 1.0;
  TypeIndex state = start;
  for (int k = 0; k < max_terms; ++k) {
    const std::size_t a = rng.categorical(atom_probs[static_cast<std::size_t>(state)]);
    const AffineAtom& atom = spec.law[static_cast<std::size_t>(state)][a];
    acc.add(prod * atom.b);
    prod *= (spec.v[atom.next] / spec.v[state]) * atom.a;
    state = atom.next;
    if (prod * tail_unit <= eps * std::max(1.0, acc.value())) break;
  }
  return acc.value();
}

TailVerdict tail_verify(const std::vector<double>& samples, double expected,
                        RngStream& rng, const std::vector<double>& k_fracs) {
  TailVerdict out;
  out.expected = expected;
  out.hill = hill_estimator(samples, k_fracs, rng);
  out.rank_slope = rank_regression_slope(samples, 0.01);
  for (const HillEstimate& h : out.hill) {
    if (expected >= h.ci_lo && expected <= h.ci_hi) out.in_ci = true;
    if (std::abs(h.alpha - expected) <= 0.15 * expected) out.within_15pct = true;
  }
  return out;
}

}  // namespace gfmap

#include "gfmap/spine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "gfmap/parallel.hpp"

namespace gfmap {

namespace {

double cell_weight(const WeightPair& pair, double size, TypeIndex type) {
  return pair.v[type] * std::pow(size, pair.omega);
}

}  // namespace

TaggedSpine sample_tagged_leaf(const CellTree& tree, const WeightPair& pair, int n,
                               RngStream& rng) {
  TaggedSpine out;
  std::vector<int> leaves;
  std::vector<double> weights;
  for (int c = 0; c < static_cast<int>(tree.cells.size()); ++c) {
    const CellRecord& cell = tree.cells[static_cast<std::size_t>(c)];
    if (cell.generation == n + 1) {
      leaves.push_back(c);
      weights.push_back(cell_weight(pair, cell.size0, cell.type0));
    }
  }
  const double root_weight = cell_weight(pair, tree.x0, tree.root_type);
  KahanSum total;
  for (double w : weights) total.add(w);
  out.weight = total.value() / root_weight;  // M(n) / (v_i x^omega)
  if (leaves.empty()) {
    out.flagged = true;
    return out;
  }
  const int leaf = leaves[rng.categorical(weights)];
  for (int c = leaf; c >= 0; c = tree.cells[static_cast<std::size_t>(c)].parent) {
    out.leaf_prefix.push_back(c);
    out.generation_times.push_back(tree.cells[static_cast<std::size_t>(c)].birth);
  }
  std::reverse(out.leaf_prefix.begin(), out.leaf_prefix.end());
  std::reverse(out.generation_times.begin(), out.generation_times.end());
  return out;
}

SpineSample tagged_particle_at(const CellTree& tree, const WeightPair& pair, double t,
                               RngStream& rng) {
  SpineSample out;
  const std::vector<Particle> snap = snapshot(tree, t);
  if (snap.empty()) return out;  // weight 0: the population died before t
  std::vector<double> weights;
  weights.reserve(snap.size());
  KahanSum total;
  for (const Particle& p : snap) {
    const double w = cell_weight(pair, p.size, p.type);
    weights.push_back(w);
    total.add(w);
  }
  const double root_weight = cell_weight(pair, tree.x0, tree.root_type);
  out.weight = total.value() / root_weight;  // M_t / (v_i x^omega)
  const Particle& picked = snap[rng.categorical(weights)];
  out.value = picked.size;
  out.type = picked.type;
  const CellRecord& cell = tree.cells[static_cast<std::size_t>(picked.cell)];
  // A particle reported alive at a value frozen by the min-size or budget
  // cutoff is not an exact time-t sample; callers track this weight share.
  out.flagged = (cell.end == CellEnd::MinSize || cell.end == CellEnd::Budget) &&
                cell.end_time <= t;
  if (tree.budget_exhausted) out.flagged = true;
  return out;
}

std::optional<std::pair<double, TypeIndex>> direct_spine_value(
    const SpineExponent& spine, double x, TypeIndex i, double alpha, double t,
    RngStream& rng, double grid_step) {
  return simulate_ssmp_value(spine.spine_spec(), x, i, alpha, t, rng, grid_step);
}

SpineEquivalence spine_equivalence_test(const MapSpec& spec, const AdmissiblePair& pair,
                                        double x, TypeIndex i, double alpha, double t,
                                        std::size_t reps, const SimControls& controls,
                                        RngStream& rng, int workers) {
  SpineEquivalence out;
  const WeightPair wp{pair.omega, pair.v};
  SpineExponent spine(spec, pair);

  RngStream arm_a = rng.child(1);
  RngStream arm_b = rng.child(2);

  std::vector<SpineSample> a(reps);
  parallel_for(reps, workers, [&](std::size_t r) {
    RngStream tree_rng = arm_a.child(static_cast<std::uint64_t>(r));
    const CellTree tree = simulate_tree(spec, x, i, alpha, controls, tree_rng.child(0));
    RngStream pick_rng = tree_rng.child(1);
    a[r] = tagged_particle_at(tree, wp, t, pick_rng);
  });

  struct BSample {
    double value = 0.0;
    TypeIndex type = 0;
    bool alive = false;
  };
  std::vector<BSample> b(reps);
  parallel_for(reps, workers, [&](std::size_t r) {
    RngStream path_rng = arm_b.child(static_cast<std::uint64_t>(r));
    const auto got = direct_spine_value(spine, x, i, alpha, t, path_rng);
    if (got) b[r] = {got->first, got->second, true};
  });

  const int n_types = spec.n_types;
  KahanSum total_w, flagged_w;
  for (const SpineSample& s : a) {
    total_w.add(s.weight);
    if (s.flagged) flagged_w.add(s.weight);
  }
  out.flagged_weight_share =
      total_w.value() > 0.0 ? flagged_w.value() / total_w.value() : 0.0;

  for (TypeIndex j = 0; j < n_types; ++j) {
    std::vector<double> va, wa, vb;
    for (const SpineSample& s : a) {
      if (s.weight > 0.0 && s.type == j) {
        va.push_back(s.value);
        wa.push_back(s.weight);
      }
    }
    for (const BSample& s : b) {
      if (s.alive && s.type == j) vb.push_back(s.value);
    }
    out.ks_per_type.push_back(ks_two_sample(va, vb, wa, {}));
  }
  out.arm_a_alive = 0;
  for (const SpineSample& s : a)
    if (s.weight > 0.0) ++out.arm_a_alive;
  out.arm_b_alive = 0;
  for (const BSample& s : b)
    if (s.alive) ++out.arm_b_alive;

  // Many-to-one cross checks: E[M_t/(v_i x^omega) f(picked)] vs Ehat[f],
  // for f = 1, f = 1_{type=j}, f = x^0.1. The SE pools both arms.
  auto check = [&](const std::function<double(double, TypeIndex)>& f) {
    std::vector<double> lhs_terms, rhs_terms;
    lhs_terms.reserve(reps);
    rhs_terms.reserve(reps);
    for (const SpineSample& s : a)
      lhs_terms.push_back(s.weight > 0.0 ? s.weight * f(s.value, s.type) : 0.0);
    for (const BSample& s : b)
      rhs_terms.push_back(s.alive ? f(s.value, s.type) : 0.0);
    const MeanSe lhs = mean_se(lhs_terms);
    const MeanSe rhs = mean_se(rhs_terms);
    const double se = std::sqrt(lhs.se * lhs.se + rhs.se * rhs.se);
    out.moment_checks.push_back({lhs.mean, rhs.mean, se});
  };
  check([](double, TypeIndex) { return 1.0; });
  for (TypeIndex j = 0; j < n_types; ++j)
    check([j](double, TypeIndex jt) { return jt == j ? 1.0 : 0.0; });
  check([](double v, TypeIndex) { return std::pow(v, 0.1); });
  return out;
}

namespace {
constexpr double kParentFloor = 0.05;   // min off-spine parent birth size
constexpr double kRelativeCut = 0.02;   // common relative child-size cutoff
}  // namespace

RebuildCheck rebuild_check(const MapSpec& spec, const AdmissiblePair& pair, double x,
                           TypeIndex i, std::size_t reps, const SimControls& controls,
                           RngStream& rng) {
  RebuildCheck out;
  const WeightPair wp{pair.omega, pair.v};
  const int n_types = spec.n_types;

  // Genealogy-shaped trees (two generations, alpha = 0 so only the jump
  // skeleton matters). Off-spine gen-1 cells are the subtree roots; their
  // gen-2 children give the relative offspring sizes.
  SimControls two_gen = controls;
  two_gen.max_generation = 2;
  two_gen.horizon = std::numeric_limits<double>::infinity();

  std::vector<std::vector<double>> offspine(static_cast<std::size_t>(n_types));
  std::vector<std::vector<double>> offspine_w(static_cast<std::size_t>(n_types));
  RngStream arm_a = rng.child(1);
  for (std::size_t r = 0; r < reps; ++r) {
    RngStream tree_rng = arm_a.child(static_cast<std::uint64_t>(r));
    const CellTree tree = simulate_tree(spec, x, i, 0.0, two_gen, tree_rng.child(0));
    RngStream pick_rng = tree_rng.child(1);
    const TaggedSpine tag = sample_tagged_leaf(tree, wp, 0, pick_rng);
    if (tag.flagged || tag.weight <= 0.0) continue;
    const int spine1 = tag.leaf_prefix.size() > 1 ? tag.leaf_prefix[1] : -1;
    for (int c : tree.cells[0].children) {
      if (c == spine1) continue;
      const CellRecord& sub = tree.cells[static_cast<std::size_t>(c)];
      // Size truncation in the simulation cuts children below
      // controls.min_size in absolute terms, i.e. at a parent-dependent
      // relative threshold. Keeping only parents well above min_size and
      // applying a common relative cutoff makes the two arms comparable.
      if (sub.size0 < kParentFloor) continue;
      for (int cc : sub.children) {
        const CellRecord& child = tree.cells[static_cast<std::size_t>(cc)];
        const double rel = child.size0 / sub.size0;
        if (rel < kRelativeCut) continue;
        offspine[sub.type0].push_back(rel);
        offspine_w[sub.type0].push_back(tag.weight);
        ++out.pooled;
      }
    }
  }

  // Fresh arm: first-generation relative offspring sizes of a unit cell of
  // each type, simulated directly under P.
  SimControls one_gen = controls;
  one_gen.max_generation = 1;
  one_gen.horizon = std::numeric_limits<double>::infinity();
  RngStream arm_b = rng.child(2);
  for (TypeIndex j = 0; j < n_types; ++j) {
    std::vector<double> fresh;
    RngStream type_rng = arm_b.child(static_cast<std::uint64_t>(j));
    for (std::size_t r = 0; r < reps; ++r) {
      const CellTree tree =
          simulate_tree(spec, 1.0, j, 0.0, one_gen, type_rng.child(r));
      for (int c : tree.cells[0].children) {
        const double rel = tree.cells[static_cast<std::size_t>(c)].size0;
        if (rel >= kRelativeCut) fresh.push_back(rel);
      }
    }
    out.ks_per_type.push_back(
        ks_two_sample(offspine[static_cast<std::size_t>(j)], fresh,
                      offspine_w[static_cast<std::size_t>(j)], {}));
  }
  return out;
}

}  // namespace gfmap

#include <cmath>

#include "doctest.h"
#include "gfmap/cumulants.hpp"
#include "gfmap/fixtures.hpp"
#include "gfmap/spine.hpp"
#include "gfmap/stats.hpp"

using namespace gfmap;

TEST_CASE("tagged leaf on the conservative binary tree has unit weight") {
  const MapSpec s = fixtures::binary_conservative();
  WeightPair p;
  p.omega = 1.0;
  p.v = Vector::Ones(1);
  SimControls c;
  c.min_size = 1e-9;
  c.max_generation = 5;
  c.horizon = std::numeric_limits<double>::infinity();
  RngStream rng(41);
  for (int rep = 0; rep < 20; ++rep) {
    RngStream tree_rng = rng.child(rep);
    const CellTree tree = simulate_tree(s, 1.0, 0, 0.0, c, tree_rng.child(0));
    RngStream pick = tree_rng.child(1);
    const TaggedSpine tag = sample_tagged_leaf(tree, p, 3, pick);
    REQUIRE(!tag.flagged);
    // M(n) = v x^omega up to the mass truncated below min_size, so the
    // importance weight is 1 up to O(min_size * #cells).
    CHECK(tag.weight == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(tag.leaf_prefix.size() == 5);  // root .. generation-4 leaf
    CHECK(tag.leaf_prefix.front() == 0);
  }
}

TEST_CASE("tagged particle weight averages to one") {
  const MapSpec s = fixtures::m2();
  const auto pairs = find_admissible(s);
  const WeightPair lower{pairs[0].omega, pairs[0].v};
  SimControls c;
  c.min_size = 1e-3;
  c.max_generation = 30;
  c.horizon = 1.0;
  RngStream rng(42);
  std::vector<double> w(3000);
  for (std::size_t rep = 0; rep < w.size(); ++rep) {
    RngStream tree_rng = rng.child(rep);
    const CellTree tree = simulate_tree(s, 1.0, 0, 0.5, c, tree_rng.child(0));
    RngStream pick = tree_rng.child(1);
    const SpineSample sample = tagged_particle_at(tree, lower, 1.0, pick);
    w[rep] = sample.weight;  // zero when the tree is extinct at t
  }
  const MeanSe ms = mean_se(w);
  // E[M_t] = v_i x^omega: the weight has unit mean including extinctions.
  CHECK(std::abs(ms.mean - 1.0) < 4.0 * ms.se);
}

TEST_CASE("direct spine value follows the materialized spine MAP") {
  const MapSpec s = fixtures::m2();
  const auto pairs = find_admissible(s);
  const SpineExponent spine(s, pairs[0]);
  RngStream rng(43);
  int alive = 0;
  for (int rep = 0; rep < 200; ++rep) {
    RngStream rr = rng.child(rep);
    const auto got = direct_spine_value(spine, 1.0, 0, 0.5, 0.5, rr);
    if (got) {
      ++alive;
      CHECK(got->first > 0.0);
      CHECK(got->second >= 0);
      CHECK(got->second < s.n_types);
    }
  }
  CHECK(alive > 100);  // the lower spine survives to t = 0.5 most of the time
}

TEST_CASE("spine equivalence: quick two-sample agreement") {
  const MapSpec s = fixtures::m2();
  const auto pairs = find_admissible(s);
  SimControls c;
  c.min_size = 1e-3;
  c.max_generation = 30;
  c.horizon = 1.0;
  RngStream rng(44);
  const SpineEquivalence eq =
      spine_equivalence_test(s, pairs[0], 1.0, 0, 0.5, 1.0, 1500, c, rng);
  REQUIRE(eq.ks_per_type.size() == 2);
  for (const auto& ks : eq.ks_per_type) CHECK(ks.p_value > 1e-3);
  for (const auto& m : eq.moment_checks)
    CHECK(std::abs(m[0] - m[1]) < 5.0 * m[2]);
  CHECK(eq.flagged_weight_share < 0.05);
}

TEST_CASE("subtrees hanging off the spine look like fresh trees") {
  const MapSpec s = fixtures::m2();
  const auto pairs = find_admissible(s);
  SimControls c;
  c.min_size = 1e-3;
  c.max_generation = 4;
  RngStream rng(45);
  const RebuildCheck rc = rebuild_check(s, pairs[0], 1.0, 0, 800, c, rng);
  REQUIRE(rc.ks_per_type.size() == 2);
  CHECK(rc.pooled > 100);
  for (const auto& ks : rc.ks_per_type) CHECK(ks.p_value > 1e-3);
}

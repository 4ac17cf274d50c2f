#include <cmath>

#include "doctest.h"
#include "gfmap/cumulants.hpp"
#include "gfmap/fixtures.hpp"
#include "gfmap/spectral.hpp"

using namespace gfmap;

TEST_CASE("binary conservative fixture: kappa and the exact root") {
  const MapSpec s = fixtures::binary_conservative();
  // kappa(q) = -1 + 2 * 2^{-q}: atom at -log 2 rate 1, both halves kept.
  for (double q : {0.5, 1.0, 2.0, 3.0})
    CHECK(kappa(s, 0, q) ==
          doctest::Approx(-1.0 + std::pow(2.0, 1.0 - q)).epsilon(1e-12));
  const auto pairs = find_admissible(s);
  REQUIRE(pairs.size() == 1);  // double root reported once
  CHECK(pairs[0].omega == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(pairs[0].v.size() == 1);
  CHECK(pairs[0].v(0) == doctest::Approx(1.0));
  CHECK(pairs[0].residual < 1e-9);
}

TEST_CASE("drifted split: roots match the scalar closed form") {
  const double a = 0.1;
  const MapSpec s = fixtures::drifted_split(a);
  const auto closed = [a](double q) {
    return a * q + std::pow(2.0, 1.0 - q) - 1.0;
  };
  const auto pairs = find_admissible(s);
  REQUIRE(pairs.size() == 2);
  for (const auto& p : pairs) {
    CHECK(std::abs(closed(p.omega)) < 1e-9);
    CHECK(p.residual < 1e-9);
  }
  CHECK(pairs[0].omega < pairs[1].omega);
  // Upper root of 0.1 q + 2^{1-q} - 1: Newton from q = 10 gives 9.98022.
  CHECK(pairs[1].omega == doctest::Approx(9.98022).epsilon(1e-4));
}

TEST_CASE("m2 fixture admissible baselines") {
  const MapSpec s = fixtures::m2();
  const auto pairs = find_admissible(s);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].omega == doctest::Approx(1.1890554124677197).epsilon(1e-9));
  CHECK(pairs[0].v(0) == doctest::Approx(1.0));
  CHECK(pairs[0].v(1) == doctest::Approx(1.0100329124722383).epsilon(1e-9));
  CHECK(pairs[1].omega == doctest::Approx(7.1141390689671065).epsilon(1e-9));
  CHECK(pairs[1].v(1) == doctest::Approx(0.938144893686441).epsilon(1e-9));
  for (const auto& p : pairs) {
    CHECK(p.residual < 1e-9);
    for (int i = 0; i < s.n_types; ++i)
      CHECK(std::abs(multitype_cumulant(s, i, p.omega, p.v)) < 1e-9);
  }
  // cumulant matrix consistency: (A(omega) v)_i = K_i(omega) v_i = 0
  const Matrix a = cumulant_matrix(s, pairs[0].omega);
  CHECK((a * pairs[0].v).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("spine exponent: conservative root and the two-exponent identity") {
  const MapSpec s = fixtures::m2();
  const auto pairs = find_admissible(s);
  const SpineExponent lower(s, pairs[0]);
  const SpineExponent upper(s, pairs[1]);
  const double gap = pairs[1].omega - pairs[0].omega;

  CHECK(std::abs(lower.chi_hat(0.0)) < 1e-10);
  CHECK(std::abs(upper.chi_hat(0.0)) < 1e-10);
  // chi_hat_-(omega_+ - omega_-) = 0 and the mirrored identity.
  CHECK(std::abs(lower.chi_hat(gap)) < 1e-8);
  CHECK(std::abs(upper.chi_hat(-gap)) < 1e-8);
  // lower spine drifts down, upper spine drifts up
  CHECK(lower.chi_hat_prime(0.0) == doctest::Approx(-0.617253).epsilon(1e-3));
  CHECK(upper.chi_hat_prime(0.0) > 0.0);
}

TEST_CASE("materialized spine MAP has matrix exponent Fhat") {
  const MapSpec s = fixtures::m2();
  const auto pairs = find_admissible(s);
  for (const auto& pair : pairs) {
    const SpineExponent spine(s, pair);
    const MapSpec& mat = spine.spine_spec();
    for (double q : {-0.5, 0.0, 0.3, 1.0, 2.5}) {
      const Matrix direct = spine.fhat(q);
      const Matrix from_spec = matrix_exponent(mat, q);
      CHECK((direct - from_spec).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("same-type split chain is strictly subcritical") {
  const MapSpec s = fixtures::m2();
  const auto pairs = find_admissible(s);
  const SpineExponent lower(s, pairs[0]);
  CHECK(lower.mu_ii(0) == doctest::Approx(0.265199).epsilon(1e-3));
  CHECK(lower.mu_ii(1) == doctest::Approx(0.181331).epsilon(1e-3));
  for (int i = 0; i < s.n_types; ++i) {
    CHECK(lower.mu_ii(i) > 0.0);
    CHECK(lower.mu_ii(i) < 1.0);
  }
}

TEST_CASE("pi measure splits the jump atoms by child mark") {
  const MapSpec s = fixtures::m2();
  const PiMeasure pi(s);
  // frag_integral at q = 0 counts the total child-spawning rate.
  for (int i = 0; i < s.n_types; ++i) {
    double rate = 0.0;
    for (const auto& atom : s.levy[static_cast<std::size_t>(i)].atoms)
      if (atom.size < 0.0) rate += atom.weight;
    for (int j = 0; j < s.n_types; ++j)
      if (i != j)
        for (const auto& atom : s.trans[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].atoms)
          if (atom.size < 0.0) rate += atom.weight * s.q(i, j);
    double got = 0.0;
    for (int k = 0; k < s.n_types; ++k) got += pi.frag_integral(i, k, 0.0);
    CHECK(got == doctest::Approx(rate).epsilon(1e-12));
  }
}

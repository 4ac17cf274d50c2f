#include <cmath>

#include "doctest.h"
#include "gfmap/fixtures.hpp"
#include "gfmap/lamperti.hpp"
#include "gfmap/stats.hpp"

using namespace gfmap;

namespace {

// Piecewise-linear two-segment path used for exact clock checks.
MapPath synthetic_path() {
  MapPath p;
  p.segments.push_back({0.0, 0.5, 0.0, -0.3, -0.3, 0});
  p.segments.push_back({0.5, 1.25, -0.3, 0.6, 0.9, 0});
  return p;
}

double brute_clock(const MapPath& p, double alpha, double s, double du = 1e-6) {
  double acc = 0.0;
  for (double u = 0.5 * du; u < s; u += du) acc += std::exp(alpha * p.value(u)) * du;
  return acc;
}

}  // namespace

TEST_CASE("clock matches a brute-force Riemann integral") {
  const MapPath p = synthetic_path();
  for (double alpha : {0.5, 1.0, -0.7}) {
    const SsmpPath sp(p, 1.0, alpha);
    for (double s : {0.2, 0.5, 0.8, 1.25}) {
      // Segment boundaries included: a historic off-by-one shifted the
      // cumulative clock by exactly one segment at boundaries.
      CHECK(sp.clock_at(s) ==
            doctest::Approx(brute_clock(p, alpha, s)).epsilon(1e-4));
    }
    CHECK(sp.covered_time() == doctest::Approx(sp.clock_at(1.25)));
  }
}

TEST_CASE("clock inversion round trip") {
  const MapPath p = synthetic_path();
  const SsmpPath sp(p, 1.0, 0.8);
  for (double s : {0.1, 0.45, 0.5, 0.9, 1.2}) {
    CHECK(sp.invert_clock(sp.clock_at(s)) == doctest::Approx(s).epsilon(1e-10));
  }
}

TEST_CASE("query applies the x0 scaling of the Lamperti transform") {
  const MapPath p = synthetic_path();
  const double alpha = 0.6, x0 = 2.5;
  const SsmpPath unit(p, 1.0, alpha);
  const SsmpPath scaled(p, x0, alpha);
  // Same path: X_{x0}(t) = x0 * X_1(t * x0^{-alpha}).
  const double t = 0.4 * scaled.covered_time();
  const auto a = scaled.query(t);
  const auto b = unit.query(t * std::pow(x0, -alpha));
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(a->first == doctest::Approx(x0 * b->first).epsilon(1e-12));
  CHECK(a->second == b->second);
}

TEST_CASE("negative jumps appear as child-spawning deltas") {
  MapPath p;
  p.segments.push_back({0.0, 1.0, 0.0, 0.0, 0.0, 0});
  p.segments.push_back({1.0, 2.0, -0.5, -0.5, 0.0, 1});
  p.jumps.push_back({1.0, -0.5, 0.0, 1, 1, false});
  const SsmpPath sp(p, 3.0, 0.0);
  const auto js = sp.jumps();
  REQUIRE(js.size() == 1);
  CHECK(js[0].pre_value == doctest::Approx(3.0));
  CHECK(js[0].delta == doctest::Approx(3.0 * std::expm1(-0.5)));
  CHECK(js[0].type_mark == 1);
}

TEST_CASE("dufresne fixture: quick mean of the exponential functional") {
  // mu = 2 keeps the estimator variance finite (inverse-gamma shape 2).
  const MapSpec spec = fixtures::brownian_drift(2.0);
  RngStream rng(21);
  std::vector<double> vals(20000);
  for (std::size_t r = 0; r < vals.size(); ++r) {
    RngStream rr = rng.child(r);
    vals[r] = sample_exp_functional(spec, 0, 2.0, 1e-6, rr, 0.01).value;
  }
  const MeanSe ms = mean_se(vals);
  CHECK(std::abs(ms.mean - 0.5) < 4.0 * ms.se + 0.01);
}

TEST_CASE("exponential functional guards") {
  // Upward drift: the functional diverges.
  const MapSpec up = fixtures::brownian_drift(-0.5);
  RngStream rng(22);
  CHECK_THROWS(sample_exp_functional(up, 0, 2.0, 1e-6, rng));
  // Moment of order beyond the Cramér point is not guaranteed finite.
  const MapSpec ok = fixtures::brownian_drift(1.5);
  CHECK_THROWS_WITH_AS(exp_functional_moment(ok, 0, 2.0, 2.0, 10, rng),
                       doctest::Contains("moment not guaranteed finite"),
                       std::runtime_error);
}

TEST_CASE("self-similar scaling identity in law") {
  const MapSpec spec = fixtures::m2();
  RngStream rng(23);
  const ScalingCheckResult r = scaling_check(spec, 1.0, 0, 1.7, 0.5, 0.3, 4000, rng);
  CHECK(r.ks.p_value > 1e-3);
}

TEST_CASE("entrance law weights sum to the total mass") {
  const MapSpec spec = dual_spec(fixtures::m2());
  REQUIRE(chi_prime(spec, 0.0) > 0.0);
  RngStream rng(24);
  const auto samples = entrance_law_sample(spec, 1.0, 1.0, 4000, rng);
  REQUIRE(samples.size() == 4000);
  KahanSum total;
  for (const auto& s : samples) total.add(s.weight);
  std::vector<double> w(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k)
    w[k] = samples[k].weight * static_cast<double>(samples.size());
  const MeanSe ms = mean_se(w);
  CHECK(std::abs(total.value() - 1.0) < 4.0 * ms.se);
}

TEST_CASE("crossing sampler: weights bounded by the Wald factor") {
  const MapSpec spec = fixtures::m2();
  const double cramer = cramer_number(spec, 0.1, 32.0);
  const Vector w = spectral_data(spec, cramer).w;
  const MapSpec tilted = tilt_spec(spec, cramer);
  const double level = 1.5;
  const double bound = std::exp(-cramer * level) *
                       (w.maxCoeff() / w.minCoeff());
  RngStream rng(25);
  for (int r = 0; r < 200; ++r) {
    RngStream rr = rng.child(r);
    const TailCrossSample s = sample_weighted_exp_functional_crossing(
        spec, tilted, 0, cramer, w, level, 1e-6, rr);
    CHECK(s.weight > 0.0);
    CHECK(s.weight <= bound * (1.0 + 1e-12));
    CHECK(s.value > 0.0);
  }
}

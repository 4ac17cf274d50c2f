// Shipped test fixtures.
#pragma once

#include "gfmap/map_spec.hpp"
#include "gfmap/rng.hpp"

namespace gfmap {
namespace fixtures {

// Two-type fixture used throughout the verification suites: mixed Brownian/
// compound-Poisson ordinators with cross-type child marks and an asymmetric
// transition jump. All downstream constants (admissible exponents, Cramér
// number, tail exponents) are computed by the library itself and frozen in
// the test baselines.
MapSpec m2();

// Single type, one atom at -log 2 with rate 1, no drift/variance: sizes halve
// at every split and mass is conserved exactly (admissible omega = 1).
MapSpec binary_conservative();

// Binary split plus drift a (default 0.1): the scalar cumulant
// kappa(q) = a q + 2^{1-q} - 1 dips through zero twice (roots near 1.18 and
// 9.98 for a = 0.1, minimum near q ~ 3.79).
MapSpec drifted_split(double drift = 0.1);

// Brownian motion with drift -mu (single type, no jumps): I(2 xi) follows the
// inverse-gamma law 1/(2 Gamma(mu, 1)) with mean 1/(2(mu-1)).
MapSpec brownian_drift(double mu);

// Random valid spec (1-3 types) for property tests.
MapSpec random_spec(RngStream& rng);

}  // namespace fixtures
}  // namespace gfmap

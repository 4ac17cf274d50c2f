"""Smoke tests for the Python bindings: spectral baselines on the shipped
two-type fixture, admissible exponents, the spine construction, and sampling
entry points."""

import json
import math
import os
import sys

sys.path.insert(0, os.environ.get("GFMAP_MODULE_DIR", "build"))

import pytest

import _gfmap as g


@pytest.fixture(scope="module")
def m2():
    return g.fixture("m2")


def test_json_round_trip(m2):
    text = m2.to_json()
    again = g.MapSpec.from_json(text)
    assert again.to_json() == text
    assert m2.n_types == 2
    assert m2.conservative  # no kill rates in the shipped fixture


def test_spectral_baselines(m2):
    assert g.chi(m2, 0.0) == pytest.approx(0.0, abs=1e-9)
    assert g.chi(m2, 1.0) == pytest.approx(-0.4978286357479611, abs=1e-6)
    assert g.chi_prime(m2, 0.0) == pytest.approx(-0.767117, abs=1e-4)
    pi = g.stationary_distribution(m2)
    assert sum(pi) == pytest.approx(1.0, abs=1e-12)
    f = g.matrix_exponent(m2, 0.5)
    assert len(f) == 2 and len(f[0]) == 2


def test_duality_and_tilt(m2):
    dual = g.dual_spec(m2)
    for z in (-0.5, 0.3, 0.9):
        assert g.chi(dual, z) == pytest.approx(g.chi(m2, -z), abs=1e-9)
    gamma = 1.0
    tilted = g.tilt_spec(m2, gamma)
    for z in (-0.3, 0.4):
        assert g.chi(tilted, z) == pytest.approx(
            g.chi(m2, gamma + z) - g.chi(m2, gamma), abs=1e-8
        )


def test_admissible_and_spine(m2):
    pairs = g.find_admissible(m2)
    assert len(pairs) == 2
    assert pairs[0].omega == pytest.approx(1.1890554124677197, abs=1e-9)
    assert pairs[1].omega == pytest.approx(7.1141390689671065, abs=1e-9)
    assert pairs[0].v[1] == pytest.approx(1.0100329124722383, abs=1e-9)
    for p in pairs:
        for i in range(2):
            assert g.multitype_cumulant(m2, i, p.omega, p.v) == pytest.approx(
                0.0, abs=1e-8
            )
    spine = g.SpineExponent(m2, pairs[0])
    assert spine.chi_hat(0.0) == pytest.approx(0.0, abs=1e-8)
    gap = pairs[1].omega - pairs[0].omega
    assert spine.chi_hat(gap) == pytest.approx(0.0, abs=1e-7)
    assert spine.chi_hat_prime(0.0) == pytest.approx(-0.617253, abs=1e-4)
    assert 0.0 < spine.mu_ii(0) < 1.0
    assert spine.spine_spec().conservative


def test_cramer_number(m2):
    cramer = g.cramer_number(m2, 0.1, 32.0)
    assert cramer == pytest.approx(7.187986, abs=1e-5)
    assert g.chi(m2, cramer) == pytest.approx(0.0, abs=1e-9)


def test_sampling_entry_points(m2):
    out = g.sample_path(m2, 0, 1.0, 42)
    assert out["killed"] in (False, True)
    if not out["killed"]:
        assert math.isfinite(out["end_value"])
        assert out["end_type"] in (0, 1)
    # Dufresne fixture: mean of I(2 xi) is 1/(2(mu-1)) = 0.5 at mu = 2.
    bd = g.fixture("brownian_drift_2")
    n = 400
    mean = sum(g.exp_functional_sample(bd, 0, 2.0, seed) for seed in range(n)) / n
    assert mean == pytest.approx(0.5, rel=0.5)


def test_spec_files_match_fixtures():
    here = os.path.dirname(os.path.abspath(__file__))
    for name in ("m2", "binary_conservative", "drifted_split", "brownian_drift_2"):
        path = os.path.join(here, "..", "specs", name + ".json")
        disk = json.load(open(path))
        built = json.loads(g.fixture(name).to_json())
        assert disk == built

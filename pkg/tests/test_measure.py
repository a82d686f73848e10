import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skewprod.dynamics import SkewSystem, fiber_fixed_points, twin_pair
from skewprod.errors import ValidationError
from skewprod.fiber import mobius_model, pld_model
from skewprod.measure import (CSV_COLUMNS, EmpiricalMeasure, TestFamily, boundary_approx, dirac,
                              exponent_boundary_check, mirror_exponent_relation, periodic_measure,
                              phi_sequence, prefix_counters, traces_csv, weakstar_distance)
from skewprod.symbolic import encode_ex_orbit, enumerate_admissible, ex_point_from_word

# closed forms in the logit lift, evaluated with 40-digit arithmetic
DELTA_18 = 1.960825550107716e-05
DISTORTION_18 = 0.0028718563411139267


def _measure(draw_x, k=4):
    rng = np.random.default_rng(k)
    return EmpiricalMeasure.uniform(rng.integers(0, 2, (len(draw_x), 3)), draw_x)


atoms = st.lists(st.floats(0, 1), min_size=1, max_size=6)


@settings(max_examples=60, deadline=None)
@given(a=atoms, b=atoms, c=atoms)
def test_metric_axioms(a, b, c):
    mu, nu, rho = _measure(a, 1), _measure(b, 2), _measure(c, 3)
    assert weakstar_distance(mu, mu) == 0.0
    assert weakstar_distance(mu, nu) == pytest.approx(weakstar_distance(nu, mu), abs=1e-15)
    assert weakstar_distance(mu, rho) <= weakstar_distance(mu, nu) + weakstar_distance(nu, rho) + 1e-15
    assert weakstar_distance(mu, nu) <= 1.0 + 1e-12


def test_family_weights():
    members, w = TestFamily().members()
    assert len(members) == 15 * 4 and w.sum() == pytest.approx(1.0)


def test_periodic_measure_shift_invariant():
    sysm = SkewSystem(pld_model())
    o = twin_pair(sysm, (0, 0, 1, 0, 1))[0]
    mu = periodic_measure(o, sysm)
    assert mu.xs == pytest.approx(mu.shifted(1).shifted(len(o.word) - 1).xs)
    assert weakstar_distance(mu, mu.shifted(0)) <= 1e-12


def test_counters():
    p, q, r, s = prefix_counters((0, 1, 0, 1, 0, 0, 1))
    assert (p, q, r, s) == (3, 1, 2, 1)
    m = mobius_model(2.0)
    # (0101) from 1: log 1/2, log 2... phi stays in {-log 2, 0}
    phis = phi_sequence(m, (0, 1, 0, 1) * 3)
    assert np.max(np.abs(phis)) == pytest.approx(math.log(2))
    assert phis[-1] == pytest.approx(0.0, abs=1e-15)


@pytest.fixture(scope="module")
def trace18():
    return boundary_approx(SkewSystem(mobius_model(2.0)), "0101", 0.1, 18)


def test_boundary_approx_oracle(trace18):
    t = trace18
    assert t.distortion == pytest.approx(DISTORTION_18, rel=1e-9)
    assert t.delta_n == pytest.approx(DELTA_18, rel=1e-9)
    # smallest N with N log 2 >= log((1 - delta)/delta)
    assert t.N == 16 == t.N_lifted
    assert t.chi == pytest.approx(0.0, abs=1e-10)
    assert t.phi == pytest.approx(t.phi_check, abs=1e-14)
    assert 0.0 < t.min_boundary_distance and t.orbit.location == "core"
    assert t.eta == "0" * t.N + ("0101" * 5)[:t.n] + "0" * t.M


def test_engines_agree():
    a = boundary_approx(SkewSystem(mobius_model(2.0), "lifted"), "0101", 0.1, 6)
    b = boundary_approx(SkewSystem(mobius_model(2.0), "near"), "0101", 0.1, 6)
    assert (a.N, a.M, a.eta) == (b.N, b.M, b.eta)
    assert a.y == pytest.approx(b.y, abs=1e-12)
    assert a.distance == pytest.approx(b.distance, abs=1e-9)


def test_boundary_approx_validation():
    sysm = SkewSystem(mobius_model(2.0))
    with pytest.raises(ValidationError):
        boundary_approx(sysm, "0101", 0.7, 18)
    with pytest.raises(ValidationError):
        boundary_approx(SkewSystem(pld_model()), "0101", 0.1, 6)   # target exponent is not zero


def test_csv(trace18):
    text = traces_csv([trace18])
    head, row = text.strip().split("\n")
    assert head.split(",") == CSV_COLUMNS
    assert int(row.split(",")[3]) == 16


def test_hyperbolic_dirac_far(trace18):
    d = dirac((0, 0, 0), 0.0)
    assert weakstar_distance(d, trace18.measure) > 0.01


def test_mirror_relation_small_periods():
    sysm = SkewSystem(pld_model())
    for w in enumerate_admissible(6):
        rel = mirror_exponent_relation(sysm, ex_point_from_word(w))
        assert rel.lhs == pytest.approx(rel.rhs, abs=1e-12)
        assert rel.pairs_match


def test_mirror_relation_mobius_is_symmetric():
    rel = mirror_exponent_relation(SkewSystem(mobius_model(2.0)), encode_ex_orbit("0101", 1))
    assert rel.chi == rel.chi_mirror == 0.0


def test_exponent_boundary_check():
    sysm = SkewSystem(pld_model())
    orbs = [o for w in ((0, 1), (0, 0, 1), (0, 1, 1)) for o in fiber_fixed_points(sysm, w)
            if o.location == "core"]
    rep = exponent_boundary_check(sysm, orbs, 0.05)
    assert rep.feasible
    for chi, mass, D in rep.triples:
        assert chi <= rep.K1 * mass + rep.K2 * D + 1e-9

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from skewprod.dynamics import (SkewSystem, classify, eval_word_lifted, eval_word_near,
                               fiber_fixed_points, lift_translate, lyapunov_finite,
                               mme_ex_exponent, mme_monte_carlo, revalidate, twin_pair)
from skewprod.errors import DegenerateRoot, ValidationError
from skewprod.fiber import eval_word, eval_word_log, mobius_model, pld_model, to_near

words = st.lists(st.integers(0, 1), min_size=1, max_size=10).map(tuple)


def test_lift_translate_examples():
    assert lift_translate((0, 0, 1, 0, 0, 0, 1, 0)) == (1, 0)
    assert lift_translate((0, 1)) == (-1, -1)
    assert lift_translate((1, 1)) == (1, 0)


@settings(max_examples=150, deadline=None)
@given(w=words, x=st.floats(0.02, 0.98))
def test_lifted_engine_matches_direct(w, x):
    m = mobius_model(2.0)
    t1, logd = eval_word_lifted(m, w, m.lift.lift_x(x))
    y, logd2, _ = eval_word_log(m, w, x)
    assert m.lift.unlift_x(t1) == pytest.approx(y, abs=1e-12)
    assert logd == pytest.approx(logd2, abs=1e-9)


@settings(max_examples=150, deadline=None)
@given(w=words, x=st.floats(1e-8, 1 - 1e-8))
def test_near_engine_matches_direct(w, x):
    m = pld_model()
    side, d, logd, sign = eval_word_near(m, w, *to_near(x))
    y, logd2, sign2 = eval_word_log(m, w, x)
    assert (d if side == 0 else 1 - d) == pytest.approx(y, abs=1e-12)
    assert logd == pytest.approx(logd2, abs=1e-9)
    assert sign == sign2 == (-1) ** sum(w)


def test_mobius_01_fixed_point(mobius_sys):
    orbits = fiber_fixed_points(mobius_sys, (0, 1))
    core = [o for o in orbits if o.location == "core"]
    assert len(core) == 1
    assert core[0].x == pytest.approx(math.sqrt(2) - 1, abs=1e-14)
    # f_[01]'(x) = -2/(1+x)^2 has modulus 1 there
    assert abs(core[0].chi) < 1e-12 and core[0].klass == "nonhyperbolic"


def test_pld_f0_endpoints(pld_sys):
    orbits = fiber_fixed_points(pld_sys, (0,))
    assert [o.x for o in orbits] == [0.0, 1.0]
    assert orbits[0].chi == pytest.approx(math.log(1.05), abs=1e-15)
    assert orbits[1].chi == pytest.approx(math.log(2 / 3), abs=1e-15)
    assert [o.klass for o in orbits] == ["expanding", "contracting"]


def test_identity_word_is_degenerate(mobius_sys):
    with pytest.raises(DegenerateRoot):
        fiber_fixed_points(mobius_sys, (0, 1, 0, 1))


def test_boundary_exponent_of_target(mobius_sys):
    # ((0101)^inf, 1): log 1/2 + log 1 + log 2 + log 1 = 0
    assert lyapunov_finite(mobius_sys, (0, 1, 0, 1), 1.0, 4).value == 0.0


def test_mme_formula():
    assert mme_ex_exponent(pld_model()) == pytest.approx(0.25 * math.log(0.7), abs=1e-15)
    assert mme_ex_exponent(mobius_model(2.0)) == 0.0


def test_mme_monte_carlo_small(pld_sys):
    r = mme_monte_carlo(pld_sys, 200_000, seed=5)
    assert r.error < 5e-3


def test_classify():
    assert classify(1e-3) == "expanding"
    assert classify(-1e-3) == "contracting"
    assert classify(1e-12) == "nonhyperbolic"


def test_lyapunov_engines_agree():
    m = mobius_model(2.0)
    rng = np.random.default_rng(0)
    xi = tuple(rng.integers(0, 2, 400).tolist())
    vals = [lyapunov_finite(SkewSystem(m, e), xi, 0.37, 400).value for e in ("lifted", "near", "direct")]
    assert max(vals) - min(vals) < 1e-9


def test_lyapunov_rejects_bad_input(pld_sys):
    with pytest.raises(ValidationError):
        lyapunov_finite(pld_sys, (), 0.3, 5)
    with pytest.raises(ValidationError):
        SkewSystem(pld_model(), "lifted")


@settings(max_examples=40, deadline=None)
@given(w=st.lists(st.integers(0, 1), min_size=1, max_size=8).map(tuple))
def test_twin_pairs_have_both_signs(w):
    sysm = SkewSystem(pld_model())
    plus, minus = twin_pair(sysm, w)
    assert plus.chi >= -1e-9 and minus.chi <= 1e-9
    for o in (plus, minus):
        y, _ = eval_word(sysm.model, o.word, o.x)
        assert abs(y - o.x) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(w=st.lists(st.integers(0, 1), min_size=2, max_size=7).map(tuple))
def test_fixed_points_revalidate(w):
    assume(not (set(w) == {1} and len(w) % 2 == 0))  # 1^(2k) is the identity
    sysm = SkewSystem(pld_model())
    for o in fiber_fixed_points(sysm, w):
        if o.location == "core":
            r = revalidate(sysm, o)
            assert r.x == pytest.approx(o.x, abs=1e-10)

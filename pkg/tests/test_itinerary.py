import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skewprod.dynamics import SkewSystem, make_orbit
from skewprod.errors import BudgetExhausted, NotFound, ValidationError
from skewprod.fiber import eval_word, mobius_model, pld_model
from skewprod.itinerary import (apply_word, contracting_cover, contracting_periodic_near,
                                contraction_data, density_scan, expanding_cover,
                                expanding_periodic_near, expanding_successor,
                                fundamental_domains, homoclinic_certificate)


@pytest.fixture(scope="module")
def domains(pld):
    return fundamental_domains(pld, 0.01)


@pytest.mark.parametrize("eps0,N", [(0.01, 14), (0.05, 9), (0.1, 7), (0.2, 5)])
def test_mobius_domains_closed_form(mobius, eps0, N):
    # logit(eps) + N log 2 = -logit(eps)  =>  eps = 1 / (1 + 2^(N/2))
    fd = fundamental_domains(mobius, eps0)
    assert fd.N == N
    assert fd.eps == pytest.approx(1 / (1 + 2 ** (N / 2)), rel=1e-13)


def test_pld_domains(domains, pld):
    assert domains.N == 111
    assert domains.eps == pytest.approx(0.009709021421086697, rel=1e-10)
    y, _ = apply_word(pld, (0,) * domains.N, domains.eps)
    assert y == pytest.approx(1 - domains.eps, abs=1e-14)
    assert domains.floor == pytest.approx(2.821869488536155 * 1.5, rel=1e-12)
    assert domains.min_expansion >= domains.floor


def test_expansion_floor_on_grid(domains, pld):
    xs = np.linspace(*domains.I0, 10_000)
    _, logd = apply_word(pld, (0,) * domains.N, xs)
    assert np.exp(logd).min() >= domains.floor


def test_domain_validation(pld):
    with pytest.raises(ValidationError):
        fundamental_domains(pld, 0.3)


def test_contraction_data(pld):
    cd = contraction_data(pld)
    assert cd.c == pytest.approx(0.44257884972170686, abs=1e-13)
    assert cd.target[1] == pytest.approx(0.48209852034898715, abs=1e-13)
    assert cd.upsilon == pytest.approx(1.0041280196429336, abs=1e-12)
    assert cd.h3_margin > 0


def test_successor_expands(domains, pld):
    H = (domains.eps, domains.eps + 1e-5)
    s = expanding_successor(pld, domains, H)
    assert s.floor >= domains.floor
    lo, hi = np.sort(apply_word(pld, s.word, np.array(H))[0])
    assert (hi - lo) >= domains.floor * (H[1] - H[0])


def test_covers_reach_target(domains, pld):
    H = (domains.eps, domains.eps + 1e-9)
    cov = expanding_cover(pld, domains, H)
    img = np.sort(apply_word(pld, cov.word, np.array(H))[0])
    assert img[0] <= domains.strip[0] and img[1] >= domains.strip[1]
    cd = contraction_data(pld)
    cov = contracting_cover(pld, cd, (0.45, 0.45 + 1e-6))
    img = np.sort(apply_word(pld, cov.word, np.array([0.45, 0.45 + 1e-6]), forward=False)[0])
    assert img[0] <= cd.target[0] and img[1] >= cd.target[1]


@pytest.mark.parametrize("p", [0.0048545, 0.3, 0.5, 0.999])
def test_periodic_near(pld_sys, p):
    for fn, klass in ((expanding_periodic_near, "expanding"),
                      (contracting_periodic_near, "contracting")):
        s = fn(pld_sys, p, 0.01)
        o = s.orbit
        assert o.klass == klass and o.location == "core"
        assert s.distance <= 0.01
        y, _ = eval_word(pld_sys.model, o.word, o.x)
        assert abs(y - o.x) <= 1e-10


def test_mobius_falls_back_to_nonhyperbolic(mobius_sys):
    s = expanding_periodic_near(mobius_sys, 0.3, 0.05)
    assert s.orbit.klass == "nonhyperbolic" and s.method != "cover"


def test_density_pld(pld):
    r = density_scan(pld, 0.3, "forward", 0.01)
    assert r.max_gap <= 0.02 and not r.exhausted


def test_density_budget(pld):
    with pytest.raises(BudgetExhausted) as e:
        density_scan(pld, 0.3, "forward", 0.001, budget=500)
    assert e.value.partial.exhausted


def test_density_mobius_keeps_gap(mobius):
    # both f0-orbits of 0.3 and 0.7 plus reflections: a finite union near the middle
    assert density_scan(mobius, 0.3, "forward", 0.01).max_gap > 0.05


def test_homoclinic_pair(pld_sys):
    a = contracting_periodic_near(pld_sys, 0.3, 0.01).orbit
    b = contracting_periodic_near(pld_sys, 0.7, 0.01).orbit
    cert = homoclinic_certificate(pld_sys, a, b)
    assert cert.forward_link.end >= cert.forward_link.target[0]


def test_core_exposed_not_found(pld_sys):
    a = contracting_periodic_near(pld_sys, 0.3, 0.01).orbit
    b = make_orbit(pld_sys, (0,), 1.0, near=(1, 0.0))
    assert b.klass == "contracting"
    with pytest.raises(NotFound):
        homoclinic_certificate(pld_sys, a, b)


@settings(max_examples=25, deadline=None)
@given(x=st.floats(0.01, 0.99))
def test_apply_word_backward_inverts(x):
    m = pld_model()
    w = (0, 1, 0, 0, 1)
    y, _ = apply_word(m, w, x)
    z, _ = apply_word(m, tuple(reversed(w)), y, forward=False)
    assert z == pytest.approx(x, abs=1e-12)

"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``CRITERION k: PASS|FAIL`` line with its runtime.
Tolerances are the stated ones; a failing criterion fails its test.
"""
import math
import time

import numpy as np
import pytest

from skewprod.dynamics import SkewSystem, make_orbit, mme_monte_carlo, revalidate, twin_pair
from skewprod.errors import NotFound
from skewprod.fiber import arctan_model, check_hypotheses, eval_word, mobius_model, pld_model
from skewprod.itinerary import (apply_word, contracting_periodic_near, density_scan,
                                expanding_periodic_near, fundamental_domains,
                                homoclinic_certificate, near_residual)
from skewprod.measure import (boundary_approx, dirac, mirror_exponent_relation, periodic_measure,
                              weakstar_distance)
from skewprod.symbolic import TRANSITION_MATRIX, enumerate_admissible, ex_point_from_word, parry_measure
from skewprod.walk import (gap_statistics, ks_statistic, nontransitivity_witness,
                           occupation_decay, vplus_walk)

N_GRID = (6, 18, 38, 66)
_cache = {}


def report(capsys, k, ok, elapsed, limit, detail):
    ok = bool(ok) and elapsed < limit
    with capsys.disabled():
        print(f"\nCRITERION {k:2d}: {'PASS' if ok else 'FAIL'}  ({elapsed:.2f}s, limit {limit:g}s)  {detail}")
    return ok


def boundary_traces():
    if "traces" not in _cache:
        sysm = SkewSystem(mobius_model(2.0))
        _cache["traces"] = [boundary_approx(sysm, "0101", 0.1, n) for n in N_GRID]
    return _cache["traces"]


def test_criterion_01_parry(capsys):
    t = time.perf_counter()
    ch = parry_measure()
    ok = (abs(ch.entropy - math.log(2)) <= 1e-12
          and np.max(np.abs(ch.pi - 0.25)) <= 1e-12
          and np.max(np.abs(ch.P - TRANSITION_MATRIX / 2)) <= 1e-12)
    dt = time.perf_counter() - t
    assert report(capsys, 1, ok, dt, 1, f"entropy={ch.entropy:.15f}")


def test_criterion_02_mme_exponent(capsys):
    t = time.perf_counter()
    res = {}
    for name, m in (("pld", pld_model()), ("mobius", mobius_model(2.0))):
        # formula evaluated here from the endpoint derivatives, independently of the library
        b0, b1 = float(m.f0.deriv(0.0)), float(m.f0.deriv(1.0))
        a0, a1 = abs(float(m.f1.deriv(0.0))), abs(float(m.f1.deriv(1.0)))
        formula = 0.25 * (math.log(b0) + math.log(b1) + math.log(a0) + math.log(a1))
        mc = mme_monte_carlo(SkewSystem(m), 1_000_000, seed=0)
        res[name] = (mc.estimate, formula)
    dt = time.perf_counter() - t
    ok = all(abs(e - f) <= 5e-3 for e, f in res.values())
    ok = ok and abs(res["pld"][1] - (-0.08916)) < 1e-4
    detail = ", ".join(f"{k}: {e:.5f} vs {f:.5f}" for k, (e, f) in res.items())
    assert report(capsys, 2, ok, dt, 30, detail)


def test_criterion_03_hypotheses(capsys):
    t = time.perf_counter()
    p = check_hypotheses(pld_model())
    m = check_hypotheses(mobius_model(2.0))
    dt = time.perf_counter() - t
    kappa_oracle = (2 / 3) ** 2 * (1 / 3) / (1.05 * 0.05)
    ok = (p.h1 and p.h2 and p.h3 and p.h4 and abs(p.kappa - kappa_oracle) <= 1e-6
          and m.h4 is False and m.kappa == 1 / 16)
    assert report(capsys, 3, ok, dt, 1, f"kappa_pld={p.kappa:.10f}, kappa_mobius={m.kappa}")


def test_criterion_04_expansion_floor(capsys):
    t = time.perf_counter()
    model = pld_model()
    fd = fundamental_domains(model, 0.01)
    xs = np.linspace(fd.I0[0], fd.I0[1], 10_000)
    _, logd = apply_word(model, (0,) * fd.N, xs)
    worst = float(np.exp(logd).min())
    dt = time.perf_counter() - t
    ok = worst >= fd.kappa / fd.lam > 1
    assert report(capsys, 4, ok, dt, 5, f"N={fd.N}, min (f0^N)'={worst:.4f} >= {fd.kappa / fd.lam:.4f}")


def test_criterion_05_boundary_approximation(capsys):
    t = time.perf_counter()
    traces = boundary_traces()
    dt = time.perf_counter() - t
    d = [tr.distance for tr in traces]
    a = all(tr.min_boundary_distance > 0 and tr.orbit.location == "core" for tr in traces)
    b = all(abs(tr.chi) <= 1e-10 for tr in traces)
    c_mono = all(d[i + 1] <= 1.1 * d[i] for i in range(len(d) - 1))
    c_end = d[-1] <= 0.05
    ratios = [(tr.N + tr.M) / tr.n for tr in traces]
    dd = all(ratios[i + 1] < ratios[i] for i in range(len(ratios) - 1))
    # closed form in the logit lift: Delta(s) = 2 log(1 + s), lift of 1/2 is 0
    n = 18
    D = 2 * math.log1p(0.1 * math.exp(-math.sqrt(n)))
    tr18 = traces[N_GRID.index(18)]
    psi = tr18.psi
    delta18 = 0.1 * math.exp(-2 * max(psi, math.sqrt(n))) * math.exp(-n * D)
    n18 = math.ceil(math.log((1 - delta18) / delta18) / math.log(2))
    e = tr18.N == 16 == n18 and abs(tr18.delta_n / 1.96e-5 - 1) <= 0.01 \
        and abs(tr18.delta_n / delta18 - 1) <= 1e-9
    detail = (f"(a)={a} (b)={b} (c)monotone={c_mono} (c)d(66)={d[-1]:.4f}<=0.05:{c_end} "
              f"(d)={dd} (e)={e}; distances={[round(v, 4) for v in d]}")
    assert report(capsys, 5, a and b and c_mono and c_end and dd and e, dt, 10, detail)


def test_criterion_06_hyperbolic_dirac_separated(capsys):
    t = time.perf_counter()
    target = dirac((0, 0, 0), 0.0)
    measures = [tr.measure for tr in boundary_traces()]
    sysm = SkewSystem(pld_model())
    for p in (0.005, 0.3, 0.7):
        for fn in (expanding_periodic_near, contracting_periodic_near):
            measures.append(periodic_measure(fn(sysm, p, 0.01).orbit, sysm))
    msys = SkewSystem(mobius_model(2.0))
    measures.append(periodic_measure(expanding_periodic_near(msys, 0.3, 0.05).orbit, msys))
    dists = [weakstar_distance(target, mu) for mu in measures]
    dt = time.perf_counter() - t
    assert report(capsys, 6, min(dists) > 0.01, dt, 5,
                  f"{len(dists)} measures, min distance {min(dists):.4f}")


def test_criterion_07_mirror_relation(capsys):
    t = time.perf_counter()
    worst, count, pairs = 0.0, 0, True
    for m in (pld_model(), mobius_model(2.0)):
        sysm = SkewSystem(m)
        for w in enumerate_admissible(10):
            rel = mirror_exponent_relation(sysm, ex_point_from_word(w))
            worst = max(worst, abs(rel.lhs - rel.rhs))
            pairs &= rel.pairs_match
            count += 1
    dt = time.perf_counter() - t
    assert report(capsys, 7, worst <= 1e-10 and pairs, dt, 10,
                  f"{count} orbits, max |lhs-rhs|={worst:.2e}, multisets match={pairs}")


def test_criterion_08_twin_pairs(capsys):
    t = time.perf_counter()
    sysm = SkewSystem(pld_model())
    rng = np.random.Generator(np.random.Philox(8))
    ok, worst = True, 0.0
    for _ in range(100):
        L = int(rng.integers(1, 13))
        w = tuple(int(b) for b in rng.integers(0, 2, L))
        plus, minus = twin_pair(sysm, w)
        ok &= plus.chi >= -1e-9 and minus.chi <= 1e-9
        for o in (plus, minus):
            r = revalidate(sysm, o)
            res = abs(near_residual(sysm.model, r.word, r.x))
            worst = max(worst, res, abs(float(eval_word(sysm.model, o.word, o.x)[0]) - o.x))
    dt = time.perf_counter() - t
    assert report(capsys, 8, ok and worst <= 1e-10, dt, 20, f"max residual {worst:.2e}")


def test_criterion_09_transitivity_contrast(capsys):
    t = time.perf_counter()
    mesh = 1e-2
    pld = density_scan(pld_model(), 0.3, "forward", mesh)
    out = {}
    for name, m in (("mobius", mobius_model(2.0)), ("arctan", arctan_model())):
        c = nontransitivity_witness(m, 0.3, 10_000)
        out[name] = (c.max_deviation, c.max_gap)
    dt = time.perf_counter() - t
    ok = pld.max_gap <= 2e-2 and all(dev <= 1e-8 and gap >= 10 * mesh for dev, gap in out.values())
    detail = f"pld gap={pld.max_gap:.4f}; " + ", ".join(
        f"{k}: dev={v[0]:.1e} gap={v[1]:.4f}" for k, v in out.items())
    assert report(capsys, 9, ok, dt, 60, detail)


def test_criterion_10_walk_statistics(capsys):
    t = time.perf_counter()
    g = gap_statistics(0, 1_000_000)
    a = vplus_walk(1, 1_000_000)
    b = vplus_walk(2, 1_000_000, "first-return")
    ks = ks_statistic(a.step_values, b.step_values)
    dt = time.perf_counter() - t
    ok = (abs(g.parity_even - 2 / 3) <= 5e-3 and abs(g.p_d1 - 3 / 4) <= 5e-3
          and abs(g.p_d3 - 3 / 16) <= 5e-3 and abs(a.mean_step) <= 4e-3 and ks <= 1e-2)
    detail = (f"even={g.parity_even:.4f} P(d=1)={g.p_d1:.4f} P(d=3)={g.p_d3:.4f} "
              f"mean={a.mean_step:.4f} KS={ks:.4f}")
    assert report(capsys, 10, ok, dt, 60, detail)


def test_criterion_11_occupation_decay(capsys):
    t = time.perf_counter()
    ratios = {}
    for name, m in (("mobius", mobius_model(2.0)), ("arctan", arctan_model())):
        tab = occupation_decay(m, 0.25, (10_000, 1_000_000), seeds=50)
        ratios[name] = tab.mean_fraction[1] / tab.mean_fraction[0]
    dt = time.perf_counter() - t
    ok = all(r <= 0.5 for r in ratios.values())
    assert report(capsys, 11, ok, dt, 120, ", ".join(f"{k}: ratio {v:.3f}" for k, v in ratios.items()))


def test_criterion_12_homoclinic(capsys):
    t = time.perf_counter()
    sysm = SkewSystem(pld_model())
    found = []
    for fn in (contracting_periodic_near, expanding_periodic_near):
        a = fn(sysm, 0.3, 0.01).orbit
        b = fn(sysm, 0.7, 0.01).orbit
        cert = homoclinic_certificate(sysm, a, b)
        found.append(len(cert.forward_link.word) + len(cert.backward_link.word) >= 0)
    core = contracting_periodic_near(sysm, 0.3, 0.01).orbit
    core_x = expanding_periodic_near(sysm, 0.3, 0.01).orbit
    not_found = 0
    for a, b in ((core, make_orbit(sysm, (0,), 1.0, near=(1, 0.0))),
                 (core_x, make_orbit(sysm, (0,), 0.0, near=(0, 0.0)))):
        try:
            homoclinic_certificate(sysm, a, b)
        except NotFound:
            not_found += 1
    dt = time.perf_counter() - t
    ok = all(found) and len(found) == 2 and not_found == 2
    assert report(capsys, 12, ok, dt, 60, f"core pairs linked={found}, core<->exposed NotFound={not_found}/2")

"""Acceptance criteria 1-11, one test each.

Every test records a one-line pass/fail summary, printed at the end of the
run (and immediately with ``pytest -s``).
"""

import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from isofk.geometry import build_hexagonal
from isofk.mcmc import (Chain, EstimatorSeries, critical_scan, decay_fit, duality_check)
from isofk.observable import (boundary_lemma, euler_spread, exact_measure, observable_field, verify_area_boundary,
                              verify_peeling_decay, verify_vertex_relation)
from isofk.presets import hexagonal_domain, square_domain, triangular_domain
from isofk.rcmodel import BoundaryCondition, Region
from isofk.weights import dual_p, lam, p_of_beta, x_crit

SEED = 2026
QS = [4.5, 5, 9, 16, 25, 100]
THETAS = np.linspace(np.pi / 12, 11 * np.pi / 12, 50)


def record(k, ok, detail):
    ACCEPTANCE[k] = (bool(ok), detail)
    print("criterion %2d: %s  %s" % (k, "PASS" if ok else "FAIL", detail))


def enumerable_domains():
    doms = [square_domain(2, 2, a=1, b=5), triangular_domain(2, a=1, b=4), hexagonal_domain(2, a=2, b=6),
            square_domain(2, 2), triangular_domain(2)]
    for d in doms:
        assert d.n_edges <= 16
    return doms


@pytest.fixture(scope="module")
def domains():
    return enumerable_domains()


@pytest.fixture(scope="module")
def fields(domains):
    out = {}
    for i, d in enumerate(domains):
        for q in (5.0, 9.0):
            for beta in (0.3, 0.5, 0.9, 1.0, 1.3):
                out[i, q, beta] = observable_field(d, beta, q)
    return out


def test_criterion_01_fixed_point():
    t = time.perf_counter()
    worst = max(np.max(np.abs(lam(x_crit(THETAS, q), THETAS, q) - 1)) for q in QS)
    dt = time.perf_counter() - t
    ok = worst < 1e-12 and dt < 1.0
    record(1, ok, "max |Lambda(x_crit) - 1| = %.2e over %d points, %.3f s" % (worst, len(QS) * len(THETAS), dt))
    assert ok


def test_criterion_02_self_duality():
    worst = max(np.max(np.abs(x_crit(THETAS, q) * x_crit(np.pi - THETAS, q) - 1)) for q in QS)
    ps = np.linspace(0, 1, 1001)
    inv = max(np.max(np.abs(dual_p(dual_p(ps, q), q) - ps)) for q in QS)
    ok = worst < 1e-12 and inv < 1e-14
    record(2, ok, "max |x(t) x(pi - t) - 1| = %.2e, max involution error = %.2e" % (worst, inv))
    assert ok


def test_criterion_03_isotropic_point():
    errs = [abs(p_of_beta(np.pi / 2, 1.0, q) - np.sqrt(q) / (1 + np.sqrt(q))) for q in (4, 9, 25)]
    ok = max(errs) < 1e-12
    record(3, ok, "max |p - sqrt(q)/(1+sqrt(q))| = %.2e for q in 4, 9, 25" % max(errs))
    assert ok


def test_criterion_04_loop_cluster_equivalence(domains):
    t = time.perf_counter()
    spreads = [euler_spread(d, beta, q) for d in domains for q in (5.0, 9.0) for beta in (0.5, 1.0, 1.3)]
    dt = time.perf_counter() - t
    ok = max(spreads) < 1e-10 and dt < 60 and len(domains) >= 3
    record(4, ok, "max relative spread %.2e on %d domains, %.1f s" % (max(spreads), len(domains), dt))
    assert ok


def test_criterion_05_vertex_relation(domains, fields):
    t = time.perf_counter()
    worst = 0.0
    for i, d in enumerate(domains):
        for q in (5.0, 9.0):
            for beta in (0.5, 1.0, 1.3):
                fld = fields[i, q, beta]
                for lab in (0, 1):
                    worst = max(worst, verify_vertex_relation(fld, labeling=lab)["residual"])
    dt = time.perf_counter() - t
    ok = worst < 1e-10 and dt < 300
    record(5, ok, "max residual %.2e over every rhombus, both labelings, %.1f s" % (worst, dt))
    assert ok


def test_criterion_06_boundary_lemma(domains, fields):
    worst, n = 0.0, 0
    for i, d in enumerate(domains):
        for q in (5.0, 9.0):
            for beta in (0.5, 1.0, 1.3):
                rep = boundary_lemma(fields[i, q, beta])
                worst = max(worst, rep["residual"])
                n += len(rep["rows"])
    ok = worst < 1e-10 and n > 0
    record(6, ok, "max residual %.2e over %d free-arc side checks" % (worst, n))
    assert ok


def test_criterion_07_area_boundary(domains, fields):
    ok, worst_zero, worst_c1, n = True, 0.0, 0.0, 0
    for i, d in enumerate(domains):
        E = [s for s in range(d.n_sides) if d.interior[s]]
        for q in (5.0, 9.0):
            for beta in (0.3, 0.5, 0.9):
                for tilde in (False, True):
                    rep = verify_area_boundary(fields[i, q, beta], E, tilde=tilde)
                    ok &= rep["pass"] and np.isfinite(rep["C1"])
                    worst_zero = max(worst_zero, rep["zero_sum"])
                    worst_c1 = max(worst_c1, abs(rep["C1"] - rep["C1_check"]) / rep["C1"])
                    n += 1
    ok = ok and worst_zero < 1e-10 and worst_c1 < 1e-12
    record(7, ok, "%d instances; max zero-sum %.2e; max C1 mismatch %.2e" % (n, worst_zero, worst_c1))
    assert ok


def test_criterion_08_peeling():
    lines, ok = [], True
    for n in (4, 5):
        rep = verify_peeling_decay(square_domain(n, n), 0.5, 9.0)
        ok &= rep["pass"]
        lines.append("%dx%d depth %d sums %s" % (n, n, rep["depth"],
                                                 "/".join("%.3g" % r["sum_F"] for r in rep["rows"])))
    record(8, ok, "; ".join(lines))
    assert ok


def test_criterion_09_mcmc():
    t = time.perf_counter()
    reg = Region.whole(build_hexagonal(1))
    bc = BoundaryCondition.partition([[0, 3], [1], [2], [4], [5]])
    cg = reg.cluster_graph(bc)
    assert cg.n_edges == 6
    q = 9.0
    p = p_of_beta(reg.theta, 1.0, q)
    mu = exact_measure(cg, q, p=p)
    by_code = dict(enumerate(mu.probs))
    ch = Chain(cg, p, q, seed=SEED)
    worst = 0.0
    for c in range(64):
        ch.omega[:] = [(c >> e) & 1 for e in range(6)]
        for e in range(6):
            on, off = by_code[c | (1 << e)], by_code[c & ~(1 << e)]
            worst = max(worst, abs(ch.conditional(e) - on / (on + off)))
    ch.sweep(1000)
    codes = ch.trace(1_000_000)
    zs = []
    for c, pr in enumerate(mu.probs):
        s = EstimatorSeries("config%d" % c, (codes == c).astype(float))
        zs.append(abs(s.mean - pr) / s.se)
    dt = time.perf_counter() - t
    ok = worst < 1e-12 and max(zs) < 3 and dt < 120
    record(9, ok, "conditional error %.1e; max |z| %.2f over 64 configurations; %.1f s" % (worst, max(zs), dt))
    assert ok


def test_criterion_10_decay():
    t = time.perf_counter()
    radii = list(range(4, 21))
    f7 = decay_fit(48, 0.7, 9.0, radii, 20000, seed=SEED)
    f95 = decay_fit(48, 0.95, 9.0, radii, 20000, seed=SEED + 1)
    dt = time.perf_counter() - t
    ok = f7.slope < 0 and f7.r2 > 0.9 and abs(f95.slope) < abs(f7.slope) and dt < 600
    record(10, ok, "slope(0.7) %.3f R2 %.3f censored %s; slope(0.95) %.3f R2 %.3f; %.0f s"
           % (f7.slope, f7.r2, f7.censored, f95.slope, f95.r2, dt))
    assert ok


def test_criterion_11_criticality():
    t = time.perf_counter()
    iso = critical_scan(9.0, [0.7, 1.4], 32, 4000, seed=SEED)
    r07, r14 = iso["rows"]
    ok_iso = r07["free_boundary"] < 0.05 and r14["wired_largest"] > 0.3
    grid = [0.7, 0.85, 1.0, 1 / 0.85, 1 / 0.7]
    an = critical_scan(9.0, grid, 32, 4000, seed=SEED + 10, alpha=np.pi / 3)
    lo, hi = an["region"]
    ok_bracket = lo <= 1.0 <= hi and abs(lo * hi - 1) < 1e-12
    dual = [duality_check(9.0, b, 8, 20000, seed=SEED + 20 + k, alpha=np.pi / 3)
            for k, b in enumerate((0.85, 1.0, 1 / 0.85))]
    zmax = max(d["z"] for d in dual)
    dt = time.perf_counter() - t
    ok = ok_iso and ok_bracket and zmax < 3 and dt < 900
    record(11, ok, "free(0.7) %.3f wired(1.4) %.3f; anisotropic region [%.3f, %.3f]; duality max z %.2f; %.0f s"
           % (r07["free_boundary"], r14["wired_largest"], lo, hi, zmax, dt))
    assert ok

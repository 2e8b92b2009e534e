import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isofk.errors import InvalidParameter, OutOfDomain
from isofk.weights import (beta_of_p, c_coefficient, c_coefficient_closed, critical_surface, dual_p,
                           edge_weights, lam, p_of_beta, potts_coupling, quantum_critical, sigma, spin,
                           x_crit)

QS = [4.5, 5, 9, 16, 25, 100]
THETAS = np.linspace(np.pi / 12, 11 * np.pi / 12, 50)


def mp_sigma(q):
    mpmath.mp.dps = 40
    return 2 / mpmath.pi * mpmath.acosh(mpmath.sqrt(q) / 2)


def test_sigma_values():
    # frozen from a 40-digit evaluation of (2 / pi) arccosh(3 / 2)
    assert sigma(9) == pytest.approx(0.6126979250600663, abs=1e-15)
    assert float(mp_sigma(9)) == pytest.approx(0.6126979250600663, abs=1e-16)
    assert sigma(4) == 0.0
    assert np.isfinite(sigma(25.72))


@pytest.mark.parametrize("q", [4, 4.5, 9, 25.72, 100])
def test_sigma_defining_relation(q):
    s = spin(q)
    assert abs(np.cosh(s.sigma * np.pi / 2) - np.sqrt(q) / 2) < 1e-12
    assert s.q == q


def test_sigma_rejects_small_q():
    with pytest.raises(OutOfDomain):
        sigma(3.9)


@pytest.mark.parametrize("q", [4.5, 9, 100])
def test_x_crit_against_high_precision(q):
    s = mp_sigma(q)
    for th in (0.3, np.pi / 3, 2.0):
        ref = mpmath.sinh(s * th / 2) / mpmath.sinh(s * (mpmath.pi - th) / 2)
        assert x_crit(th, q) == pytest.approx(float(ref), rel=1e-13)


def test_x_crit_isotropic_and_q4_limit():
    for q in (4, 5, 9, 30):
        assert abs(x_crit(np.pi / 2, q) - 1) < 1e-12
    th = 1.1
    assert x_crit(th, 4) == pytest.approx(th / (np.pi - th), rel=1e-12)
    assert x_crit(th, 4 + 1e-10) == pytest.approx(th / (np.pi - th), rel=1e-4)


def test_x_crit_rejects_bad_theta():
    with pytest.raises(InvalidParameter):
        x_crit(0.0, 9)
    with pytest.raises(InvalidParameter):
        x_crit(np.pi, 9)


@pytest.mark.parametrize("q", QS)
def test_fixed_point_grid(q):
    x = x_crit(THETAS, q)
    assert np.max(np.abs(lam(x, THETAS, q) - 1)) < 1e-12


@pytest.mark.parametrize("q", QS)
def test_self_duality_grid(q):
    assert np.max(np.abs(x_crit(THETAS, q) * x_crit(np.pi - THETAS, q) - 1)) < 1e-12


def test_lambda_endpoints_and_monotonicity():
    q, th = 9, 1.2
    s = sigma(q)
    assert lam(0.0, th, q) == pytest.approx(np.exp(s * th), rel=1e-13)
    assert lam(1e12, th, q) == pytest.approx(np.exp(-s * (np.pi - th)), rel=1e-9)
    xs = np.linspace(0, 50, 200)
    # Lambda decreases from e^{sigma theta} to e^{-sigma (pi - theta)}
    assert np.all(np.diff(lam(xs, th, q)) < 0)


def test_lambda_rejects_q4():
    with pytest.raises(OutOfDomain):
        lam(1.0, 1.0, 4)


def test_p_of_beta_values():
    for q in (4, 9, 25):
        assert abs(p_of_beta(np.pi / 2, 1, q) - np.sqrt(q) / (1 + np.sqrt(q))) < 1e-12
    assert p_of_beta(np.pi / 2, 1, 9) == pytest.approx(0.75, abs=1e-15)
    p = p_of_beta(np.pi / 3, 0.5, 9)
    assert abs(beta_of_p(np.pi / 3, p, 9) - 0.5) < 1e-12
    x = x_crit(np.pi / 3, 9)
    assert p / ((1 - p) * 3) == pytest.approx(0.5 * x, rel=1e-12)


def test_p_of_beta_limits_monotone():
    betas = np.geomspace(1e-8, 1e8, 60)
    p = p_of_beta(1.0, betas, 9)
    assert np.all(np.diff(p) > 0)
    assert p[0] < 1e-7 and p[-1] > 1 - 1e-7
    with pytest.raises(InvalidParameter):
        p_of_beta(1.0, 0.0, 9)


def test_c_coefficient():
    assert abs(c_coefficient(np.pi / 2, 1.0, 9)) < 1e-15
    assert abs(c_coefficient(np.pi / 2, 0.5, 9) - c_coefficient_closed(np.pi / 2, 0.5, 9)) < 1e-12
    s = sigma(9)
    for th in np.linspace(np.pi / 6, 5 * np.pi / 6, 5):
        x = x_crit(th, 9)
        bound = 2 * 0.5 * x * np.sinh(s * np.pi / 2) / ((x + np.exp(s * np.pi / 2)) * (0.5 * x + np.exp(-s * np.pi / 2)))
        assert c_coefficient(th, 0.5, 9) >= bound - 1e-12
        assert c_coefficient(th, 0.5, 9) > 0
        assert c_coefficient(th, 1.5, 9) < 0


def test_c_coefficient_root_by_bisection():
    from scipy.optimize import brentq
    for th in (0.4, np.pi / 2, 2.5):
        root = brentq(lambda b: c_coefficient(th, b, 9), 0.2, 5.0, xtol=1e-15)
        assert abs(root - 1) < 1e-12
    bs = np.linspace(0.1, 3, 40)
    assert np.all(np.diff(c_coefficient(1.0, bs, 9)) < 0)


def test_dual_p():
    q = 9
    pc = np.sqrt(q) / (1 + np.sqrt(q))
    assert abs(dual_p(pc, q) - pc) < 1e-15
    assert dual_p(0.0, q) == 1.0
    assert abs(dual_p(dual_p(0.3, 9), 9) - 0.3) < 1e-15
    ps = np.linspace(0.01, 0.99, 99)
    pd = dual_p(ps, q)
    assert np.allclose(ps * pd / ((1 - ps) * (1 - pd)), q, rtol=1e-12)
    assert np.max(np.abs(dual_p(pd, q) - ps)) < 1e-14
    with pytest.raises(InvalidParameter):
        dual_p(1.5, q)


def test_critical_surfaces():
    q = 9
    pc = np.sqrt(q) / (1 + np.sqrt(q))
    assert abs(critical_surface("square", [pc, pc], q)) < 1e-12
    for a in np.linspace(0.2, np.pi - 0.2, 9):
        p = [p_of_beta(a, 1, q), p_of_beta(np.pi - a, 1, q)]
        assert abs(critical_surface("square", p, q)) < 1e-12 * q
    with pytest.raises(InvalidParameter):
        critical_surface("square", [0.0, 0.5], q)
    with pytest.raises(InvalidParameter):
        critical_surface("kagome", [0.5, 0.5], q)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.15, 1.4), st.floats(0.15, 1.4), st.sampled_from([4.5, 5.0, 9.0, 16.0, 50.0]))
def test_triangular_hexagonal_surfaces(t1, t2, q):
    t = np.array([t1, t2, np.pi - t1 - t2])
    if t[2] < 0.1:
        return
    pt = p_of_beta(t, 1.0, q)
    ph = p_of_beta(np.pi - t, 1.0, q)
    rt = critical_surface("triangular", pt, q)
    rh = critical_surface("hexagonal", ph, q)
    assert abs(rt) < 1e-9 * q
    assert abs(rh) < 1e-9 * q * q
    # hexagonal weights are the duals of the triangular ones
    assert np.allclose(dual_p(pt, q), ph, atol=1e-13)
    # off the surface both residuals move away from zero together
    pt2 = p_of_beta(t, 1.3, q)
    assert critical_surface("triangular", pt2, q) > 0
    assert critical_surface("hexagonal", dual_p(pt2, q), q) < 0


def test_potts_and_quantum():
    assert potts_coupling(0.0) == 0.0
    assert potts_coupling(1 - np.exp(-2)) == pytest.approx(2.0, abs=1e-14)
    with pytest.raises(InvalidParameter):
        potts_coupling(1.0)
    assert quantum_critical(9, 1, 9) == 0.0
    assert quantum_critical(18, 2, 4) == pytest.approx(5.0)


def test_edge_weight_table_invariants():
    th = np.linspace(0.3, np.pi - 0.3, 11)
    t = edge_weights(th, 0.7, 9)
    assert np.allclose(t.p / ((1 - t.p) * 3), 0.7 * t.x, rtol=1e-12)
    assert np.all((t.p > 0) & (t.p < 1))


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, np.pi - 0.05), st.floats(4.01, 200.0), st.floats(0.05, 20.0))
def test_weight_properties(th, q, beta):
    x = x_crit(th, q)
    assert abs(lam(x, th, q) - 1) < 1e-11
    assert abs(x * x_crit(np.pi - th, q) - 1) < 1e-11
    p = p_of_beta(th, beta, q)
    assert abs(beta_of_p(th, p, q) - beta) < 1e-9 * max(1.0, beta)
    pd = dual_p(p, q)
    # dual weight equals the weight at pi - theta and 1 / beta
    assert abs(pd - p_of_beta(np.pi - th, 1 / beta, q)) < 1e-12
    assert abs(c_coefficient(th, beta, q) - c_coefficient_closed(th, beta, q)) < 1e-10 * max(1, abs(c_coefficient(th, beta, q)))

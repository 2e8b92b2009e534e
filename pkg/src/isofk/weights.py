"""Scalar edge-weight formulas for the random-cluster model with q >= 4."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, OutOfDomain


@dataclass(frozen=True)
class SpinParameter:
    q: float
    sigma: float


def sigma(q):
    """Spin ``sigma`` defined by ``cosh(sigma * pi / 2) = sqrt(q) / 2``."""
    q = float(q)
    if not q >= 4.0:
        raise OutOfDomain("sigma is real only for q >= 4, got q=%r" % q)
    return float(2.0 / np.pi * np.arccosh(np.sqrt(q) / 2.0))


def spin(q):
    return SpinParameter(float(q), sigma(q))


def _check_theta(theta):
    th = np.asarray(theta, dtype=float)
    if np.any(~((th > 0) & (th < np.pi))):
        raise InvalidParameter("edge angle must lie in (0, pi)")
    return th


def _scalar(a):
    return float(a) if np.ndim(a) == 0 else a


def x_crit(theta, q):
    """Critical (self-dual) weight ``x_e``.

    ``sinh(sigma theta / 2) / sinh(sigma (pi - theta) / 2)`` for q > 4 and the
    limit ``theta / (pi - theta)`` at q = 4.  Accepts arrays.
    """
    th = _check_theta(theta)
    s = sigma(q)
    if s == 0.0:
        return _scalar(th / (np.pi - th))
    return _scalar(np.sinh(s * th / 2.0) / np.sinh(s * (np.pi - th) / 2.0))


def p_of_beta(theta, beta, q):
    """Edge probability with ``p / ((1 - p) sqrt(q)) = beta * x_e``."""
    if np.any(np.asarray(beta) <= 0):
        raise InvalidParameter("beta must be positive")
    y = np.asarray(beta, dtype=float) * x_crit(theta, q) * np.sqrt(q)
    return _scalar(y / (1.0 + y))


def beta_of_p(theta, p, q):
    """Inverse of :func:`p_of_beta`."""
    p = np.asarray(p, dtype=float)
    return _scalar(p / ((1.0 - p) * np.sqrt(q) * x_crit(theta, q)))


def _sigma_strict(q):
    s = sigma(q)
    if s == 0.0:
        raise OutOfDomain("q must exceed 4 (sigma = 0 makes Lambda constant)")
    return s


def lam(x, theta, q):
    """``Lambda_e(x) = e^{-sigma(pi - theta)} (x + e^{sigma pi/2}) / (x + e^{-sigma pi/2})``.

    Strictly decreasing in ``x``, from ``e^{sigma theta}`` at 0 to
    ``e^{-sigma(pi - theta)}`` at infinity, and equal to 1 at ``x_crit``.
    """
    s = _sigma_strict(q)
    th = _check_theta(theta)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise InvalidParameter("x must be nonnegative")
    a = np.exp(s * np.pi / 2.0)
    return _scalar(np.exp(-s * (np.pi - th)) * (x + a) / (x + 1.0 / a))


def c_coefficient(theta, beta, q):
    """``c(e) = Lambda_e(beta x_e) - 1``."""
    return _scalar(lam(np.asarray(beta) * x_crit(theta, q), theta, q) - 1.0)


def c_coefficient_closed(theta, beta, q):
    """Closed form ``2 (1 - beta) x sinh(sigma pi/2) / ((x + e^{sigma pi/2})(beta x + e^{-sigma pi/2}))``."""
    s = _sigma_strict(q)
    x = x_crit(theta, q)
    a = np.exp(s * np.pi / 2.0)
    b = np.asarray(beta, dtype=float)
    return _scalar(2.0 * (1.0 - b) * x * np.sinh(s * np.pi / 2.0) / ((x + a) * (b * x + 1.0 / a)))


def dual_p(p, q):
    """Dual edge probability ``(1 - p) q / ((1 - p) q + p)``."""
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise InvalidParameter("p must lie in [0, 1]")
    # one minus a small ratio keeps the round trip near q * eps
    return _scalar(1.0 - p / ((1.0 - p) * q + p))


def critical_surface(lattice, p, q):
    """Signed residual of the critical surface of a periodic lattice.

    With ``y_i = p_i / (1 - p_i)``: square ``y1 y2 - q``; triangular
    ``y1 y2 y3 + y1 y2 + y1 y3 + y2 y3 - q``; hexagonal
    ``y1 y2 y3 - q (y1 + y2 + y3) - q^2``.
    """
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise InvalidParameter("edge probabilities must lie strictly inside (0, 1)")
    y = p / (1.0 - p)
    if lattice == "square":
        if len(y) != 2:
            raise InvalidParameter("square lattice takes two probabilities")
        return float(y[0] * y[1] - q)
    if len(y) != 3:
        raise InvalidParameter("%s lattice takes three probabilities" % lattice)
    y1, y2, y3 = y
    if lattice == "triangular":
        return float(y1 * y2 * y3 + y1 * y2 + y1 * y3 + y2 * y3 - q)
    if lattice == "hexagonal":
        return float(y1 * y2 * y3 - q * (y1 + y2 + y3) - q * q)
    raise InvalidParameter("unknown lattice %r" % (lattice,))


def potts_coupling(p):
    """Potts coupling ``J = -log(1 - p)``."""
    p = float(p)
    if not 0.0 <= p < 1.0:
        raise InvalidParameter("p must lie in [0, 1)")
    return float(-np.log1p(-p))


def quantum_critical(lam_, delta, q):
    """Residual ``lambda / delta - q`` of the quantum Potts critical line."""
    if lam_ <= 0 or delta <= 0:
        raise InvalidParameter("lambda and delta must be positive")
    return float(lam_ / delta - q)


@dataclass
class EdgeWeightTable:
    theta: np.ndarray
    x: np.ndarray
    p: np.ndarray
    p_dual: np.ndarray
    beta: float
    q: float


def edge_weights(theta, beta, q):
    """Per-edge table of ``theta``, ``x_e``, ``p_e(beta)`` and the dual ``p*``."""
    th = np.asarray(theta, dtype=float)
    x = np.atleast_1d(x_crit(th, q))
    p = np.atleast_1d(p_of_beta(th, beta, q))
    return EdgeWeightTable(th, x, p, np.atleast_1d(dual_p(p, q)), float(beta), float(q))

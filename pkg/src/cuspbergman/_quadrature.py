"""Tensor Gauss-Legendre rules on the standard fundamental domain of PSL_2(Z).

The domain is split at y = 1 into the region above the unit-circle arc
(y-first integration with lower limit sqrt(1 - x^2)) and a strip
[-1/2, 1/2] x [1, Y_max] cut into unit panels. Integrands are vectorized
callables ``func(x, y) -> array``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .exceptions import ToleranceNotMetError


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _map(n: int, lo, hi):
    """Nodes and weights of an n-point rule on [lo, hi] (lo, hi may be arrays)."""
    t, w = gauss_legendre(n)
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    half = (hi - lo) / 2
    return lo + half * (t + 1), half * w


@dataclass(frozen=True)
class Envelope:
    """Integrand decay model C * y**power * exp(-rate * y) above the strip cutoff."""

    power: float
    rate: float

    def tail_ratio(self, Y: float) -> float:
        """int_Y^inf y^p e^{-r y} dy divided by Y^p e^{-r Y}."""
        p, r = self.power, self.rate
        if r == 0:
            if p >= -1:
                return math.inf
            return Y / (-p - 1)
        a = p + 1
        x = r * Y
        # Gamma(a, x) / r^a / (Y^p e^{-x})
        if a > 0:
            log_upper = special.gammaln(a) + math.log(max(special.gammaincc(a, x), 1e-300))
        else:
            log_upper = math.log(_upper_gamma_nonpositive(a, x))
        return math.exp(log_upper - a * math.log(r) - p * math.log(Y) + x)

    def cutoff(self, rel: float = 1e-14, y0: float = 1.0, y_cap: float = 200.0) -> float:
        p, r = self.power, self.rate
        if r == 0:
            return 10.0
        a = p + 1
        if a <= 0:
            return max(2.0, y0 + 40.0 / r)
        # find Y with Gamma(a, rY) <= rel * Gamma(a, r*y0)
        ref = special.gammaincc(a, r * y0)
        Y = max(y0 + 1.0, a / r + 1.0)
        while special.gammaincc(a, r * Y) > rel * ref and Y < y_cap:
            Y += 0.5
        return Y


def _upper_gamma_nonpositive(a: float, x: float) -> float:
    from scipy.integrate import quad

    val, _ = quad(lambda t: t ** (a - 1) * math.exp(-t), x, math.inf)
    return val


def lower_region_rule(n: int):
    """Nodes and weights for {|x| <= 1/2, sqrt(1-x^2) <= y <= 1}."""
    xs, wx = _map(n, -0.5, 0.5)
    ylo = np.sqrt(1.0 - xs * xs)
    ys, wy = _map(n, ylo, np.ones_like(ylo))
    X = np.broadcast_to(xs[:, None], ys.shape)
    W = wx[:, None] * wy
    return X.ravel(), ys.ravel(), W.ravel()


def strip_rule(nx: int, ny: int, y0: float, Y: float):
    xs, wx = _map(nx, -0.5, 0.5)
    edges = np.arange(y0, Y, 1.0)
    edges = np.append(edges, Y) if edges[-1] < Y else edges
    lo, hi = edges[:-1], edges[1:]
    ys, wy = _map(ny, lo, hi)
    ys, wy = ys.ravel(), wy.ravel()
    X = np.repeat(xs, ys.size)
    Yn = np.tile(ys, xs.size)
    W = np.repeat(wx, ys.size) * np.tile(wy, xs.size)
    return X, Yn, W


def box_rule(n: int, xint, yint, panel: float = 0.5):
    (x0, x1), (y0, y1) = xint, yint
    xs, wx = _map(n, x0, x1)
    npan = max(1, math.ceil((y1 - y0) / panel))
    edges = np.linspace(y0, y1, npan + 1)
    ys, wy = _map(n, edges[:-1], edges[1:])
    ys, wy = ys.ravel(), wy.ravel()
    X = np.repeat(xs, ys.size)
    Yn = np.tile(ys, xs.size)
    W = np.repeat(wx, ys.size) * np.tile(wy, xs.size)
    return X, Yn, W


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float
    tail: float
    nodes: int


def _rel_change(val, prev) -> tuple[float, float]:
    err = float(np.max(np.abs(np.asarray(val) - np.asarray(prev))))
    scale = float(np.max(np.abs(val))) if np.size(val) else 0.0
    return err, scale


def integrate_fundamental_domain(func, envelope: Envelope, rtol: float = 1e-10,
                                 n0: int = 24, n_max: int = 192) -> QuadResult:
    """Integrate ``func(x, y)`` dx dy over the standard fundamental domain.

    ``func`` may return shape (..., npts); the integral is then taken along the
    last axis. The node count is doubled until two successive rules agree to
    ``rtol`` (relative to the largest component). Above the strip cutoff the
    integrand is replaced by its envelope, scaled to match the x-integral of
    ``|func|`` at the cutoff; that tail is added to the value and to the error.
    """
    Y = envelope.cutoff()
    prev = None
    n = n0
    err = math.inf
    while n <= n_max:
        x, y, w = lower_region_rule(n)
        low = np.sum(w * func(x, y), axis=-1)
        x, y, w = strip_rule(n, n, 1.0, Y)
        up = np.sum(w * func(x, y), axis=-1)
        val = low + up
        if prev is not None:
            err, scale = _rel_change(val, prev)
            if err <= rtol * max(scale, 1e-300):
                break
        prev = val
        n *= 2
    else:
        raise ToleranceNotMetError(f"domain quadrature did not reach rtol={rtol}: last change {err:.3e}")
    xs, wx = _map(n, -0.5, 0.5)
    at_cut = np.sum(wx * func(xs, np.full(n, Y)), axis=-1)
    tail = at_cut * envelope.tail_ratio(Y)
    tail_max = float(np.max(np.abs(tail))) if np.size(tail) else 0.0
    value = val + tail
    if np.ndim(value) == 0:
        value = complex(value)
    return QuadResult(value, float(err + tail_max), tail_max, int(x.size))


def integrate_box(func, xint, yint, rtol: float = 1e-10, n0: int = 16, n_max: int = 256) -> QuadResult:
    prev = None
    n = n0
    while n <= n_max:
        x, y, w = box_rule(n, xint, yint)
        val = np.sum(w * func(x, y), axis=-1)
        if prev is not None:
            err, scale = _rel_change(val, prev)
            if err <= rtol * max(scale, 1e-300):
                if np.ndim(val) == 0:
                    val = complex(val)
                return QuadResult(val, err, 0.0, int(x.size))
        prev = val
        n *= 2
    raise ToleranceNotMetError(f"box quadrature did not reach rtol={rtol}")

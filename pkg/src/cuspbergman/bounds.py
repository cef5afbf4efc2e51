"""Heat-kernel bound chain, Type (1)/(2) sup-norm bounds, lattice and unit sums.

Every inequality is reported as truncated value + rigorous tail against the
closed-form ceiling (``BoundReport``), never as a bare truncation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, special

from .exceptions import ConvergenceError, HypothesisViolationError
from .hyperbolic import UhpPoint
from .quadfield import FieldElement, QuadraticField, fundamental_unit, lattice_embeddings, minimal_distance

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class WeightVector:
    components: tuple[int, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("weight vector is empty")
        for k in comps:
            if not isinstance(k, (int, np.integer)) or k <= 0 or k % 2:
                raise ValueError(f"weights must be even positive integers, got {k!r}")

    @classmethod
    def of(cls, ks) -> "WeightVector":
        if isinstance(ks, WeightVector):
            return ks
        if isinstance(ks, (int, np.integer)):
            return cls((int(ks),))
        return cls(tuple(int(k) for k in ks))

    @property
    def r(self) -> int:
        return len(self.components)

    def product(self) -> int:
        return math.prod(self.components)


@dataclass(frozen=True)
class BoundReport:
    truncated_value: float
    tail_bound: float
    ceiling: float
    parameters: dict = field(default_factory=dict)

    @property
    def satisfied(self) -> bool:
        return self.truncated_value + self.tail_bound <= self.ceiling

    def to_dict(self) -> dict:
        return {
            "truncated_value": self.truncated_value,
            "tail_bound": self.tail_bound,
            "ceiling": self.ceiling,
            "satisfied": self.satisfied,
            "parameters": dict(self.parameters),
        }


# --- heat-kernel chain ----------------------------------------------------------------

def _heat_integrand(u: float, rho: float) -> float:
    # r = rho + u^2; cosh r - cosh rho = e^r (1 - e^{-u^2})(1 - e^{-(2 rho + u^2)}) / 2
    u2 = u * u
    r = rho + u2
    if u == 0.0:
        if rho == 0.0:
            return 0.0
        # limit u / sqrt(1 - e^{-u^2}) -> 1
        return 2 * SQRT2 * r * math.exp(-r) / math.sqrt(-math.expm1(-2 * rho))
    den = math.sqrt(-math.expm1(-u2) * -math.expm1(-(2 * rho + u2)))
    return 2 * SQRT2 * u * r * math.exp(-r) / den


def heat_integral(rho: float, atol: float = 1e-10) -> float:
    """int_rho^inf r e^{-r/2} / sqrt(cosh r - cosh rho) dr via r = rho + u^2."""
    if not rho >= 0:
        raise ValueError(f"rho must be >= 0, got {rho}")
    # e^{-r} r is below 1e-18 of its scale once u^2 > 45 + log-ish margin
    umax = math.sqrt(60.0 + 2.0 * math.log1p(rho))
    edges = np.linspace(0.0, umax, 9)
    total = 0.0
    err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = integrate.quad(_heat_integrand, lo, hi, args=(rho,), epsabs=atol / 20, epsrel=1e-13, limit=200)
        total += v
        err += e
    if err > atol:
        raise ConvergenceError(f"heat integral error estimate {err:.2e} above {atol}")
    return total


def heat_integral_ceiling(rho: float) -> float:
    return 2 * SQRT2 * math.exp(-rho)


def heat_upper_hkeqn1(k: int, rho: float) -> float:
    """k^2 / (sqrt(2) pi (k + 1/2)) * cosh(rho/2)^{-2k} * heat_integral(rho)."""
    pre = k * k / (SQRT2 * math.pi * (k + 0.5))
    return pre * math.exp(-2 * k * math.log(math.cosh(rho / 2))) * heat_integral(rho)


def heat_upper_hkeqn4(k: int, rho: float) -> float:
    return 8 * k * k * math.exp(-2 * rho) / (math.pi * (k + 0.5))


# --- Type (1) and the T-terms -------------------------------------------------------

def _inv_sinh2(x: float) -> float:
    s = math.sinh(x)
    return 1.0 / (s * s)


def type1_bound(weights, r_inj: float) -> float:
    """(36 + 1/sinh^2(r/4))^r * prod k_j."""
    w = WeightVector.of(weights)
    if not r_inj > 0:
        raise ValueError("r_inj must be positive")
    return (36.0 + _inv_sinh2(r_inj / 4)) ** w.r * w.product()


@dataclass(frozen=True)
class TTerms:
    T1: float
    T2: float
    T3: float
    T2_ceiling: float
    T3_ceiling: float

    @property
    def satisfied(self) -> bool:
        return self.T2 <= self.T2_ceiling and self.T3 <= self.T3_ceiling


def t_terms(r_inj: float, delta: float | None = None) -> TTerms:
    """T1 = 1 (identity), T2 = f(delta) sinh(r/2) sinh(delta)/sinh^2(r/4) and
    T3 = e^{r/2 - delta}/(4 sinh^2(r/4)) for f = e^{-2 rho}; delta defaults to 3r/4."""
    if not r_inj > 0:
        raise ValueError("r_inj must be positive")
    if delta is None:
        delta = 0.75 * r_inj
    if not delta > r_inj / 2:
        raise HypothesisViolationError("need delta > r_inj/2")
    inv = _inv_sinh2(r_inj / 4)
    T2 = math.exp(-2 * delta) * math.sinh(r_inj / 2) * math.sinh(delta) * inv
    T3 = math.exp(r_inj / 2 - delta) * inv / 4
    return TTerms(1.0, T2, T3, 8.0, inv / 4)


# --- Gamma identity ------------------------------------------------------------------

def gamma_ratio_integral(k: float) -> float:
    """int_0^inf (1 + b^2)^{-k} db = sqrt(pi) Gamma(k - 1/2) / (2 Gamma(k))."""
    if not k > 0.5:
        raise ValueError("need k > 1/2")
    return 0.5 * math.sqrt(math.pi) * math.exp(special.gammaln(k - 0.5) - special.gammaln(k))


def gamma_ratio_quadrature(k: float) -> float:
    v1, _ = integrate.quad(lambda b: (1.0 + b * b) ** (-k), 0.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    # b = 1/t on [1, inf): t^{2k-2} (1 + t^2)^{-k} dt on [0, 1]
    v2, _ = integrate.quad(lambda t: t ** (2 * k - 2) * (1.0 + t * t) ** (-k), 0.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    return v1 + v2


def _gamma_ratio(k: float) -> float:
    """Gamma(k - 1/2) / Gamma(k)."""
    return math.exp(special.gammaln(k - 0.5) - special.gammaln(k))


# --- lattice lemma -------------------------------------------------------------------

def _unit_embeddings(eps: FieldElement | tuple[float, float]) -> tuple[float, float]:
    if isinstance(eps, FieldElement):
        if not eps.is_unit():
            raise ValueError(f"{eps} is not a unit")
        return eps.embeddings()
    return float(eps[0]), float(eps[1])


def _one_dim_tail(A: float, k: int) -> float:
    """int_A^inf (1 + v^2)^{-k} dv."""
    if A < 0:
        raise ValueError("tail start must be nonnegative")
    return 0.5 * special.beta(0.5, k - 0.5) * special.betainc(k - 0.5, 0.5, 1.0 / (1.0 + A * A))


def auxlemma_lhs(field: QuadraticField, z: Sequence[UhpPoint], eps, weights,
                 lattice_radius: float = 10.0) -> BoundReport:
    """Lattice sum over alpha in O_F of prod_j h_j(sigma_j(alpha)), truncated to a box.

    With c_j = (1 - e_j^2) x_j / e_j and w_j = (1 + e_j^2) y_j / |e_j| the summand is
    prod_j (2 e_j/(1 + e_j^2))^{2k_j} (1 + ((alpha_j - c_j)/w_j)^2)^{-k_j}.
    The box is c_j +- lattice_radius * w_j. Outside it each lattice point owns a
    square of half-side a = s/sqrt(2) (2s = shortest lattice vector), on which
    the summand is dominated by the envelope shifted inward by a; the tail is
    the envelope's integral over the complement of the shrunken box divided by
    the square area. The ceiling is ``auxlemma_rhs``.
    """
    w = WeightVector.of(weights)
    if w.r != 2 or len(z) != 2:
        raise ValueError("the lattice lemma is implemented for real quadratic fields (d = 2)")
    if min(w.components) < 2:
        raise ValueError("need k_j >= 2 for convergence")
    e = _unit_embeddings(eps)
    ks = w.components
    centers, widths, log_peaks = [], [], []
    for ej, zj, kj in zip(e, z, ks):
        centers.append((1 - ej * ej) * zj.x / ej)
        widths.append((1 + ej * ej) * zj.y / abs(ej))
        log_peaks.append(2 * kj * math.log(2 * abs(ej) / (1 + ej * ej)))
    R = lattice_radius
    box = tuple((c - R * wd, c + R * wd) for c, wd in zip(centers, widths))
    _, _, s1, s2 = lattice_embeddings(field, box)
    log_terms = np.zeros(s1.shape)
    for sj, c, wd, kj, lp in zip((s1, s2), centers, widths, ks, log_peaks):
        t = (sj - c) / wd
        log_terms += lp - kj * np.log1p(t * t)
    truncated = math.fsum(np.exp(log_terms).tolist())

    s = minimal_distance(field) / 2
    a = s / math.sqrt(2)
    if any(R * wd <= 2 * a for wd in widths):
        raise ValueError("lattice_radius too small for a rigorous tail; increase it")
    full, tail = [], []
    for c, wd, kj, lp in zip(centers, widths, ks, log_peaks):
        peak = math.exp(lp)
        full.append(2 * peak * (a + wd * 0.5 * special.beta(0.5, kj - 0.5)))
        tail.append(2 * peak * wd * _one_dim_tail((R * wd - 2 * a) / wd, kj))
    area = (2 * a) ** 2
    tail_bound = float((tail[0] * full[1] + tail[1] * full[0]) / area)
    params = {
        "D": field.D,
        "unit_embeddings": [e[0], e[1]],
        "z": [[p.x, p.y] for p in z],
        "k": list(ks),
        "lattice_radius": R,
        "points": int(s1.size),
    }
    return BoundReport(truncated, tail_bound, auxlemma_rhs(z, e, ks), params)


def auxlemma_rhs(z: Sequence[UhpPoint], eps, weights) -> float:
    """prod_j Gamma(k_j-1/2)/Gamma(k_j) * |e_j|^{2k_j-1} y_j / ((1 + e_j^2)/2)^{2k_j-1}."""
    w = WeightVector.of(weights)
    e = _unit_embeddings(eps)
    out = 1.0
    for ej, zj, kj in zip(e, z, w.components):
        ae = abs(ej)
        out *= _gamma_ratio(kj) * zj.y * math.exp((2 * kj - 1) * (math.log(ae) - math.log((1 + ae * ae) / 2)))
    return out


# --- unit sum and cusp-stabilizer bound ----------------------------------------------

def unit_sum(field: QuadraticField, y: Sequence[float], n_max: int = 10) -> BoundReport:
    """Sum over e in {+-e0^n, |n| <= n_max} of prod_j 2 y_j / (1 + e_j^2).

    Uses the larger index set (signs included); the total over units modulo
    +-1 is half of it and is stored in ``parameters['projective_total']``.
    The tail uses prod_j 2/(1 + e_j^2) = 1/cosh^2(n log e0) <= 4 e0^{-2|n|}.
    """
    y1, y2 = (float(v) for v in y)
    if not (y1 > 0 and y2 > 0):
        raise ValueError("heights must be positive")
    e0 = fundamental_unit(field)
    l0 = math.log(e0.embeddings()[0])
    terms = []
    for n in range(-n_max, n_max + 1):
        # +e0^n and -e0^n give the same product
        t = y1 * y2 / math.cosh(n * l0) ** 2
        terms.extend((t, t))
    total = math.fsum(terms)
    q = math.exp(-2 * l0)
    tail = 2 * 2 * 4 * y1 * y2 * q ** (n_max + 1) / (1 - q)
    params = {"D": field.D, "y": [y1, y2], "n_max": n_max, "projective_total": total / 2,
              "fundamental_unit": [e0.a, e0.b]}
    return BoundReport(total, tail, (2 * math.pi) ** 2 * y1 * y2, params)


def unit_sum_direct(field: QuadraticField, y: Sequence[float], n_max: int) -> float:
    """Same truncated sum evaluated from explicit unit embeddings (comparator)."""
    from .quadfield import enumerate_units

    out = []
    for u in enumerate_units(field, n_max):
        s1, s2 = u.embeddings()
        out.append(2 * y[0] / (1 + s1 * s1) * 2 * y[1] / (1 + s2 * s2))
    return math.fsum(out)


def cusp_stabilizer_bound(weights, y: Sequence[float] | None = None, y_mode: str = "fixed",
                          c: float = 1.0) -> float:
    """prod_j 4 y_j Gamma(k_j - 1/2)/Gamma(k_j) k_j^2/(k_j + 1/2).

    ``y_mode='sup'`` substitutes y_j = c * k_j.
    """
    w = WeightVector.of(weights)
    if y_mode == "sup":
        ys = [c * k for k in w.components]
    elif y_mode == "fixed":
        if y is None or len(y) != w.r:
            raise ValueError("fixed mode needs one height per weight")
        ys = [float(v) for v in y]
    else:
        raise ValueError(f"unknown y_mode {y_mode!r}")
    out = 1.0
    for k, yj in zip(w.components, ys):
        out *= 4 * yj * _gamma_ratio(k) * k * k / (k + 0.5)
    return out


@dataclass(frozen=True)
class Type2Bound:
    type1: float
    cusp: float

    @property
    def total(self) -> float:
        return self.type1 + self.cusp


def type2_bound(weights, r_inj: float, y_mode: str = "sup", y: Sequence[float] | None = None,
                c: float = 1.0) -> Type2Bound:
    return Type2Bound(type1_bound(weights, r_inj), cusp_stabilizer_bound(weights, y, y_mode, c))

"""Real quadratic fields Q(sqrt D): exact elements, embeddings, units, lattice boxes.

Elements are stored as integer coordinates ``a + b*omega`` with respect to the
integral basis ``{1, omega}``; real embeddings are computed on demand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from .exceptions import BoxTooLargeError, IterationLimitError

LATTICE_CAP = 10**7
CF_MAX_ITER = 100_000


def is_squarefree(n: int) -> bool:
    if n < 1:
        return False
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 1
    return True


@dataclass(frozen=True)
class QuadraticField:
    D: int

    def __post_init__(self):
        if not isinstance(self.D, int) or self.D < 2 or not is_squarefree(self.D):
            raise ValueError(f"D must be a squarefree integer >= 2, got {self.D!r}")

    @property
    def omega_kind(self) -> str:
        return "half" if self.D % 4 == 1 else "sqrt"

    @property
    def trace_omega(self) -> int:
        return 1 if self.D % 4 == 1 else 0

    @property
    def norm_omega(self) -> int:
        return (1 - self.D) // 4 if self.D % 4 == 1 else -self.D

    @property
    def discriminant(self) -> int:
        return self.D if self.D % 4 == 1 else 4 * self.D

    @cached_property
    def omega_embeddings(self) -> tuple[float, float]:
        s = math.sqrt(self.D)
        if self.D % 4 == 1:
            return (1 + s) / 2, (1 - s) / 2
        return s, -s

    def element(self, a: int, b: int = 0) -> "FieldElement":
        return FieldElement(a, b, self)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(1, 0, self)

    @property
    def omega(self) -> "FieldElement":
        return FieldElement(0, 1, self)


@dataclass(frozen=True)
class FieldElement:
    a: int
    b: int
    field: QuadraticField

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise ValueError("elements of different fields")
            return other
        if isinstance(other, int):
            return FieldElement(other, 0, self.field)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.a + o.a, self.b + o.b, self.field)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(-self.a, -self.b, self.field)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.a - o.a, self.b - o.b, self.field)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        # omega^2 = t*omega - n
        t, n = self.field.trace_omega, self.field.norm_omega
        bd = self.b * o.b
        return FieldElement(self.a * o.a - n * bd, self.a * o.b + self.b * o.a + t * bd, self.field)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.unit_inverse() ** (-e)
        out = self.field.one
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def conjugate(self) -> "FieldElement":
        # sigma(omega) = t - omega
        return FieldElement(self.a + self.field.trace_omega * self.b, -self.b, self.field)

    def norm(self) -> int:
        t, n = self.field.trace_omega, self.field.norm_omega
        return self.a * self.a + t * self.a * self.b + n * self.b * self.b

    def trace(self) -> int:
        return 2 * self.a + self.field.trace_omega * self.b

    def is_unit(self) -> bool:
        return abs(self.norm()) == 1

    def unit_inverse(self) -> "FieldElement":
        nrm = self.norm()
        if abs(nrm) != 1:
            raise ValueError(f"{self} is not a unit (norm {nrm})")
        c = self.conjugate()
        return c if nrm == 1 else -c

    def embeddings(self) -> tuple[float, float]:
        return embeddings(self)

    def __repr__(self):
        return f"FieldElement({self.a}, {self.b}; D={self.field.D})"


def embeddings(xi: FieldElement) -> tuple[float, float]:
    """(sigma_1(xi), sigma_2(xi)) with sigma_1(omega) > sigma_2(omega)."""
    w1, w2 = xi.field.omega_embeddings
    if xi.field.D % 4 == 1:
        s = math.sqrt(xi.field.D)
        base = xi.a + xi.b / 2
        s1, s2 = base + xi.b * s / 2, base - xi.b * s / 2
    else:
        s1, s2 = xi.a + xi.b * w1, xi.a + xi.b * w2
    # the smaller embedding cancels; recover it from the exact norm
    nrm = xi.norm()
    if nrm != 0:
        if abs(s1) >= abs(s2):
            s2 = nrm / s1
        else:
            s1 = nrm / s2
    return s1, s2


def _normalize_unit(u: FieldElement) -> FieldElement:
    """Return the associate of ``u`` among {+-u, +-u'} with sigma_1 > 1."""
    s1, s2 = embeddings(u)
    if abs(s1) < 1:
        u = u.conjugate()
        s1 = s2
    return u if s1 > 0 else -u


def fundamental_unit(field: QuadraticField) -> FieldElement:
    """Smallest unit > 1 (in the first embedding), via the continued fraction of omega.

    The expansion of ``(P + sqrt D)/Q`` is carried in exact integers; each
    convergent ``p/q`` is tested for ``N(p - q*omega) = +-1``.
    """
    D = field.D
    if D % 4 == 1:
        P, Q = 1, 2
    else:
        P, Q = 0, 1
    r = math.isqrt(D)
    p_prev, p = 0, 1
    q_prev, q = 1, 0
    for _ in range(CF_MAX_ITER):
        a = (P + r) // Q
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        cand = FieldElement(p, -q, field)
        if abs(cand.norm()) == 1:
            return _normalize_unit(cand)
        P = a * Q - P
        Q = (D - P * P) // Q
    raise IterationLimitError(f"no unit found for D={D} within {CF_MAX_ITER} steps")


@dataclass(frozen=True)
class UnitGroup:
    fundamental_unit: FieldElement
    torsion: tuple[int, int] = (1, -1)

    @classmethod
    def of(cls, field: QuadraticField) -> "UnitGroup":
        return cls(fundamental_unit(field))


def enumerate_units(field: QuadraticField, n_max: int) -> list[FieldElement]:
    """The units ``+-eps0^n`` for ``|n| <= n_max``, ordered by (n, sign)."""
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    eps = fundamental_unit(field)
    out = []
    for n in range(-n_max, n_max + 1):
        u = eps ** n
        out.extend((u, -u))
    return out


def minimal_distance(field: QuadraticField) -> float:
    """Shortest nonzero vector length of O_F embedded in R^2."""
    best = math.inf
    w1, w2 = field.omega_embeddings
    sep = w1 - w2
    # a vector of length L has |b| <= 2L/sep and |a| <= L + |b|*max|w|
    L = math.sqrt(2.0)  # the element 1 has length sqrt(2)
    bmax = math.ceil(2 * L / sep)
    amax = math.ceil(L + bmax * max(abs(w1), abs(w2)))
    for b in range(-bmax, bmax + 1):
        for a in range(-amax, amax + 1):
            if a == 0 and b == 0:
                continue
            s1, s2 = embeddings(FieldElement(a, b, field))
            best = min(best, math.hypot(s1, s2))
    return best


def enumerate_lattice(field: QuadraticField, box, cap: int = LATTICE_CAP) -> list[FieldElement]:
    """Every alpha in O_F with sigma_1(alpha) in box[0] and sigma_2(alpha) in box[1].

    Intervals are closed. Coordinates are bounded through the inverse embedding
    matrix (with a small slack) and every candidate is then filtered.
    """
    (lo1, hi1), (lo2, hi2) = box
    if lo1 > hi1 or lo2 > hi2:
        return []
    w1, w2 = field.omega_embeddings
    sep = w1 - w2
    slack = 1e-9
    bmin = math.floor((lo1 - hi2) / sep - slack)
    bmax = math.ceil((hi1 - lo2) / sep + slack)
    approx = (bmax - bmin + 1) * (min(hi1 - lo1, hi2 - lo2) + 2)
    if approx > cap:
        raise BoxTooLargeError(f"box would hold ~{approx:.3g} candidates (cap {cap})")
    out = []
    for b in range(bmin, bmax + 1):
        amin = math.floor(max(lo1 - b * w1, lo2 - b * w2) - slack)
        amax = math.ceil(min(hi1 - b * w1, hi2 - b * w2) + slack)
        for a in range(amin, amax + 1):
            xi = FieldElement(a, b, field)
            s1, s2 = embeddings(xi)
            if lo1 <= s1 <= hi1 and lo2 <= s2 <= hi2:
                out.append(xi)
                if len(out) > cap:
                    raise BoxTooLargeError(f"more than {cap} lattice points in box")
    return out


def lattice_embeddings(field: QuadraticField, box, cap: int = LATTICE_CAP):
    """Vectorized ``enumerate_lattice``: arrays (a, b, sigma_1, sigma_2) of the box points.

    Same candidate bounds and closed-interval filter; float embeddings are
    a + b*omega_j computed directly (adequate for the moderate coordinates of a box).
    """
    import numpy as np

    (lo1, hi1), (lo2, hi2) = box
    empty = np.zeros(0, dtype=np.int64)
    if lo1 > hi1 or lo2 > hi2:
        return empty, empty, empty.astype(float), empty.astype(float)
    w1, w2 = field.omega_embeddings
    sep = w1 - w2
    slack = 1e-9
    bmin = math.floor((lo1 - hi2) / sep - slack)
    bmax = math.ceil((hi1 - lo2) / sep + slack)
    approx = (bmax - bmin + 1) * (min(hi1 - lo1, hi2 - lo2) + 2)
    if approx > cap:
        raise BoxTooLargeError(f"box would hold ~{approx:.3g} candidates (cap {cap})")
    A, B = [], []
    for b in range(bmin, bmax + 1):
        amin = math.floor(max(lo1 - b * w1, lo2 - b * w2) - slack)
        amax = math.ceil(min(hi1 - b * w1, hi2 - b * w2) + slack)
        if amax >= amin:
            A.append(np.arange(amin, amax + 1, dtype=np.int64))
            B.append(np.full(amax - amin + 1, b, dtype=np.int64))
    if not A:
        return empty, empty, empty.astype(float), empty.astype(float)
    a = np.concatenate(A)
    b = np.concatenate(B)
    s1 = a + b * w1
    s2 = a + b * w2
    keep = (s1 >= lo1) & (s1 <= hi1) & (s2 >= lo2) & (s2 <= hi2)
    if int(keep.sum()) > cap:
        raise BoxTooLargeError(f"more than {cap} lattice points in box")
    return a[keep], b[keep], s1[keep], s2[keep]

"""Orbit displacements for PSL_2(Z) and its principal congruence subgroups.

Elements with displacement at most R at a base point z = x + iy are found by
walking integer matrix entries directly. Conjugating by the affine map sending
i to z turns the displacement condition into

    2 cosh(rho) = (a - cx)^2 + ((ax + b) - x(cx + d))^2 / y^2 + c^2 y^2 + (cx + d)^2,

so |c| <= sqrt(L)/y, |cx + d| <= sqrt(L) and |a - cx| <= sqrt(L) with
L = 2 cosh R. For c > 0 the entry b is determined by ad - bc = 1.
"""
from __future__ import annotations

import bisect
import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate

from .exceptions import (
    CapExceededError,
    DivergenceError,
    EmptyOrbitError,
    HypothesisViolationError,
)
from .hyperbolic import MoebiusMap, UhpPoint, displacement

RADIUS_CAP = 12.0
SAFETY_FACTOR = 0.9


@dataclass(frozen=True)
class GroupSpec:
    kind: str = "full_psl2z"
    N: int = 1
    exclude_cusp_stabilizers: bool = False

    def __post_init__(self):
        if self.kind == "full_psl2z":
            if self.N != 1:
                raise ValueError("full_psl2z takes N = 1")
        elif self.kind == "principal_congruence":
            if self.N < 3:
                raise ValueError("principal congruence level must be N >= 3 (torsion-free)")
        else:
            raise ValueError(f"unknown group kind {self.kind!r}")

    @classmethod
    def parse(cls, name: str, exclude_cusp_stabilizers: bool = False) -> "GroupSpec":
        """'psl2z' or 'gammaN' (N >= 3)."""
        s = name.strip().lower()
        if s in ("psl2z", "full", "full_psl2z", "sl2z"):
            return cls("full_psl2z", 1, exclude_cusp_stabilizers)
        if s.startswith("gamma") and s[5:].isdigit():
            return cls("principal_congruence", int(s[5:]), exclude_cusp_stabilizers)
        raise ValueError(f"cannot parse group {name!r}; use 'psl2z' or 'gammaN'")

    def contains(self, a: int, b: int, c: int, d: int) -> bool:
        if self.kind == "full_psl2z":
            return True
        N = self.N
        if b % N or c % N:
            return False
        return (a % N == 1 and d % N == 1) or (a % N == N - 1 and d % N == N - 1)

    @property
    def label(self) -> str:
        return "psl2z" if self.kind == "full_psl2z" else f"gamma{self.N}"


def is_parabolic(a: int, b: int, c: int, d: int) -> bool:
    """Nonidentity element of trace +-2, i.e. a nontrivial cusp-stabilizer element."""
    return abs(a + d) == 2 and not (b == 0 and c == 0)


@dataclass(frozen=True)
class OrbitRecord:
    gamma: MoebiusMap
    rho: float

    def sort_key(self):
        return (self.rho, self.gamma.key())


@dataclass(frozen=True)
class CountingData:
    z: UhpPoint
    rhos: tuple[float, ...]
    spec: GroupSpec
    R: float

    def __post_init__(self):
        rh = tuple(sorted(self.rhos))
        object.__setattr__(self, "rhos", rh)

    @classmethod
    def from_records(cls, records: Sequence[OrbitRecord], z: UhpPoint, spec: GroupSpec, R: float):
        return cls(z, tuple(r.rho for r in records), spec, R)


def _frob_cosh(a, b, c, d, x, y) -> float:
    """2 cosh(rho) for the matrix (a b; c d) at x + iy."""
    u = a - c * x
    v = ((a * x + b) - x * (c * x + d)) / y
    w = c * y
    t = c * x + d
    return u * u + v * v + w * w + t * t


def _scan_c(c: int, x: float, y: float, L: float, spec: GroupSpec) -> list[tuple[int, int, int, int]]:
    """Projective elements with this lower-left entry c >= 0 and 2cosh(rho) <= L (with slack)."""
    out = []
    sq = math.sqrt(L)
    Lslack = L * (1 + 1e-12) + 1e-12
    if c == 0:
        # a = d = 1, b integer with b^2/y^2 + 2 <= L
        if L < 2:
            return out
        bmax = math.floor(y * math.sqrt(max(L - 2, 0.0)) + 1e-9)
        for b in range(-bmax, bmax + 1):
            if b == 0:
                continue
            if spec.contains(1, b, 0, 1) and _frob_cosh(1, b, 0, 1, x, y) <= Lslack:
                out.append((1, b, 0, 1))
        return out
    dlo = math.floor(-c * x - sq) - 1
    dhi = math.ceil(-c * x + sq) + 1
    alo = math.floor(c * x - sq) - 1
    ahi = math.ceil(c * x + sq) + 1
    for d in range(dlo, dhi + 1):
        if math.gcd(d, c) != 1:
            continue
        if c == 1:
            a0 = alo
            step = 1
        else:
            inv = pow(d % c, -1, c)
            a0 = alo + ((inv - alo) % c)
            step = c
        for a in range(a0, ahi + 1, step):
            num = a * d - 1
            b = num // c
            if spec.contains(a, b, c, d) and _frob_cosh(a, b, c, d, x, y) <= Lslack:
                out.append((a, b, c, d))
    return out


def _scan_chunk(args):
    cs, x, y, L, spec = args
    res = []
    for c in cs:
        res.extend(_scan_c(c, x, y, L, spec))
    return res


def enumerate_orbit(spec: GroupSpec, z: UhpPoint, R: float, cap: float = RADIUS_CAP,
                    workers: int = 1) -> list[OrbitRecord]:
    """All nonidentity projective elements with displacement <= R at ``z``.

    Sorted by (rho, sign-normalized key). When ``spec.exclude_cusp_stabilizers``
    is set, parabolic elements are dropped. Elliptic elements of the full
    modular group are kept (they show up with small or zero rho).
    """
    if not R <= cap:
        raise CapExceededError(f"radius {R} exceeds the cap {cap}")
    if R < 0:
        return []
    x, y = z.x, z.y
    L = 2.0 * math.cosh(R)
    step = spec.N if spec.kind == "principal_congruence" else 1
    cmax = math.floor(math.sqrt(L) / y + 1e-9)
    cs = list(range(0, cmax + 1, step))
    if workers > 1 and len(cs) > 1:
        chunks = [cs[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_scan_chunk, [(ch, x, y, L, spec) for ch in chunks]))
        found = [m for p in parts for m in p]
    else:
        found = _scan_chunk((cs, x, y, L, spec))
    out = []
    for a, b, c, d in found:
        if spec.exclude_cusp_stabilizers and is_parabolic(a, b, c, d):
            continue
        g = MoebiusMap(a, b, c, d).normalized()
        rho = displacement(g, z)
        if rho <= R:
            out.append(OrbitRecord(g, rho))
    out.sort(key=OrbitRecord.sort_key)
    return out


def counting_data(spec: GroupSpec, z: UhpPoint, R: float, workers: int = 1) -> CountingData:
    return CountingData.from_records(enumerate_orbit(spec, z, R, workers=workers), z, spec, R)


def counting_function(data: CountingData, rho: float) -> int:
    """Number of records with displacement <= rho (right-continuous)."""
    return bisect.bisect_right(data.rhos, rho)


def default_sample_grid() -> list[UhpPoint]:
    """25 base points spread over the standard fundamental domain."""
    return [UhpPoint(float(x), float(y)) for x in np.linspace(-0.45, 0.45, 5)
            for y in (1.0, 1.25, 1.5, 1.75, 2.0)]


def injectivity_radius(spec: GroupSpec, sample: Iterable[UhpPoint], R: float,
                       workers: int = 1) -> float:
    """Minimum displacement over the samples and all non-excluded elements.

    This is an upper bound for the true infimum, since only finitely many
    base points are visited.
    """
    best = math.inf
    for z in sample:
        recs = enumerate_orbit(spec, z, R, workers=workers)
        if recs:
            best = min(best, recs[0].rho)
    if not math.isfinite(best):
        raise EmptyOrbitError(f"no element within radius {R}; increase R")
    return best


@dataclass(frozen=True)
class JLTerms:
    stieltjes: float
    boundary: float
    integral: float

    @property
    def total(self) -> float:
        return self.stieltjes + self.boundary + self.integral


def _check_decay(f: Callable[[float], float], delta: float) -> None:
    g1 = f(delta + 20.0) * math.exp(delta + 20.0)
    g2 = f(delta + 40.0) * math.exp(delta + 40.0)
    if not g2 < g1:
        raise DivergenceError("f must decay faster than exp(-rho) for the orbit integral to converge")


def _tail_integral(f: Callable[[float], float], delta: float, r: float) -> float:
    """int_delta^inf f(rho) sinh(rho + r/2) d rho, cut where the integrand drops below 1e-14."""
    g = lambda t: f(t) * math.sinh(t + r / 2)  # noqa: E731
    ref = max(abs(g(delta)), 1.0)
    upper = delta + 1.0
    while abs(g(upper)) > 1e-14 * ref and upper < delta + 700.0:
        upper += 1.0
    pts = np.linspace(delta, upper, int(upper - delta) + 1)
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        val, _ = integrate.quad(g, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=200)
        total += val
    return total


def jl_terms(f: Callable[[float], float], delta: float, r: float, data: CountingData | None,
             include_identity: bool = True) -> JLTerms:
    """The three terms of the orbit counting inequality for a decreasing f.

    The Stieltjes term is f(0) for the identity (when ``include_identity``)
    plus f(rho) over recorded elements with rho <= delta.
    """
    if not r > 0:
        raise HypothesisViolationError("the injectivity radius must be positive")
    if not delta > r / 2:
        raise HypothesisViolationError(f"need delta > r/2, got delta={delta}, r={r}")
    if data is not None and delta > data.R:
        raise ValueError(f"counting data only covers rho <= {data.R}, delta={delta}")
    _check_decay(f, delta)
    first = f(0.0) if include_identity else 0.0
    if data is not None:
        n = counting_function(data, delta)
        first += math.fsum(f(rho) for rho in data.rhos[:n])
    s4 = math.sinh(r / 4)
    boundary = f(delta) * math.sinh(r / 2) * math.sinh(delta) / (s4 * s4)
    integral = _tail_integral(f, delta, r) / (2 * s4 * s4)
    return JLTerms(first, boundary, integral)


def jl_upper_bound(f: Callable[[float], float], delta: float, r: float,
                   data: CountingData | None, include_identity: bool = True) -> float:
    return jl_terms(f, delta, r, data, include_identity).total


def exp2_tail_closed_form(delta: float, r: float) -> float:
    """int_delta^inf e^{-2 rho} sinh(rho + r/2) d rho in closed form."""
    return 0.5 * (math.exp(r / 2 - delta) - math.exp(-r / 2 - 3 * delta) / 3)


def _exp2(rho: float) -> float:
    return math.exp(-2.0 * rho)


@dataclass(frozen=True)
class OrbitSum:
    value: float
    tail: float
    r_inj: float
    count: int


def orbit_exp_sum(spec: GroupSpec, z: UhpPoint, R: float, r_inj: float | None = None,
                  workers: int = 1) -> OrbitSum:
    """Truncated sum of exp(-2 rho) over recorded elements, with a tail bound beyond R.

    The tail is the boundary and integral terms of the counting inequality
    at delta = max(R, 3r/4); no non-excluded element has rho below r, so
    nothing between R and 3r/4 is missed. Without ``r_inj`` the injectivity radius is measured on the
    default grid and multiplied by the safety factor 0.9.
    """
    if r_inj is None:
        r_inj = SAFETY_FACTOR * injectivity_radius(spec, default_sample_grid(), min(R, 6.0), workers)
    recs = enumerate_orbit(spec, z, R, workers=workers)
    value = math.fsum(math.exp(-2 * rec.rho) for rec in recs)
    t = jl_terms(_exp2, max(R, 0.75 * r_inj), r_inj, None, include_identity=False)
    return OrbitSum(value, t.boundary + t.integral, r_inj, len(recs))


def write_orbit_csv(records: Sequence[OrbitRecord], fh=None) -> str:
    """CSV with header a,b,c,d,rho; rows in (rho, key) order. Returns the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", "b", "c", "d", "rho"])
    for rec in sorted(records, key=OrbitRecord.sort_key):
        a, b, c, d = rec.gamma.key()
        w.writerow([a, b, c, d, "%.17g" % rec.rho])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text

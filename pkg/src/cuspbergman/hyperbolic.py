"""Geometry of the upper half-plane H and of products H^r.

Points are immutable dataclasses; all functions are pure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .exceptions import InvalidPointError, IterationLimitError, StepTooLargeError

REDUCTION_MAX_ITER = 10_000


@dataclass(frozen=True)
class UhpPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (self.y > 0) or not math.isfinite(self.x) or not math.isfinite(self.y):
            raise InvalidPointError(f"not a point of H: x={self.x!r}, y={self.y!r}")

    @classmethod
    def from_complex(cls, z: complex) -> "UhpPoint":
        return cls(float(z.real), float(z.imag))

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


@dataclass(frozen=True)
class PolyPoint:
    coords: tuple[UhpPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        if len(self.coords) < 1:
            raise InvalidPointError("a point of H^r needs r >= 1 coordinates")

    @property
    def r(self) -> int:
        return len(self.coords)

    def __getitem__(self, j: int) -> UhpPoint:
        return self.coords[j]

    def __len__(self) -> int:
        return len(self.coords)


@dataclass(frozen=True, eq=False)
class MoebiusMap:
    """Real 2x2 matrix of positive determinant acting by fractional-linear maps.

    With ``projective=True`` the maps ``g`` and ``-g`` compare (and hash) equal.
    """

    a: float
    b: float
    c: float
    d: float
    projective: bool = True

    def __post_init__(self):
        if not self.det > 0:
            raise ValueError(f"determinant must be positive, got {self.det}")

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    @property
    def trace(self):
        return self.a + self.d

    def entries(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def key(self) -> tuple:
        """Entries with the sign fixed so that the first nonzero entry is positive."""
        e = self.entries()
        if not self.projective:
            return e
        for v in e:
            if v != 0:
                return e if v > 0 else tuple(-w for w in e)
        return e

    def __eq__(self, other):
        if not isinstance(other, MoebiusMap):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        a, b, c, d = self.entries()
        p, q, r, s = other.entries()
        return MoebiusMap(a * p + b * r, a * q + b * s, c * p + d * r, c * q + d * s,
                          self.projective and other.projective)

    def inverse(self) -> "MoebiusMap":
        # adjugate; the projective action is unchanged by the scalar 1/det
        if self.det == 1:
            return MoebiusMap(self.d, -self.b, -self.c, self.a, self.projective)
        det = self.det
        return MoebiusMap(self.d / det, -self.b / det, -self.c / det, self.a / det, self.projective)

    def normalized(self) -> "MoebiusMap":
        return MoebiusMap(*self.key(), projective=self.projective)

    def __call__(self, z: UhpPoint) -> UhpPoint:
        return apply_moebius(self, z)

    def __repr__(self):
        return f"MoebiusMap({self.a}, {self.b}, {self.c}, {self.d})"


IDENTITY = MoebiusMap(1, 0, 0, 1)
T = MoebiusMap(1, 1, 0, 1)
S = MoebiusMap(0, -1, 1, 0)


def geodesic_distance(z: UhpPoint, w: UhpPoint) -> float:
    """Hyperbolic distance via cosh^2(d/2) = |z-w|^2 / (4 Im z Im w) + 1."""
    dx = z.x - w.x
    dy = z.y - w.y
    arg = (dx * dx + dy * dy) / (4.0 * z.y * w.y)
    return 2.0 * math.acosh(max(math.sqrt(arg + 1.0), 1.0))


def apply_moebius(g: MoebiusMap, z: UhpPoint) -> UhpPoint:
    a, b, c, d = (float(v) for v in g.entries())
    den_re = c * z.x + d
    den_im = c * z.y
    den2 = den_re * den_re + den_im * den_im
    num_re = a * z.x + b
    num_im = a * z.y
    x = (num_re * den_re + num_im * den_im) / den2
    y = float(g.det) * z.y / den2
    return UhpPoint(x, y)


def displacement(g: MoebiusMap, z: UhpPoint) -> float:
    return geodesic_distance(z, apply_moebius(g, z))


def volume_element(z: PolyPoint | UhpPoint) -> float:
    """Density of the hyperbolic volume form against dx_1 dy_1 ... dx_r dy_r."""
    coords = (z,) if isinstance(z, UhpPoint) else z.coords
    out = 1.0
    for p in coords:
        out /= p.y * p.y
    return out


def reduce_psl2z(z: UhpPoint) -> tuple[UhpPoint, MoebiusMap]:
    """Move ``z`` into the standard fundamental domain of PSL_2(Z).

    Returns ``(z', g)`` with ``g z = z'``, ``|Re z'| <= 1/2`` and ``|z'| >= 1``.
    ``g`` has exact integer entries.
    """
    x, y = z.x, z.y
    a, b, c, d = 1, 0, 0, 1
    for _ in range(REDUCTION_MAX_ITER):
        n = math.floor(x + 0.5)
        if n:
            x -= n
            a, b = a - n * c, b - n * d
        r2 = x * x + y * y
        if r2 >= 1.0 - 1e-15:
            return UhpPoint(x, y), MoebiusMap(a, b, c, d)
        if r2 == 0.0:
            break
        x, y = -x / r2, y / r2
        a, b, c, d = -c, -d, a, b
    raise IterationLimitError(f"reduction did not terminate for {z}")


def laplacian_log_y_fd(z: UhpPoint, h: float) -> float:
    """Five-point Euclidean Laplacian of log(y) at ``z``; tends to -1/y^2 as O(h^2)."""
    if not h > 0 or h >= z.y / 2:
        raise StepTooLargeError(f"need 0 < h < y/2, got h={h}, y={z.y}")
    f = lambda x, y: math.log(y)  # noqa: E731
    x, y = z.x, z.y
    return (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4.0 * f(x, y)) / (h * h)


def poly_distance(z: PolyPoint, w: PolyPoint) -> Sequence[float]:
    """Per-coordinate distances on H^r."""
    if z.r != w.r:
        raise ValueError("dimension mismatch")
    return [geodesic_distance(p, q) for p, q in zip(z.coords, w.coords)]

"""Desk-scale checks of the Bergman-kernel asymptotics for level-one cusp forms."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import optimize

from ._quadrature import Envelope, integrate_box, integrate_fundamental_domain
from .exceptions import BoxOutsideDomainError
from .forms import bergman_kernel, bergman_values, dim_cusp_forms, orthonormal_basis
from .hyperbolic import UhpPoint, laplacian_log_y_fd, reduce_psl2z

VOL_PSL2Z = math.pi / 3


@dataclass(frozen=True)
class AsymptoticTarget:
    r: int = 1
    cover_degree: int = 1
    bundle_rank: int = 1

    def __post_init__(self):
        if min(self.r, self.cover_degree, self.bundle_rank) < 1:
            raise ValueError("all fields must be >= 1")


def limit_target(t: AsymptoticTarget) -> float:
    """cover_degree * bundle_rank / (4 pi)^r."""
    return t.cover_degree * t.bundle_rank / (4 * math.pi) ** t.r


def limit_target_exact(t: AsymptoticTarget) -> tuple[Fraction, int]:
    """(c, p) with limit_target = c / pi^p, c rational."""
    return Fraction(t.cover_degree * t.bundle_rank, 4 ** t.r), t.r


def curvature_density(z: UhpPoint, h: float, k0: int = 1) -> float:
    """Curvature of the weight-k0 Petersson metric against mu_hyp, from the FD Laplacian.

    -k0 * Lap(log y) * y^2 / (4 pi); the exact value is k0 / (4 pi).
    """
    return -k0 * laplacian_log_y_fd(z, h) * z.y * z.y / (4 * math.pi)


def ratio_series(z: UhpPoint, weights: Sequence[int]) -> list[tuple[int, float]]:
    return [(k, bergman_kernel(k, z) / k) for k in weights]


@dataclass(frozen=True)
class MassBox:
    """Axis-parallel box x0 <= x <= x1, y0 <= y <= y1 in H.

    With ``in_domain`` set the box must lie in the standard fundamental domain.
    """

    x0: float
    x1: float
    y0: float
    y1: float
    in_domain: bool = True

    def __post_init__(self):
        if not (self.x0 < self.x1 and 0 < self.y0 < self.y1):
            raise ValueError(f"malformed box {self.x0, self.x1, self.y0, self.y1}")
        if self.in_domain and not self.inside_fundamental_domain():
            raise BoxOutsideDomainError("box is flagged as inside the fundamental domain but escapes it")

    def inside_fundamental_domain(self) -> bool:
        if self.x0 < -0.5 or self.x1 > 0.5:
            return False
        xmin = 0.0 if self.x0 <= 0 <= self.x1 else min(abs(self.x0), abs(self.x1))
        return xmin * xmin + self.y0 * self.y0 >= 1.0

    def hyperbolic_area(self) -> float:
        return (self.x1 - self.x0) * (1 / self.y0 - 1 / self.y1)


STANDARD_BOX = (-0.5, 0.5, 1.2, 2.0)


def fundamental_domain_volume() -> float:
    """Volume of the standard fundamental domain by quadrature of dx dy / y^2."""
    res = integrate_fundamental_domain(lambda x, y: 1.0 / (y * y), Envelope(-2.0, 0.0), rtol=1e-13)
    return float(res.value.real)


@dataclass(frozen=True)
class QueMass:
    k: int
    mass: float
    target: float
    error: float
    volume_quadrature: float
    volume_exact: float = VOL_PSL2Z


def que_mass(A: MassBox | None, k: int) -> QueMass:
    """(1/dim S_k) int_A B_k dmu_hyp against mu_hyp(A) / vol(X); ``A=None`` is the whole domain."""
    dim = dim_cusp_forms(k)
    if dim == 0:
        raise ValueError(f"S_{k} is zero; the normalized mass is undefined")
    basis = orthonormal_basis(k)
    vol = fundamental_domain_volume()
    if A is None:
        res = integrate_fundamental_domain(lambda x, y: basis.kernel_values(x, y) / (y * y),
                                           Envelope(k - 2, 4 * math.pi))
        target = 1.0
    else:
        if not A.inside_fundamental_domain():
            raise BoxOutsideDomainError("the mass box escapes the standard fundamental domain")
        res = integrate_box(lambda x, y: basis.kernel_values(x, y) / (y * y), (A.x0, A.x1), (A.y0, A.y1))
        target = A.hyperbolic_area() / vol
    mass = float(res.value.real) / dim
    return QueMass(k, mass, target, abs(mass - target), vol)


@dataclass(frozen=True)
class DimensionCheck:
    integral: float
    dim: int
    rel_error: float


def dimension_consistency(k: int) -> DimensionCheck:
    """int_X B_k dmu_hyp by pointwise quadrature, compared with dim S_k."""
    dim = dim_cusp_forms(k)
    if dim == 0:
        return DimensionCheck(0.0, 0, 0.0)
    basis = orthonormal_basis(k)
    res = integrate_fundamental_domain(lambda x, y: basis.kernel_values(x, y) / (y * y),
                                       Envelope(k - 2, 4 * math.pi))
    val = float(res.value.real)
    return DimensionCheck(val, dim, abs(val - dim) / dim)


@dataclass(frozen=True)
class SupScan:
    k: int
    value: float
    point: UhpPoint
    ratio: float


def supnorm_scan(k: int, nx: int = 200, ny: int = 200, y_max: float | None = None) -> SupScan:
    """Max of B_k over a grid of the reduced domain, refined by Nelder-Mead.

    The reported ratio is sup / k^{3/2}.
    """
    basis = orthonormal_basis(k)
    if basis.dim == 0:
        return SupScan(k, 0.0, UhpPoint(0.0, 1.0), 0.0)
    if y_max is None:
        y_max = max(10.0, k / (2 * math.pi))
    xs = np.linspace(-0.5, 0.5, nx)
    ys = np.linspace(math.sqrt(3) / 2, y_max, ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    keep = X * X + Y * Y >= 1.0
    xv, yv = X[keep], Y[keep]
    vals = basis.kernel_values(xv, yv)
    i = int(np.argmax(vals))
    x0 = np.array([xv[i], yv[i]])

    def neg(p):
        if p[1] <= 0.05:
            return 0.0
        return -float(bergman_values(basis, np.array([p[0]]), np.array([p[1]]))[0])

    res = optimize.minimize(neg, x0, method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
    best_val, best_pt = float(vals[i]), (float(xv[i]), float(yv[i]))
    if -res.fun > best_val:
        best_val = float(-res.fun)
        best_pt = (float(res.x[0]), float(res.x[1]))
    # the simplex may step across x = +-1/2; report the reduced representative
    point, _ = reduce_psl2z(UhpPoint(*best_pt))
    return SupScan(k, best_val, point, best_val / k ** 1.5)

"""Level-one modular forms: exact q-expansions, Petersson products, Bergman kernel.

Coefficient arithmetic is exact (Python integers and Fractions). Numerical
evaluation of a basis monomial E4^a E6^b Delta^c goes through the three
generators separately: summing the monomial's own q-series near the zero of
E4 at rho = e^{pi i/3} loses up to 20 digits to cancellation at weight 60,
whereas the product of separately evaluated factors does not.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import mpmath
import numpy as np

from ._quadrature import Envelope, integrate_fundamental_domain, lower_region_rule
from .exceptions import (
    GramNotPositiveDefiniteError,
    TailTooLargeError,
    ToleranceNotMetError,
)
from .hyperbolic import UhpPoint, reduce_psl2z

TWO_PI = 2.0 * math.pi
EVAL_RTOL = 1e-12
Y_MIN = 0.5


# --- exact coefficient arithmetic -------------------------------------------------

def _mul(a: Sequence[int], b: Sequence[int], M: int) -> tuple:
    out = np.convolve(np.array(a[: M + 1], dtype=object), np.array(b[: M + 1], dtype=object))
    return tuple(out[: M + 1].tolist())


def _pow(a: Sequence[int], e: int, M: int) -> tuple:
    out = (1,) + (0,) * M
    base = tuple(a[: M + 1])
    while e:
        if e & 1:
            out = _mul(out, base, M)
        e >>= 1
        if e:
            base = _mul(base, base, M)
    return out


def divisor_sums(p: int, M: int) -> list[int]:
    """sigma_p(n) for n = 0..M (sigma_p(0) := 0)."""
    s = [0] * (M + 1)
    for d in range(1, M + 1):
        dp = d ** p
        for m in range(d, M + 1, d):
            s[m] += dp
    return s


@dataclass(frozen=True)
class QExpansion:
    """Truncated Fourier expansion sum_{n<=M} a_n q^n of a weight-k form.

    ``factors`` records (a, b, c) when the form is E4^a E6^b Delta^c, which
    enables the stable product evaluation.
    """

    weight: int
    coeffs: tuple
    factors: tuple[int, int, int] | None = None

    def __post_init__(self):
        if self.weight < 4 or self.weight % 2:
            raise ValueError(f"weight must be an even integer >= 4, got {self.weight}")
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if not self.coeffs:
            raise ValueError("need at least one coefficient")

    @property
    def M(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_cusp(self) -> bool:
        return self.coeffs[0] == 0

    @property
    def tail_bound_constant(self) -> float:
        """C_f = max_{1<=n<=M} |a_n| / n^k."""
        k = self.weight
        best = Fraction(0)
        for n, a in enumerate(self.coeffs[1:], start=1):
            v = Fraction(abs(a)) / Fraction(n) ** k
            if v > best:
                best = v
        return float(best)

    def truncate(self, M: int) -> "QExpansion":
        return QExpansion(self.weight, self.coeffs[: M + 1], self.factors)

    def __mul__(self, other: "QExpansion") -> "QExpansion":
        M = min(self.M, other.M)
        fac = None
        if self.factors is not None and other.factors is not None:
            fac = tuple(u + v for u, v in zip(self.factors, other.factors))
        return QExpansion(self.weight + other.weight, _mul(self.coeffs, other.coeffs, M), fac)

    def __add__(self, other: "QExpansion") -> "QExpansion":
        if self.weight != other.weight:
            raise ValueError("cannot add forms of different weight")
        M = min(self.M, other.M)
        return QExpansion(self.weight, tuple(a + b for a, b in zip(self.coeffs[: M + 1], other.coeffs[: M + 1])))

    def scale(self, s) -> "QExpansion":
        return QExpansion(self.weight, tuple(s * a for a in self.coeffs))


@lru_cache(maxsize=None)
def _eisenstein_coeffs(k: int, M: int) -> tuple:
    c = {4: 240, 6: -504}[k]
    sig = divisor_sums(k - 1, M)
    return (1,) + tuple(c * s for s in sig[1:])


def eisenstein(k: int, M: int) -> QExpansion:
    """E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n for k in {4, 6}."""
    if k not in (4, 6):
        raise ValueError("only E4 and E6 are provided")
    fac = (1, 0, 0) if k == 4 else (0, 1, 0)
    return QExpansion(k, _eisenstein_coeffs(k, M), fac)


@lru_cache(maxsize=None)
def _delta_coeffs(M: int) -> tuple:
    # prod (1 - q^n)^3 = sum_m (-1)^m (2m+1) q^{m(m+1)/2}  (Jacobi)
    cube = [0] * (M + 1)
    m = 0
    while m * (m + 1) // 2 <= M:
        cube[m * (m + 1) // 2] += (-1) ** m * (2 * m + 1)
        m += 1
    p24 = _pow(cube, 8, M)
    return (0,) + p24[:M]


def delta(M: int) -> QExpansion:
    """Delta = q prod (1 - q^n)^24."""
    return QExpansion(12, _delta_coeffs(M), (0, 0, 1))


def dim_cusp_forms(k: int) -> int:
    if k < 0 or k % 2:
        return 0
    if k == 2:
        return 0
    return k // 12 - 1 if k % 12 == 2 else k // 12


def monomial_exponents(k: int) -> list[tuple[int, int, int]]:
    """(a, b, c) with 4a + 6b + 12c = k, c >= 1, b in {0, 1}; one per c."""
    out = []
    if k % 2:
        return out
    c = 1
    while 12 * c <= k:
        rem = k - 12 * c
        if rem % 4 == 0:
            out.append((rem // 4, 0, c))
        elif rem >= 6:
            out.append(((rem - 6) // 4, 1, c))
        c += 1
    return out


@lru_cache(maxsize=None)
def _monomial_coeffs(a: int, b: int, c: int, M: int) -> tuple:
    out = _pow(_eisenstein_coeffs(4, M), a, M)
    if b:
        out = _mul(out, _eisenstein_coeffs(6, M), M)
    return _mul(out, _pow(_delta_coeffs(M), c, M), M)


def monomial(a: int, b: int, c: int, M: int) -> QExpansion:
    return QExpansion(4 * a + 6 * b + 12 * c, _monomial_coeffs(a, b, c, M), (a, b, c))


def monomial_basis(k: int, M: int | None = None) -> list[QExpansion]:
    if M is None:
        M = default_truncation(k)
    return [monomial(a, b, c, M) for a, b, c in monomial_exponents(k)]


def default_truncation(k: int) -> int:
    return max(40, k + 20)


# --- evaluation ---------------------------------------------------------------------

def _tail_log(C: float, k: int, m: int, log_q: float) -> float:
    """log of C * sum_{n>m} n^k |q|^n via the geometric majorant (or +inf)."""
    if C == 0:
        return -math.inf
    ratio_log = k * math.log((m + 2) / (m + 1)) + log_q
    if ratio_log >= 0:
        return math.inf
    return math.log(C) + k * math.log(m + 1) + (m + 1) * log_q - math.log(-math.expm1(ratio_log))


def evaluate(f: QExpansion, z: UhpPoint, y_min: float = Y_MIN) -> tuple[complex, float]:
    """Partial sum of the q-series at ``z`` and a certified bound on the dropped tail.

    Uses the least order m <= M whose tail bound is at most 1e-12 of the
    absolute partial sum.
    """
    if z.y < y_min:
        raise TailTooLargeError(f"height {z.y} below y_min={y_min}; reduce the point first")
    k = f.weight
    C = f.tail_bound_constant
    log_q = -TWO_PI * z.y
    with mpmath.workdps(30):
        q = mpmath.exp(2j * mpmath.pi * mpmath.mpc(z.x, z.y))
        total = mpmath.mpc(0)
        absum = mpmath.mpf(0)
        qn = mpmath.mpc(1)
        for n, a in enumerate(f.coeffs):
            if a:
                term = mpmath.mpf(a.numerator) / a.denominator if isinstance(a, Fraction) else mpmath.mpf(a)
                total += term * qn
                absum += abs(term) * abs(qn)
            if n >= 1 and absum > 0:
                tl = _tail_log(C, k, n, log_q)
                if tl <= math.log(EVAL_RTOL) + float(mpmath.log(absum)):
                    return complex(total), math.exp(tl)
            qn *= q
    tl = _tail_log(C, k, f.M, log_q)
    if absum == 0 and tl == -math.inf:
        return 0j, 0.0
    raise TailTooLargeError(f"truncation M={f.M} too small at y={z.y} (log tail {tl:.1f})")


def _terms_needed(y_min: float, growth_power: int, rel: float = 1e-18) -> int:
    """Least N with 600 * N^p * exp(-2 pi N y_min) below rel."""
    N = 1
    while math.log(600.0) + growth_power * math.log(N) - TWO_PI * N * y_min > math.log(rel):
        N += 1
    return N + 1


@lru_cache(maxsize=None)
def _float_eis(k: int, N: int) -> np.ndarray:
    return np.array([float(v) for v in _eisenstein_coeffs(k, N)])


def generator_logs(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Complex logs of E4, E6 and Delta at x + iy (arrays, y >= 0.5 recommended)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ymin = float(np.min(y)) if y.size else 1.0
    N = _terms_needed(max(ymin, 0.1), 5)
    q = np.exp(TWO_PI * (1j * x - y))
    e4 = np.zeros(q.shape, dtype=complex)
    e6 = np.zeros(q.shape, dtype=complex)
    c4 = _float_eis(4, N)
    c6 = _float_eis(6, N)
    # Horner from the top coefficient
    for n in range(N, 0, -1):
        e4 = (e4 + c4[n]) * q
        e6 = (e6 + c6[n]) * q
    e4 += 1.0
    e6 += 1.0
    logd = TWO_PI * 1j * (x + 1j * y)
    qn = np.ones_like(q)
    for _ in range(N):
        qn = qn * q
        logd = logd + 24.0 * np.log1p(-qn)
    with np.errstate(divide="ignore"):
        return np.log(e4), np.log(e6), logd


def scaled_monomial_values(exponents: Sequence[tuple[int, int, int]], log_scales: Sequence[float],
                           x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """y^{k/2} m(z) / s for each monomial; shape (len(exponents), npts)."""
    l4, l6, ld = generator_logs(x, y)
    logy = np.log(np.asarray(y, dtype=float))
    out = np.empty((len(exponents), np.size(x)), dtype=complex)
    for i, ((a, b, c), ls) in enumerate(zip(exponents, log_scales)):
        k = 4 * a + 6 * b + 12 * c
        lg = c * ld + (k / 2) * logy - ls
        if a:
            lg = lg + a * l4
        if b:
            lg = lg + b * l6
        with np.errstate(under="ignore"):
            out[i] = np.exp(lg)
    return out


def evaluate_product(f: QExpansion, z: UhpPoint) -> complex:
    """Value of a monomial form through its factors (no truncation issue)."""
    if f.factors is None:
        raise ValueError("form has no factorization")
    v = scaled_monomial_values([f.factors], [f.weight / 2 * math.log(z.y)], np.array([z.x]), np.array([z.y]))
    return complex(v[0, 0])


# --- Petersson inner products -------------------------------------------------------

@lru_cache(maxsize=None)
def _strip_moments(k: int, M: int) -> tuple:
    """I_n = int_1^inf y^{k-2} e^{-4 pi n y} dy for n = 0..M (I_0 unused), as mpf."""
    with mpmath.workdps(40):
        out = [mpmath.mpf(0)]
        for n in range(1, M + 1):
            t = 4 * mpmath.pi * n
            out.append(mpmath.gammainc(k - 1, t) / t ** (k - 1))
        return tuple(out)


def _to_mpf(a):
    if isinstance(a, Fraction):
        return mpmath.mpf(a.numerator) / a.denominator
    return mpmath.mpf(a)


def _upper_products(cols: Sequence[Sequence], k: int, M: int):
    """Matrix of sum_{n<=M} a_n b_n I_n over coefficient columns, plus the last-term magnitude."""
    I = _strip_moments(k, M)
    with mpmath.workdps(40):
        vals = [[_to_mpf(a) for a in c[: M + 1]] for c in cols]
        m = len(cols)
        G = [[mpmath.mpf(0)] * m for _ in range(m)]
        last = mpmath.mpf(0)
        for i in range(m):
            for j in range(i, m):
                s = mpmath.fsum(vals[i][n] * vals[j][n] * I[n] for n in range(1, M + 1))
                G[i][j] = G[j][i] = s
                last = max(last, abs(vals[i][M] * vals[j][M] * I[M]) / max(abs(s), mpmath.mpf(10) ** -300))
        return G, float(last)


@dataclass(frozen=True)
class ScaledMonomials:
    """Monomials of one weight with the scales s_i = sqrt(upper-strip norm)."""

    weight: int
    exponents: tuple[tuple[int, int, int], ...]
    M: int
    log_scales: tuple[float, ...]
    upper_gram: np.ndarray = field(compare=False, repr=False)
    truncation_rel: float = 0.0


@lru_cache(maxsize=64)
def scaled_monomials(k: int, exponents: tuple[tuple[int, int, int], ...] | None = None) -> ScaledMonomials:
    """Exact upper-strip Gram of the monomials, scaled to unit diagonal.

    The truncation order grows until the last series term is below 1e-25 of
    every entry's magnitude.
    """
    if exponents is None:
        exponents = tuple(monomial_exponents(k))
    M = default_truncation(k)
    while True:
        cols = [_monomial_coeffs(a, b, c, M) for a, b, c in exponents]
        G, last = _upper_products(cols, k, M)
        if last < 1e-25:
            break
        M = int(M * 1.5)
    with mpmath.workdps(40):
        s = [mpmath.sqrt(G[i][i]) for i in range(len(cols))]
        Gs = np.array([[float(G[i][j] / (s[i] * s[j])) for j in range(len(cols))] for i in range(len(cols))])
        log_s = tuple(float(mpmath.log(v)) for v in s)
    Gs.setflags(write=False)
    return ScaledMonomials(k, tuple(exponents), M, log_s, Gs, last)


def _lower_gram(sm: ScaledMonomials, rtol: float = 1e-13) -> tuple[np.ndarray, float]:
    prev = None
    n = 24
    while n <= 384:
        x, y, w = lower_region_rule(n)
        W = scaled_monomial_values(sm.exponents, sm.log_scales, x, y)
        G = (W * (w / (y * y))) @ W.conj().T
        if prev is not None:
            err = float(np.max(np.abs(G - prev)))
            if err <= rtol * max(float(np.max(np.abs(G))), 1.0):
                return G, err
        prev = G
        n *= 2
    raise ToleranceNotMetError("lower-region quadrature did not converge")


def _quadrature_gram(sm: ScaledMonomials, rtol: float = 1e-11) -> tuple[np.ndarray, float]:
    k = sm.weight

    def integrand(x, y):
        W = scaled_monomial_values(sm.exponents, sm.log_scales, x, y)
        return (W[:, None, :] * W.conj()[None, :, :]) / (y * y)

    res = integrate_fundamental_domain(integrand, Envelope(k - 2, 4 * math.pi), rtol=rtol)
    return np.asarray(res.value), res.error


def gram_matrix(k: int, exponents=None, method: str = "hybrid") -> tuple[np.ndarray, float, ScaledMonomials]:
    """Petersson Gram matrix of the scaled monomials and an error estimate.

    ``hybrid``: the strip y >= 1 is integrated exactly in x by orthogonality of
    the Fourier modes, leaving the coefficient series sum a_n b_n I_n; the
    region under y = 1 is handled by Gauss-Legendre quadrature. ``quadrature``:
    pointwise tensor quadrature over the whole domain with an envelope tail.
    """
    sm = scaled_monomials(k, None if exponents is None else tuple(map(tuple, exponents)))
    if not sm.exponents:
        return np.zeros((0, 0)), 0.0, sm
    if method == "hybrid":
        low, err = _lower_gram(sm)
        G = sm.upper_gram + low
        err += sm.truncation_rel * float(np.max(np.abs(G)))
    elif method == "quadrature":
        G, err = _quadrature_gram(sm)
    else:
        raise ValueError(f"unknown method {method!r}")
    G = 0.5 * (G + G.conj().T)
    return G, err, sm


def petersson_inner(f: QExpansion, g: QExpansion, method: str = "hybrid") -> tuple[complex, float]:
    """<f, g> = int_X y^k f conj(g) dmu_hyp over the standard fundamental domain.

    Both forms must carry monomial factorizations, or be cusp forms whose
    q-series converges well on the domain (low weight). Returns (value, error).
    """
    if f.weight != g.weight:
        raise ValueError("weights differ")
    k = f.weight
    if f.factors is not None and g.factors is not None:
        ex = (tuple(f.factors), tuple(g.factors))
        if ex[0] == ex[1]:
            G, err, sm = gram_matrix(k, (ex[0],), method)
            return complex(G[0, 0]) * math.exp(2 * sm.log_scales[0]), err * math.exp(2 * sm.log_scales[0])
        G, err, sm = gram_matrix(k, ex, method)
        sc = math.exp(sm.log_scales[0] + sm.log_scales[1])
        return complex(G[0, 1]) * sc, err * sc
    return _series_inner(f, g, method)


def _series_values(f: QExpansion, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    c = np.array([complex(float(a)) for a in f.coeffs])
    q = np.exp(TWO_PI * (1j * x - y))
    out = np.zeros(q.shape, dtype=complex)
    for a in c[::-1]:
        out = out * q + a
    return out


def _series_inner(f: QExpansion, g: QExpansion, method: str) -> tuple[complex, float]:
    k = f.weight
    for h in (f, g):
        C = h.tail_bound_constant
        if _tail_log(C, k, h.M, -TWO_PI * math.sqrt(3) / 2) > math.log(1e-14) + math.log(max(C, 1e-300)):
            raise TailTooLargeError("q-series too short for the fundamental domain")

    def integrand(x, y):
        return y ** (k - 2) * _series_values(f, x, y) * np.conj(_series_values(g, x, y))

    if method == "quadrature":
        res = integrate_fundamental_domain(integrand, Envelope(k - 2, 4 * math.pi), rtol=1e-11)
        return complex(res.value), res.error
    if method != "hybrid":
        raise ValueError(f"unknown method {method!r}")
    M = min(f.M, g.M)
    G, last = _upper_products([f.coeffs, g.coeffs], k, M)
    up = complex(float(G[0][1]))
    prev = None
    n = 24
    while n <= 384:
        x, y, w = lower_region_rule(n)
        low = complex(np.sum(w * integrand(x, y)))
        if prev is not None and abs(low - prev) <= 1e-13 * max(abs(low + up), 1e-300):
            return up + low, abs(low - prev) + last * abs(up)
        prev = low
        n *= 2
    raise ToleranceNotMetError("lower-region quadrature did not converge")


# --- orthonormal basis and Bergman kernel --------------------------------------------

@dataclass(frozen=True)
class OrthonormalBasis:
    """Orthonormal basis f_i = sum_c T[i, c] m_c / s_c of S_k.

    ``cholesky`` is the factor L of the scaled Gram matrix (G = L L^H) and
    ``transform`` is L^{-1}.
    """

    weight: int
    exponents: tuple[tuple[int, int, int], ...]
    M: int
    log_scales: tuple[float, ...]
    cholesky: np.ndarray = field(repr=False)
    transform: np.ndarray = field(repr=False)
    gram_error: float = 0.0

    @property
    def dim(self) -> int:
        return len(self.exponents)

    def forms(self) -> list[QExpansion]:
        """The orthonormal forms as q-expansions (coefficients from float transform)."""
        mons = [_monomial_coeffs(a, b, c, self.M) for a, b, c in self.exponents]
        out = []
        for i in range(self.dim):
            coeffs = [Fraction(0)] * (self.M + 1)
            for cidx, col in enumerate(mons):
                w = Fraction(float(self.transform[i, cidx].real)) / Fraction(math.exp(self.log_scales[cidx]))
                for n, a in enumerate(col):
                    coeffs[n] += w * a
            out.append(QExpansion(self.weight, tuple(coeffs)))
        return out

    def kernel_values(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """B_k at points that already lie in (or near) the fundamental domain."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if self.dim == 0:
            return np.zeros(x.shape)
        W = scaled_monomial_values(self.exponents, self.log_scales, x, y)
        F = self.transform @ W
        return np.sum(F.real ** 2 + F.imag ** 2, axis=0)


@lru_cache(maxsize=64)
def _orthonormal_basis(k: int, exponents, method: str) -> OrthonormalBasis:
    G, err, sm = gram_matrix(k, exponents, method)
    if sm.exponents == ():
        return OrthonormalBasis(k, (), sm.M, (), np.zeros((0, 0)), np.zeros((0, 0)), 0.0)
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise GramNotPositiveDefiniteError(f"Gram matrix at weight {k} is not positive definite") from exc
    T = np.linalg.inv(L)
    L.setflags(write=False)
    T.setflags(write=False)
    return OrthonormalBasis(k, sm.exponents, sm.M, sm.log_scales, L, T, err)


def orthonormal_basis(k: int, exponents: Sequence[tuple[int, int, int]] | None = None,
                      method: str = "hybrid") -> OrthonormalBasis:
    """Cholesky orthonormalization of the monomial basis (or of given monomials)."""
    if k < 4 or k % 2:
        raise ValueError(f"weight must be an even integer >= 4, got {k}")
    ex = None if exponents is None else tuple(tuple(e) for e in exponents)
    if ex is not None:
        for a, b, c in ex:
            if 4 * a + 6 * b + 12 * c != k or c < 1:
                raise ValueError(f"monomial {(a, b, c)} is not a cusp form of weight {k}")
    return _orthonormal_basis(k, ex, method)


def bergman_kernel(k: int, z: UhpPoint, basis: OrthonormalBasis | None = None) -> float:
    """B_k(z) = sum_i y^k |f_i(z)|^2 over an orthonormal basis of S_k."""
    if basis is None:
        basis = orthonormal_basis(k)
    elif basis.weight != k:
        raise ValueError("basis weight does not match k")
    if basis.dim == 0:
        return 0.0
    zr, _ = reduce_psl2z(z)
    return float(basis.kernel_values(np.array([zr.x]), np.array([zr.y]))[0])


def bergman_values(basis: OrthonormalBasis, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorized B_k at arbitrary points (each is reduced first)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    xr = np.empty_like(x)
    yr = np.empty_like(y)
    for i, (a, b) in enumerate(zip(x, y)):
        p, _ = reduce_psl2z(UhpPoint(float(a), float(b)))
        xr[i], yr[i] = p.x, p.y
    return basis.kernel_values(xr, yr)


# --- export -------------------------------------------------------------------------

def basis_to_dict(basis: OrthonormalBasis) -> dict:
    """Exact monomial coefficients (as strings) plus the floating transform."""
    mons = []
    for (a, b, c), ls in zip(basis.exponents, basis.log_scales):
        mons.append({
            "factors": [a, b, c],
            "log_scale": ls,
            "coefficients": [str(v) for v in _monomial_coeffs(a, b, c, basis.M)],
        })
    return {
        "weight": basis.weight,
        "truncation": basis.M,
        "dimension": basis.dim,
        "monomials": mons,
        "transform": [[float(v.real) for v in row] for row in np.asarray(basis.transform)],
    }


def write_basis_json(basis: OrthonormalBasis, fh) -> None:
    json.dump(basis_to_dict(basis), fh, indent=1, sort_keys=True)


def write_bergman_csv(rows: Sequence[tuple[float, float, float]], fh=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "B"])
    for x, y, b in rows:
        w.writerow(["%.17g" % x, "%.17g" % y, "%.17g" % b])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text

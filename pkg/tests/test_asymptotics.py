import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuspbergman.asymptotics import (
    STANDARD_BOX,
    AsymptoticTarget,
    MassBox,
    curvature_density,
    dimension_consistency,
    fundamental_domain_volume,
    limit_target,
    limit_target_exact,
    que_mass,
    ratio_series,
    supnorm_scan,
)
from cuspbergman.exceptions import BoxOutsideDomainError
from cuspbergman.forms import bergman_kernel, orthonormal_basis
from cuspbergman.hyperbolic import UhpPoint


def box_mass_fourier(k: int, y0: float, y1: float) -> float:
    """Mass of B_k over [-1/2, 1/2] x [y0, y1] by Parseval in x.

    sum_i sum_n |c_n|^2 int y^{k-2} e^{-4 pi n y} dy, the y-integral as an incomplete gamma.
    """
    basis = orthonormal_basis(k)
    total = mpmath.mpf(0)
    with mpmath.workdps(40):
        for f in basis.forms():
            for n, c in enumerate(f.coeffs):
                if n == 0 or c == 0:
                    continue
                a = 4 * mpmath.pi * n
                w = mpmath.gammainc(k - 1, a * mpmath.mpf(y0), a * mpmath.mpf(y1)) / a ** (k - 1)
                total += (mpmath.mpf(c.numerator) / c.denominator) ** 2 * w
    return float(total) / basis.dim


def test_limit_target_examples():
    assert limit_target(AsymptoticTarget()) == pytest.approx(1 / (4 * math.pi), rel=1e-15)
    assert limit_target(AsymptoticTarget(2)) == pytest.approx(1 / (16 * math.pi ** 2), rel=1e-15)
    assert limit_target(AsymptoticTarget(1, 3, 2)) == pytest.approx(6 / (4 * math.pi), rel=1e-15)
    with pytest.raises(ValueError):
        AsymptoticTarget(0)


@given(st.integers(1, 6), st.integers(1, 50), st.integers(1, 50))
def test_limit_target_exact_arithmetic(r, deg, rank):
    c, p = limit_target_exact(AsymptoticTarget(r, deg, rank))
    assert p == r and c == Fraction(deg * rank, 4 ** r)
    c1, _ = limit_target_exact(AsymptoticTarget(r, 1, 1))
    assert c == c1 * deg * rank
    c_next, p_next = limit_target_exact(AsymptoticTarget(r + 1, deg, rank))
    # strictly decreasing in r: c'/pi^{r+1} < c/pi^r  <=>  c' < c * pi, and c' = c/4
    assert c_next == c / 4 and p_next == p + 1
    assert limit_target(AsymptoticTarget(r + 1, deg, rank)) < limit_target(AsymptoticTarget(r, deg, rank))


def test_curvature_reproduces_limit_constant():
    for z in (UhpPoint(0, 2), UhpPoint(0.3, 1.1), UhpPoint(-0.2, 5.0)):
        assert curvature_density(z, 1e-3) == pytest.approx(limit_target(AsymptoticTarget()), rel=1e-6)


def test_ratio_series():
    rows = ratio_series(UhpPoint(0, 1), [4, 6, 8, 10, 12])
    assert [r for _, r in rows[:4]] == [0.0] * 4
    assert rows[4][1] == pytest.approx(3.0786771474 / 12, rel=1e-9)
    a = ratio_series(UhpPoint(0.3, 1.5), [12, 24, 36])
    b = ratio_series(UhpPoint(1.3, 1.5), [12, 24, 36])
    for (k1, v1), (k2, v2) in zip(a, b):
        assert k1 == k2 and v1 == pytest.approx(v2, rel=1e-12)


def test_ratio_series_limsup_guard():
    cap = 10 / (4 * math.pi)
    for z in (UhpPoint(0, 1), UhpPoint(0, 2), UhpPoint(0.3, 1.5)):
        for k, r in ratio_series(z, range(12, 121, 12)):
            assert 0 <= r <= cap and math.isfinite(r)


def test_mass_box():
    box = MassBox(*STANDARD_BOX)
    assert box.hyperbolic_area() == pytest.approx(1 / 3, rel=1e-15)
    with pytest.raises(BoxOutsideDomainError):
        MassBox(-0.5, 0.5, 0.5, 2.0)
    with pytest.raises(ValueError):
        MassBox(0.5, -0.5, 1.2, 2.0)
    loose = MassBox(-0.5, 0.5, 0.5, 2.0, in_domain=False)
    with pytest.raises(BoxOutsideDomainError):
        que_mass(loose, 12)
    with pytest.raises(ValueError):
        que_mass(box, 10)


def test_volume():
    assert fundamental_domain_volume() == pytest.approx(math.pi / 3, rel=1e-12)


@pytest.mark.parametrize("k", [12, 24, 60])
def test_que_mass_matches_fourier_oracle(k):
    q = que_mass(MassBox(*STANDARD_BOX), k)
    assert q.target == pytest.approx(1 / math.pi, rel=1e-12)
    assert q.mass == pytest.approx(box_mass_fourier(k, 1.2, 2.0), rel=1e-9)


def test_que_mass_reference_values():
    errs = {k: que_mass(MassBox(*STANDARD_BOX), k).error for k in (12, 24, 60)}
    assert errs[12] == pytest.approx(0.005794, abs=2e-6)
    assert errs[24] == pytest.approx(0.1044, abs=1e-4)
    assert errs[60] == pytest.approx(0.010039, abs=2e-6)


@pytest.mark.parametrize("k", [12, 16, 24, 36, 60])
def test_full_domain_mass(k):
    q = que_mass(None, k)
    assert q.mass == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("k,dim", [(12, 1), (24, 2), (4, 0), (40, 3)])
def test_dimension_consistency(k, dim):
    d = dimension_consistency(k)
    assert d.dim == dim
    assert d.rel_error < 1e-3
    if dim:
        assert d.integral == pytest.approx(dim, rel=1e-3)
    else:
        assert d.integral == 0.0


def test_supnorm_scan_weight_12():
    s = supnorm_scan(12, 200, 200, 10.0)
    assert s.value >= bergman_kernel(12, UhpPoint(0, 1))
    assert s.value == pytest.approx(bergman_kernel(12, s.point), rel=1e-12)
    assert s.ratio == pytest.approx(s.value / 12 ** 1.5)
    # the maximizer sits at the corner rho = e^{i pi/3} for small weights
    assert s.point.y == pytest.approx(math.sqrt(3) / 2, abs=1e-3)
    assert abs(abs(s.point.x) - 0.5) < 1e-3


def test_supnorm_scan_interior_peak_large_weight():
    k = 96
    s = supnorm_scan(k, 80, 80)
    assert s.value >= bergman_kernel(k, UhpPoint(0, 1))
    assert s.point.y == pytest.approx(k / (4 * math.pi), rel=0.05)


@settings(max_examples=10, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(0.9, 6.0))
def test_sup_dominates_points(x, y):
    s = supnorm_scan(24, 60, 60, 10.0)
    assert s.value >= bergman_kernel(24, UhpPoint(x, y)) * (1 - 1e-12)

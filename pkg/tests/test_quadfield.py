import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuspbergman.exceptions import BoxTooLargeError
from cuspbergman.quadfield import (
    FieldElement,
    QuadraticField,
    UnitGroup,
    embeddings,
    enumerate_lattice,
    enumerate_units,
    fundamental_unit,
    lattice_embeddings,
    minimal_distance,
)

FIELDS = [2, 3, 5, 6, 7, 13, 17, 94]


def brute_force_unit(field: QuadraticField, bound: int = 300) -> FieldElement:
    """Smallest unit with sigma_1 > 1 among |a|, |b| <= bound (independent of continued fractions)."""
    best, best_val = None, math.inf
    for b in range(1, bound + 1):
        for a in range(-bound, bound + 1):
            xi = FieldElement(a, b, field)
            if abs(xi.norm()) != 1:
                continue
            s1, _ = embeddings(xi)
            for cand in (s1, -s1, 1 / s1 if s1 else 0, -1 / s1 if s1 else 0):
                if 1 + 1e-12 < cand < best_val:
                    best_val = cand
                    best = xi
    return best, best_val


def brute_force_lattice(field, box, span=10):
    (lo1, hi1), (lo2, hi2) = box
    out = set()
    for a in range(-span, span + 1):
        for b in range(-span, span + 1):
            s1, s2 = embeddings(FieldElement(a, b, field))
            if lo1 <= s1 <= hi1 and lo2 <= s2 <= hi2:
                out.add((a, b))
    return out


def test_field_validation():
    for bad in (1, 0, -3, 4, 8, 12, 18):
        with pytest.raises(ValueError):
            QuadraticField(bad)
    assert QuadraticField(5).omega_kind == "half"
    assert QuadraticField(2).omega_kind == "sqrt"
    assert QuadraticField(3).omega_kind == "sqrt"


def test_embedding_examples():
    f5, f2 = QuadraticField(5), QuadraticField(2)
    assert embeddings(f5.one) == (1, 1)
    s1, s2 = embeddings(f5.omega)
    assert s1 == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-15)
    assert s2 == pytest.approx((1 - math.sqrt(5)) / 2, abs=1e-15)
    s1, s2 = embeddings(f2.omega)
    assert (s1, s2) == pytest.approx((math.sqrt(2), -math.sqrt(2)), abs=1e-15)


@pytest.mark.parametrize("D,a,b,norm", [(5, 0, 1, -1), (2, 1, 1, -1), (3, 2, 1, 1)])
def test_fundamental_unit_examples(D, a, b, norm):
    eps = fundamental_unit(QuadraticField(D))
    assert (eps.a, eps.b) == (a, b)
    assert eps.norm() == norm


@pytest.mark.parametrize("D", [2, 3, 5, 6, 7, 13, 17])
def test_fundamental_unit_matches_brute_force(D):
    field = QuadraticField(D)
    eps = fundamental_unit(field)
    _, val = brute_force_unit(field, 200)
    assert embeddings(eps)[0] == pytest.approx(val, rel=1e-12)
    assert UnitGroup.of(field).fundamental_unit == eps


def test_fundamental_unit_large_coefficients():
    eps = fundamental_unit(QuadraticField(94))
    assert (eps.a, eps.b) == (2143295, 221064)
    assert eps.norm() == 1
    s1, s2 = embeddings(eps)
    assert s1 > 1 and abs(s1 * s2 - 1) < 1e-12


def test_enumerate_units_examples():
    f5, f2 = QuadraticField(5), QuadraticField(2)
    assert {(u.a, u.b) for u in enumerate_units(f5, 0)} == {(1, 0), (-1, 0)}
    got = {(u.a, u.b) for u in enumerate_units(f5, 1)}
    assert got == {(1, 0), (-1, 0), (0, 1), (0, -1), (-1, 1), (1, -1)}
    got = {(u.a, u.b) for u in enumerate_units(f2, 1)}
    assert got == {(1, 0), (-1, 0), (1, 1), (-1, -1), (-1, 1), (1, -1)}


@pytest.mark.parametrize("D", FIELDS)
def test_units_duplicate_free_and_unimodular(D):
    units = enumerate_units(QuadraticField(D), 3)
    assert len(units) == 2 * 7
    assert len({(u.a, u.b) for u in units}) == len(units)
    for u in units:
        s1, s2 = embeddings(u)
        assert abs(abs(s1 * s2) - 1) < 1e-12 * max(1.0, abs(s1), abs(s2))


def test_lattice_examples():
    f5, f2 = QuadraticField(5), QuadraticField(2)
    got = enumerate_lattice(f5, ((-0.1, 0.1), (-0.1, 0.1)))
    assert [(x.a, x.b) for x in got] == [(0, 0)]
    box = ((-2, 2), (-2, 2))
    got = {(x.a, x.b) for x in enumerate_lattice(f5, box)}
    assert got == brute_force_lattice(f5, box)
    assert {(0, 0), (1, 0), (-1, 0), (2, 0), (-2, 0), (-1, 1)} <= got
    got = {(x.a, x.b) for x in enumerate_lattice(f2, ((0, 3), (-3, 0)))}
    assert (0, 1) in got
    assert got == brute_force_lattice(f2, ((0, 3), (-3, 0)))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5, 13]), st.floats(-4, 4), st.floats(0, 4), st.floats(-4, 4), st.floats(0, 4))
def test_lattice_matches_coordinate_scan(D, l1, w1, l2, w2):
    field = QuadraticField(D)
    box = ((l1, l1 + w1), (l2, l2 + w2))
    got = [(x.a, x.b) for x in enumerate_lattice(field, box)]
    assert len(got) == len(set(got))
    assert set(got) == brute_force_lattice(field, box, span=30)
    a, b, s1, s2 = lattice_embeddings(field, box)
    assert set(zip(a.tolist(), b.tolist())) == set(got)
    for ai, bi, x1, x2 in zip(a, b, s1, s2):
        e1, e2 = embeddings(FieldElement(int(ai), int(bi), field))
        assert x1 == pytest.approx(e1, abs=1e-12) and x2 == pytest.approx(e2, abs=1e-12)


def test_lattice_cap():
    with pytest.raises(BoxTooLargeError):
        enumerate_lattice(QuadraticField(5), ((-1e4, 1e4), (-1e4, 1e4)), cap=1000)
    assert enumerate_lattice(QuadraticField(5), ((1, 0), (0, 1))) == []


def test_minimal_distance():
    # 1 and omega-type short vectors; brute force over a small window
    for D in (2, 5, 13):
        f = QuadraticField(D)
        brute = min(math.hypot(*embeddings(FieldElement(a, b, f)))
                    for a in range(-6, 7) for b in range(-6, 7) if (a, b) != (0, 0))
        assert minimal_distance(f) == pytest.approx(brute, rel=1e-14)


ints = st.integers(-10**6, 10**6)


@given(st.sampled_from(FIELDS), ints, ints, ints, ints)
def test_norm_multiplicative(D, a, b, c, d):
    f = QuadraticField(D)
    x, y = FieldElement(a, b, f), FieldElement(c, d, f)
    assert (x * y).norm() == x.norm() * y.norm()


small = st.integers(-1000, 1000)


@given(st.sampled_from(FIELDS), small, small, small, small)
def test_embedding_homomorphism(D, a, b, c, d):
    f = QuadraticField(D)
    x, y = FieldElement(a, b, f), FieldElement(c, d, f)
    ex, ey = np.array(embeddings(x)), np.array(embeddings(y))
    # absolute scale of the inputs bounds the rounding error of each embedding
    scale = (abs(a) + abs(b) * math.sqrt(D) + 1) * (abs(c) + abs(d) * math.sqrt(D) + 1)
    assert np.allclose(embeddings(x + y), ex + ey, rtol=1e-12, atol=1e-12 * scale)
    assert np.allclose(embeddings(x * y), ex * ey, rtol=1e-12, atol=1e-12 * scale)


@given(st.sampled_from(FIELDS), st.integers(-6, 6))
def test_unit_powers_are_units(D, n):
    eps = fundamental_unit(QuadraticField(D))
    u = eps ** n
    assert abs(u.norm()) == 1
    assert (u * eps ** (-n)) == QuadraticField(D).one

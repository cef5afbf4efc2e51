import json
import math
from fractions import Fraction

import jsonschema
import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuspbergman.exceptions import TailTooLargeError
from cuspbergman.forms import (
    basis_to_dict,
    bergman_kernel,
    bergman_values,
    delta,
    dim_cusp_forms,
    divisor_sums,
    eisenstein,
    evaluate,
    evaluate_product,
    gram_matrix,
    monomial,
    monomial_basis,
    monomial_exponents,
    orthonormal_basis,
    petersson_inner,
    write_bergman_csv,
)
from cuspbergman.hyperbolic import UhpPoint, apply_moebius, S, T

SCHEMA_DIR = __import__("pathlib").Path(__file__).resolve().parents[1] / "docs" / "schemas"


def naive_delta(M):
    """q * prod_{n>=1} (1 - q^n)^24 by repeated schoolbook multiplication."""
    poly = [0] * (M + 1)
    poly[1] = 1
    for n in range(1, M + 1):
        for _ in range(24):
            new = poly[:]
            for i in range(M + 1 - n):
                new[i + n] -= poly[i]
            poly = new
    return poly


def naive_sigma(p, n):
    return sum(d ** p for d in range(1, n + 1) if n % d == 0)


def eta_delta(z: complex) -> complex:
    with mpmath.workdps(40):
        tau = mpmath.mpc(z.real, z.imag)
        q = mpmath.exp(2j * mpmath.pi * tau)
        eta = mpmath.exp(2j * mpmath.pi * tau / 24) * mpmath.qp(q)
        return complex(eta ** 24)


def test_generators_first_coefficients():
    assert eisenstein(4, 5).coeffs[:4] == (1, 240, 2160, 6720)
    assert eisenstein(6, 5).coeffs[:3] == (1, -504, -16632)
    assert delta(6).coeffs[:5] == (0, 1, -24, 252, -1472)


def test_divisor_sums_oracle():
    for p in (3, 5, 11):
        got = divisor_sums(p, 60)
        assert [got[n] for n in range(1, 61)] == [naive_sigma(p, n) for n in range(1, 61)]


def test_delta_against_naive_product():
    M = 30
    assert list(delta(M).coeffs) == naive_delta(M)
    # tau(n) reference values
    assert delta(M).coeffs[11] == 534612


def test_delta_two_computation_orders():
    M = 50
    e4, e6 = eisenstein(4, M), eisenstein(6, M)
    lhs = [Fraction(a - b, 1728) for a, b in zip((e4 * e4 * e4).coeffs, (e6 * e6).coeffs)]
    assert lhs == [Fraction(c) for c in delta(M).coeffs]
    # (E4 * E4) * E4 against E4 * (E4 * E4)
    assert ((e4 * e4) * e4).coeffs == (e4 * (e4 * e4)).coeffs
    assert monomial(3, 0, 1, M).coeffs == (e4 * e4 * e4 * delta(M)).coeffs


@pytest.mark.parametrize("k,expected", [(12, 1), (24, 2), (100, 8), (4, 0), (10, 0), (14, 0), (26, 1), (2, 0)])
def test_dimension_examples(k, expected):
    assert dim_cusp_forms(k) == expected


@pytest.mark.parametrize("k", range(4, 200, 2))
def test_dimension_equals_monomial_count(k):
    ex = monomial_exponents(k)
    assert len(ex) == dim_cusp_forms(k)
    for a, b, c in ex:
        assert 4 * a + 6 * b + 12 * c == k and c >= 1 and b in (0, 1)


def test_monomial_basis_examples():
    assert [f.factors for f in monomial_basis(12)] == [(0, 0, 1)]
    assert {f.factors for f in monomial_basis(24)} == {(0, 0, 2), (3, 0, 1)}
    assert [f.factors for f in monomial_basis(26)] == [(2, 1, 1)]
    for f in monomial_basis(36):
        assert f.is_cusp and f.M == 56


def test_delta_values_at_i_and_2i():
    ref_i = math.gamma(0.25) ** 24 / (2 ** 24 * math.pi ** 18)
    v, tail = evaluate(delta(40), UhpPoint(0, 1))
    assert v.real == pytest.approx(ref_i, rel=1e-12)
    assert abs(v.imag) < 1e-18 and tail <= 1e-12 * abs(v)
    assert v.real == pytest.approx(1.78537e-3, rel=1e-5)
    v2, _ = evaluate(delta(40), UhpPoint(0, 2))
    assert v2.real == pytest.approx(eta_delta(2j).real, rel=1e-11) and v2.real > 0
    vp, _ = evaluate(delta(40), UhpPoint(1, 1))
    assert vp == pytest.approx(v, rel=1e-12)


def test_evaluate_rejects_low_points():
    with pytest.raises(TailTooLargeError):
        evaluate(delta(40), UhpPoint(0, 0.3))
    with pytest.raises(TailTooLargeError):
        evaluate(delta(3), UhpPoint(0, 0.6))


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(0.87, 3.0))
def test_product_evaluation_matches_series(x, y):
    z = UhpPoint(x, y)
    for f in (delta(60), monomial(3, 0, 1, 60), monomial(2, 1, 1, 60)):
        series, tail = evaluate(f, z)
        prod = evaluate_product(f, z)
        assert abs(prod - series) <= 1e-10 * abs(series) + 2 * tail
    assert evaluate_product(delta(40), z) == pytest.approx(eta_delta(complex(x, y)), rel=1e-10)


def test_petersson_delta_two_routes():
    hyb, e1 = petersson_inner(delta(40), delta(40), "hybrid")
    quad, e2 = petersson_inner(delta(40), delta(40), "quadrature")
    assert hyb.real == pytest.approx(1.03536e-6, rel=1e-5)
    assert abs(hyb - quad) <= 1e-9 * abs(hyb)
    assert abs(hyb.imag) < 1e-20


def test_petersson_series_route():
    # a form with no factorization record goes through the q-series integrand
    d = delta(40)
    plain = type(d)(12, d.coeffs)
    v, _ = petersson_inner(plain, plain)
    ref, _ = petersson_inner(d, d)
    assert v.real == pytest.approx(ref.real, rel=1e-9)


@pytest.mark.parametrize("k", [24, 36, 48])
def test_gram_hybrid_vs_quadrature(k):
    G1, _, _ = gram_matrix(k, method="hybrid")
    G2, _, _ = gram_matrix(k, method="quadrature")
    assert np.max(np.abs(G1 - G2)) <= 1e-9 * np.max(np.abs(G1))
    assert np.allclose(G1, G1.conj().T, atol=1e-10 * np.max(np.abs(G1)))
    assert np.all(np.linalg.eigvalsh(G1) > 0)


def test_conjugate_symmetry():
    f, g = monomial(3, 0, 1, 60), monomial(0, 0, 2, 60)
    a, _ = petersson_inner(f, g)
    b, _ = petersson_inner(g, f)
    assert abs(a - b.conjugate()) <= 1e-10 * abs(a)


def test_positivity():
    for k in (12, 16, 24, 30):
        for f in monomial_basis(k):
            v, _ = petersson_inner(f, f)
            assert v.real > 0


@pytest.mark.parametrize("k", [12, 24, 36, 60, 96, 120])
def test_orthonormal_residual(k):
    basis = orthonormal_basis(k)
    assert basis.dim == dim_cusp_forms(k)
    G, _, _ = gram_matrix(k, method="quadrature")
    Tm = np.asarray(basis.transform)
    resid = Tm @ G @ Tm.conj().T - np.eye(basis.dim)
    assert np.max(np.abs(resid)) <= 1e-8


def test_bergman_weight_12_at_i():
    nrm, _ = petersson_inner(delta(40), delta(40))
    d_i = math.gamma(0.25) ** 24 / (2 ** 24 * math.pi ** 18)
    expected = d_i ** 2 / nrm.real
    assert bergman_kernel(12, UhpPoint(0, 1)) == pytest.approx(expected, rel=1e-9)
    assert expected == pytest.approx(3.07, abs=0.01)


@pytest.mark.parametrize("k", [4, 6, 8, 10, 14])
def test_bergman_zero_space(k):
    assert bergman_kernel(k, UhpPoint(0.1, 1.3)) == 0.0


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(0.6, 2.5), st.sampled_from([12, 24, 36]))
def test_bergman_modular_invariance(x, y, k):
    z = UhpPoint(x, y)
    b = bergman_kernel(k, z)
    assert b >= 0
    for g in (T, S, T @ S, S @ T.inverse() @ S):
        w = apply_moebius(g, z)
        if w.y < 1e-3:
            continue
        assert bergman_kernel(k, w) == pytest.approx(b, rel=1e-8, abs=1e-12)


def test_bergman_basis_independence():
    z = [UhpPoint(0.0, 1.0), UhpPoint(0.3, 1.4), UhpPoint(-0.45, 2.2)]
    b1 = orthonormal_basis(24, [(0, 0, 2), (3, 0, 1)])
    b2 = orthonormal_basis(24, [(3, 0, 1), (0, 0, 2)])
    for p in z:
        assert bergman_kernel(24, p, b1) == pytest.approx(bergman_kernel(24, p, b2), rel=1e-8)
        assert bergman_kernel(24, p, b1) == pytest.approx(bergman_kernel(24, p), rel=1e-8)


def test_orthonormal_forms_expansion():
    basis = orthonormal_basis(12)
    (f,) = basis.forms()
    nrm, _ = petersson_inner(delta(40), delta(40))
    assert float(f.coeffs[1]) == pytest.approx(1 / math.sqrt(nrm.real), rel=1e-12)


def test_bergman_values_vectorized():
    basis = orthonormal_basis(24)
    xs = np.array([0.0, 1.3, -0.2])
    ys = np.array([1.0, 0.7, 0.4])
    vals = bergman_values(basis, xs, ys)
    for x, y, v in zip(xs, ys, vals):
        assert v == pytest.approx(bergman_kernel(24, UhpPoint(x, y)), rel=1e-12)


def test_basis_export_schema():
    basis = orthonormal_basis(24)
    doc = json.loads(json.dumps(basis_to_dict(basis)))
    schema = json.loads((SCHEMA_DIR / "basis_export.schema.json").read_text())
    jsonschema.validate(doc, schema)
    assert doc["dimension"] == 2
    for mon in doc["monomials"]:
        a, b, c = mon["factors"]
        assert [Fraction(s) for s in mon["coefficients"]] == list(monomial(a, b, c, doc["truncation"]).coeffs)


def test_bergman_csv():
    text = write_bergman_csv([(0.0, 1.0, 3.5), (0.25, 2.0, 1.0 / 3)])
    assert text.splitlines() == ["x,y,B", "0,1,3.5", "0.25,2,0.33333333333333331"]

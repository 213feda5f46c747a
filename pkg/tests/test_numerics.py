import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from strategies import system_params

from autoion.errors import DefectiveMatrix
from autoion.model import build
from autoion.numerics import (
    ComplexPolynomial,
    characteristic_polynomial,
    eigen_system,
    quartic_coefficients,
    root_array,
    roots,
)
from autoion.params import SystemParams, figure_params


def _match(a, b):
    """Largest distance after greedy pairing of two multisets."""
    b = list(b)
    worst = 0.0
    for z in a:
        k = int(np.argmin([abs(z - w) for w in b]))
        worst = max(worst, abs(z - b.pop(k)))
    return worst


def test_imaginary_pair():
    r = np.sort_complex(root_array(ComplexPolynomial([1, 0, 1])))
    assert np.allclose(r, [-1j, 1j], atol=1e-14)


def test_triple_root_is_merged():
    rs = roots(ComplexPolynomial.from_roots([1, 1, 1]))
    assert len(rs.roots) == 1
    assert rs.multiplicities[0] == 3
    assert abs(rs.roots[0] - 1) < 1e-7


def test_zero_roots_factor_exactly():
    rs = roots(ComplexPolynomial([0, 0, -1, 1]))
    assert sorted(rs.expanded().real) == [0, 0, 1]


def test_trimming():
    p = ComplexPolynomial([1, 2, 1e-20])
    assert p.degree == 1
    with pytest.raises(ValueError):
        ComplexPolynomial(np.ones(18))
    with pytest.raises(ValueError):
        roots(ComplexPolynomial([3.0]))


def test_degree_fifteen_from_roots():
    rng = np.random.default_rng(7)
    want = rng.uniform(-2, 2, 15) + 1j * rng.uniform(-1, 1, 15)
    got = root_array(ComplexPolynomial.from_roots(want))
    assert _match(want, got) < 1e-7


@given(st.lists(st.complex_numbers(max_magnitude=1.0), min_size=2, max_size=17))
def test_residual_bound(coeffs):
    p = ComplexPolynomial(coeffs)
    if p.degree < 1:
        return
    rs = roots(p)
    assert len(rs) == p.degree
    scale = np.max(np.abs(p.coeffs))
    bound = 1e-8 * scale * np.maximum(1.0, np.abs(rs.roots)) ** p.degree
    assert np.all(rs.residuals <= bound)


@given(st.lists(st.floats(-1, 1), min_size=3, max_size=17))
def test_real_coefficients_give_conjugate_pairs(coeffs):
    p = ComplexPolynomial(coeffs)
    if p.degree < 1:
        return
    r = root_array(p)
    assert _match(r, np.conj(r)) <= 1e-9 * max(1.0, np.max(np.abs(r)))


def test_deterministic():
    p = ComplexPolynomial([1 + 2j, -3, 0.5j, 2, 1])
    a, b = roots(p), roots(p)
    assert np.array_equal(a.roots, b.roots)


def test_characteristic_polynomial_against_numpy():
    rng = np.random.default_rng(3)
    M = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    c = characteristic_polynomial(M).coeffs[::-1]
    assert np.allclose(c, np.poly(M), atol=1e-12)


def test_diagonal_matrix():
    es = eigen_system(np.diag([0.0, 1.0, 2.0, 3.0]))
    order = np.argsort(es.lambdas.real)
    assert np.allclose(es.lambdas[order], [0, 1, 2, 3], atol=1e-12)
    assert np.allclose(np.abs(es.P[:, order]), np.eye(4), atol=1e-12)


def test_hermitian_gives_real_eigenvalues():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    es = eigen_system(X + X.conj().T)
    assert np.max(np.abs(es.lambdas.imag)) < 1e-10


def test_defective_matrix_rejected():
    with pytest.raises(DefectiveMatrix):
        eigen_system(np.array([[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 2, 0], [0, 0, 0, 3]], dtype=complex))


def _eigen_invariants(M):
    es = eigen_system(M)
    nM = np.max(np.abs(M))
    assert np.max(np.abs(M @ es.P - es.P * es.lambdas)) <= 1e-9 * nM
    assert np.max(np.abs(es.P @ es.P_inv - np.eye(4))) <= 1e-9 * es.condition
    return es


def test_effective_matrix_invariants(fig2b):
    _eigen_invariants(build(fig2b).M)


@given(system_params())
def test_effective_matrix_invariants_random(p):
    _eigen_invariants(build(p).M)


def test_quartic_uncoupled():
    p = SystemParams(E_a=1.3, E_b=0.6, E_L=1.0)
    r = root_array(quartic_coefficients(p))
    assert _match(r, [0, p.dE_a, p.dE_b, p.dE_a + p.dE_b]) < 1e-12


def test_quartic_shift():
    p = figure_params(100.0, 100.0, 1.0, 1.0, 1.0)
    shifted = root_array(quartic_coefficients(p)) - 1j * p.pump_rate
    assert _match(shifted, eigen_system(build(p).M).lambdas) < 1e-9


def test_pump_rate_value():
    p = SystemParams(mu=1.0, alpha_L=np.sqrt(0.1 / np.pi), J=0.4, V=0.3, mu_a=0.2, mu_b=0.1)
    assert p.pump_rate == pytest.approx(0.1)
    lam = eigen_system(build(p).M).lambdas
    tilde = root_array(quartic_coefficients(p))
    assert _match(lam, tilde - 0.1j) < 1e-9


@given(system_params())
def test_quartic_equals_eigenvalues(p):
    tilde = root_array(quartic_coefficients(p))
    lam = eigen_system(build(p).M).lambdas
    assert _match(tilde - 1j * p.pump_rate, lam) <= 1e-9 * max(1.0, np.max(np.abs(lam)))

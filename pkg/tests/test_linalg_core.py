import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistmap import linalg_core as la
from twistmap.errors import DegenerateSpectrum, SpectraOverlap
from twistmap.polyfactor import MatrixPolynomial


def _charpoly_roots(M):
    # oracle independent of eig: roots of t^2 - tr t + det
    tr, det = np.trace(M), np.linalg.det(M)
    return sorted(np.roots([1, -tr, det]), key=lambda z: (z.real, z.imag))


def test_identity_is_degenerate():
    with pytest.raises(DegenerateSpectrum):
        la.eigen_decompose(np.eye(2))


def test_diagonal_eigenpairs():
    pairs = la.eigen_decompose(np.diag([1, 2j]))
    by_value = {round(p.value.real) + 1j * round(p.value.imag): p.vector for p in pairs}
    v1, v2 = by_value[1], by_value[2j]
    assert abs(abs(v1[0]) - 1) < 1e-14 and abs(v1[1]) < 1e-14
    assert abs(abs(v2[1]) - 1) < 1e-14 and abs(v2[0]) < 1e-14


def test_companion_example_eigenvalues():
    M = np.array([[0, 1], [-6, 5]])
    got = la.spectrum(M).values
    want = _charpoly_roots(M)
    assert np.allclose(got, want, atol=1e-12)
    assert np.allclose(got, [2, 3], atol=1e-12)


@pytest.mark.parametrize("M, count", [
    (np.zeros((2, 2)), 2),
    (np.eye(2), 0),
    (np.ones((2, 2)), 1),
])
def test_nullspace_dimension(M, count):
    assert len(la.nullspace(M, 1e-10)) == count


def test_nullspace_rank_one_direction():
    (v,) = la.nullspace(np.ones((2, 2)), 1e-10)
    v = v / v[0]
    assert np.allclose(v, [1, -1])


def test_sylvester_scalar():
    lam = la.solve_sylvester(np.array([[3.0]]), np.array([[7.0]]))
    assert abs(lam[0, 0] - 0.25) < 1e-15


def test_sylvester_diagonal():
    lam = la.solve_sylvester(np.diag([0.0, 1.0]), np.diag([2.0, 5.0]))
    assert np.allclose(lam, np.diag([0.5, 0.25]), atol=1e-14)


def test_sylvester_equal_spectra_rejected():
    a = np.array([[1.0, 2.0], [0.5, -1.0]])
    with pytest.raises(SpectraOverlap):
        la.solve_sylvester(a, a)


def test_sylvester_operator_matches_definition():
    rng = np.random.default_rng(3)
    a1, a2, L = (rng.normal(size=(3, 3)) for _ in range(3))
    lhs = la.sylvester_operator(a1, a2) @ L.ravel(order="F")
    assert np.allclose(lhs, (a2 @ L - L @ a1).ravel(order="F"))


@pytest.mark.parametrize("coeffs, want", [
    ([np.diag([1.0, 2.0])], [1, 2]),
    ([np.array([[5.0]]), np.array([[6.0]])], [2, 3]),
])
def test_poly_eigenvalues_small(coeffs, want):
    P = MatrixPolynomial(tuple(coeffs))
    assert np.allclose(la.poly_eigenvalues(P).values, want, atol=1e-12)


def test_poly_eigenvalues_diagonal_product():
    # (t - diag(1,2))(t - diag(3,4)): a1 = sum, a2 = product
    b1, b2 = np.diag([1.0, 2.0]), np.diag([3.0, 4.0])
    P = MatrixPolynomial((b1 + b2, b1 @ b2))
    assert np.allclose(la.poly_eigenvalues(P).values, [1, 2, 3, 4], atol=1e-12)


def test_block_companion_charpoly():
    rng = np.random.default_rng(11)
    cs = [rng.normal(size=(2, 2)) for _ in range(2)]
    C = la.block_companion(cs)
    for t in (0.3, -1.2 + 0.5j, 2j):
        lhs = np.linalg.det(t * np.eye(4) - C)
        rhs = np.linalg.det(t * t * np.eye(2) + t * cs[0] + cs[1])
        assert abs(lhs - rhs) < 1e-10 * (1 + abs(rhs))


def test_json_round_trip():
    a = np.array([[1 + 2j, -3], [0.5j, 4]])
    assert np.array_equal(la.matrix_from_json(la.matrix_to_json(a)), a)
    assert la.complex_from_json(la.complex_to_json(1 - 2j)) == 1 - 2j


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_eigen_residuals(m, seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    try:
        pairs = la.eigen_decompose(M)
    except DegenerateSpectrum:
        return
    for p in pairs:
        assert abs(np.linalg.norm(p.vector) - 1) < 1e-12
        assert np.linalg.norm(M @ p.vector - p.value * p.vector) < 1e-10 * (1 + np.linalg.norm(M))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_sylvester_residual(m, seed):
    rng = np.random.default_rng(seed)
    a1 = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    a2 = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m)) + 3
    try:
        lam = la.solve_sylvester(a1, a2)
    except SpectraOverlap:
        return
    assert np.linalg.norm(a2 @ lam - lam @ a1 - np.eye(m)) < 1e-9

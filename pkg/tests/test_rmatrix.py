import numpy as np
import pytest

from twistmap import campaigns, rmatrix as rm
from twistmap.transpositions import make_scalar_rational


def _triples(name, count, seed=0):
    tmap, sampler = campaigns.build_map(name, m=2)
    triples, *_ = campaigns.draw_triples(tmap, sampler, count, seed)
    return tmap, triples


def test_keep_is_identity():
    R = rm.make_trivial_keep(3)
    assert np.array_equal(R(0.1, 0.2), np.eye(9))


def test_flip_sends_e1e2_to_e2e1():
    P = rm.make_trivial_flip(2)(0, 0)
    e = np.eye(2)
    assert np.array_equal(P @ np.kron(e[0], e[1]), np.kron(e[1], e[0]))


@pytest.mark.parametrize("factory", [rm.make_trivial_keep, rm.make_trivial_flip])
def test_trivial_inverse(factory):
    tmap = make_scalar_rational()
    assert rm.inverse_residual(factory(2), tmap, 0.3 + 0.1j, -0.5) == 0


def test_scaled_identity_inverse_residual():
    R = rm.TwistedRMatrix(2, lambda u, v: 2 * np.eye(4), tag="2I")
    res = rm.inverse_residual(R, make_scalar_rational(), 0.3, 0.4)
    assert res == pytest.approx(3.0)
    assert not rm.check_inverse(R, make_scalar_rational(), [(0.3, 0.4)], 1e-12).passed


def test_shape_checked():
    R = rm.TwistedRMatrix(2, lambda u, v: np.eye(3))
    with pytest.raises(ValueError):
        R(0, 0)


@pytest.mark.parametrize("name", ["scalar", "matrix-swap", "algebra"])
@pytest.mark.parametrize("factory", [rm.make_trivial_keep, rm.make_trivial_flip])
def test_trivial_r_matrices_pass(name, factory):
    tmap, triples = _triples(name, 10)
    R = factory(2)
    inv = rm.check_inverse(R, tmap, [t[:2] for t in triples], 1e-12)
    ybr = rm.check_twisted_ybr(R, tmap, triples, 1e-12)
    assert inv.passed and ybr.passed
    assert inv.max_residual == 0 and ybr.max_residual == 0


def test_perturbed_r_matrix_fails():
    tmap, triples = _triples("scalar", 10)
    R = rm.make_perturbed(rm.make_trivial_flip(2), seed=1)
    inv = rm.check_inverse(R, tmap, [t[:2] for t in triples], 1e-12)
    ybr = rm.check_twisted_ybr(R, tmap, triples, 1e-12)
    assert max(inv.max_residual, ybr.max_residual) >= 1e-2


def test_diagonal_example_is_reported():
    # exploratory: only the report itself is checked
    tmap, triples = _triples("scalar", 5)
    report = rm.check_twisted_ybr(rm.make_diagonal_scalar(), tmap, triples, 1e-12)
    assert report.n_triples == 5
    assert np.isfinite(report.max_residual)


def test_embeddings():
    A = np.arange(16.0).reshape(4, 4)
    x, y, z = np.eye(2)[0], np.eye(2)[1], np.array([1.0, 2.0])
    v = np.kron(np.kron(x, y), z)
    assert np.allclose(rm.embed12(A, 2) @ v, np.kron(A @ np.kron(x, y), z))
    assert np.allclose(rm.embed23(A, 2) @ v, np.kron(x, A @ np.kron(y, z)))

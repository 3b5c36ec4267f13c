"""Twisted R-matrices and checks of the inverse and twisted Yang-Baxter relations.

``R(u, v)`` maps ``V(u) (x) V(v)`` to ``V(phi(u, v)) (x) V(psi(u, v))``.  The
tensor basis is lexicographic: ``e_i (x) e_j`` has index ``n*i + j``
(0-based).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from twistmap.errors import OutsideDomain
from twistmap.transpositions import RelationReport, apply_mu


@dataclass(frozen=True)
class TwistedRMatrix:
    dim: int
    evaluate: Callable
    tag: str = "R"

    def __call__(self, u, v):
        out = np.asarray(self.evaluate(u, v), dtype=complex)
        if out.shape != (self.dim ** 2, self.dim ** 2):
            raise ValueError(f"R must be {self.dim ** 2} x {self.dim ** 2}")
        return out


def flip_operator(n):
    P = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            P[n * j + i, n * i + j] = 1.0
    return P


def make_trivial_keep(n):
    """``x_i(u) (x) x_j(v) -> x_i(phi) (x) x_j(psi)``: the identity operator."""
    eye = np.eye(n * n)
    return TwistedRMatrix(n, lambda u, v: eye, tag="keep")


def make_trivial_flip(n):
    """``x_i(u) (x) x_j(v) -> x_j(phi) (x) x_i(psi)``: the flip operator."""
    P = flip_operator(n)
    return TwistedRMatrix(n, lambda u, v: P, tag="flip")


def embed12(R, n):
    return np.kron(R, np.eye(n))


def embed23(R, n):
    return np.kron(np.eye(n), R)


def inverse_residual(R, tmap, u, v):
    """Spectral norm of ``R(phi, psi) R(u, v) - 1``."""
    p, q = apply_mu(tmap, u, v)
    prod = R(p, q) @ R(u, v)
    return float(np.linalg.norm(prod - np.eye(prod.shape[0]), 2))


def ybr_sides(R, tmap, u, v, w):
    """Both sides of the twisted Yang-Baxter relation as ``n^3 x n^3`` operators.

    Each ``mu`` evaluation in the diagram happens once; the nodes feed both
    paths.  Returns ``(lhs, rhs, scale)`` where ``scale`` is one plus the
    largest operator norm met on either path.
    """
    n = R.dim
    mu = lambda a, b: apply_mu(tmap, a, b)
    p_uv, q_uv = mu(u, v)
    p_qw, _ = mu(q_uv, w)
    p_vw, q_vw = mu(v, w)
    _, q_u_pvw = mu(u, p_vw)

    ops_l = [R(p_uv, p_qw), R(q_uv, w), R(u, v)]
    ops_r = [R(q_u_pvw, q_vw), R(u, p_vw), R(v, w)]
    lhs = embed12(ops_l[0], n) @ embed23(ops_l[1], n) @ embed12(ops_l[2], n)
    rhs = embed23(ops_r[0], n) @ embed12(ops_r[1], n) @ embed23(ops_r[2], n)
    scale = 1.0 + max(np.linalg.norm(x, 2) for x in ops_l + ops_r)
    return lhs, rhs, scale


def ybr_residual(R, tmap, u, v, w):
    lhs, rhs, scale = ybr_sides(R, tmap, u, v, w)
    return float(np.linalg.norm(lhs - rhs, 2) / scale)


def _report(name, tag, tol, seed):
    return RelationReport(tag, tol, (name,), seed=seed)


def check_inverse(R, tmap, pairs, tol, seed=None):
    report = _report("inverse", f"{R.tag}/{tmap.tag}", tol, seed)
    for idx, (u, v) in enumerate(pairs):
        try:
            report.residuals.append({"inverse": inverse_residual(R, tmap, u, v)})
        except OutsideDomain as exc:
            report.rejected += 1
            report.failures.append({"index": idx, "error": str(exc)})
    return report


def check_twisted_ybr(R, tmap, triples, tol, seed=None):
    report = _report("twisted_ybr", f"{R.tag}/{tmap.tag}", tol, seed)
    for idx, (u, v, w) in enumerate(triples):
        try:
            report.residuals.append(
                {"twisted_ybr": ybr_residual(R, tmap, u, v, w)})
        except OutsideDomain as exc:
            report.rejected += 1
            report.failures.append({"index": idx, "error": str(exc)})
    return report


def make_diagonal_scalar(n=2):
    """Exploration example ``R(u, v) = diag(1, u, v, uv)`` for scalar carriers."""
    if n != 2:
        raise ValueError("the diagonal example is defined for n = 2")
    return TwistedRMatrix(2, lambda u, v: np.diag([1, u, v, u * v]), tag="diag")


def make_perturbed(R, eps=0.1, seed=0):
    """``R + eps * E`` for a fixed random matrix ``E`` of unit spectral norm."""
    rng = np.random.default_rng(seed)
    E = rng.normal(size=(R.dim ** 2,) * 2) + 1j * rng.normal(size=(R.dim ** 2,) * 2)
    E /= np.linalg.norm(E, 2)
    return TwistedRMatrix(R.dim, lambda u, v: R(u, v) + eps * E,
                          tag=f"{R.tag}+{eps:g}E")

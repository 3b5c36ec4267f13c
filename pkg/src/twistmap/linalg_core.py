"""Dense complex linear algebra kernels.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  The helpers here
validate shape and finiteness, compute separated spectra, kernels and
Sylvester solves, and find the roots of monic matrix polynomials through the
block companion linearization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from twistmap.errors import DegenerateSpectrum, NoConvergence, SpectraOverlap

SEP_MIN = 1e-6
EIG_TOL = 1e-9
SOLVE_TOL = 1e-10


def as_matrix(x, square=True):
    """Coerce ``x`` to a finite 2-d complex array."""
    a = np.array(x, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def matrix_to_json(a):
    a = np.asarray(a, dtype=complex)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in a.ravel()],
    }


def matrix_from_json(obj):
    rows, cols = int(obj["rows"]), int(obj["cols"])
    entries = obj["entries"]
    if rows < 1 or cols < 1 or len(entries) != rows * cols:
        raise ValueError("matrix JSON: entries length must equal rows*cols")
    vals = np.array([complex(re, im) for re, im in entries], dtype=complex)
    return as_matrix(vals.reshape(rows, cols), square=False)


def complex_to_json(z):
    return [float(np.real(z)), float(np.imag(z))]


def complex_from_json(pair):
    re, im = pair
    return complex(float(re), float(im))


@dataclass(frozen=True)
class EigenPair:
    value: complex
    vector: np.ndarray


@dataclass(frozen=True)
class OrderedSpectrum:
    """Eigenvalues in a fixed order together with their minimum gap."""

    values: tuple
    separation: float

    @classmethod
    def from_values(cls, values, sep_min=SEP_MIN):
        vals = tuple(complex(v) for v in values)
        sep = min_separation(vals)
        scale = max([1.0] + [abs(v) for v in vals])
        if sep < sep_min * scale:
            raise DegenerateSpectrum(
                f"eigenvalues closer than {sep_min:g} (gap {sep:.3g})")
        return cls(vals, sep)

    def __len__(self):
        return len(self.values)

    def as_array(self):
        return np.array(self.values, dtype=complex)


def min_separation(values):
    v = np.asarray(values, dtype=complex).ravel()
    if v.size < 2:
        return float("inf")
    d = np.abs(v[:, None] - v[None, :])
    d[np.diag_indices_from(d)] = np.inf
    return float(d.min())


def canonical_order(values):
    """Sort by real part, then imaginary part."""
    return sorted((complex(v) for v in values), key=lambda z: (z.real, z.imag))


def _check_separated(values, sep_min):
    scale = max(1.0, float(np.max(np.abs(values))) if len(values) else 1.0)
    sep = min_separation(values)
    if sep < sep_min * scale:
        raise DegenerateSpectrum(
            f"eigenvalues closer than {sep_min:g} relative to scale "
            f"{scale:.3g} (gap {sep:.3g})")
    return sep


def eigen_decompose(M, sep_min=SEP_MIN):
    """Eigenpairs of a square matrix with pairwise separated eigenvalues.

    Vectors have unit Euclidean norm.  Raises `DegenerateSpectrum` when two
    eigenvalues are closer than ``sep_min`` (relative to the spectral scale).
    """
    M = as_matrix(M)
    try:
        w, V = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    _check_separated(w, sep_min)
    V = V / np.linalg.norm(V, axis=0, keepdims=True)
    return [EigenPair(complex(w[k]), V[:, k].copy()) for k in range(len(w))]


def spectrum(M, sep_min=SEP_MIN):
    """Canonically ordered spectrum of a square matrix."""
    M = as_matrix(M)
    w = np.linalg.eigvals(M)
    _check_separated(w, sep_min)
    return OrderedSpectrum(tuple(canonical_order(w)), min_separation(w))


def nullspace(M, tol):
    """Orthonormal basis of ``{v : |Mv| <= tol |M|}`` as a list of columns."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise ValueError("nullspace expects a matrix")
    _, s, vh = np.linalg.svd(M)
    n = M.shape[1]
    sv = np.zeros(n)
    sv[: len(s)] = s
    norm = s[0] if len(s) else 0.0
    keep = sv <= tol * norm
    return [vh[k].conj().copy() for k in range(n) if keep[k]]


def sylvester_operator(a1, a2):
    """Matrix of ``L -> a2 L - L a1`` acting on column-major ``vec(L)``."""
    m = a1.shape[0]
    eye = np.eye(m)
    return np.kron(eye, a2) - np.kron(a1.T, eye)


def solve_sylvester(a1, a2, sep_min=SEP_MIN):
    """Solve ``a2 @ L - L @ a1 = I`` by vectorization.

    The equation is uniquely solvable iff the spectra of ``a1`` and ``a2``
    are disjoint; spectra closer than ``sep_min`` raise `SpectraOverlap`.
    """
    a1, a2 = as_matrix(a1), as_matrix(a2)
    if a1.shape != a2.shape:
        raise ValueError("a1 and a2 must have the same shape")
    m = a1.shape[0]
    s1, s2 = np.linalg.eigvals(a1), np.linalg.eigvals(a2)
    gap = float(np.min(np.abs(s1[:, None] - s2[None, :])))
    scale = max(1.0, float(np.max(np.abs(np.concatenate([s1, s2])))))
    if gap < sep_min * scale:
        raise SpectraOverlap(f"spectra of a1 and a2 intersect (gap {gap:.3g})")
    K = sylvester_operator(a1, a2)
    rhs = np.eye(m, dtype=complex).ravel(order="F")
    try:
        x = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError as exc:
        raise SpectraOverlap("vectorized Sylvester system is singular") from exc
    lam = x.reshape((m, m), order="F")
    res = np.linalg.norm(a2 @ lam - lam @ a1 - np.eye(m))
    bound = SOLVE_TOL * (np.linalg.norm(a1) + np.linalg.norm(a2) + 1.0)
    if not np.isfinite(res) or res > bound:
        raise SpectraOverlap(f"Sylvester residual {res:.3g} too large")
    return lam


def block_companion(signed_coeffs):
    """Block companion matrix of ``t^d + c_1 t^(d-1) + ... + c_d``.

    ``signed_coeffs`` lists ``c_1 .. c_d`` (each m x m).  The characteristic
    polynomial of the result is ``det(t^d + c_1 t^(d-1) + ... + c_d)``.
    """
    d = len(signed_coeffs)
    m = signed_coeffs[0].shape[0]
    C = np.zeros((m * d, m * d), dtype=complex)
    for k, ck in enumerate(signed_coeffs):
        C[:m, k * m:(k + 1) * m] = -ck
    if d > 1:
        C[m:, : m * (d - 1)] = np.eye(m * (d - 1))
    return C


def poly_eigenvalues(P, sep_min=SEP_MIN):
    """All ``m*d`` roots of ``det P(t)`` in canonical order.

    ``P`` is a `twistmap.polyfactor.MatrixPolynomial` (anything exposing
    ``signed_coeffs()``).
    """
    C = block_companion(P.signed_coeffs())
    w = np.linalg.eigvals(C)
    sep = _check_separated(w, sep_min)
    return OrderedSpectrum(tuple(canonical_order(w)), sep)

"""Matrix theta functions and their factorizations.

Conventions
-----------
``Lattice(tau)`` is generated by ``1`` and ``tau``.  The scalar space
``Theta_{N,c}`` consists of entire functions with ``f(z + 1) = f(z)`` and
``f(z + tau) = exp(-2 pi i (N z - c)) f(z)``; it is spanned by

    theta_a(z) = sum_{j = a mod N} exp(2 pi i (tau j^2 / 2N - j tau / 2 - j c / N + j z))

which satisfies ``theta_a(z + 1/N) = e(a/N) theta_a(z)`` and
``theta_a(z + tau/N) = exp(-2 pi i (z - (N-1) tau / 2N - c/N)) theta_{a+1}(z)``.

``MTheta_{n,m,c}`` is the space of ``m x m`` matrix functions with

    f(z + 1/m)   = g1^-1 f(z) g1
    f(z + tau/m) = exp(-2 pi i (m n z - c)) g2^-1 f(z) g2

for a Heisenberg pair ``(g1, g2)``.  Entries of such ``f`` lie in
``Theta_{m^2 n, c1}`` with ``c1 = m c - m n (m - 1) tau / 2``, so a section is
stored as coefficient matrices ``phi_a`` with ``f = sum_a phi_a theta_a``.
In these coordinates the two conditions become ``c``- and ``tau``-free linear
constraints, and their solution space has dimension ``m^2 n``.

``det f`` has ``m n`` zeros modulo ``(1/m) Gamma``; ``m`` times their sum is
congruent to ``m c + m n / 2`` modulo ``Gamma``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from twistmap import linalg_core as la
from twistmap.errors import (
    DegenerateInstance,
    DegenerateZeros,
    DimensionMismatch,
    NonUniqueSolution,
    OutsideDomain,
    PartitionMismatch,
    QuotientResidual,
    ZeroCountMismatch,
)
from twistmap.polyfactor import kernel_vector
from twistmap.transpositions import THETA, TwistedMap

TAU_MIN = 0.05
CONSTRAINT_TOL = 1e-10
ZERO_TOL = 1e-7
THETA_FACT_TOL = 1e-6
SERIES_TOL = 1e-12
MATCH_TOL = 1e-6

# log of the dropped tail relative to the largest term
_TAIL_LOG = 40.0


@dataclass(frozen=True)
class Lattice:
    tau: complex

    def __post_init__(self):
        tau = complex(self.tau)
        object.__setattr__(self, "tau", tau)
        if not np.isfinite(tau) or tau.imag < TAU_MIN:
            raise ValueError(f"Im(tau) must be at least {TAU_MIN}, got {tau.imag:g}")

    def coords(self, z, m=1):
        """Real coordinates ``(x, y)`` with ``z = (x + y tau) / m``."""
        z = np.asarray(z, dtype=complex) * m
        y = z.imag / self.tau.imag
        x = z.real - y * self.tau.real
        return x, y

    def reduce(self, z, m=1, deadband=ZERO_TOL):
        """Representative of ``z`` in ``[0, 1/m) + [0, tau/m)``."""
        x, y = self.coords(z, m)
        x = x - np.floor(x)
        y = y - np.floor(y)
        x = np.where(x > 1 - deadband, 0.0, x)
        y = np.where(y > 1 - deadband, 0.0, y)
        out = (x + y * self.tau) / m
        return complex(out) if np.ndim(out) == 0 else out

    def distance(self, z1, z2, m=1):
        """Distance between ``z1`` and ``z2`` modulo ``(1/m) Gamma``."""
        x, y = self.coords(np.asarray(z1) - np.asarray(z2), m)
        x = x - np.round(x)
        y = y - np.round(y)
        best = None
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                d = np.abs((x + dx + (y + dy) * self.tau) / m)
                best = d if best is None else np.minimum(best, d)
        return float(best) if np.ndim(best) == 0 else best


@dataclass(frozen=True)
class HeisenbergPair:
    m: int
    gamma1: np.ndarray = field(compare=False)
    gamma2: np.ndarray = field(compare=False)
    epsilon: complex


@functools.lru_cache(maxsize=None)
def heisenberg_pair(m):
    """``g1 = diag(eps^a)`` and ``g2 e_a = e_(a-1)``, so ``g2 g1 = eps g1 g2``."""
    eps = np.exp(2j * np.pi / m)
    g1 = np.diag(eps ** np.arange(m))
    g2 = np.zeros((m, m), dtype=complex)
    for a in range(m):
        g2[(a - 1) % m, a] = 1.0
    g1.flags.writeable = False
    g2.flags.writeable = False
    return HeisenbergPair(m, g1, g2, complex(eps))


# ---------------------------------------------------------------------------
# scalar theta basis


def _series_range(N, c, tau, z):
    A = np.pi * tau.imag / N
    B = np.pi * tau.imag + 2 * np.pi * np.imag(c) / N - 2 * np.pi * np.imag(z)
    centre = B / (2 * A)
    r = np.sqrt(_TAIL_LOG / A) + 2
    return int(np.floor(np.min(centre) - r)), int(np.ceil(np.max(centre) + r))


def theta_values(N, c, lattice, z, deriv=False):
    """``theta_a(z)`` for ``a = 0..N-1`` at every point of ``z``.

    Returns an array of shape ``z.shape + (N,)``; with ``deriv`` a pair
    ``(values, derivatives)``.
    """
    tau = lattice.tau
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    lo, hi = _series_range(N, c, tau, flat)
    j = np.arange(lo, hi + 1)
    const = 2j * np.pi * (tau * j * j / (2 * N) - j * tau / 2 - j * c / N)
    E = np.exp(const[None, :] + 2j * np.pi * flat[:, None] * j[None, :])
    onehot = np.zeros((len(j), N))
    onehot[np.arange(len(j)), np.mod(j, N)] = 1.0
    vals = (E @ onehot).reshape(z.shape + (N,))
    if not deriv:
        return vals
    dvals = ((E * (2j * np.pi * j)[None, :]) @ onehot).reshape(z.shape + (N,))
    return vals, dvals


def theta_basis_eval(n, c, lattice, alpha, z):
    """``theta_alpha(z)`` in the basis of ``Theta_{n,c}``."""
    return complex(theta_values(n, c, lattice, np.asarray([z]))[0, alpha % n])


# ---------------------------------------------------------------------------
# matrix theta spaces


def scalar_parameter(n, m, c, lattice):
    """``c1`` such that the entries of ``MTheta_{n,m,c}`` lie in ``Theta_{m^2 n, c1}``."""
    return m * c - m * n * (m - 1) * lattice.tau / 2


def constraint_matrix(n, m):
    """Linear constraints on the stacked coefficients ``phi_a`` (row-major)."""
    N = m * m * n
    s = m * n
    hp = heisenberg_pair(m)
    g1, g2 = hp.gamma1, hp.gamma2
    g1i, g2i = np.linalg.inv(g1), np.linalg.inv(g2)
    mm = m * m
    # row-major vec(A X B) = kron(A, B.T) vec(X)
    conj1 = np.kron(g1i, g1.T)
    conj2 = np.kron(g2, g2i.T)
    rows = []
    for a in range(N):
        blk = np.zeros((mm, N * mm), dtype=complex)
        blk[:, a * mm:(a + 1) * mm] = np.exp(2j * np.pi * (a % m) / m) * np.eye(mm) - conj1
        rows.append(blk)
    for a in range(N):
        blk = np.zeros((mm, N * mm), dtype=complex)
        b = (a + s) % N
        blk[:, b * mm:(b + 1) * mm] += np.eye(mm)
        blk[:, a * mm:(a + 1) * mm] -= conj2
        rows.append(blk)
    return np.vstack(rows)


@functools.lru_cache(maxsize=None)
def coefficient_basis(n, m, tol=CONSTRAINT_TOL):
    """Orthonormal basis of the constraint nullspace, shape ``(m^2 n, N, m, m)``."""
    N = m * m * n
    K = constraint_matrix(n, m)
    _, s, vh = np.linalg.svd(K)
    # constraint entries are O(1), so the threshold is absolute
    null = vh[s <= tol * max(s[0], 1.0)].conj()
    if null.shape[0] != m * m * n:
        raise DimensionMismatch(
            f"constraint nullspace has dimension {null.shape[0]}, expected {m * m * n}")
    basis = null.reshape(-1, N, m, m)
    basis.flags.writeable = False
    return basis


def _normalize_coeffs(coeffs):
    flat = coeffs.ravel()
    mags = np.abs(flat)
    top = mags.max()
    if top == 0:
        raise ValueError("cannot normalize the zero section")
    pivot = int(np.flatnonzero(mags >= top * (1 - 1e-12))[0])
    if flat[pivot] == 1:
        return coeffs.copy()
    out = coeffs / flat[pivot]
    out.ravel()[pivot] = 1.0
    return out


@dataclass(frozen=True, eq=False)
class ThetaSection:
    """An element of ``MTheta_{n,m,c}`` stored by its coefficient matrices."""

    n: int
    m: int
    c: complex
    lattice: Lattice
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex)
        N = self.m * self.m * self.n
        if coeffs.shape != (N, self.m, self.m):
            raise ValueError(f"coeffs must have shape {(N, self.m, self.m)}")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("non-finite coefficients")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "c", complex(self.c))

    @property
    def c1(self):
        return scalar_parameter(self.n, self.m, self.c, self.lattice)

    def __call__(self, z):
        return mtheta_eval(self, z)

    def normalized(self):
        return self.with_coeffs(_normalize_coeffs(self.coeffs))

    def with_coeffs(self, coeffs, c=None):
        return ThetaSection(self.n, self.m, self.c if c is None else c,
                            self.lattice, coeffs)

    def constraint_residual(self):
        """Norm of the linear constraints violated by the coefficients."""
        K = constraint_matrix(self.n, self.m)
        x = self.coeffs.ravel()
        return float(np.linalg.norm(K @ x) / np.linalg.norm(x))

    def to_json(self):
        return {
            "n": self.n,
            "m": self.m,
            "c": la.complex_to_json(self.c),
            "tau": la.complex_to_json(self.lattice.tau),
            "coeffs": [la.matrix_to_json(p) for p in self.coeffs],
        }

    @classmethod
    def from_json(cls, obj):
        n, m = int(obj["n"]), int(obj["m"])
        coeffs = np.array([la.matrix_from_json(p) for p in obj["coeffs"]])
        return cls(n, m, la.complex_from_json(obj["c"]),
                   Lattice(la.complex_from_json(obj["tau"])), coeffs)


def mtheta_basis(n, m, c, lattice):
    """``m^2 n`` linearly independent sections spanning ``MTheta_{n,m,c}``."""
    return [ThetaSection(n, m, c, lattice, b).normalized()
            for b in coefficient_basis(n, m)]


def mtheta_eval(f, z, deriv=False):
    """``f(z) = sum_a phi_a theta_a(z)``; vectorized over ``z``."""
    z = np.asarray(z, dtype=complex)
    N = f.m * f.m * f.n
    out = theta_values(N, f.c1, f.lattice, z, deriv=deriv)
    if not deriv:
        return np.einsum("...a,akl->...kl", out, f.coeffs)
    vals, dvals = out
    return (np.einsum("...a,akl->...kl", vals, f.coeffs),
            np.einsum("...a,akl->...kl", dvals, f.coeffs))


def _basis_eval(n, m, c, lattice, z):
    """Values of every coefficient-basis section: shape ``z.shape + (K, m, m)``."""
    N = m * m * n
    th = theta_values(N, scalar_parameter(n, m, c, lattice), lattice, z)
    return np.einsum("...a,kapq->...kpq", th, coefficient_basis(n, m))


def section_from_basis(n, m, c, lattice, x):
    coeffs = np.einsum("k,kapq->apq", np.asarray(x), coefficient_basis(n, m))
    return ThetaSection(n, m, c, lattice, coeffs)


def random_section(n, m, c, lattice, rng):
    K = m * m * n
    x = rng.uniform(-1, 1, K) + 1j * rng.uniform(-1, 1, K)
    return section_from_basis(n, m, c, lattice, x).normalized()


def eq5_residuals(f, z):
    """Relative residuals of the two quasi-periodicity conditions at ``z``."""
    hp = heisenberg_pair(f.m)
    g1, g2 = hp.gamma1, hp.gamma2
    g1i, g2i = np.linalg.inv(g1), np.linalg.inv(g2)
    z = np.asarray(z, dtype=complex)
    fz = f(z)
    scale = np.linalg.norm(fz, axis=(-2, -1)) + 1e-300
    r1 = np.linalg.norm(f(z + 1 / f.m) - g1i @ fz @ g1, axis=(-2, -1))
    fac = np.exp(-2j * np.pi * (f.m * f.n * z - f.c))[..., None, None]
    r2 = np.linalg.norm(f(z + f.lattice.tau / f.m) - fac * (g2i @ fz @ g2),
                        axis=(-2, -1))
    r2 = r2 / (np.abs(fac[..., 0, 0]) * scale)
    return r1 / scale, r2


def section_distance(a, b):
    """Projective distance between sections (plus the gap between labels ``c``)."""
    if (a.n, a.m) != (b.n, b.m) or a.lattice != b.lattice:
        return float("inf")
    x = a.coeffs.ravel() / np.linalg.norm(a.coeffs)
    y = b.coeffs.ravel() / np.linalg.norm(b.coeffs)
    ov = np.vdot(y, x)
    if abs(ov) > 0:
        y = y * (ov / abs(ov))
    return max(abs(a.c - b.c), float(np.linalg.norm(x - y)))


# ---------------------------------------------------------------------------
# zeros of det f


@dataclass(frozen=True)
class ZeroSet:
    points: tuple

    def to_json(self):
        return {"points": [la.complex_to_json(z) for z in self.points]}

    @classmethod
    def from_json(cls, obj):
        return cls(tuple(la.complex_from_json(z) for z in obj["points"]))

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def _log_derivative(f, z):
    vals, dvals = mtheta_eval(f, z, deriv=True)
    return np.trace(np.linalg.solve(vals, dvals), axis1=-2, axis2=-1)


def _contour_moments(f, z0, kmax, nodes=128):
    """``(1/2 pi i) \\oint ((z - zc)/rho)^k (det f)'/det f dz``, k = 0..kmax."""
    w1 = 1 / f.m
    w2 = f.lattice.tau / f.m
    corners = [z0, z0 + w1, z0 + w1 + w2, z0 + w2, z0]
    zc = z0 + (w1 + w2) / 2
    rho = abs(w1) + abs(w2)
    t, wts = np.polynomial.legendre.leggauss(nodes)
    t = (t + 1) / 2
    wts = wts / 2
    pts, dz = [], []
    for a, b in zip(corners[:-1], corners[1:]):
        pts.append(a + (b - a) * t)
        dz.append((b - a) * wts)
    pts = np.concatenate(pts)
    dz = np.concatenate(dz)
    h = _log_derivative(f, pts)
    u = (pts - zc) / rho
    powers = u[None, :] ** np.arange(kmax + 1)[:, None]
    return (powers * h[None, :] * dz[None, :]).sum(axis=1) / (2j * np.pi), zc, rho


def _roots_from_power_sums(p):
    """Roots of the monic polynomial whose power sums are ``p[1..M]``."""
    M = len(p) - 1
    e = [1.0 + 0j]
    for k in range(1, M + 1):
        e.append(sum((-1) ** (i - 1) * e[k - i] * p[i] for i in range(1, k + 1)) / k)
    poly = [(-1) ** k * e[k] for k in range(M + 1)]
    return np.roots(poly)


def _newton(f, z, iters=60):
    step_tol = 1e-14 * (1 + abs(f.lattice.tau))
    for _ in range(iters):
        try:
            h = complex(_log_derivative(f, np.array([z]))[0])
        except np.linalg.LinAlgError:
            # landed exactly on the zero
            break
        if not np.isfinite(h) or h == 0:
            break
        step = 1 / h
        z = z - step
        if abs(step) < step_tol:
            break
    return z


def _is_zero(f, z, tol, scale):
    s = np.linalg.svd(f(np.array([z]))[0], compute_uv=False)
    return s[-1] <= tol * scale


def _local_scale(f):
    z = _sample_points(f.m, f.lattice, 32, 7)
    return float(np.max(np.linalg.norm(f(z), ord=2, axis=(-2, -1))))


_OFFSETS = [(0.0, 0.0), (0.37, 0.21), (0.61, 0.53), (0.13, 0.77),
            (0.83, 0.41), (0.29, 0.93)]


def det_zeros(f, zero_tol=ZERO_TOL, sep_min=la.SEP_MIN):
    """The ``m n`` zeros of ``det f`` modulo ``(1/m) Gamma``.

    Zeros are located by contour moments of ``(det f)'/det f`` around a cell
    of ``(1/m) Gamma`` (the zeroth moment certifies the count), polished by
    Newton iteration and reduced to the canonical fundamental domain.
    """
    M = f.m * f.n
    lat = f.lattice
    last_err = None
    scale = _local_scale(f)
    for ox, oy in _OFFSETS:
        z0 = (ox + oy * lat.tau) / f.m
        mom, zc, rho = _contour_moments(f, z0, M)
        count = mom[0].real
        if abs(mom[0] - round(count)) > 1e-4:
            last_err = ZeroCountMismatch(f"winding integral {mom[0]:.6g} not an integer")
            continue
        if round(count) != M:
            raise ZeroCountMismatch(f"found {round(count)} zeros, expected {M}")
        guesses = zc + rho * _roots_from_power_sums(mom)
        pts = []
        for g in guesses:
            z = _newton(f, complex(g))
            if not _is_zero(f, z, zero_tol, scale):
                break
            pts.append(lat.reduce(z, f.m))
        else:
            if len(pts) == M and _distinct(lat, pts, f.m, sep_min):
                return ZeroSet(tuple(sorted(pts, key=lambda w: (w.real, w.imag))))
            last_err = DegenerateZeros("zeros collide modulo (1/m) Gamma")
            continue
        last_err = ZeroCountMismatch("Newton refinement did not reach a zero")
    raise last_err


def _distinct(lat, pts, m, sep_min):
    for i in range(len(pts)):
        for j in range(i):
            if lat.distance(pts[i], pts[j], m) < sep_min:
                return False
    return True


def sum_rule_residual(zeros, f):
    """Distance of ``m * sum(zeros)`` from ``m c + m n / 2`` modulo ``Gamma``."""
    total = f.m * sum(zeros) - (f.m * f.c + f.m * f.n / 2)
    return f.lattice.distance(total, 0.0, 1)


def zero_parameter(zeros, n):
    """The ``c`` forced by a zero set: ``sum(zeros) - n / 2``."""
    return complex(sum(zeros)) - n / 2


# ---------------------------------------------------------------------------
# interpolation and fitting


def _sample_points(m, lattice, count, start):
    k = np.arange(start, start + count)
    x = np.mod(0.5 + k * 0.6180339887498949, 1.0)
    y = np.mod(0.5 + k * 0.7548776662466927, 1.0)
    return (x + y * lattice.tau) / m


def _interpolation_system(lambdas, vs, n, m, lattice, c):
    lambdas = np.asarray(lambdas, dtype=complex)
    if len(lambdas) != m * n or len(vs) != m * n:
        raise ValueError(f"need {m * n} points and vectors")
    vs = [np.asarray(v, dtype=complex) for v in vs]
    if any(np.linalg.norm(v) == 0 for v in vs):
        raise ValueError("kernel vectors must be nonzero")
    B = _basis_eval(n, m, c, lattice, lambdas)  # (mn, K, m, m)
    rows = [np.einsum("kpq,q->pk", B[b], vs[b] / np.linalg.norm(vs[b]))
            for b in range(len(lambdas))]
    A = np.vstack(rows)
    col = np.linalg.norm(A, axis=0)
    _, s, vh = np.linalg.svd(A / col)
    sv = np.zeros(A.shape[1])
    sv[: len(s)] = s
    return sv, vh, col


def interpolation_nullity(lambdas, vs, n, m, lattice, c=None, tol=CONSTRAINT_TOL):
    """Dimension of the solution space of ``f(lambda_a) v_a = 0`` in ``MTheta_{n,m,c}``."""
    if c is None:
        c = zero_parameter(lambdas, n)
    sv, _, _ = _interpolation_system(lambdas, vs, n, m, lattice, c)
    return int(np.sum(sv <= tol * sv[0]))


def interpolate(lambdas, vs, n, m, lattice, c=None, tol=CONSTRAINT_TOL):
    """The section of ``MTheta_{n,m,c}`` with ``f(lambda_a) v_a = 0`` for every ``a``.

    ``c`` defaults to ``sum(lambdas) - n/2``.  The solution is the
    one-dimensional kernel of the stacked linear conditions; any other
    kernel dimension raises `NonUniqueSolution`.
    """
    if c is None:
        c = zero_parameter(lambdas, n)
    sv, vh, col = _interpolation_system(lambdas, vs, n, m, lattice, c)
    nullity = int(np.sum(sv <= tol * sv[0]))
    if nullity != 1:
        raise NonUniqueSolution(
            f"interpolation kernel has dimension {nullity} (singular values "
            f"{sv[-2]:.3g}, {sv[-1]:.3g})")
    x = vh[-1].conj() / col
    return section_from_basis(n, m, c, lattice, x).normalized()


def fit_section(target, n, m, c, lattice, right=None, tol=THETA_FACT_TOL,
                n_fit=None, n_check=20):
    """Least-squares ``g`` in ``MTheta_{n,m,c}`` with ``g(z) right(z) = target(z)``.

    ``target`` and ``right`` are callables on arrays of points.  The fit is
    validated on held-out points; a relative residual above ``tol`` raises
    `QuotientResidual`.
    """
    K = m * m * n
    n_fit = n_fit or max(12, 3 * K)
    zf = _sample_points(m, lattice, n_fit, 1)
    zc = _sample_points(m, lattice, n_check, 1000)

    def design(z):
        B = _basis_eval(n, m, c, lattice, z)  # (P, K, m, m)
        if right is not None:
            B = B @ right(z)[:, None, :, :]
        return B.transpose(0, 2, 3, 1).reshape(-1, K)

    A = design(zf)
    T = target(zf).reshape(-1)
    scale = np.linalg.norm(A, axis=0)
    x, *_ = np.linalg.lstsq(A / scale, T, rcond=None)
    x = x / scale
    Tc = target(zc).reshape(-1)
    res = np.linalg.norm(design(zc) @ x - Tc) / max(np.linalg.norm(Tc), 1e-300)
    if not np.isfinite(res) or res > tol:
        raise QuotientResidual(f"held-out fit residual {res:.3g} exceeds {tol:g}")
    return section_from_basis(n, m, c, lattice, x), res


def multiply(*sections, tol=THETA_FACT_TOL):
    """The product section ``f_1(z)...f_k(z)`` in ``MTheta_{sum n, m, sum c}``."""
    f0 = sections[0]
    for s in sections[1:]:
        if s.m != f0.m or s.lattice != f0.lattice:
            raise ValueError("sections must share m and the lattice")

    def target(z):
        out = sections[0](z)
        for s in sections[1:]:
            out = out @ s(z)
        return out

    n = sum(s.n for s in sections)
    c = sum(s.c for s in sections)
    g, _ = fit_section(target, n, f0.m, c, f0.lattice, tol=tol)
    return g.normalized()


def product_residual(f, factors, n_check=20):
    """``|f - s f_1...f_k| / |f|`` at held-out points after the best global scalar."""
    z = _sample_points(f.m, f.lattice, n_check, 5000)
    a = f(z).ravel()
    b = factors[0](z)
    for s in factors[1:]:
        b = b @ s(z)
    b = b.ravel()
    s = np.vdot(b, a) / np.vdot(b, b)
    return float(np.linalg.norm(a - s * b) / np.linalg.norm(a))


def _match_zeros(zeros, partition, lattice, m, tol=MATCH_TOL):
    flat = [z for blk in partition for z in blk]
    if len(flat) != len(zeros):
        raise PartitionMismatch(
            f"partition has {len(flat)} values, det f has {len(zeros)} zeros")
    used = set()
    for z in flat:
        d = [lattice.distance(z, w, m) for w in zeros]
        k = int(np.argmin(d))
        if d[k] > tol:
            raise PartitionMismatch(f"value {z} is not a zero of det f")
        if k in used:
            raise PartitionMismatch(f"value {z} collides with another block value")
        used.add(k)


def theta_refactor(f, partition, cs=None, zeros=None, tol=THETA_FACT_TOL):
    """Split a degree-``n`` section into ``n`` degree-1 factors with prescribed zeros.

    ``partition`` lists ``n`` blocks of ``m`` zeros (any representatives
    modulo ``(1/m) Gamma``); factor ``a`` gets zero set ``partition[a]``.
    ``cs`` fixes the factor parameters (they must sum to ``f.c``); by default
    ``c_a`` is ``sum(partition[a]) - 1/2`` reduced into the canonical cell of
    ``(1/m) Gamma`` for ``a >= 2``, and ``c_1`` takes the remainder.  Factors are built right to left: the last one interpolates
    the kernels of ``f`` at its zeros, then ``f = g f_n`` is solved for ``g``.
    """
    blocks = [tuple(complex(z) for z in blk) for blk in partition]
    n, m = f.n, f.m
    if len(blocks) != n or any(len(b) != m for b in blocks):
        raise PartitionMismatch(f"need {n} blocks of {m} zeros")
    if zeros is None:
        zeros = det_zeros(f).points
    _match_zeros(zeros, blocks, f.lattice, m)

    if cs is None:
        tail = [f.lattice.reduce(zero_parameter(b, 1), m, deadband=0.0)
                for b in blocks[1:]]
        cs = [f.c - sum(tail)] + tail
    cs = [complex(x) for x in cs]
    if abs(sum(cs) - f.c) > 1e-9 * (1 + abs(f.c)):
        raise ValueError("factor parameters must sum to f.c")

    factors = [None] * n
    cur = f
    for a in range(n - 1, 0, -1):
        vs = [kernel_vector(cur(np.array([lam]))[0]) for lam in blocks[a]]
        fa = interpolate(blocks[a], vs, 1, m, f.lattice, c=cs[a])
        factors[a] = fa
        g, _ = fit_section(cur, cur.n - 1, m, cur.c - cs[a], f.lattice,
                           right=fa, tol=tol)
        cur = g
    factors[0] = cur
    return [s.normalized() for s in factors]


# ---------------------------------------------------------------------------
# twisted transposition and local action


def _perturb_section(f, eps):
    direction = coefficient_basis(f.n, f.m)[0]
    x = f.coeffs / np.linalg.norm(f.coeffs) + eps * direction
    return f.with_coeffs(x).normalized()


def mu_theta(m, lattice):
    """``mu(f, g) = (f1, g1)`` with ``f g = f1 g1``, ``S(f1) = S(g)``, ``S(g1) = S(f)``.

    The parameter labels travel with the zero sets: ``f1`` lives in the
    space of ``g`` and ``g1`` in the space of ``f``.
    """

    def pair(f, g):
        for s in (f, g):
            if s.m != m or s.n != 1 or s.lattice != lattice:
                raise OutsideDomain("mu_theta acts on degree-1 sections of size m")
        sf, sg = det_zeros(f).points, det_zeros(g).points
        for a in sf:
            for b in sg:
                if lattice.distance(a, b, m) < MATCH_TOL * 10:
                    raise OutsideDomain("zero sets of f and g intersect")
        h = multiply(f, g)
        f1, g1 = theta_refactor(h, [sg, sf], cs=[g.c, f.c], zeros=sf + sg)
        return f1, g1

    return TwistedMap("theta", f"{THETA}({m})", pair,
                      distance=section_distance, size=lambda x: 0.0,
                      shift=_perturb_section, meta={"m": m, "tau": lattice.tau})


@dataclass(frozen=True, eq=False)
class OrderedSection:
    """A degree-1 section with an ordered list of its zeros."""

    section: ThetaSection
    labels: tuple

    @classmethod
    def from_section(cls, section):
        return cls(section, det_zeros(section).points)

    def to_json(self):
        out = self.section.to_json()
        out["labels"] = [la.complex_to_json(z) for z in self.labels]
        return out

    @classmethod
    def from_json(cls, obj):
        sec = ThetaSection.from_json(obj)
        if obj.get("labels") is None:
            return cls.from_section(sec)
        return cls(sec, tuple(la.complex_from_json(z) for z in obj["labels"]))


def theta_local_action(word, fs):
    """``S_mN`` acting on ``N`` ordered degree-1 sections.

    Letters inside a factor permute its labels.  A boundary letter between
    factors ``k`` and ``k+1`` exchanges one zero between them: the pair is
    multiplied, then refactored with the new zero sets.  The moving zero
    carries its value into the factor parameter (``c`` shifts by the
    difference of the exchanged zeros), so ``sum(c)`` is preserved exactly.
    """
    m = fs[0].section.m
    if word.n_strands != m * len(fs):
        raise ValueError(f"word acts on {word.n_strands} strands, need {m * len(fs)}")
    secs = [o.section for o in fs]
    labels = [list(o.labels) for o in fs]
    for i in word.letters:
        k, r = divmod(i, m)
        if r:
            blk = labels[k]
            blk[r - 1], blk[r] = blk[r], blk[r - 1]
            continue
        left, right = labels[k - 1], labels[k]
        out_l, out_r = left[-1], right[0]
        left[-1], right[0] = out_r, out_l
        f, g = secs[k - 1], secs[k]
        cl = f.c - out_l + out_r
        cr = g.c - out_r + out_l
        h = multiply(f, g)
        zeros = tuple(list(det_zeros(f).points) + list(det_zeros(g).points))
        secs[k - 1], secs[k] = theta_refactor(h, [left, right], cs=[cl, cr],
                                              zeros=zeros)
    return [OrderedSection(s, tuple(lb)) for s, lb in zip(secs, labels)]


def random_ordered_sections(N, m, lattice, rng, min_gap=0.02, max_tries=200):
    """``N`` random degree-1 sections whose zeros are pairwise ``min_gap`` apart."""
    for _ in range(max_tries):
        out = []
        for _ in range(N):
            c = complex(lattice.reduce(rng.uniform(0, 1) + rng.uniform(0, 1) * lattice.tau, m))
            out.append(random_section(1, m, c, lattice, rng))
        try:
            ordered = [OrderedSection.from_section(s) for s in out]
        except (ZeroCountMismatch, DegenerateZeros):
            continue
        pts = [z for o in ordered for z in o.labels]
        if all(lattice.distance(pts[i], pts[j], m) >= min_gap
               for i in range(len(pts)) for j in range(i)):
            return ordered
    raise DegenerateInstance("could not draw generic sections")

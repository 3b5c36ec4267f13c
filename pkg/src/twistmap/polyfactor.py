"""Factorizations of monic matrix polynomials.

Polynomials use the alternating-sign convention

    P(t) = t^d - a_1 t^(d-1) + a_2 t^(d-2) - ... + (-1)^d a_d

so that ``(t - b_1)(t - b_2)`` has ``a_1 = b_1 + b_2`` and ``a_2 = b_1 b_2``.
A generic ``P`` of size ``m`` has ``m*d`` distinct roots of ``det P``; every
split of these roots into blocks of ``m`` is realized by exactly one
factorization ``(t - b_1)...(t - b_d)`` with ``spec(b_i)`` equal to block
``i``.  `refactor` computes that factorization, `sylvester_swap` is the
closed form for ``d = 2`` with the two spectra exchanged, and `local_action`
lets ``S_mN`` act on ordered factorizations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from twistmap import linalg_core as la
from twistmap.errors import (
    DegenerateInstance,
    DegenerateSpectrum,
    PartitionMismatch,
    SingularLambda,
)
from twistmap.transpositions import MATRIX, TwistedMap, _matrix_shift

FACT_TOL = 1e-8
MATCH_TOL = 1e-6
KERNEL_GAP = 10 * la.EIG_TOL
COND_MAX = 1e10


@dataclass(frozen=True)
class MatrixPolynomial:
    """Monic ``t^d - a_1 t^(d-1) + ... + (-1)^d a_d`` with ``m x m`` coefficients."""

    coeffs: tuple
    size: int | None = None

    def __post_init__(self):
        cs = tuple(la.as_matrix(a) for a in self.coeffs)
        if cs and any(a.shape != cs[0].shape for a in cs):
            raise ValueError("all coefficients must share one shape")
        if not cs and self.size is None:
            raise ValueError("a degree-0 polynomial needs an explicit size")
        object.__setattr__(self, "coeffs", cs)

    @property
    def d(self):
        return len(self.coeffs)

    @property
    def m(self):
        return self.coeffs[0].shape[0] if self.coeffs else self.size

    def signed_coeffs(self):
        """``c_k = (-1)^k a_k``, the coefficient of ``t^(d-k)``."""
        return [(-1) ** k * a for k, a in enumerate(self.coeffs, start=1)]

    def __call__(self, t):
        out = np.eye(self.m, dtype=complex)
        for c in self.signed_coeffs():
            out = out * t + c
        return out

    def coeff_norm(self):
        return max([1.0] + [np.linalg.norm(a) for a in self.coeffs])

    def distance(self, other):
        if self.d != other.d or self.m != other.m:
            return float("inf")
        return max([0.0] + [float(np.linalg.norm(a - b))
                            for a, b in zip(self.coeffs, other.coeffs)])

    def to_json(self):
        return {"m": self.m, "d": self.d,
                "coeffs": [la.matrix_to_json(a) for a in self.coeffs]}

    @classmethod
    def from_json(cls, obj):
        coeffs = [la.matrix_from_json(c) for c in obj["coeffs"]]
        p = cls(tuple(coeffs))
        if coeffs and (p.m != int(obj["m"]) or p.d != int(obj["d"])):
            raise ValueError("polynomial JSON: m/d disagree with coefficients")
        return p

    @classmethod
    def from_signed(cls, signed, size=None):
        return cls(tuple((-1) ** k * c for k, c in enumerate(signed, start=1)),
                   size)


@dataclass(frozen=True)
class SpectrumPartition:
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(tuple(complex(x) for x in b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if not blocks:
            raise ValueError("partition needs at least one block")
        m = len(blocks[0])
        if m == 0 or any(len(b) != m for b in blocks):
            raise ValueError("partition blocks must all have the same size")
        flat = [z for b in blocks for z in b]
        if la.min_separation(flat) < la.SEP_MIN * max([1.0] + [abs(z) for z in flat]):
            raise PartitionMismatch("partition blocks are not disjoint")

    @property
    def m(self):
        return len(self.blocks[0])

    def flat(self):
        return [z for b in self.blocks for z in b]

    def to_json(self):
        return {"blocks": [[la.complex_to_json(z) for z in b] for b in self.blocks]}

    @classmethod
    def from_json(cls, obj):
        blocks = obj["blocks"] if isinstance(obj, dict) else obj
        return cls(tuple(tuple(la.complex_from_json(z) for z in b) for b in blocks))


@dataclass(frozen=True)
class Factorization:
    """Ordered factors ``b_1..b_d`` with an ordered spectrum for each."""

    factors: tuple
    spectra: tuple

    def __post_init__(self):
        fs = tuple(la.as_matrix(b) for b in self.factors)
        sp = tuple(s if isinstance(s, la.OrderedSpectrum)
                   else la.OrderedSpectrum.from_values(s) for s in self.spectra)
        if len(fs) != len(sp):
            raise ValueError("need one spectrum per factor")
        if any(len(s) != b.shape[0] for b, s in zip(fs, sp)):
            raise ValueError("spectrum size must match factor size")
        object.__setattr__(self, "factors", fs)
        object.__setattr__(self, "spectra", sp)

    @classmethod
    def from_factors(cls, factors):
        """Attach canonically ordered spectra to bare factors."""
        factors = [la.as_matrix(b) for b in factors]
        fac = cls(tuple(factors), tuple(la.spectrum(b) for b in factors))
        flat = fac.flat_spectrum()
        scale = max([1.0] + [abs(z) for z in flat])
        if la.min_separation(flat) < la.SEP_MIN * scale:
            raise DegenerateSpectrum("factor spectra are not pairwise disjoint")
        return fac

    @property
    def d(self):
        return len(self.factors)

    @property
    def m(self):
        return self.factors[0].shape[0]

    def flat_spectrum(self):
        return [z for s in self.spectra for z in s.values]

    def distance(self, other):
        return max(float(np.linalg.norm(a - b))
                   for a, b in zip(self.factors, other.factors))

    def to_json(self):
        return {
            "m": self.m,
            "d": self.d,
            "factors": [la.matrix_to_json(b) for b in self.factors],
            "spectra": [[la.complex_to_json(z) for z in s.values]
                        for s in self.spectra],
        }

    @classmethod
    def from_json(cls, obj):
        factors = tuple(la.matrix_from_json(b) for b in obj["factors"])
        if "spectra" in obj and obj["spectra"] is not None:
            spectra = tuple(tuple(la.complex_from_json(z) for z in s)
                            for s in obj["spectra"])
            fac = cls(factors, spectra)
        else:
            fac = cls.from_factors(factors)
        if fac.m != int(obj.get("m", fac.m)) or fac.d != int(obj.get("d", fac.d)):
            raise ValueError("factorization JSON: m/d disagree with factors")
        return fac


def expand_factors(f):
    """Coefficients of the ordered product ``(t - b_1)...(t - b_d)``."""
    factors = f.factors if isinstance(f, Factorization) else [la.as_matrix(b) for b in f]
    m = factors[0].shape[0]
    # signed coefficients, leading identity first
    cs = [np.eye(m, dtype=complex)]
    for b in factors:
        nxt = [cs[0]]
        for k in range(1, len(cs)):
            nxt.append(cs[k] - cs[k - 1] @ b)
        nxt.append(-cs[-1] @ b)
        cs = nxt
    return MatrixPolynomial.from_signed(cs[1:])


def right_divide(P, b):
    """``P(t) = Q(t)(t - b) + R`` by the right Horner recurrence."""
    b = la.as_matrix(b)
    if P.d < 1:
        raise ValueError("cannot divide a degree-0 polynomial")
    c = P.signed_coeffs()
    q = [np.eye(P.m, dtype=complex)]
    for k in range(P.d - 1):
        q.append(c[k] + q[-1] @ b)
    R = c[-1] + q[-1] @ b
    return MatrixPolynomial.from_signed(q[1:], size=P.m), R


def match_partition(roots, partition, tol=MATCH_TOL):
    """Assign every partition value to its nearest computed root.

    Returns blocks of computed roots in the partition's order.
    """
    roots = np.asarray(roots, dtype=complex)
    flat = partition.flat()
    if len(flat) != len(roots):
        raise PartitionMismatch(
            f"partition has {len(flat)} values but there are {len(roots)} roots")
    used = set()
    matched = []
    for z in flat:
        dist = np.abs(roots - z)
        k = int(np.argmin(dist))
        if dist[k] > tol * (1 + abs(z)):
            raise PartitionMismatch(f"value {z} is not a root (nearest at {dist[k]:.3g})")
        if k in used:
            raise PartitionMismatch(f"value {z} collides with another block value")
        used.add(k)
        matched.append(complex(roots[k]))
    m = partition.m
    return [matched[i * m:(i + 1) * m] for i in range(len(partition.blocks))]


def kernel_vector(M, gap=KERNEL_GAP):
    """Unit right singular vector of the smallest singular value.

    Raises `DegenerateInstance` when the kernel is not one-dimensional.
    """
    _, s, vh = np.linalg.svd(M)
    if len(s) > 1 and s[-2] < gap * max(s[0], 1e-300):
        raise DegenerateInstance(
            f"kernel is not one-dimensional (singular values {s[-2]:.3g}, {s[-1]:.3g})")
    return vh[-1].conj()


def right_root(P, values):
    """Matrix ``b`` with spectrum ``values`` such that ``(t - b)`` right-divides ``P``."""
    V = np.column_stack([kernel_vector(P(lam)) for lam in values])
    if np.linalg.cond(V) > COND_MAX:
        raise DegenerateInstance("eigenvector matrix is singular")
    return V @ np.diag(values) @ np.linalg.inv(V)


def refactor(P, partition, fact_tol=FACT_TOL):
    """The unique factorization of ``P`` whose factor spectra are the blocks.

    Factors are peeled off from the right: for each root ``lam`` of the last
    block a kernel vector of ``P(lam)`` is an eigenvector of ``b_d``; then
    ``P`` is right-divided by ``t - b_d`` and the recursion continues.
    """
    if not isinstance(partition, SpectrumPartition):
        partition = SpectrumPartition(partition)
    if len(partition.blocks) != P.d or partition.m != P.m:
        raise PartitionMismatch(
            f"need {P.d} blocks of size {P.m}, got "
            f"{len(partition.blocks)} of size {partition.m}")
    roots = la.poly_eigenvalues(P).values
    blocks = match_partition(roots, partition)

    factors = [None] * P.d
    cur = P
    for i in range(P.d - 1, 0, -1):
        b = right_root(cur, blocks[i])
        factors[i] = b
        cur, _ = right_divide(cur, b)
    factors[0] = cur.coeffs[0]

    out = Factorization(tuple(factors), tuple(
        la.OrderedSpectrum(tuple(blk), la.min_separation(blk))
        for blk in partition.blocks))
    res = expand_factors(out).distance(P)
    if not np.isfinite(res) or res > fact_tol * P.coeff_norm():
        raise DegenerateInstance(f"refactor residual {res:.3g} exceeds tolerance")
    return out


def sylvester_swap(a1, a2):
    """``(a1 + L^-1, a2 - L^-1)`` where ``a2 L - L a1 = 1``.

    The product ``(t - a1)(t - a2)`` is unchanged and the spectra of the two
    factors are exchanged.
    """
    a1, a2 = la.as_matrix(a1), la.as_matrix(a2)
    lam = la.solve_sylvester(a1, a2)
    if np.linalg.cond(lam) > COND_MAX:
        raise SingularLambda("Sylvester solution is not invertible")
    inv = np.linalg.inv(lam)
    return a1 + inv, a2 - inv


def mu_matrix(m):
    return TwistedMap(
        "matrix-swap", f"{MATRIX}({m})", sylvester_swap,
        distance=lambda x, y: float(np.linalg.norm(x - y)),
        size=lambda x: float(np.linalg.norm(x)),
        shift=_matrix_shift, meta={"m": m})


def _check_word(word, f):
    if word.n_strands != f.m * f.d:
        raise ValueError(
            f"word acts on {word.n_strands} strands, factorization has "
            f"{f.m * f.d}")


def local_action(word, f):
    """Action of ``S_mN`` on an ordered factorization, one letter at a time.

    Factor ``k`` (1-based) owns strands ``(k-1)m+1 .. km``.  A letter strictly
    inside a factor permutes that factor's spectrum labels; letter ``km``
    moves one root between factors ``k`` and ``k+1`` by refactoring their
    degree-2 product.
    """
    _check_word(word, f)
    m = f.m
    factors = list(f.factors)
    labels = [list(s.values) for s in f.spectra]
    for i in word.letters:
        k, r = divmod(i, m)
        if r:
            blk = labels[k]
            blk[r - 1], blk[r] = blk[r], blk[r - 1]
            continue
        left, right = labels[k - 1], labels[k]
        left[-1], right[0] = right[0], left[-1]
        pair = expand_factors(factors[k - 1:k + 1])
        sub = refactor(pair, SpectrumPartition((tuple(left), tuple(right))))
        factors[k - 1], factors[k] = sub.factors
    return Factorization(tuple(factors), tuple(
        la.OrderedSpectrum(tuple(b), la.min_separation(b)) for b in labels))


def random_factorization(m, d, rng, min_gap=1e-2, max_tries=1000):
    """Factors with entries uniform in the unit complex square.

    Draws are rejected until all ``m*d`` factor eigenvalues are at least
    ``min_gap`` apart.
    """
    for _ in range(max_tries):
        bs = [rng.uniform(-1, 1, (m, m)) + 1j * rng.uniform(-1, 1, (m, m))
              for _ in range(d)]
        vals = np.concatenate([np.linalg.eigvals(b) for b in bs])
        if la.min_separation(vals) >= min_gap:
            return Factorization.from_factors(bs)
    raise DegenerateInstance("could not draw a generic factorization")

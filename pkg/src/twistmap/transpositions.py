"""Twisted transpositions and numerical checks of their defining relations.

A twisted transposition is a pair of rational maps
``mu(u, v) = (phi(u, v), psi(u, v))`` on ``U x U`` whose slot-wise extensions
``s1 = mu x id`` and ``s2 = id x mu`` satisfy ``s1^2 = s2^2 = id`` and
``s1 s2 s1 = s2 s1 s2``.  Everything here is carrier-agnostic: a
`TwistedMap` knows how to measure distances between carrier elements, so the
same checks run over scalars, matrices and theta sections.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from twistmap.errors import OutsideDomain, TwistError

SCALAR = "scalar-complex"
MATRIX = "square-matrix"
AUTOMORPHISM = "automorphism-pair"
THETA = "theta-section"


def _scalar_distance(x, y):
    return abs(complex(x) - complex(y))


def _scalar_size(x):
    return abs(complex(x))


def _matrix_distance(x, y):
    return float(np.linalg.norm(np.asarray(x) - np.asarray(y)))


def _matrix_size(x):
    return float(np.linalg.norm(np.asarray(x)))


def _matrix_shift(x, eps):
    x = np.asarray(x, dtype=complex)
    return x + eps * np.ones_like(x)


@dataclass(frozen=True)
class TwistedMap:
    """``mu(u, v) = (phi(u, v), psi(u, v))`` over a tagged carrier set.

    ``pair`` evaluates both components at once (several constructions get
    ``phi`` and ``psi`` from one shared computation).  ``guard`` returns False
    on points where the rational map is undefined; ``pair`` may also raise a
    `TwistError`, which `apply_mu` reports as `OutsideDomain`.
    """

    tag: str
    carrier: str
    pair: Callable[[Any, Any], tuple]
    guard: Optional[Callable[[Any, Any], bool]] = None
    distance: Callable[[Any, Any], float] = _scalar_distance
    size: Callable[[Any], float] = _scalar_size
    shift: Callable[[Any, float], Any] = lambda x, eps: x + eps
    meta: dict = field(default_factory=dict)

    def phi(self, u, v):
        return apply_mu(self, u, v)[0]

    def psi(self, u, v):
        return apply_mu(self, u, v)[1]


def apply_mu(tmap, u, v):
    if tmap.guard is not None and not tmap.guard(u, v):
        raise OutsideDomain(f"{tmap.tag}: point outside the domain")
    try:
        out = tmap.pair(u, v)
    except OutsideDomain:
        raise
    except (TwistError, np.linalg.LinAlgError, ZeroDivisionError) as exc:
        raise OutsideDomain(f"{tmap.tag}: {type(exc).__name__}: {exc}") from exc
    return out


def plain_swap(carrier=SCALAR, distance=_scalar_distance, size=_scalar_size):
    return TwistedMap("swap", carrier, lambda u, v: (v, u),
                      distance=distance, size=size)


def make_qtwist(q, q_inv, tag="qtwist", carrier=AUTOMORPHISM):
    """``mu(u, v) = (q(v), q^-1(u))`` for an invertible map ``q``."""
    return TwistedMap(tag, carrier, lambda u, v: (q(v), q_inv(u)))


def make_scalar_rational(guard_tol=1e-8):
    """``mu(u, v) = (1 - u + uv, uv / (1 - u + uv))`` on the complex line."""

    def pair(u, v):
        s = 1 - u + u * v
        if s == 0:
            raise OutsideDomain("1 - u + uv = 0")
        return s, u * v / s

    def guard(u, v):
        s = 1 - u + u * v
        return abs(s) > guard_tol * (1 + abs(u) + abs(u * v))

    return TwistedMap("scalar", SCALAR, pair, guard=guard)


def make_algebra_map(m, cond_max=1e8):
    """``mu(u, v) = (1 - u + uv, (1 - u + uv)^-1 uv)`` on ``Mat_m``.

    The guard rejects points where ``1 - u + uv`` has condition number above
    ``cond_max``.
    """
    eye = np.eye(m)

    def pair(u, v):
        s = eye - u + u @ v
        return s, np.linalg.solve(s, u @ v)

    def guard(u, v):
        s = eye - u + u @ v
        return bool(np.linalg.cond(s) < cond_max)

    return TwistedMap("algebra", f"{MATRIX}({m})", pair, guard=guard,
                      distance=_matrix_distance, size=_matrix_size,
                      shift=_matrix_shift, meta={"m": m})


def perturbed(tmap, eps):
    """Copy of ``tmap`` whose second component is shifted by ``eps``."""

    def pair(u, v):
        a, b = tmap.pair(u, v)
        return a, tmap.shift(b, eps)

    return TwistedMap(f"{tmap.tag}+psi{eps:g}", tmap.carrier, pair,
                      guard=tmap.guard, distance=tmap.distance,
                      size=tmap.size, shift=tmap.shift, meta=dict(tmap.meta))


# ---------------------------------------------------------------------------
# braid words


@dataclass(frozen=True)
class BraidWord:
    n_strands: int
    letters: tuple

    def __post_init__(self):
        if self.n_strands < 1:
            raise ValueError("n_strands must be positive")
        object.__setattr__(self, "letters", tuple(int(i) for i in self.letters))
        for i in self.letters:
            if not 1 <= i <= self.n_strands - 1:
                raise ValueError(
                    f"letter {i} out of range for {self.n_strands} strands")

    def __iter__(self):
        return iter(self.letters)

    def __len__(self):
        return len(self.letters)

    def permute(self, items):
        """Apply the adjacent transpositions, left to right, to a list."""
        out = list(items)
        if len(out) != self.n_strands:
            raise ValueError("list length must equal n_strands")
        for i in self.letters:
            out[i - 1], out[i] = out[i], out[i - 1]
        return out


def permutation_word(target):
    """Adjacent-transposition word sending ``range(n)`` to ``target``.

    ``BraidWord(n, permutation_word(t)).permute(range(n)) == list(t)``.
    """
    cur = list(range(len(target)))
    target = list(target)
    letters = []
    for pos in range(len(target)):
        j = cur.index(target[pos])
        while j > pos:
            cur[j - 1], cur[j] = cur[j], cur[j - 1]
            letters.append(j)
            j -= 1
    return letters


def block_swap_word(m):
    """Word for ``(1, m+1)(2, m+2)...(m, 2m)`` in ``S_2m``."""
    return permutation_word(list(range(m, 2 * m)) + list(range(m)))


def act_braid(tmap, word, items):
    """Left-to-right action of ``word`` on an N-tuple of carrier elements."""
    out = list(items)
    if len(out) != word.n_strands:
        raise ValueError("tuple length must equal word.n_strands")
    for pos, i in enumerate(word.letters):
        try:
            out[i - 1], out[i] = apply_mu(tmap, out[i - 1], out[i])
        except OutsideDomain as exc:
            raise OutsideDomain(f"letter #{pos} (s{i}): {exc}", letter=pos) from exc
    return out


def nested_invariants(tmap, us, w):
    """The two nested compositions that are invariant under permuting ``us``.

    Returns ``phi(u1, phi(u2, ... phi(uN, w)))`` and
    ``psi(... psi(psi(w, u1), u2) ..., uN)``.
    """
    left = w
    for u in reversed(us):
        left = apply_mu(tmap, u, left)[0]
    right = w
    for u in us:
        right = apply_mu(tmap, right, u)[1]
    return left, right


# ---------------------------------------------------------------------------
# relation reports


@dataclass
class RelationReport:
    """Per-identity residuals of a verification campaign."""

    map: str
    tol: float
    keys: tuple
    residuals: list = field(default_factory=list)
    rejected: int = 0
    seed: Optional[int] = None
    failures: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def n_triples(self):
        return len(self.residuals)

    @property
    def max_residuals(self):
        out = {}
        for k in self.keys:
            vals = [r[k] for r in self.residuals]
            out[k] = max(vals) if vals else 0.0
        return out

    @property
    def max_residual(self):
        vals = list(self.max_residuals.values())
        return max(vals) if vals else 0.0

    @property
    def passed(self):
        return self.n_triples > 0 and self.max_residual <= self.tol

    def to_dict(self):
        out = {
            "map": self.map,
            "n_triples": self.n_triples,
            "rejected": self.rejected,
            "max_residuals": self.max_residuals,
            "pass": self.passed,
            "seed": self.seed,
            "tol": self.tol,
        }
        out.update(self.extra)
        return out

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


def _scale(tmap, *xs):
    return 1.0 + max(tmap.size(x) for x in xs)


def _dist_pair(tmap, got, want):
    return max(tmap.distance(a, b) for a, b in zip(got, want))


def relation_residuals(tmap, u, v, w):
    """Residuals of ``s1^2 = id``, ``s2^2 = id`` and the braid identity."""
    mu = lambda a, b: apply_mu(tmap, a, b)
    scale = _scale(tmap, u, v, w)

    s1 = mu(u, v)
    s1s1 = mu(*s1)
    s2 = mu(v, w)
    s2s2 = mu(*s2)

    # s1 s2 s1 and s2 s1 s2, applied right to left
    a = (*s1, w)
    a = (a[0], *mu(a[1], a[2]))
    a = (*mu(a[0], a[1]), a[2])
    b = (u, *s2)
    b = (*mu(b[0], b[1]), b[2])
    b = (b[0], *mu(b[1], b[2]))

    return {
        "sigma1_sq": _dist_pair(tmap, s1s1, (u, v)) / scale,
        "sigma2_sq": _dist_pair(tmap, s2s2, (v, w)) / scale,
        "braid": _dist_pair(tmap, a, b) / scale,
    }


def functional_residuals(tmap, u, v, w):
    """Residuals of the five functional identities equivalent to the relations.

    ``involution_phi`` / ``involution_psi`` are checked on both pairs
    ``(u, v)`` and ``(v, w)`` so they carry the same information as
    ``s1^2 = s2^2 = id``.
    """
    memo = {}

    def mu(a, b):
        key = (id(a), id(b))
        if key not in memo:
            memo[key] = (a, b, apply_mu(tmap, a, b))
        return memo[key][2]

    phi = lambda a, b: mu(a, b)[0]
    psi = lambda a, b: mu(a, b)[1]
    d = tmap.distance
    scale = _scale(tmap, u, v, w)

    inv_phi = inv_psi = 0.0
    for a, b in ((u, v), (v, w)):
        p, q = mu(a, b)
        inv_phi = max(inv_phi, d(phi(p, q), a))
        inv_psi = max(inv_psi, d(psi(p, q), b))

    p_uv, q_uv = mu(u, v)
    p_vw, q_vw = mu(v, w)
    p_qw = phi(q_uv, w)
    p_u_pvw, q_u_pvw = mu(u, p_vw)

    first = d(p_u_pvw, phi(p_uv, p_qw))
    middle = d(phi(q_u_pvw, q_vw), psi(p_uv, p_qw))
    last = d(psi(q_uv, w), psi(q_u_pvw, q_vw))
    return {
        "involution_phi": inv_phi / scale,
        "involution_psi": inv_psi / scale,
        "braid_first": first / scale,
        "braid_middle": middle / scale,
        "braid_last": last / scale,
    }


RELATION_KEYS = ("sigma1_sq", "sigma2_sq", "braid")
FUNCTIONAL_KEYS = ("involution_phi", "involution_psi", "braid_first",
                   "braid_middle", "braid_last")


def _campaign(tmap, triples, tol, fn, keys, seed):
    report = RelationReport(tmap.tag, tol, keys, seed=seed)
    for idx, (u, v, w) in enumerate(triples):
        try:
            res = fn(tmap, u, v, w)
        except OutsideDomain as exc:
            report.rejected += 1
            report.failures.append({"index": idx, "error": str(exc)})
            continue
        report.residuals.append(res)
    return report


def check_relations(tmap, triples, tol, seed=None):
    """Measure ``s1^2``, ``s2^2`` and braid residuals over ``triples``.

    Triples that hit the pole locus are recorded as rejected.
    """
    return _campaign(tmap, triples, tol, relation_residuals, RELATION_KEYS, seed)


def check_functional_equations(tmap, triples, tol, seed=None):
    return _campaign(tmap, triples, tol, functional_residuals,
                     FUNCTIONAL_KEYS, seed)


# ---------------------------------------------------------------------------
# set-theoretical Yang-Baxter solution from swap o mu


def swap_composed(tmap):
    """``R(u, v) = (psi(u, v), phi(u, v))``."""

    def pair(u, v):
        a, b = apply_mu(tmap, u, v)
        return b, a

    return TwistedMap(f"swap*{tmap.tag}", tmap.carrier, pair,
                      distance=tmap.distance, size=tmap.size,
                      shift=tmap.shift, meta=dict(tmap.meta))


def set_ybe_residual(R, u, v, w):
    """Residual of ``R12 R13 R23 = R23 R13 R12`` for a map ``R`` on triples."""
    r = lambda a, b: apply_mu(R, a, b)

    def r12(x):
        return (*r(x[0], x[1]), x[2])

    def r13(x):
        a, c = r(x[0], x[2])
        return (a, x[1], c)

    def r23(x):
        return (x[0], *r(x[1], x[2]))

    x = (u, v, w)
    lhs = r12(r13(r23(x)))
    rhs = r23(r13(r12(x)))
    return _dist_pair(R, lhs, rhs) / _scale(R, u, v, w)

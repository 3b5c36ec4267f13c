"""Seeded random verification campaigns over the shipped twisted transpositions.

Every trial draws from its own generator ``default_rng((seed, counter))`` so
reports do not depend on evaluation order.  Draws that land on a pole locus
along any evaluation path are rejected and counted.
"""

from __future__ import annotations

import numpy as np

from twistmap import polyfactor, theta
from twistmap.errors import OutsideDomain, TwistError
from twistmap.transpositions import (
    FUNCTIONAL_KEYS,
    RELATION_KEYS,
    RelationReport,
    functional_residuals,
    make_algebra_map,
    make_qtwist,
    make_scalar_rational,
    perturbed,
    relation_residuals,
)

MAPS = ("qtwist", "scalar", "algebra", "matrix-swap", "theta")


def substream(seed, counter):
    return np.random.default_rng((int(seed), int(counter)))


def _unit_square(rng, shape=()):
    return rng.uniform(-1, 1, shape) + 1j * rng.uniform(-1, 1, shape)


def build_map(name, m=2, tau=1j):
    """The shipped map called ``name`` and a sampler for its carrier."""
    if name == "qtwist":
        tmap = make_qtwist(lambda z: z + 1, lambda z: z - 1)
        return tmap, lambda rng: tuple(complex(_unit_square(rng)) for _ in range(3))
    if name == "scalar":
        return (make_scalar_rational(),
                lambda rng: tuple(complex(_unit_square(rng)) for _ in range(3)))
    if name == "algebra":
        return (make_algebra_map(m),
                lambda rng: tuple(_unit_square(rng, (m, m)) for _ in range(3)))
    if name == "matrix-swap":
        return (polyfactor.mu_matrix(m),
                lambda rng: tuple(_unit_square(rng, (m, m)) for _ in range(3)))
    if name == "theta":
        lat = theta.Lattice(tau)

        def sample(rng):
            return tuple(o.section for o in theta.random_ordered_sections(3, m, lat, rng))

        return theta.mu_theta(m, lat), sample
    raise ValueError(f"unknown map {name!r}; choose from {', '.join(MAPS)}")


def draw_triples(tmap, sampler, trials, seed, max_attempts=None):
    """``trials`` triples on which every relation path is defined.

    Returns ``(triples, relation_rows, functional_rows, rejected)``.
    """
    max_attempts = max_attempts or 20 * trials + 20
    triples, rel, fun = [], [], []
    rejected = 0
    counter = 0
    while len(triples) < trials:
        if counter >= max_attempts:
            raise OutsideDomain(
                f"only {len(triples)} of {trials} triples accepted after "
                f"{counter} draws")
        rng = substream(seed, counter)
        counter += 1
        try:
            trip = sampler(rng)
            r = relation_residuals(tmap, *trip)
            f = functional_residuals(tmap, *trip)
        except TwistError:
            rejected += 1
            continue
        triples.append(trip)
        rel.append(r)
        fun.append(f)
    return triples, rel, fun, rejected


def verify_map(name, trials, seed, tol, m=2, tau=1j, psi_shift=None):
    """Relations and functional equations for one shipped map.

    Returns ``(relations_report, functional_report, triples)``.  With
    ``psi_shift`` the map's second component is perturbed first.
    """
    tmap, sampler = build_map(name, m=m, tau=tau)
    if psi_shift:
        tmap = perturbed(tmap, psi_shift)
    triples, rel, fun, rejected = draw_triples(tmap, sampler, trials, seed)
    r1 = RelationReport(tmap.tag, tol, RELATION_KEYS, rel, rejected, seed)
    r2 = RelationReport(tmap.tag, tol, FUNCTIONAL_KEYS, fun, rejected, seed)
    return r1, r2, triples


def campaign_dict(r1, r2, config):
    """Combined JSON-ready report for a ``verify-map`` run."""
    maxres = dict(r1.max_residuals)
    maxres.update(r2.max_residuals)
    return {
        "map": r1.map,
        "n_triples": r1.n_triples,
        "rejected": r1.rejected,
        "max_residuals": maxres,
        "relations_pass": r1.passed,
        "functional_pass": r2.passed,
        "pass": r1.passed and r2.passed,
        "seed": r1.seed,
        "config": config,
    }

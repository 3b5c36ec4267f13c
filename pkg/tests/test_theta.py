import numpy as np
import pytest

from twistmap import theta as th
from twistmap.errors import NonUniqueSolution, PartitionMismatch
from twistmap.transpositions import BraidWord, apply_mu, check_relations

TAUS = [1j, 0.3 + 0.8j]


def _points(rng, count, lattice):
    return rng.uniform(0, 1, count) + rng.uniform(0, 1, count) * lattice.tau


def _c(rng, lattice, m):
    return complex(lattice.reduce(rng.uniform(0, 1) + rng.uniform(0, 1) * lattice.tau, m))


def test_small_tau_rejected():
    with pytest.raises(ValueError):
        th.Lattice(0.5 + 0.01j)


@pytest.mark.parametrize("tau", TAUS)
@pytest.mark.parametrize("N", [1, 2, 4])
def test_scalar_theta_laws(tau, N):
    lat = th.Lattice(tau)
    rng = np.random.default_rng(N)
    c = 0.3 - 0.2j
    z = _points(rng, 20, lat)
    v = th.theta_values(N, c, lat, z)
    scale = np.abs(v).max(axis=-1, keepdims=True)
    a = np.arange(N)
    r1 = th.theta_values(N, c, lat, z + 1 / N) - np.exp(2j * np.pi * a / N) * v
    assert np.max(np.abs(r1) / scale) < th.SERIES_TOL * 10
    fac = np.exp(-2j * np.pi * (z - (N - 1) * tau / (2 * N) - c / N))[:, None]
    r2 = th.theta_values(N, c, lat, z + tau / N) - fac * np.roll(v, -1, axis=-1)
    assert np.max(np.abs(r2) / (np.abs(fac) * scale)) < th.SERIES_TOL * 10


def test_scalar_theta_derivative():
    lat = th.Lattice(TAUS[1])
    z = np.array([0.2 + 0.3j])
    h = 1e-6
    _, d = th.theta_values(3, 0.1, lat, z, deriv=True)
    fd = (th.theta_values(3, 0.1, lat, z + h) - th.theta_values(3, 0.1, lat, z - h)) / (2 * h)
    assert np.allclose(d, fd, rtol=1e-6)


@pytest.mark.parametrize("tau", TAUS)
def test_degree_one_theta_has_one_zero(tau):
    lat = th.Lattice(tau)
    f = th.ThetaSection(1, 1, 0.2 + 0.1j, lat, np.ones((1, 1, 1)))
    zeros = th.det_zeros(f)
    assert len(zeros) == 1
    assert abs(f(np.array(zeros.points))[0, 0, 0]) < 1e-9


@pytest.mark.parametrize("tau", TAUS)
@pytest.mark.parametrize("m, n", [(1, 1), (2, 1), (2, 2), (3, 1)])
def test_dimension(tau, m, n):
    basis = th.mtheta_basis(n, m, 0.1 + 0.2j, th.Lattice(tau))
    assert len(basis) == m * m * n
    mat = np.array([b.coeffs.ravel() for b in basis])
    assert np.linalg.matrix_rank(mat) == m * m * n


def test_heisenberg_pair():
    for m in (1, 2, 3, 4):
        hp = th.heisenberg_pair(m)
        g1, g2 = hp.gamma1, hp.gamma2
        eye = np.eye(m)
        assert np.allclose(np.linalg.matrix_power(g1, m), eye)
        assert np.allclose(np.linalg.matrix_power(g2, m), eye)
        assert np.allclose(g2 @ g1, hp.epsilon * g1 @ g2)


@pytest.mark.parametrize("tau", TAUS)
@pytest.mark.parametrize("m, n", [(1, 2), (2, 1), (2, 2), (3, 1)])
def test_quasi_periodicity(tau, m, n):
    lat = th.Lattice(tau)
    rng = np.random.default_rng(m + 5 * n)
    f = th.random_section(n, m, _c(rng, lat, m), lat, rng)
    r1, r2 = th.eq5_residuals(f, _points(rng, 20, lat) / m)
    assert r1.max() < 10 * th.CONSTRAINT_TOL
    assert r2.max() < 10 * th.CONSTRAINT_TOL
    assert f.constraint_residual() < th.CONSTRAINT_TOL


def test_eval_is_linear():
    lat = th.Lattice(1j)
    rng = np.random.default_rng(0)
    f = th.random_section(1, 2, 0.1, lat, rng)
    g = th.random_section(1, 2, 0.1, lat, rng)
    z = _points(rng, 5, lat)
    s = f.with_coeffs(f.coeffs + 2 * g.coeffs)
    assert np.allclose(s(z), f(z) + 2 * g(z), atol=1e-13)


def test_normalization_is_idempotent():
    lat = th.Lattice(1j)
    f = th.random_section(1, 2, 0.1, lat, np.random.default_rng(1))
    once = f.normalized()
    assert np.array_equal(once.normalized().coeffs, once.coeffs)
    assert np.max(np.abs(once.coeffs)) == pytest.approx(1.0)


@pytest.mark.parametrize("tau", TAUS)
@pytest.mark.parametrize("m, n", [(2, 1), (2, 2), (3, 1)])
def test_zero_count_and_sum_rule(tau, m, n):
    lat = th.Lattice(tau)
    rng = np.random.default_rng(10 * m + n)
    f = th.random_section(n, m, _c(rng, lat, m), lat, rng)
    zeros = th.det_zeros(f)
    assert len(zeros) == m * n
    for z in zeros:
        s = np.linalg.svd(f(np.array([z]))[0], compute_uv=False)
        assert s[-1] < th.ZERO_TOL * s[0]
    assert th.sum_rule_residual(zeros.points, f) < 1e-6


def test_scalar_sum_rule_matches_literal_form():
    # for m = 1 the sum of zeros itself is c + n/2 modulo the lattice
    lat = th.Lattice(TAUS[1])
    rng = np.random.default_rng(2)
    f = th.random_section(2, 1, 0.4 + 0.3j, lat, rng)
    zeros = th.det_zeros(f).points
    assert lat.distance(sum(zeros), f.c + f.n / 2) < 1e-8


def _interp_instance(rng, lat, m=2, n=1):
    lambdas = lat.reduce(_points(rng, m * n, lat), m)
    vs = [rng.normal(size=m) + 1j * rng.normal(size=m) for _ in range(m * n)]
    return lambdas, vs


@pytest.mark.parametrize("seed", range(4))
def test_interpolation(seed):
    lat = th.Lattice(1j)
    rng = np.random.default_rng(seed)
    lambdas, vs = _interp_instance(rng, lat)
    f = th.interpolate(lambdas, vs, 1, 2, lat)
    for lam, v in zip(lambdas, vs):
        fv = f(np.array([lam]))[0]
        assert np.linalg.norm(fv @ v) / (np.linalg.norm(fv) * np.linalg.norm(v)) < 1e-8
    zeros = th.det_zeros(f).points
    for lam in lambdas:
        assert min(lat.distance(lam, z, 2) for z in zeros) < th.ZERO_TOL


def test_interpolation_is_homogeneous():
    lat = th.Lattice(1j)
    rng = np.random.default_rng(7)
    lambdas, vs = _interp_instance(rng, lat)
    f = th.interpolate(lambdas, vs, 1, 2, lat)
    g = th.interpolate(lambdas, [(2 - 1j) * vs[0], -3 * vs[1]], 1, 2, lat)
    assert th.section_distance(f, g) < 1e-9


def test_interpolation_wrong_parameter_is_not_unique():
    # with c off the sum rule there is no nonzero solution
    lat = th.Lattice(1j)
    lambdas, vs = _interp_instance(np.random.default_rng(3), lat)
    c = th.zero_parameter(lambdas, 1) + 0.25
    with pytest.raises(NonUniqueSolution):
        th.interpolate(lambdas, vs, 1, 2, lat, c=c)


def test_refactor_degree_one_is_identity():
    lat = th.Lattice(1j)
    f = th.random_section(1, 2, 0.2, lat, np.random.default_rng(4))
    (g,) = th.theta_refactor(f, [th.det_zeros(f).points], cs=[f.c])
    assert th.section_distance(f, g) < 1e-9


@pytest.mark.parametrize("seed", range(3))
def test_refactor_round_trip(seed):
    lat = th.Lattice(1j)
    rng = np.random.default_rng(seed)
    f1, f2 = (o.section for o in th.random_ordered_sections(2, 2, lat, rng))
    h = th.multiply(f1, f2)
    blocks = [th.det_zeros(f1).points, th.det_zeros(f2).points]
    g1, g2 = th.theta_refactor(h, blocks, cs=[f1.c, f2.c])
    assert th.section_distance(g1, f1) < 1e-6
    assert th.section_distance(g2, f2) < 1e-6
    assert th.product_residual(h, [g1, g2]) < 1e-6


def test_refactor_swapped_partition():
    lat = th.Lattice(1j)
    rng = np.random.default_rng(11)
    f1, f2 = (o.section for o in th.random_ordered_sections(2, 2, lat, rng))
    h = th.multiply(f1, f2)
    z1, z2 = th.det_zeros(f1).points, th.det_zeros(f2).points
    part = [(z1[0], z2[0]), (z1[1], z2[1])]
    g1, g2 = th.theta_refactor(h, part)
    assert abs(g1.c + g2.c - h.c) < 1e-12
    assert th.product_residual(h, [g1, g2]) < 1e-6
    for g, blk in zip((g1, g2), part):
        zs = th.det_zeros(g).points
        for z in blk:
            assert min(lat.distance(z, w, 2) for w in zs) < 1e-6


def test_refactor_rejects_foreign_zero():
    lat = th.Lattice(1j)
    rng = np.random.default_rng(12)
    f1, f2 = (o.section for o in th.random_ordered_sections(2, 2, lat, rng))
    h = th.multiply(f1, f2)
    z1, z2 = th.det_zeros(f1).points, th.det_zeros(f2).points
    with pytest.raises(PartitionMismatch):
        th.theta_refactor(h, [z1, (z2[0], z2[1] + 0.1)])


@pytest.fixture(scope="module")
def theta_triple():
    lat = th.Lattice(1j)
    rng = np.random.default_rng(20)
    return lat, [o.section for o in th.random_ordered_sections(3, 2, lat, rng)]


def test_mu_theta_exchanges_zeros(theta_triple):
    lat, (f, g, _) = theta_triple
    f1, g1 = apply_mu(th.mu_theta(2, lat), f, g)
    for a, b in ((f1, g), (g1, f)):
        za, zb = th.det_zeros(a).points, th.det_zeros(b).points
        for z in zb:
            assert min(lat.distance(z, w, 2) for w in za) < th.ZERO_TOL
    assert (f1.c, g1.c) == (g.c, f.c)


def test_mu_theta_relations(theta_triple):
    lat, trip = theta_triple
    report = check_relations(th.mu_theta(2, lat), [tuple(trip)], 1e-6)
    assert report.passed, report.max_residuals
    assert report.max_residuals["braid"] < 1e-5


def test_section_json_round_trip(theta_triple):
    lat, (f, _, _) = theta_triple
    o = th.OrderedSection.from_section(f)
    back = th.OrderedSection.from_json(o.to_json())
    assert th.section_distance(back.section, f) == 0 and back.labels == o.labels


@pytest.fixture(scope="module")
def ordered_triple():
    lat = th.Lattice(1j)
    return th.random_ordered_sections(3, 2, lat, np.random.default_rng(30))


def _chain(fs, z):
    out = fs[0](z)
    for s in fs[1:]:
        out = out @ s(z)
    return out


def test_theta_interior_letter(ordered_triple):
    out = th.theta_local_action(BraidWord(6, [3]), ordered_triple)
    for a, b in zip(out, ordered_triple):
        assert th.section_distance(a.section, b.section) == 0
    assert out[1].labels == ordered_triple[1].labels[::-1]


def test_theta_boundary_twice(ordered_triple):
    out = th.theta_local_action(BraidWord(6, [2, 2]), ordered_triple)
    for a, b in zip(out, ordered_triple):
        assert th.section_distance(a.section, b.section) < 1e-6
        assert np.allclose(a.labels, b.labels)


@pytest.mark.parametrize("i", [1, 2, 3, 4])
def test_theta_local_braid(ordered_triple, i):
    a = th.theta_local_action(BraidWord(6, [i, i + 1, i]), ordered_triple)
    b = th.theta_local_action(BraidWord(6, [i + 1, i, i + 1]), ordered_triple)
    for x, y in zip(a, b):
        assert th.section_distance(x.section, y.section) < 1e-6
    sec = [o.section for o in ordered_triple]
    z = th._sample_points(2, sec[0].lattice, 10, 4000)
    p, q = _chain(sec, z).ravel(), _chain([o.section for o in a], z).ravel()
    s = np.vdot(q, p) / np.vdot(q, q)
    assert np.linalg.norm(p - s * q) / np.linalg.norm(p) < 1e-6
    assert sum(o.section.c for o in a) == pytest.approx(sum(f.c for f in sec), abs=1e-12)

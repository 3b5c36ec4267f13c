"""Command-line driver.

Exit codes: 0 when every check passes, 1 when a mathematical check fails (or
a typed refusal such as ``PartitionMismatch`` is raised), 2 on configuration
or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from twistmap import campaigns, linalg_core as la, polyfactor as pf, rmatrix, theta
from twistmap.errors import TwistError
from twistmap.transpositions import BraidWord

DESK_LIMITS = {"m": 4, "d": 4, "N": 4, "n": 2}


class ConfigError(Exception):
    pass


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=20)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--m", type=int, default=2)
    common.add_argument("--n", type=int, default=1)
    common.add_argument("--d", type=int, default=2)
    common.add_argument("--N", type=int, default=3)
    common.add_argument("--tau-re", type=float, default=0.0)
    common.add_argument("--tau-im", type=float, default=1.0)
    common.add_argument("--in", dest="input", default=None)
    common.add_argument("--out", default=None)
    common.add_argument("--allow-large", action="store_true")

    p = argparse.ArgumentParser(prog="twistmap", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify-map", parents=[common],
                       help="random checks of the involution and braid relations")
    s.add_argument("--map", required=True, choices=campaigns.MAPS)

    s = sub.add_parser("factor-poly", parents=[common],
                       help="refactor a matrix polynomial by a spectrum partition")
    s.add_argument("--partition", default=None,
                   help="partition JSON file (defaults to the 'partition' key of --in)")

    s = sub.add_parser("braid-orbit", parents=[common],
                       help="act on a factorization by a word in S_mN")
    s.add_argument("--word", default="")
    s.add_argument("--compare", type=int, default=None, metavar="I",
                   help="compare the words [I, I+1, I] and [I+1, I, I+1]")

    sub.add_parser("theta-diag", parents=[common],
                   help="dimension, zero count, sum rule and refactor round trip")

    s = sub.add_parser("verify-rmatrix", parents=[common],
                       help="inverse and twisted Yang-Baxter checks")
    s.add_argument("--rmatrix", default="flip",
                   choices=("keep", "flip", "diag", "perturbed"))
    s.add_argument("--map", default="scalar", choices=campaigns.MAPS)
    return p


def _resolved_config(args):
    cfg = {k: v for k, v in sorted(vars(args).items())}
    return cfg


def _check_sizes(args, keys):
    if args.trials < 1:
        raise ConfigError("--trials must be positive")
    for k in keys:
        v = getattr(args, k)
        if v < 1:
            raise ConfigError(f"--{k} must be positive")
        if v > DESK_LIMITS[k] and not args.allow_large:
            raise ConfigError(f"--{k}={v} exceeds {DESK_LIMITS[k]}; pass --allow-large")


def _tau(args):
    try:
        return theta.Lattice(complex(args.tau_re, args.tau_im))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _load_json(path):
    if path is None:
        raise ConfigError("--in is required")
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return obj


def _json_default(x):
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _emit(report, args):
    text = json.dumps(report, sort_keys=True, indent=2, default=_json_default)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_verify_map(args):
    _check_sizes(args, ["m"])
    tol = 1e-8 if args.tol is None else args.tol
    args.tol = tol
    tau = complex(args.tau_re, args.tau_im)
    if args.map == "theta":
        _tau(args)
    r1, r2, _ = campaigns.verify_map(args.map, args.trials, args.seed, tol,
                                     m=args.m, tau=tau)
    report = campaigns.campaign_dict(r1, r2, _resolved_config(args))
    return report, report["pass"]


def _poly_inputs(args):
    obj = _load_json(args.input)
    try:
        P = pf.MatrixPolynomial.from_json(obj.get("polynomial", obj))
        if args.partition is not None:
            with open(args.partition) as fh:
                part = pf.SpectrumPartition.from_json(json.load(fh))
        elif "partition" in obj:
            part = pf.SpectrumPartition.from_json(obj["partition"])
        else:
            roots = la.poly_eigenvalues(P).values
            part = pf.SpectrumPartition(
                [roots[i * P.m:(i + 1) * P.m] for i in range(P.d)])
    except (OSError, KeyError, TypeError, ValueError, IndexError, AttributeError) as exc:
        raise ConfigError(f"malformed input: {exc}") from exc
    return P, part


def cmd_factor_poly(args):
    tol = pf.FACT_TOL if args.tol is None else args.tol
    args.tol = tol
    P, part = _poly_inputs(args)
    args.m, args.d = P.m, P.d
    _check_sizes(args, ["m", "d"])
    fac = pf.refactor(P, part)
    res = pf.expand_factors(fac).distance(P) / P.coeff_norm()
    ok = bool(res <= tol)
    return {"factorization": fac.to_json(), "residual": res, "pass": ok,
            "config": _resolved_config(args)}, ok


def _parse_word(text):
    text = text.strip().strip("[]")
    if not text:
        return []
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise ConfigError(f"bad word {text!r}") from exc


def _theta_chain_gap(a, b):
    m, lat = a[0].m, a[0].lattice
    z = theta._sample_points(m, lat, 20, 3000)
    pa, pb = a[0](z), b[0](z)
    for s in a[1:]:
        pa = pa @ s(z)
    for s in b[1:]:
        pb = pb @ s(z)
    pa, pb = pa.ravel(), pb.ravel()
    scale = np.vdot(pb, pa) / np.vdot(pb, pb)
    return float(np.linalg.norm(pa - scale * pb) / np.linalg.norm(pa))


def cmd_braid_orbit(args):
    obj = _load_json(args.input)
    is_theta = "sections" in obj
    try:
        if is_theta:
            fs = [theta.OrderedSection.from_json(s) for s in obj["sections"]]
            m, N = fs[0].section.m, len(fs)
        else:
            fac = pf.Factorization.from_json(obj.get("factorization", obj))
            m, N = fac.m, fac.d
    except (KeyError, TypeError, ValueError, IndexError, AttributeError) as exc:
        raise ConfigError(f"malformed input: {exc}") from exc
    args.m, args.N = m, N
    _check_sizes(args, ["m", "N"])
    tol = (1e-6 if is_theta else 1e-7) if args.tol is None else args.tol
    args.tol = tol
    strands = m * N
    try:
        if args.compare is not None:
            i = args.compare
            words = [BraidWord(strands, [i, i + 1, i]),
                     BraidWord(strands, [i + 1, i, i + 1])]
        else:
            words = [BraidWord(strands, _parse_word(args.word))]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    outs = []
    for w in words:
        if is_theta:
            res = theta.theta_local_action(w, fs)
            gap = _theta_chain_gap([o.section for o in fs], [o.section for o in res])
            outs.append(({"sections": [o.to_json() for o in res]}, gap, res))
        else:
            res = pf.local_action(w, fac)
            gap = pf.expand_factors(res).distance(pf.expand_factors(fac))
            gap /= pf.expand_factors(fac).coeff_norm()
            outs.append(({"factorization": res.to_json()}, gap, res))

    report = {"product_residual": max(o[1] for o in outs),
              "config": _resolved_config(args)}
    report.update(outs[0][0])
    ok = report["product_residual"] <= tol
    if args.compare is not None:
        a, b = outs[0][2], outs[1][2]
        if is_theta:
            gap = max(theta.section_distance(x.section, y.section) for x, y in zip(a, b))
        else:
            gap = a.distance(b)
        report["braid_gap"] = gap
        ok = ok and gap <= tol
    report["pass"] = ok
    return report, ok


def cmd_theta_diag(args):
    _check_sizes(args, ["m", "n"])
    lat = _tau(args)
    tol = 1e-6 if args.tol is None else args.tol
    args.tol = tol
    m, n = args.m, args.n
    rng = campaigns.substream(args.seed, 0)
    c = complex(lat.reduce(rng.uniform(0, 1) + rng.uniform(0, 1) * lat.tau, m))
    checks = {}
    dim = len(theta.mtheta_basis(n, m, c, lat))
    checks["dimension"] = {"computed": dim, "expected": m * m * n,
                           "pass": dim == m * m * n}
    f = theta.random_section(n, m, c, lat, rng)
    zeros = theta.det_zeros(f)
    checks["zero_count"] = {"computed": len(zeros), "expected": m * n,
                            "pass": len(zeros) == m * n}
    sr = theta.sum_rule_residual(zeros.points, f)
    checks["sum_rule"] = {"residual": sr, "pass": sr <= tol}
    fs = [o.section for o in theta.random_ordered_sections(n, m, lat, rng)]
    prod = theta.multiply(*fs) if n > 1 else fs[0]
    labels = [theta.det_zeros(s).points for s in fs]
    back = theta.theta_refactor(prod, labels, cs=[s.c for s in fs])
    coeff_gap = max(theta.section_distance(a, b) for a, b in zip(back, fs))
    held = theta.product_residual(prod, back)
    checks["refactor_round_trip"] = {"coefficient_gap": coeff_gap,
                                     "product_residual": held,
                                     "pass": coeff_gap <= tol and held <= tol}
    ok = all(v["pass"] for v in checks.values())
    return {"checks": checks, "c": la.complex_to_json(c), "pass": ok,
            "config": _resolved_config(args)}, ok


def cmd_verify_rmatrix(args):
    _check_sizes(args, ["m"])
    tol = 1e-12 if args.tol is None else args.tol
    args.tol = tol
    dim = args.n
    tmap, sampler = campaigns.build_map(args.map, m=args.m,
                                        tau=complex(args.tau_re, args.tau_im))
    if args.rmatrix == "keep":
        R = rmatrix.make_trivial_keep(dim)
    elif args.rmatrix == "flip":
        R = rmatrix.make_trivial_flip(dim)
    elif args.rmatrix == "diag":
        if args.map not in ("scalar", "qtwist"):
            raise ConfigError("the diagonal R-matrix needs a scalar map")
        R = rmatrix.make_diagonal_scalar(dim)
    else:
        R = rmatrix.make_perturbed(rmatrix.make_trivial_flip(dim), seed=args.seed)
    triples, _, _, rejected = campaigns.draw_triples(tmap, sampler, args.trials, args.seed)
    inv = rmatrix.check_inverse(R, tmap, [t[:2] for t in triples], tol, seed=args.seed)
    ybr = rmatrix.check_twisted_ybr(R, tmap, triples, tol, seed=args.seed)
    ok = inv.passed and ybr.passed
    return {"map": tmap.tag, "rmatrix": R.tag, "n_triples": len(triples),
            "rejected": rejected,
            "max_residuals": {"inverse": inv.max_residual,
                              "twisted_ybr": ybr.max_residual},
            "pass": ok, "seed": args.seed,
            "config": _resolved_config(args)}, ok


COMMANDS = {
    "verify-map": cmd_verify_map,
    "factor-poly": cmd_factor_poly,
    "braid-orbit": cmd_braid_orbit,
    "theta-diag": cmd_theta_diag,
    "verify-rmatrix": cmd_verify_rmatrix,
}


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        report, ok = COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TwistError as exc:
        name = type(exc).__name__
        print(f"{name}: {exc}", file=sys.stderr)
        _emit({"error": name, "message": str(exc), "pass": False,
               "config": _resolved_config(args)}, args)
        return 1
    _emit(report, args)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())

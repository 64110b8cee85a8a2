"""Command line front end: ``ncr <command> [options]``.

Exit codes: 0 success, 1 inconclusive computation, 2 usage or input error.
Every JSON report carries the config hash, package versions, tolerances and
the evidence class.
"""
import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction
from importlib import metadata
from pathlib import Path

import numpy as np

from . import algebra, io, measure, novikov, singular, spectral
from .errors import NCRError

EXIT_OK, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _versions():
    out = {}
    for pkg in ("ncriemann", "numpy", "scipy", "mpmath"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = "unknown"
    return out


def _config(args):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    digest = hashlib.sha256(json.dumps(cfg, sort_keys=True, default=str).encode())
    for key in ("input", "inputs", "mu_t", "mu_a", "head"):
        paths = cfg.get(key)
        for p in ([paths] if isinstance(paths, str) else (paths or [])):
            if p and Path(p).is_file():
                digest.update(Path(p).read_bytes())
    return cfg, digest.hexdigest()[:16]


def _envelope(args, evidence, payload):
    cfg, h = _config(args)
    return {
        "config": cfg,
        "config_hash": h,
        "versions": _versions(),
        "tolerance": args.tol,
        "evidence": evidence,
        "result": payload,
    }


def _frac(v):
    if isinstance(v, Fraction):
        return {"exact": str(v), "value": float(v)}
    return v


def _out(args, name):
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def _load_json(path):
    try:
        return io.read_json(path)
    except FileNotFoundError as exc:
        raise UsageError(f"no such file: {path}") from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _scheme(args):
    kind = {"plain": "plain", "log-cesaro": "log_cesaro", "pinned": "pinned"}[args.scheme]
    pins = tuple(range(8, 64, 2)) if kind == "pinned" else ()
    return singular.LimitScheme(kind, pins=pins, tol=args.tol)


# commands ---------------------------------------------------------------------


def cmd_ids(args):
    spec = _load_json(args.input)
    try:
        model = novikov.LatticeModel.from_dict(spec)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"malformed model spec: {exc}") from exc
    if model.model != "torus":
        raise UsageError("ids needs a torus model")
    eig = novikov.torus_eigenvalues(model.d, model.N)
    ids = novikov.lattice_ids(model.d, model.N)
    fit = ids.fit
    head = {"c": fit.c if fit else None, "a": fit.a if fit else None, "b": 0,
            "lambda0": fit.window[1] if fit else None, "atom_at_zero": ids.atom_at_zero,
            "limit_at_zero": ids.limit_at_zero, "fitted": True,
            "fit_window": list(fit.window) if fit else None}
    io.write_density(_out(args, "ids.csv"), rows=io.eigenvalue_rows(eig))
    io.write_json(_out(args, "head.json"), _envelope(args, "empirical", head))
    return EXIT_OK


def _density_input(args):
    path = Path(args.input)
    if path.suffix == ".csv":
        return io.read_density(path, args.head), "empirical"
    spec = _load_json(path)
    if "model" in spec or ("d" in spec and "N" in spec):
        return novikov.LatticeModel.from_dict(spec), "empirical"
    if "c" in spec and "a" in spec:
        return io.density_from_head(spec), "symbolic"
    raise UsageError("input is neither a model spec, a head nor a density table")


def cmd_ns(args):
    try:
        obj, evidence = _density_input(args)
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed input: {exc}") from exc
    if isinstance(obj, novikov.LatticeModel):
        if obj.model != "torus":
            raise UsageError("ns needs a torus model")
        alpha_r, (a1, a2) = novikov.ns_richardson(obj.d, obj.N)
        rep = novikov.ns_exponents(novikov.lattice_ids(obj.d, 2 * obj.N))
        payload = rep.as_dict()
        payload["alpha_richardson"] = alpha_r
        payload["alpha_sizes"] = {str(obj.N): a1, str(2 * obj.N): a2}
    else:
        rep = novikov.ns_exponents(obj)
        payload = rep.as_dict()
        if evidence == "symbolic":
            payload["alpha"] = _frac(rep.alpha)
            payload["asymptotic_dimension"] = _frac(rep.asymptotic_dimension)
    io.write_json(_out(args, "ns_report.json"), _envelope(args, evidence, payload))
    return EXIT_OK if rep.alpha is not None else EXIT_INCONCLUSIVE


def _mu_input(path, head=None):
    path = Path(path)
    if path.suffix == ".csv":
        return io.mu_from_table(path)
    spec = _load_json(path)
    try:
        return io.mu_from_head(spec)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"malformed head: {exc}") from exc


def cmd_ecc(args):
    mu = _mu_input(args.input)
    t_range = getattr(mu, "sample_range", None)
    rep = singular.classify_eccentric(mu, args.location, t_range=t_range, tol=max(args.tol, 1e-6))
    ratio = rep.ratio_limit
    payload = {"location": rep.location, "integrability": rep.integrability,
               "ratio_limit": list(ratio) if isinstance(ratio, tuple) else ratio,
               "eccentric": rep.eccentric, "evidence": rep.evidence}
    io.write_json(_out(args, "ecc_report.json"), _envelope(args, rep.mode, payload))
    return EXIT_OK if rep.conclusive else EXIT_INCONCLUSIVE


def cmd_sing_trace(args):
    mu_t = _mu_input(args.mu_t)
    mu_a = _mu_input(args.mu_a)
    try:
        val = singular.singular_trace(mu_t, mu_a, _scheme(args))
    except NCRError as exc:
        payload = {"error": str(exc)}
        io.write_json(_out(args, "sing_trace.json"), _envelope(args, "symbolic", payload))
        return EXIT_INCONCLUSIVE
    payload = {"value": val.value, "flag": val.flag, "notes": val.notes}
    io.write_json(_out(args, "sing_trace.json"), _envelope(args, "symbolic", payload))
    return EXIT_OK if val.flag == "converged" else EXIT_INCONCLUSIVE


def cmd_cut_verify(args):
    spec = _load_json(args.input)
    try:
        X = measure.MeasuredSpace(float(spec.get("lo", 0.0)), float(spec.get("hi", 1.0)),
                                  float(spec.get("lebesgue_weight", 1.0)),
                                  tuple((float(p), float(m)) for p, m in spec.get("atoms", [])))
        f = measure.PiecewiseFn.step(np.array(spec["knots"], dtype=float), np.array(spec["levels"], dtype=float))
        eps_list = [float(e) for e in spec.get("eps", [1e-1, 1e-2, 1e-3])]
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"malformed cut spec: {exc}") from exc
    verdict = measure.is_riemann_measurable(f, X)
    rows = []
    for eps in eps_list:
        try:
            lo, hi = measure.build_rcut(f, X, eps)
        except NCRError as exc:
            rows.append({"eps": eps, "error": str(exc)})
            continue
        gap = float((hi - lo).integral(X))
        ok = measure.dominates(hi, f) and measure.dominates(f, lo) and hi.is_continuous and lo.is_continuous
        rows.append({"eps": eps, "gap": gap, "certified": bool(ok and gap < eps)})
    payload = {"measurable": verdict.measurable, "bad_measure": verdict.bad_measure,
               "discontinuities": [float(p) for p in verdict.discontinuities], "cuts": rows}
    io.write_json(_out(args, "cut_report.json"), _envelope(args, "exact", payload))
    return EXIT_OK


def _signal(name):
    if name == "square":
        return algebra.DyadicSquareWave()
    if name == "step":
        f = measure.PiecewiseFn.step(np.array([0.0, 0.5, 1.0]), np.array([1.0, -1.0]), point=np.array([0.0, 1.0, -1.0]))
        return f
    if name == "linear":
        return measure.PiecewiseFn.continuous(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    raise UsageError(f"unknown signal {name!r}")


def cmd_counterexample(args):
    eps_list = args.eps or ["0.1", "0.05", "0.01"]
    try:
        eps_vals = [Fraction(e) for e in eps_list]
    except ValueError as exc:
        raise UsageError(f"bad eps: {exc}") from exc
    if any(e <= 0 or e >= 1 for e in eps_vals):
        raise UsageError("eps must lie in (0, 1)")
    g = _signal(args.g)
    rows = []
    verdicts = None
    for e in eps_vals:
        rep = algebra.counterexample_notalg(g, e)
        rows.append({"eps": str(e), "gap": str(rep.gap), "gap_value": float(rep.gap),
                     "formula": str(rep.gap_formula), "matches": rep.gap == rep.gap_formula,
                     "separated": rep.separated})
        verdicts = {
            "f": {"in_AU": rep.f.in_AU, "in_AR": rep.f.in_AR, "in_A": rep.f.in_A, "reasons": rep.f.reasons},
            "f_squared": {"in_AU": rep.f_squared.in_AU, "in_AR": rep.f_squared.in_AR,
                          "reasons": rep.f_squared.reasons},
        }
    payload = {"signal": args.g, "gaps": rows, "verdicts": verdicts}
    io.write_json(_out(args, "notalg_report.json"), _envelope(args, "exact", payload))
    return EXIT_OK


def cmd_theta(args):
    try:
        obj, evidence = _density_input(args)
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed input: {exc}") from exc
    ts = args.t or [0.1, 1.0, 10.0]
    if any(t <= 0 for t in ts):
        raise UsageError("t must be positive")
    rows = []
    if isinstance(obj, novikov.LatticeModel):
        ids = novikov.lattice_ids(obj.d, obj.N)
        for t in ts:
            a, b = spectral.laplace_theta(ids, t), novikov.torus_theta(obj.d, obj.N, t)
            rows.append({"t": t, "theta": a, "direct_sum": b, "rel_err": abs(a - b) / b})
    else:
        for t in ts:
            rows.append({"t": t, "theta": spectral.laplace_theta(obj, t)})
    io.write_json(_out(args, "theta.json"), _envelope(args, evidence, {"theta": rows}))
    return EXIT_OK


# parser -------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--scheme", choices=("plain", "log-cesaro", "pinned"), default="log-cesaro")
    common.add_argument("--threads", type=int, default=1, help="computations are single threaded; kept for reproducibility records")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="ncr", description="Riemann-measurable spectral toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ids", parents=[common], help="integrated density of states of a torus")
    s.add_argument("input", help="model spec JSON")
    s.set_defaults(func=cmd_ids)

    s = sub.add_parser("ns", parents=[common], help="Novikov-Shubin exponents")
    s.add_argument("input", help="model spec, head JSON or lambda,N CSV")
    s.add_argument("--head", help="head sidecar for a CSV input")
    s.set_defaults(func=cmd_ns)

    s = sub.add_parser("ecc", parents=[common], help="eccentricity of a rearrangement")
    s.add_argument("input", help="head JSON or t,mu CSV")
    s.add_argument("--location", choices=("zero", "infinity"), default="zero")
    s.set_defaults(func=cmd_ecc)

    s = sub.add_parser("sing-trace", parents=[common], help="singular trace of A normalized by T")
    s.add_argument("mu_t")
    s.add_argument("mu_a")
    s.set_defaults(func=cmd_sing_trace)

    s = sub.add_parser("cut-verify", parents=[common], help="Riemann cuts of a step function")
    s.add_argument("input")
    s.set_defaults(func=cmd_cut_verify)

    s = sub.add_parser("counterexample", parents=[common], help="2x2 matrix-function counterexample")
    s.add_argument("--eps", nargs="*", help="exact decimals or fractions in (0, 1)")
    s.add_argument("--g", choices=("square", "step", "linear"), default="square")
    s.set_defaults(func=cmd_counterexample)

    s = sub.add_parser("theta", parents=[common], help="heat trace of a density")
    s.add_argument("input")
    s.add_argument("--head")
    s.add_argument("--t", type=float, nargs="*")
    s.set_defaults(func=cmd_theta)
    return p


def _compare_golden(out_dir):
    golden = os.environ.get("NCR_GOLDEN_DIR")
    if not golden:
        return True
    ok = True
    for f in sorted(Path(out_dir).iterdir()):
        ref = Path(golden) / f.name
        if ref.is_file() and ref.read_bytes() != f.read_bytes():
            print(f"golden mismatch: {f.name}", file=sys.stderr)
            ok = False
    return ok


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except UsageError as exc:
        print(f"ncr {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NCRError, ArithmeticError) as exc:
        print(f"ncr {args.command}: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    if not _compare_golden(args.out):
        return EXIT_INCONCLUSIVE
    return code


if __name__ == "__main__":
    sys.exit(main())

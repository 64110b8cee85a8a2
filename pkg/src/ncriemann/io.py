"""CSV/JSON exchange formats for densities, rearrangements and model specs."""
import csv
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .spectral import Decreasing, SpectralDensity, rearrangement_at_infinity, rearrangement_from_head


def exact_number(v):
    """Read short decimals as exact rationals so that exponents stay exact."""
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    text = repr(float(v))
    return Fraction(text) if len(text) <= 12 else float(v)


def _plain(v):
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else float(v)
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def write_table(path, header, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) for v in r])
    return path


def read_table(path, header):
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != list(header):
        raise ValueError(f"{path}: expected header {','.join(header)}")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry") from exc
    if data.ndim != 2 or data.shape[1] != len(header) or len(data) == 0:
        raise ValueError(f"{path}: no data rows")
    return data


def write_json(path, obj):
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_plain) + "\n")
    return path


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed JSON ({exc.msg})") from exc


# densities ------------------------------------------------------------------


def eigenvalue_rows(eigenvalues):
    """One ``(lambda, N)`` row per eigenvalue, ``N`` counting up to and including it."""
    lam = np.sort(np.asarray(eigenvalues, dtype=float))
    return np.column_stack([lam, np.arange(1, len(lam) + 1) / float(len(lam))])


def write_density(csv_path, N=None, rows=None, head_path=None, head=None):
    if rows is None:
        rows = np.column_stack([N.x, N.y])
    write_table(csv_path, ("lambda", "N"), rows)
    if head_path is not None:
        write_json(head_path, head if head is not None else N.head_dict())


def read_density(csv_path=None, head_path=None, interp="step"):
    """Density from a ``lambda,N`` table and/or a head sidecar ``{c, a, b, lambda0, atom_at_zero}``."""
    head = read_json(head_path) if head_path is not None else None
    if csv_path is None:
        if head is None:
            raise ValueError("need a table or a head")
        return density_from_head(head)
    data = read_table(csv_path, ("lambda", "N"))
    x, y = data[:, 0], data[:, 1]
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    atom = head.get("atom_at_zero") if head else None
    limit = head.get("limit_at_zero") if head else None
    return SpectralDensity(x, y, interp=head.get("interp", interp) if head else interp,
                           atom_at_zero=atom, limit_at_zero=limit, label=Path(csv_path).stem)


def density_from_head(spec):
    for key in ("c", "a"):
        if key not in spec:
            raise KeyError(f"head needs {key!r}")
    return SpectralDensity.from_head(
        float(spec["c"]), exact_number(spec["a"]), exact_number(spec.get("b", 0)),
        lambda0=float(spec.get("lambda0", 0.5)), atom_at_zero=float(spec.get("atom_at_zero", 0.0)),
        limit_at_zero=spec.get("limit_at_zero"), label=spec.get("label", "head"),
    )


# rearrangements ---------------------------------------------------------------


def mu_from_head(spec):
    """``mu(s) = c s^a |log s|^b`` near 0 (default) or near infinity."""
    for key in ("c", "a"):
        if key not in spec:
            raise KeyError(f"head needs {key!r}")
    loc = spec.get("location", "zero")
    c, a, b = float(spec["c"]), exact_number(spec["a"]), exact_number(spec.get("b", 0))
    if loc == "zero":
        return rearrangement_from_head(c, a, b, s0=float(spec.get("s0", 0.5)))
    if loc == "infinity":
        return rearrangement_at_infinity(c, a, b, s0=float(spec.get("s0", 2.0)))
    raise ValueError(f"unknown location {loc!r}")


def mu_from_table(path):
    """Rearrangement sampled as ``t,mu``; log-log interpolation between samples."""
    data = read_table(path, ("t", "mu"))
    t, mu = data[:, 0], data[:, 1]
    order = np.argsort(t)
    t, mu = t[order], mu[order]
    if np.any(t <= 0) or np.any(mu <= 0):
        raise ValueError("t and mu must be positive for log-log interpolation")
    lt, lm = np.log(t), np.log(mu)
    slope_lo = (lm[1] - lm[0]) / (lt[1] - lt[0])

    def fn(s):
        s = np.asarray(s, dtype=float)
        ls = np.log(np.maximum(s, 1e-300))
        out = np.interp(ls, lt, lm)
        below = ls < lt[0]
        out = np.where(below, lm[0] + slope_lo * (ls - lt[0]), out)
        return np.where(s > t[-1], 0.0, np.exp(out))

    mu_fn = Decreasing(fn, label=Path(path).stem)
    mu_fn.sample_range = (float(t[0]), float(t[-1]))
    return mu_fn

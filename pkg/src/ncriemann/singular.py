"""Eccentricity, constructive generalized limits and singular traces.

Everything is expressed through non-increasing rearrangements (:class:`Decreasing`),
so a trace built here depends on an operator only through its ``mu``.
Ratios are sampled at ``t = 2**-k`` and along the deep ladder
``t = 2**-(2**j)``, which mpmath represents without underflow.
"""
from dataclasses import dataclass, field
from typing import Optional

import mpmath
import numpy as np

from ._powerlog import MP_DPS, PowerLog
from .errors import NoLimitError, NotEccentricError
from .spectral import Decreasing, detect_limit

DEEP_LADDER = tuple(range(3, 61))
MIN_DECADES = 4.0


# --------------------------------------------------------------------------
# eccentricity
# --------------------------------------------------------------------------


@dataclass
class EccentricityReport:
    location: str
    integrability: Optional[str]
    ratio_limit: object
    eccentric: Optional[bool]
    mode: str
    evidence: dict = field(default_factory=dict)

    @property
    def conclusive(self):
        return self.eccentric is not None


def _branch_integral(head, location, branch, t0):
    """The integral entering the doubling ratio, as a function of an mpmath ``t``."""
    if location == "zero":
        if branch == "finite":
            return lambda t: head.integral(0, t, "zero")
        return lambda t: head.integral(t, t0, "zero")
    if branch == "finite":
        return lambda t: head.integral(t, mpmath.inf, "infinity")
    return lambda t: head.integral(t0, t, "infinity")


def _symbolic_integrability(head, location):
    a = head.a
    b = head.b
    if location == "zero":
        finite = a > -1 or (a == -1 and b < -1)
    else:
        finite = a < -1 or (a == -1 and b < -1)
    return "finite" if finite else "infinite"


def classify_eccentric(mu, location="zero", t_range=None, integrable=None, tol=1e-3):
    """Decide eccentricity of ``mu`` at ``0`` or ``infinity``.

    A power-log head ``c s^a |kappa + log s|^b`` is classified in closed
    form: the doubling ratio of its integral tends to ``2**(1 + a)``, so the
    operator is eccentric exactly when ``a == -1``.  Without a head the ratio
    is sampled over ``t_range`` (at least four decades) and extrapolated in
    ``1/log(1/t)``; the verdict is ``None`` when the evidence is too weak.
    """
    if location not in ("zero", "infinity"):
        raise ValueError("location is 'zero' or 'infinity'")
    head = mu.head_zero if location == "zero" else mu.head_inf
    if head is not None:
        return _classify_head(head, location, mu.t_zero if location == "zero" else mu.t_inf)
    return _classify_empirical(mu, location, t_range, integrable, tol)


def _classify_head(head, location, t0):
    core = PowerLog(head.c, head.a, head.b, head.kappa)
    if core.c == 0:
        return EccentricityReport(location, "finite", None, False, "symbolic",
                                  {"reason": "mu vanishes near the end point"})
    branch = _symbolic_integrability(core, location)
    index = 1 + core.a
    ratio_limit = 1.0 if index == 0 else float(2.0 ** float(index))
    # pivot of the log factor bounds the usable range of the head
    if core.b != 0:
        t0 = min(t0, 0.5 * core.pivot) if location == "zero" else max(t0, 2.0 * core.pivot)
    rows = []
    integral = _branch_integral(core, location, branch, t0)
    with mpmath.workdps(MP_DPS):
        for j in (4, 8, 16, 32, 48):
            sign = -1 if location == "zero" else 1
            t = mpmath.mpf(2) ** (sign * 2 ** j)
            rows.append((f"2^{sign * 2 ** j}", float(integral(2 * t) / integral(t))))
    derivation = (
        f"mu ~ {core.c:g} s^{_fmt(core.a)} |log s|^{_fmt(core.b)}; integral is regularly varying "
        f"of index {_fmt(index)}, so the doubling ratio tends to 2^{_fmt(index)}"
    )
    return EccentricityReport(location, branch, ratio_limit, index == 0, "symbolic",
                              {"derivation": derivation, "ratios": rows})


def _fmt(v):
    return str(v) if not isinstance(v, float) else f"{v:g}"


def _classify_empirical(mu, location, t_range, integrable, tol):
    if t_range is None:
        return EccentricityReport(location, None, None, None, "empirical", {"reason": "no sampling range"})
    lo, hi = map(float, t_range)
    decades = np.log10(hi / lo)
    if decades < MIN_DECADES:
        return EccentricityReport(location, None, None, None, "empirical",
                                  {"reason": f"only {decades:.2f} decades of range"})
    ks = np.arange(np.ceil(np.log2(lo)), np.floor(np.log2(hi)) - 0.5)
    ts = 2.0 ** ks
    anchor = hi if location == "zero" else lo
    if integrable is None:
        if location == "zero":
            tails = [float(mu.integral(t, anchor)) for t in ts[::-1]]
        else:
            tails = [float(mu.integral(anchor, t)) for t in ts]
        rep = detect_limit(tails, tol=1e-10)
        branch = {"converged": "finite", "divergent": "infinite"}.get(rep.status)
    else:
        branch = "finite" if integrable else "infinite"
    if branch is None:
        return EccentricityReport(location, None, None, None, "empirical",
                                  {"reason": "integrability could not be decided from the samples"})
    ratios = []
    for t in ts:
        if location == "zero":
            if branch == "finite":
                r = float(mu.integral(0, 2 * t) / mu.integral(0, t))
            else:
                r = float(mu.integral(2 * t, anchor) / mu.integral(t, anchor))
        else:
            if branch == "finite":
                raise ValueError("an integrable tail at infinity needs a symbolic head")
            r = float(mu.integral(anchor, 2 * t) / mu.integral(anchor, t))
        ratios.append(r)
    ratios = np.array(ratios)
    keep = np.isfinite(ratios)
    ts, ratios = ts[keep], ratios[keep]
    if len(ts) < 6:
        return EccentricityReport(location, branch, None, None, "empirical", {"reason": "too few finite ratios"})
    if branch == "infinite":
        # the doubling ratio is 1 - log 2 / log(anchor / t) for mu = 1/s: measure the
        # distance to the anchor and drop samples within four doublings of it
        far = np.abs(np.log2(ts / anchor)) >= 4
        ts, ratios = ts[far], ratios[far]
        u = 1.0 / np.abs(np.log(ts / anchor))
    else:
        u = 1.0 / np.abs(np.log(ts))
    if len(ts) < 6:
        return EccentricityReport(location, branch, None, None, "empirical", {"reason": "too few usable ratios"})
    # approach point first: small t at 0, large t at infinity
    order = np.argsort(u)
    u, ratios_sorted = u[order], ratios[order]
    est_all = _extrapolate(u, ratios_sorted)
    est_half = _extrapolate(u[: len(u) // 2], ratios_sorted[: len(u) // 2])
    spread = abs(est_all - est_half)
    resid = np.std(ratios_sorted - np.polyval(np.polyfit(u, ratios_sorted, 1), u))
    unc = spread + 2 * resid + tol
    interval = (est_all - unc, est_all + unc)
    if interval[0] <= 1.0 <= interval[1]:
        verdict = True if unc < 0.05 else None
    else:
        verdict = False
    return EccentricityReport(location, branch, interval, verdict, "empirical",
                              {"t": ts.tolist(), "ratio": ratios.tolist(), "estimate": est_all})


def _extrapolate(u, r):
    # value at u = 0 of the least-squares line in u = 1/log(1/t)
    if len(u) < 2:
        return float(r[0])
    return float(np.polyfit(u, r, 1)[1])


# --------------------------------------------------------------------------
# generalized limits
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LimitScheme:
    """A constructive surrogate for a generalized limit at 0.

    ``kind`` is ``"plain"`` (refuse unless a limit is detected),
    ``"log_cesaro"`` (average over ``t = 2**-k``, ``k0 <= k <= k1``) or
    ``"pinned"`` (follow the subsequence ``t = 2**-k`` for ``k`` in ``pins``).
    Every kind returns the plain limit whenever one is detected.
    """

    kind: str = "log_cesaro"
    k0: int = 8
    k1: int = 63
    pins: tuple = ()
    tol: float = 1e-9
    ladder: tuple = DEEP_LADDER

    def __post_init__(self):
        if self.kind not in ("plain", "log_cesaro", "pinned"):
            raise ValueError(f"unknown scheme {self.kind!r}")
        if self.k1 < self.k0:
            raise ValueError("empty averaging window")
        if self.kind == "pinned" and not self.pins:
            raise ValueError("a pinned scheme needs pins")


@dataclass
class LimitValue:
    value: float
    flag: str
    window: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def stable(self):
        return self.flag == "converged"

    def __float__(self):
        return float(self.value)


def _sample(values, ks):
    if callable(values):
        with mpmath.workdps(MP_DPS):
            return [float(values(mpmath.mpf(2) ** (-int(k)))) for k in ks]
    seq = list(values)
    return [float(seq[int(k)]) for k in ks if int(k) < len(seq)]


def _eventually_monotone(window, tol):
    d = np.diff(window)
    scale = max(1.0, float(np.max(np.abs(window))))
    d = d[np.abs(d) > tol * scale]
    return len(d) == 0 or np.all(d > 0) or np.all(d < 0)


def plain_limit(values, scheme=None):
    """The limit at 0 when it is detected, else ``None`` (with the report)."""
    scheme = scheme or LimitScheme("plain")
    window = _sample(values, range(scheme.k0, scheme.k1 + 1))
    if callable(values):
        deep = _sample(values, [2 ** j for j in scheme.ladder])
    else:
        deep = window
    rep = detect_limit(deep, tol=scheme.tol)
    if rep.status == "converged" and _eventually_monotone(window, 1e3 * scheme.tol):
        return rep.limit, rep, window
    return None, rep, window


def generalized_limit(values, scheme=None):
    """Apply ``scheme`` to ``values`` (a function of mpmath ``t`` or a sequence in ``k``)."""
    scheme = scheme or LimitScheme()
    lim, rep, window = plain_limit(values, scheme)
    if lim is not None:
        return LimitValue(lim, "converged", window, [f"plain limit via {rep.status}"])
    if scheme.kind == "plain":
        raise NoLimitError(f"no limit detected ({rep.status})")
    if scheme.kind == "pinned":
        sub = _sample(values, scheme.pins)
        srep = detect_limit(sub, tol=scheme.tol) if len(sub) >= 6 else None
        if srep is not None and srep.status == "converged":
            return LimitValue(srep.limit, "pinned-converged", sub)
        return LimitValue(sub[-1], "pinned-unresolved", sub, ["subsequence did not settle"])
    w = np.asarray(window)
    value = float(np.mean(w))
    even, odd = w[::2], w[1::2]
    half = len(w) // 2
    first, second = float(np.mean(w[:half])), float(np.mean(w[half:]))
    spread = float(np.max(w) - np.min(w[half:]))
    if abs(first - second) > 0.05 * max(1.0, abs(value)):
        flag = "drifting"
    elif spread > 1e-6 * max(1.0, abs(value)) and abs(np.mean(even) - np.mean(odd)) > 1e-6:
        flag = "oscillatory"
    else:
        flag = "slow"
    return LimitValue(value, flag, list(w), [f"average over k={scheme.k0}..{scheme.k1}"])


# --------------------------------------------------------------------------
# singular traces
# --------------------------------------------------------------------------


def ratio_function(mu_T, mu_A, branch, top=1.0):
    """``t -> int mu_A / int mu_T`` over ``(0, t)`` (finite branch) or ``(t, top)``."""
    def ratio(t):
        if branch == "finite":
            num, den = mu_A.integral(0, t), mu_T.integral(0, t)
        else:
            num, den = mu_A.integral(t, top), mu_T.integral(t, top)
        if den == 0:
            raise ZeroDivisionError("normalizing integral vanishes")
        return num / den
    return ratio


def singular_trace(mu_T, mu_A, scheme=None, report=None):
    """``tau_omega(A)`` normalized by a 0-eccentric ``T``."""
    report = report or classify_eccentric(mu_T, "zero")
    if not report.eccentric:
        raise NotEccentricError(f"T is not eccentric at 0 (ratio limit {report.ratio_limit})")
    return generalized_limit(ratio_function(mu_T, mu_A, report.integrability), scheme)


class DisjointSum(Decreasing):
    """Rearrangement of ``A (+) B`` on a disjoint sum of two spaces.

    ``int_a^b mu_{A(+)B}`` splits as ``int mu_A + int mu_B`` over the pieces
    cut out by the common level; the split point is found by bisection.
    """

    def __init__(self, mu_A, mu_B, label=""):
        super().__init__(fn=self._eval_float, label=label or f"{mu_A.label}+{mu_B.label}")
        self.parts = (mu_A, mu_B)

    def _split(self, s):
        s = mpmath.mpf(s)
        A, B = self.parts
        lo, hi = mpmath.mpf(0), mpmath.mpf(1)
        for _ in range(160):
            th = (lo + hi) / 2
            if A.mp(s * th) > B.mp(s * (1 - th)):
                lo = th
            else:
                hi = th
        return s * lo, s * (1 - lo)

    def _eval_float(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t)
        for i, s in enumerate(t):
            u, v = self._split(s)
            out[i] = float(max(self.parts[0].mp(u * (1 + 1e-15)), self.parts[1].mp(v * (1 + 1e-15))))
        return out

    def mp(self, s):
        u, v = self._split(s)
        return max(self.parts[0].mp(u), self.parts[1].mp(v))

    def integral(self, a, b):
        with mpmath.workdps(MP_DPS):
            A, B = self.parts
            ua, va = (mpmath.mpf(0), mpmath.mpf(0)) if a == 0 else self._split(a)
            ub, vb = self._split(b)
            return A.integral(ua, ub) + B.integral(va, vb)

    def scaled(self, k):
        return DisjointSum(self.parts[0].scaled(k), self.parts[1].scaled(k))


def disjoint_sum(mu_A, mu_B):
    return DisjointSum(mu_A, mu_B)


@dataclass
class SuiteReport:
    checks: list
    values: dict

    @property
    def passed(self):
        return all(ok for _, ok, _ in self.checks)

    def failures(self):
        return [c for c in self.checks if not c[1]]


def trace_property_suite(mu_T, elements=(), bounded=(), finite_trace=(), pairs=(), scheme=None,
                         scale=3.0, tol=1e-12, add_tol=1e-6, vanish_tol=1e-6):
    """Check the trace properties of ``tau_omega`` on rearrangement-level inputs.

    ``elements`` get positivity and homogeneity checks, ``bounded`` and
    ``finite_trace`` must be annihilated, ``pairs`` are tested for additivity
    through the disjoint sum.
    """
    scheme = scheme or LimitScheme()
    report = classify_eccentric(mu_T, "zero")
    if not report.eccentric:
        raise NotEccentricError("the normalizing operator is not eccentric at 0")
    tr = lambda mu: singular_trace(mu_T, mu, scheme, report)
    checks, values = [], {}
    one = tr(mu_T)
    checks.append(("normalized", abs(one.value - 1) <= tol, one.value))
    for i, mu in enumerate(elements):
        v = tr(mu)
        v3 = tr(mu.scaled(scale))
        values[f"element{i}"] = v.value
        checks.append((f"positive[{i}]", v.value >= -tol, v.value))
        dev = abs(v3.value - scale * v.value)
        checks.append((f"homogeneous[{i}]", dev <= tol * max(1.0, abs(v3.value)), dev))
    if report.integrability == "infinite":
        for i, mu in enumerate(bounded):
            v = tr(mu)
            checks.append((f"vanishes_bounded[{i}]", abs(v.value) <= vanish_tol, v.value))
    for i, mu in enumerate(finite_trace):
        v = tr(mu)
        checks.append((f"vanishes_finite_trace[{i}]", abs(v.value) <= vanish_tol, v.value))
    for i, (ma, mb) in enumerate(pairs):
        va, vb = tr(ma).value, tr(mb).value
        vs = tr(disjoint_sum(ma, mb)).value
        dev = abs(vs - va - vb)
        checks.append((f"additive[{i}]", dev <= add_tol * max(1.0, abs(vs)), dev))
    return SuiteReport(checks, values)

"""Cut calculus on 2x2 matrix valued functions over [0, 1].

The trace is ``c * integral tr f(t) dt + sum_k w_k f_{ij}(p_k)``; the default
:class:`TraceSpec` is half the Lebesgue trace plus half the (1,1) entry at 0.
Cuts are families ``eps -> (a_minus, a_plus)`` of :class:`PiecewiseFn`
values which are verified, not trusted.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .errors import CutError, NoCutError
from .measure import PiecewiseFn

PSD_TOL = 1e-10
GRID_PER_PIECE = 64


def canonical_eps(n=40):
    """The certificate grid ``eps_k = 2**-k``, ``k = 1..n``."""
    return [2.0 ** -k for k in range(1, n + 1)]


# --------------------------------------------------------------------------
# trace and algebra description
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceSpec:
    lebesgue_coeff: float = 0.5
    atom_terms: tuple = ((0.0, (0, 0), 0.5),)


@dataclass(frozen=True)
class MatrixAlgebraSpec:
    """Continuous 2x2 functions on ``[lo, hi]`` with entries pinned to 0 at given points."""

    lo: float = 0.0
    hi: float = 1.0
    vanishing: tuple = ((0.0, (0, 1)), (0.0, (1, 0)))

    def __post_init__(self):
        pins = set(self.vanishing)
        for p, (i, j) in pins:
            if (p, (j, i)) not in pins:
                raise ValueError(f"constraint f_{i}{j}({p}) = 0 needs its transpose")

    def contains(self, f):
        """Membership of a :class:`PiecewiseFn` in the C*-algebra itself."""
        if f.lo != self.lo or f.hi != self.hi or not f.is_continuous:
            return False
        return all(f(p)[i, j] == 0 for p, (i, j) in self.vanishing)


NOTALG_TRACE = TraceSpec()
NOTALG_ALGEBRA = MatrixAlgebraSpec()


def trace_eval(f, spec=NOTALG_TRACE):
    """Exact trace of a piecewise-affine function (scalar or matrix).

    Object-dtype inputs (Fractions) give an exact rational result.
    """
    exact = f.dtype == object
    coeff = (lambda w: _exact(w)) if exact else float
    g = f.trace() if f.shape else f
    total = coeff(spec.lebesgue_coeff) * g.integral() if spec.lebesgue_coeff else 0
    for p, (i, j), w in spec.atom_terms:
        v = f(_exact(p) if exact else p)
        total = total + coeff(w) * (v[i, j] if f.shape else v)
    if isinstance(total, np.ndarray):
        total = total.item()
    if isinstance(total, complex) or np.iscomplexobj(total):
        total = total.real
    if isinstance(total, float) and np.isnan(total):
        raise ValueError("trace is undefined")
    return total


# --------------------------------------------------------------------------
# matrix helpers
# --------------------------------------------------------------------------


def min_eig(values):
    """Smallest eigenvalue of each Hermitian value in a stack (or each scalar)."""
    values = np.asarray(values)
    if values.ndim == 1:
        return values.astype(float)
    if values.dtype == object:
        return np.array([_exact_min_eig_sign(v) for v in values], dtype=float)
    return np.linalg.eigvalsh(values)[:, 0]


def _exact_min_eig_sign(v):
    # for a 2x2 Hermitian matrix: PSD iff trace >= 0 and det >= 0; returns a
    # number with the sign of the smallest eigenvalue (0 when singular PSD)
    a, b, c, d = v[0, 0], v[0, 1], v[1, 0], v[1, 1]
    det = a * d - b * c
    tr = a + d
    if det < 0 or tr < 0:
        return float(-1.0 if det < 0 else tr)
    if det == 0:
        return 0.0
    return float(min(a, d)) if min(a, d) > 0 else 1e-300


def matrix_function(fn, values):
    """Apply a scalar function to Hermitian values through eigendecomposition."""
    values = np.asarray(values)
    if values.ndim <= 1:
        return fn(values.astype(float))
    w, v = np.linalg.eigh(values.astype(complex) if np.iscomplexobj(values) else values.astype(float))
    fw = fn(w)
    out = (v * fw[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
    return out if np.iscomplexobj(values) else out.real


def apply_function(x, fn, n_sub=GRID_PER_PIECE):
    """``fn(x)`` for a piecewise-affine ``x``.

    Exact when ``x`` is piecewise constant.  Otherwise every piece is split
    into ``n_sub`` parts and the result interpolates the exact values at the
    new knots.
    """
    if x.dtype == object:
        x = x.map_values(lambda a: a.astype(float))
    constant = np.all(x.right[:-1] == x.left[1:])
    y = x if constant else x.subdivide(n_sub)
    return y.map_values(lambda a: matrix_function(fn, a))


def operator_norm(values):
    values = np.asarray(values, dtype=complex if np.iscomplexobj(values) else float)
    if values.ndim == 1:
        return np.abs(values)
    return np.linalg.norm(values, ord=2, axis=(1, 2))


def check_points(*fns):
    """Union knots of several functions plus a uniform grid inside every piece."""
    knots = fns[0].knots.astype(float)
    for f in fns[1:]:
        knots = np.union1d(knots, f.knots.astype(float))
    s = np.arange(1, GRID_PER_PIECE) / GRID_PER_PIECE
    grid = (knots[:-1, None] + s[None, :] * np.diff(knots)[:, None]).ravel()
    return knots, grid


def min_eig_over(f):
    """Smallest eigenvalue of ``f`` over its knots (both limits) and a refinement grid.

    The minimal eigenvalue of an affine Hermitian family is concave, so the
    knot values already bound it; the grid is a second opinion.
    """
    vals = [min_eig(f.point), min_eig(f.left), min_eig(f.right)]
    if f.dtype != object:
        _, grid = check_points(f)
        vals.append(min_eig(f(grid)))
    return float(min(v.min() for v in vals))


def spectral_extremes(f):
    """``(inf sigma, sup sigma)`` over all values of ``f``."""
    vals = np.asarray(f.all_values())
    if vals.dtype == object:
        vals = vals.astype(float)
    if vals.ndim == 1:
        return float(vals.min()), float(vals.max())
    ev = np.linalg.eigvalsh(vals)
    return float(ev[:, 0].min()), float(ev[:, -1].max())


# --------------------------------------------------------------------------
# cut families and their certificates
# --------------------------------------------------------------------------


@dataclass
class CutFamily:
    """``eps -> (a_minus, a_plus)``.

    ``kind`` is "R" (uniformly bounded), "U" (unbounded) or "T" (tight).
    ``gap_budget(eps)`` is the trace gap the family promises at ``eps``;
    the default is ``eps`` itself.
    """

    kind: str
    generator: Callable
    uniform_bound: Optional[float] = None
    gap_budget: Optional[Callable] = None
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("R", "U", "T"):
            raise ValueError(f"unknown cut kind {self.kind!r}")

    def __call__(self, eps):
        return self.generator(eps)

    def budget(self, eps):
        return self.gap_budget(eps) if self.gap_budget is not None else eps


@dataclass
class CutCheck:
    eps: float
    gap: float
    separated: bool
    contiguous: bool
    bounded: Optional[bool] = None
    tight: Optional[bool] = None
    sup_norm: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.failures


@dataclass
class CutReport:
    kind: str
    checks: list

    @property
    def passed(self):
        return all(c.ok for c in self.checks)

    @property
    def failures(self):
        return [(c.eps, msg) for c in self.checks for msg in c.failures]

    @property
    def gaps(self):
        return [c.gap for c in self.checks]


def verify_cut(x, cut, spec=NOTALG_TRACE, eps_grid=None, kind=None):
    """Check separation, contiguity and (per kind) boundedness / tightness.

    Failures are collected in the report rather than raised.
    """
    kind = kind or cut.kind
    eps_grid = canonical_eps() if eps_grid is None else eps_grid
    x_lo, x_hi = spectral_extremes(x)
    checks = []
    for eps in eps_grid:
        a_minus, a_plus = cut(eps)
        failures = []
        sep_hi = min_eig_over(a_plus - x)
        sep_lo = min_eig_over(x - a_minus)
        separated = sep_hi >= -PSD_TOL and sep_lo >= -PSD_TOL
        if not separated:
            failures.append(f"separation: min eigenvalues {sep_lo:.3g}, {sep_hi:.3g}")
        gap = trace_eval(a_plus - a_minus, spec)
        budget = cut.budget(eps)
        contiguous = gap < budget
        if not contiguous:
            failures.append(f"contiguity: gap {float(gap):.6g} >= {float(budget):.6g}")
        norm = max(a_plus.max_abs(), a_minus.max_abs())
        bounded = tight = None
        if kind in ("R", "T"):
            bounded = cut.uniform_bound is not None and norm <= cut.uniform_bound + 1e-12
            if not bounded:
                failures.append(f"bound: sup norm {norm:.6g} exceeds {cut.uniform_bound}")
        if kind == "T":
            lo_minus, _ = spectral_extremes(a_minus)
            _, hi_plus = spectral_extremes(a_plus)
            tight = hi_plus < x_hi + eps and lo_minus > x_lo - eps
            if not tight:
                failures.append(f"tightness: spectra [{lo_minus:.6g}, {hi_plus:.6g}] vs [{x_lo:.6g}, {x_hi:.6g}]")
        checks.append(CutCheck(eps, gap, separated, contiguous, bounded, tight, norm, failures))
    return CutReport(kind, checks)


@dataclass
class ExtendedTrace:
    value: float
    upper: float
    lower: float
    eps: float


def extend_trace(x, cut, spec=NOTALG_TRACE, eps_grid=None):
    """``inf tau(a_plus) = sup tau(a_minus)`` over a verified cut."""
    eps_grid = canonical_eps() if eps_grid is None else eps_grid
    report = verify_cut(x, cut, spec, eps_grid)
    if not report.passed:
        raise CutError(f"cut does not verify: {report.failures[:3]}")
    uppers, lowers = [], []
    for eps in eps_grid:
        a_minus, a_plus = cut(eps)
        uppers.append(trace_eval(a_plus, spec))
        lowers.append(trace_eval(a_minus, spec))
    upper, lower = min(uppers), max(lowers)
    if upper == np.inf:
        return ExtendedTrace(np.inf, upper, lower, min(eps_grid))
    value = (upper + lower) / 2
    if isinstance(value, Fraction):
        value = float(value)
    return ExtendedTrace(float(value), float(upper), float(lower), min(eps_grid))


def constant_cut(x, kind="R"):
    """The trivial family ``(x, x)`` for a continuous ``x``."""
    return CutFamily(kind, lambda eps: (x, x), uniform_bound=x.max_abs(), name="constant")


# --------------------------------------------------------------------------
# ramp cuts for matrix valued step-like functions
# --------------------------------------------------------------------------


def ramp_cut(x, eps, spec=NOTALG_TRACE):
    """Continuous ``a_minus <= x <= a_plus`` with trace gap below ``eps``.

    Near a discontinuity ``p`` the upper function is the chord ``L`` from
    ``x(p - h)`` to ``x(p + h)`` shifted by ``D * I``, where ``D`` bounds the
    distance from ``L(p)`` to the three values of ``x`` at ``p``; outer ramps
    of width ``h`` connect back to ``x``.  ``h`` is halved until the exact gap
    is below ``eps``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    disc = np.asarray(x.discontinuities(), dtype=float)
    if len(disc) == 0:
        return x, x
    atom_points = [p for p, _, _ in spec.atom_terms]
    for p in disc:
        if any(abs(p - q) <= 1e-12 for q in atom_points):
            raise NoCutError(f"discontinuity at {p} sits on a weighted point")
    knots = x.knots.astype(float)
    gaps = np.diff(knots)
    h = float(np.min(gaps)) / 5
    for q in atom_points:
        d = np.abs(disc - q)
        if len(d):
            h = min(h, float(d.min()) / 3)
    for _ in range(200):
        a_minus, a_plus = _ramp_pair(x, disc, h)
        gap = trace_eval(a_plus - a_minus, spec)
        if gap < eps:
            return a_minus, a_plus
        h /= 2
    raise CutError("could not reach the requested gap")


def _ramp_pair(x, disc, h):
    lo, hi = float(x.lo), float(x.hi)
    pts = np.concatenate([disc - 2 * h, disc - h, disc + h, disc + 2 * h])
    pts = pts[(pts > lo) & (pts < hi)]
    knots = np.union1d(x.knots.astype(float), pts)
    _, _, base = x.resample(knots)
    base = base.astype(complex if np.iscomplexobj(base) else float)
    eye = np.eye(x.shape[0]) if x.shape else 1.0
    upper, lower = base.copy(), base.copy()
    for p in disc:
        a, b = max(p - h, lo), min(p + h, hi)
        xa = x(a) if a < p else x.point[np.searchsorted(x.knots, p)]
        xb = x(b) if b > p else x.point[np.searchsorted(x.knots, p)]
        j = np.searchsorted(x.knots.astype(float), p)
        s = (p - a) / (b - a) if b > a else 0.5
        chord_p = xa + s * (xb - xa)
        trio = [x.left[j], x.point[j], x.right[j]]
        D = max(float(operator_norm(np.asarray([chord_p - v]))[0]) for v in trio)
        for k, t in enumerate(knots):
            if a <= t <= b:
                s = (t - a) / (b - a) if b > a else 0.5
                chord = xa + s * (xb - xa)
                upper[k] = chord + D * eye
                lower[k] = chord - D * eye
    return PiecewiseFn.continuous(knots, lower), PiecewiseFn.continuous(knots, upper)


def ramp_cut_family(x, spec=NOTALG_TRACE):
    bound = 3 * x.max_abs()
    return CutFamily("R", lambda eps: ramp_cut(x, eps, spec), uniform_bound=bound, name="ramp")


# --------------------------------------------------------------------------
# operator monotone transforms
# --------------------------------------------------------------------------


def f_plus_delta(delta):
    """``z -> (1 + delta) z / (delta + z)`` (operator monotone on ``z > -delta``)."""
    return lambda z: (1 + delta) * z / (delta + z)


def f_minus_delta(delta):
    """``z -> delta z / (1 + delta - z)`` (operator monotone on ``z < 1 + delta``)."""
    return lambda z: delta * z / (1 + delta - z)


def f_resolvent(t):
    """``z -> t z / (1 - t z)`` (operator monotone on ``z < 1/t``)."""
    return lambda z: t * z / (1 - t * z)


def _is_projection(e, tol=1e-10):
    vals = np.asarray(e.all_values()).astype(complex if np.iscomplexobj(e.point) else float)
    if vals.ndim == 1:
        return bool(np.all(np.abs(vals * vals - vals) <= tol))
    sq = vals @ vals
    return bool(np.all(np.abs(sq - vals) <= tol))


def _reindex(budget, factor):
    # largest eps' with factor * budget(eps') <= eps, by bisection on the
    # dyadic scale; exact when the budget is the identity
    def inner(eps):
        if budget is None:
            return eps / factor
        lo, hi = 0.0, eps
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if factor * budget(mid) <= eps:
                lo = mid
            else:
                hi = mid
        return lo
    return inner


def tighten_projection_cut(e, ucut, delta):
    """R-cut ``{f_minus_delta(a_minus), f_plus_delta(a_plus)}`` for a projection ``e``.

    The new family at ``eps`` uses the old one at ``eps'`` with
    ``((1 + delta)/delta) * budget(eps') <= eps``.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if not _is_projection(e):
        raise ValueError("e is not a projection")
    fp, fm = f_plus_delta(delta), f_minus_delta(delta)
    inner = _reindex(ucut.gap_budget, (1 + delta) / delta)

    def gen(eps):
        a_minus, a_plus = ucut(inner(eps))
        return apply_function(a_minus, fm), apply_function(a_plus, fp)

    return CutFamily("R", gen, uniform_bound=1 + delta, name=f"tightened({ucut.name})")


def resolvent_transform(x, cut, t):
    """``f_t(x)`` with the transformed R-cut ``{f_t(a_minus), f_t(a_plus)}``.

    Needs ``0 <= t < 1/(2r)`` with ``r`` the uniform bound of ``cut``; the
    transformed gap is at most ``(2/r)`` times the original one, so the
    family is re-indexed accordingly.
    """
    r = cut.uniform_bound
    if r is None or r <= 0:
        raise ValueError("the cut needs a positive uniform bound")
    if not 0 <= t < 1 / (2 * r):
        raise ValueError(f"t must lie in [0, {1 / (2 * r)})")
    ft = f_resolvent(t)
    inner = _reindex(cut.gap_budget, 2 / r)

    def gen(eps):
        a_minus, a_plus = cut(inner(eps))
        return apply_function(a_minus, ft), apply_function(a_plus, ft)

    return apply_function(x, ft), CutFamily("R", gen, uniform_bound=1.0, name=f"resolvent({cut.name})")


def offdiag_bound_check(x, e, alpha, beta, tol=PSD_TOL):
    """``||e_perp x e|| <= sqrt(alpha beta)`` under ``0 <= x <= alpha e + beta e_perp``."""
    if alpha < 0 or beta < 0:
        raise ValueError("alpha and beta must be nonnegative")
    x = np.asarray(x)
    e = np.asarray(e)
    eye = np.eye(len(e))
    e_perp = eye - e
    if np.linalg.eigvalsh(x)[0] < -tol or np.linalg.eigvalsh(alpha * e + beta * e_perp - x)[0] < -tol:
        raise ValueError("x is not sandwiched between 0 and alpha e + beta e_perp")
    norm = float(np.linalg.norm(e_perp @ x @ e, ord=2))
    bound = float(np.sqrt(alpha * beta))
    return {"norm": norm, "bound": bound, "holds": norm <= bound + tol}


# --------------------------------------------------------------------------
# the 2x2 counterexample
# --------------------------------------------------------------------------


class Signal:
    """A scalar function on ``[0, 1]`` known exactly away from 0.

    ``piecewise(lo)`` returns a :class:`PiecewiseFn` equal to the signal on
    ``[lo, 1]``; the behaviour at 0 is carried by the flags.
    """

    value_at_zero = 0.0
    continuous_at_zero = True
    square_continuous_at_zero = True
    continuous = False
    sup_abs = 0.0

    def piecewise(self, lo):
        raise NotImplementedError


class PiecewiseSignal(Signal):
    def __init__(self, fn):
        if fn.shape:
            raise ValueError("scalar functions only")
        if float(fn.lo) != 0.0 or float(fn.hi) != 1.0:
            raise ValueError("signals live on [0, 1]")
        self.fn = fn
        self.value_at_zero = fn.point[0]
        self.continuous_at_zero = bool(fn.right[0] == fn.point[0])
        self.square_continuous_at_zero = bool(fn.right[0] ** 2 == fn.point[0] ** 2)
        self.continuous = fn.is_continuous
        self.sup_abs = fn.max_abs()

    def piecewise(self, lo):
        return self.fn


class DyadicSquareWave(Signal):
    """``(-1)**k`` on ``(2**-(k+1), 2**-k]``, 0 at 0: oscillates without limit at 0."""

    value_at_zero = 0.0
    continuous_at_zero = False
    square_continuous_at_zero = False
    sup_abs = 1.0

    def piecewise(self, lo):
        depth = max(1, int(np.ceil(-np.log2(lo))) + 1) if lo > 0 else 64
        knots = [Fraction(0)] + [Fraction(1, 2 ** k) for k in range(depth, -1, -1)]
        # the piece below 2**-depth is not resolved and is set to 0
        levels = [Fraction(0)] + [Fraction((-1) ** k) for k in range(depth - 1, -1, -1)]
        point = [Fraction(0)] + [Fraction((-1) ** k) for k in range(depth, -1, -1)]
        left = [point[0]] + levels
        right = levels + [point[-1]]
        arr = lambda v: np.array(v, dtype=object)
        return PiecewiseFn(arr(knots), arr(left), arr(right), arr(point))


def as_signal(g):
    if isinstance(g, Signal):
        return g
    if isinstance(g, PiecewiseFn):
        return PiecewiseSignal(g)
    raise TypeError("g must be a Signal or a scalar PiecewiseFn")


def _exact(v):
    """Exact rational; short decimal literals such as 0.1 are read as written."""
    if isinstance(v, (Fraction, int)):
        return Fraction(v)
    v = float(v)
    text = repr(v)
    return Fraction(text) if len(text) <= 12 else Fraction(v)


def _offdiag(gvals):
    z = Fraction(0)
    return np.array([[[z, v], [v, z]] for v in gvals], dtype=object).reshape(len(gvals), 2, 2)


def offdiag_element(g, lo=0.0):
    """``[[0, g], [g, 0]]`` as an exact :class:`PiecewiseFn` (``g`` resolved on ``[lo, 1]``)."""
    gf = as_signal(g).piecewise(lo)
    conv = np.vectorize(_exact, otypes=[object])
    return PiecewiseFn(np.array([_exact(k) for k in gf.knots], dtype=object), _offdiag(conv(gf.left)),
                       _offdiag(conv(gf.right)), _offdiag(conv(gf.point)))


def notalg_cut(g, eps):
    """The corrected pair: ``offdiag(g, g)`` for ``t > eps**2``, ``diag(+-eps, +-1/eps)`` for ``t <= eps**2``."""
    e = _exact(eps)
    if e <= 0:
        raise ValueError("eps must be positive")
    thr = e * e
    if thr >= 1:
        raise ValueError("eps must be below 1")
    f = offdiag_element(g, float(thr))
    keep = f.knots > thr
    knots = np.concatenate([np.array([Fraction(0), thr], dtype=object), f.knots[keep]])
    _, right_thr, _ = f.resample(np.array([thr], dtype=object))

    def side(sign):
        z = Fraction(0)
        d = np.array([[sign * e, z], [z, sign / e]], dtype=object)
        left = [d, d] + list(f.left[keep])
        right = [d, right_thr[0]] + list(f.right[keep])
        point = [d, d] + list(f.point[keep])
        return PiecewiseFn(knots, np.array(left, dtype=object), np.array(right, dtype=object),
                           np.array(point, dtype=object))

    return side(-1), side(1)


def notalg_cut_as_printed(g, eps):
    """The literal variant: threshold ``t <= eps`` and entries ``+-eps**2``, ``+-eps**-2``."""
    e = _exact(eps)
    f = offdiag_element(g, float(e))
    keep = f.knots > e
    knots = np.concatenate([np.array([Fraction(0), e], dtype=object), f.knots[keep]])
    _, right_thr, _ = f.resample(np.array([e], dtype=object))

    def side(sign):
        z = Fraction(0)
        d = np.array([[sign * e * e, z], [z, sign / (e * e)]], dtype=object)
        return PiecewiseFn(knots, np.array([d, d] + list(f.left[keep]), dtype=object),
                           np.array([d, right_thr[0]] + list(f.right[keep]), dtype=object),
                           np.array([d, d] + list(f.point[keep]), dtype=object))

    return side(-1), side(1)


def notalg_gap_formula(eps):
    e = _exact(eps)
    return 2 * e + e ** 3


def notalg_cut_family(g):
    """The corrected family; its gap ``2 eps + eps**3`` stays below the budget ``3 eps`` for ``eps < 1``."""
    return CutFamily("U", lambda eps: notalg_cut(g, eps), gap_budget=lambda eps: 3 * eps, name="notalg")


@dataclass
class MembershipVerdict:
    in_A: bool
    in_AR: bool
    in_AU: bool
    reasons: list = field(default_factory=list)


def membership(entries):
    """Decide membership for the 2x2 model from the behaviour of the entries at 0.

    ``entries`` maps ``(i, j)`` to a :class:`Signal` (or scalar PiecewiseFn).
    A Riemann measurable matrix function lies in the unbounded class when its
    (1,1) entry is continuous at 0 and the off-diagonal entries vanish there;
    the bounded class additionally needs the off-diagonal entries continuous at 0.
    """
    sig = {k: as_signal(v) for k, v in entries.items()}
    reasons = []
    f11_cont = sig[(0, 0)].continuous_at_zero
    off_zero = all(sig[k].value_at_zero == 0 for k in ((0, 1), (1, 0)))
    off_cont = all(sig[k].continuous_at_zero for k in ((0, 1), (1, 0)))
    all_cont = all(s.continuous for s in sig.values())
    if not f11_cont:
        reasons.append("f11 is discontinuous at 0")
    if not off_zero:
        reasons.append("off-diagonal entries do not vanish at 0")
    if not off_cont:
        reasons.append("off-diagonal entries are discontinuous at 0")
    in_AU = f11_cont and off_zero
    in_AR = in_AU and off_cont
    in_A = in_AR and all_cont
    return MembershipVerdict(in_A, in_AR, in_AU, reasons)


class _SquaredSignal(Signal):
    def __init__(self, g):
        self.value_at_zero = g.value_at_zero ** 2
        self.continuous_at_zero = g.square_continuous_at_zero
        self.square_continuous_at_zero = g.square_continuous_at_zero
        self.continuous = g.continuous
        self.sup_abs = g.sup_abs ** 2


class _Zero(Signal):
    continuous = True


@dataclass
class NotalgReport:
    eps: object
    gap: Fraction
    gap_formula: Fraction
    separated: bool
    f: MembershipVerdict
    f_squared: MembershipVerdict
    f_minus: PiecewiseFn = None
    f_plus: PiecewiseFn = None


def counterexample_notalg(g, eps):
    """Build the corrected cut for ``[[0, g], [g, 0]]`` and decide the memberships of ``f`` and ``f**2``."""
    sig = as_signal(g)
    if sig.sup_abs > 1:
        raise ValueError("need |g| <= 1")
    if sig.value_at_zero != 0:
        raise ValueError("need g(0) = 0")
    f_minus, f_plus = notalg_cut(sig, eps)
    gap = trace_eval(f_plus - f_minus)
    # on t <= eps^2 the sandwich reduces to det [[eps, -g], [-g, 1/eps]] = 1 - g^2 >= 0;
    # elsewhere both sides coincide with f
    separated = sig.sup_abs <= 1
    zero = _Zero()
    f_verdict = membership({(0, 0): zero, (1, 1): zero, (0, 1): sig, (1, 0): sig})
    sq = _SquaredSignal(sig)
    sq_verdict = membership({(0, 0): sq, (1, 1): sq, (0, 1): zero, (1, 0): zero})
    return NotalgReport(eps, gap, notalg_gap_formula(eps), separated, f_verdict, sq_verdict, f_minus, f_plus)


def product(x, y):
    """Pointwise matrix product of two piecewise-constant functions."""
    for f in (x, y):
        if not np.all(f.right[:-1] == f.left[1:]):
            raise ValueError("products are exact only for piecewise-constant inputs")
    knots = np.union1d(x.knots, y.knots)
    a, b = x.resample(knots), y.resample(knots)
    mul = (lambda u, v: u @ v) if x.shape else (lambda u, v: u * v)
    return PiecewiseFn(knots, mul(a[0], b[0]), mul(a[1], b[1]), mul(a[2], b[2]))

"""Commutative Riemann measurability on a measured interval.

A :class:`MeasuredSpace` is an interval carrying a multiple of Lebesgue
measure plus finitely many atoms.  Functions are :class:`PiecewiseFn`
objects: piecewise affine, with explicit left/right limits and point values
at every knot, so that integrals, sup-norms and level sets are exact.
"""
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, NoCutError, NoSDDError, PrecisionError

ATOM_TOL = 1e-12
SLACK = 1e-12


# --------------------------------------------------------------------------
# spaces and sets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MeasuredSpace:
    """``[lo, hi]`` with ``lebesgue_weight * dt`` plus point masses."""

    lo: float
    hi: float
    lebesgue_weight: float = 1.0
    atoms: tuple = ()

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError("empty support")
        if self.lebesgue_weight < 0:
            raise ValueError("lebesgue_weight must be nonnegative")
        atoms = tuple(sorted((p, m) for p, m in self.atoms))
        for i, (p, m) in enumerate(atoms):
            if m <= 0:
                raise ValueError(f"atom mass at {p} must be positive")
            if not self.lo <= p <= self.hi:
                raise ValueError(f"atom {p} outside support")
            if i and atoms[i - 1][0] == p:
                raise ValueError(f"duplicate atom at {p}")
        object.__setattr__(self, "atoms", atoms)

    @property
    def atom_points(self):
        return np.array([p for p, _ in self.atoms], dtype=float)

    @property
    def total(self):
        return self.lebesgue_weight * (self.hi - self.lo) + sum(m for _, m in self.atoms)

    def point_mass(self, p, tol=ATOM_TOL):
        return sum(m for q, m in self.atoms if abs(q - p) <= tol)

    def interval_measure(self, a, b, a_closed=True, b_closed=True):
        a_cl = max(a, self.lo)
        b_cl = min(b, self.hi)
        if b_cl < a_cl:
            return 0.0
        if a < self.lo:
            a_closed = True
        if b > self.hi:
            b_closed = True
        total = self.lebesgue_weight * (b_cl - a_cl)
        for p, m in self.atoms:
            if (a_cl < p < b_cl) or (p == a_cl and a_closed) or (p == b_cl and b_closed and p != a_cl):
                total += m
        return total

    def measure(self, rmset):
        return sum(self.interval_measure(iv.a, iv.b, iv.a_closed, iv.b_closed) for iv in rmset.intervals)

    def measure_points(self, points):
        return sum(self.point_mass(p) for p in points)


@dataclass(frozen=True)
class Interval:
    a: float
    b: float
    a_closed: bool = True
    b_closed: bool = True

    def contains(self, t):
        return (self.a < t < self.b) or (t == self.a and self.a_closed) or (t == self.b and self.b_closed)


@dataclass(frozen=True)
class RMSet:
    """A finite disjoint union of intervals inside ``space``."""

    intervals: tuple
    space: MeasuredSpace

    @classmethod
    def from_pieces(cls, pieces, space):
        pieces = [p for p in pieces if p.a < p.b or (p.a == p.b and p.a_closed and p.b_closed)]
        pieces.sort(key=lambda p: (p.a, not p.a_closed))
        merged = []
        for p in pieces:
            if merged:
                cur = merged[-1]
                if p.a < cur.b or (p.a == cur.b and (cur.b_closed or p.a_closed)):
                    if p.b > cur.b:
                        merged[-1] = Interval(cur.a, p.b, cur.a_closed, p.b_closed)
                    elif p.b == cur.b:
                        merged[-1] = Interval(cur.a, cur.b, cur.a_closed, cur.b_closed or p.b_closed)
                    continue
            merged.append(p)
        return cls(tuple(merged), space)

    @classmethod
    def empty(cls, space):
        return cls((), space)

    @classmethod
    def whole(cls, space):
        return cls((Interval(space.lo, space.hi),), space)

    def __bool__(self):
        return bool(self.intervals)

    def contains(self, t):
        return any(iv.contains(t) for iv in self.intervals)

    def boundary_points(self):
        lo, hi = self.space.lo, self.space.hi
        pts = []
        for iv in self.intervals:
            if not (iv.a == lo and iv.a_closed and iv.b > iv.a):
                pts.append(iv.a)
            if not (iv.b == hi and iv.b_closed and iv.b > iv.a):
                pts.append(iv.b)
        return sorted(set(pts))

    @property
    def boundary_measure(self):
        return self.space.measure_points(self.boundary_points())

    @property
    def is_riemann_measurable(self):
        return self.boundary_measure == 0

    @property
    def measure(self):
        return self.space.measure(self)

    def closure(self):
        return RMSet.from_pieces([Interval(iv.a, iv.b, True, True) for iv in self.intervals], self.space)

    def complement(self):
        lo, hi = self.space.lo, self.space.hi
        pieces = []
        cursor, cursor_closed = lo, True
        for iv in self.intervals:
            pieces.append(Interval(cursor, iv.a, cursor_closed, not iv.a_closed))
            cursor, cursor_closed = iv.b, not iv.b_closed
        pieces.append(Interval(cursor, hi, cursor_closed, True))
        return RMSet.from_pieces(pieces, self.space)

    def indicator(self):
        """The characteristic function as a :class:`PiecewiseFn`."""
        lo, hi = self.space.lo, self.space.hi
        knots = sorted({lo, hi, *[iv.a for iv in self.intervals], *[iv.b for iv in self.intervals]})
        if len(knots) == 1:
            knots = [lo, hi] if hi > lo else [lo, lo + 1.0]
        knots = np.array(knots, dtype=float)
        mids = 0.5 * (knots[:-1] + knots[1:])
        levels = np.array([1.0 if self.contains(m) else 0.0 for m in mids])
        point = np.array([1.0 if self.contains(k) else 0.0 for k in knots])
        return PiecewiseFn.step(knots, levels, point)


# --------------------------------------------------------------------------
# piecewise affine functions
# --------------------------------------------------------------------------


class PLMap:
    """Continuous piecewise-linear map of the real line (used for composition)."""

    def __init__(self, xs, ys, left_slope=0.0, right_slope=0.0):
        self.xs = np.asarray(xs, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        if np.any(np.diff(self.xs) <= 0):
            raise ValueError("PLMap knots must be strictly increasing")
        self.left_slope = float(left_slope)
        self.right_slope = float(right_slope)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        y = np.interp(x, self.xs, self.ys)
        y = np.where(x < self.xs[0], self.ys[0] + self.left_slope * (x - self.xs[0]), y)
        y = np.where(x > self.xs[-1], self.ys[-1] + self.right_slope * (x - self.xs[-1]), y)
        return y


ABS = PLMap([0.0], [0.0], left_slope=-1.0, right_slope=1.0)


class PiecewiseFn:
    """Piecewise-affine scalar or matrix valued function on ``[knots[0], knots[-1]]``.

    On each open piece ``(k_i, k_{i+1})`` the function is affine, running from
    ``right[i]`` to ``left[i+1]``.  ``point[i]`` is the value at ``k_i``.  Values
    may be floats, complex numbers or (with ``dtype=object``) exact
    :class:`fractions.Fraction` entries; trailing axes give the value shape.
    """

    __slots__ = ("knots", "left", "right", "point")

    def __init__(self, knots, left, right, point):
        knots = np.asarray(knots)
        if knots.dtype != object:
            knots = knots.astype(float)
        if knots.ndim != 1 or len(knots) < 2:
            raise ValueError("need at least two knots")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        left = _as_values(left)
        right = _as_values(right)
        point = _as_values(point)
        if not (left.shape == right.shape == point.shape) or left.shape[0] != len(knots):
            raise ValueError("value arrays must match the knots")
        left = left.copy()
        right = right.copy()
        left[0] = point[0]
        right[-1] = point[-1]
        self.knots, self.left, self.right, self.point = knots, left, right, point
        if self.shape and self.shape[0] == self.shape[-1] and left.dtype != object:
            for arr in (left, right, point):
                if not np.allclose(arr, np.conj(np.swapaxes(arr, -1, -2)), atol=1e-12, equal_nan=True):
                    raise ValueError("matrix values must be Hermitian")

    # construction ---------------------------------------------------------

    @classmethod
    def continuous(cls, knots, values):
        values = _as_values(values)
        return cls(knots, values, values, values)

    @classmethod
    def constant(cls, lo, hi, value):
        v = _as_values([value, value])
        return cls([lo, hi], v, v, v)

    @classmethod
    def step(cls, knots, levels, point=None):
        """Piecewise constant; ``levels[i]`` holds on ``(k_i, k_{i+1})``.

        Point values default to right-continuity (last knot takes the last level).
        """
        levels = _as_values(levels)
        m = len(knots)
        if levels.shape[0] != m - 1:
            raise ValueError("need one level per piece")
        right = np.concatenate([levels, levels[-1:]])
        left = np.concatenate([levels[:1], levels])
        if point is None:
            point = right
        return cls(knots, left, right, point)

    # basic properties -----------------------------------------------------

    @property
    def shape(self):
        return self.left.shape[1:]

    @property
    def lo(self):
        return self.knots[0]

    @property
    def hi(self):
        return self.knots[-1]

    @property
    def dtype(self):
        return self.point.dtype

    def __repr__(self):
        return f"PiecewiseFn(knots={len(self.knots)}, shape={self.shape}, lo={self.lo}, hi={self.hi})"

    # evaluation -----------------------------------------------------------

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=self.knots.dtype if self.knots.dtype == object else float))
        if np.any(t < self.lo) or np.any(t > self.hi):
            raise ValueError("evaluation outside the support")
        m = len(self.knots)
        j = np.searchsorted(self.knots, t, side="left")
        hit = (j < m) & (self.knots[np.minimum(j, m - 1)] == t)
        out = self._interior(t)
        if np.any(hit):
            out[hit] = self.point[j[hit]]
        return out[0] if scalar else out

    def _interior(self, t):
        # affine interpolation on the piece containing t (right limit at knots)
        m = len(self.knots)
        idx = np.clip(np.searchsorted(self.knots, t, side="right") - 1, 0, m - 2)
        k0, k1 = self.knots[idx], self.knots[idx + 1]
        w = (t - k0) / (k1 - k0)
        w = w.reshape(w.shape + (1,) * len(self.shape))
        return self.right[idx] + w * (self.left[idx + 1] - self.right[idx])

    def resample(self, knots):
        """(left, right, point) on a superset of the own knots."""
        knots = np.asarray(knots, dtype=self.knots.dtype)
        m = len(self.knots)
        j = np.searchsorted(self.knots, knots, side="left")
        own = (j < m) & (self.knots[np.minimum(j, m - 1)] == knots)
        vals = self._interior(knots)
        left, right, point = vals.copy(), vals.copy(), vals.copy()
        if np.any(own):
            left[own] = self.left[j[own]]
            right[own] = self.right[j[own]]
            point[own] = self.point[j[own]]
        return left, right, point

    def refine(self, extra):
        extra = np.asarray(extra, dtype=self.knots.dtype)
        extra = extra[(extra > self.lo) & (extra < self.hi)]
        knots = np.union1d(self.knots, extra)
        return PiecewiseFn(knots, *self.resample(knots))

    def subdivide(self, n):
        """Insert ``n - 1`` equally spaced continuity knots in every piece."""
        if n <= 1:
            return self
        s = np.arange(1, n) / n
        extra = (self.knots[:-1, None] + s[None, :] * np.diff(self.knots)[:, None]).ravel()
        return self.refine(extra)

    def all_values(self):
        """Every value the function takes or approaches (points and one-sided limits)."""
        return np.concatenate([self.point, self.left[1:], self.right[:-1]])

    # arithmetic -----------------------------------------------------------

    def _combine(self, other, op):
        if isinstance(other, PiecewiseFn):
            if other.lo != self.lo or other.hi != self.hi:
                raise ValueError("functions live on different supports")
            knots = np.union1d(self.knots, other.knots)
            a = self.resample(knots)
            b = other.resample(knots)
            return PiecewiseFn(knots, op(a[0], b[0]), op(a[1], b[1]), op(a[2], b[2]))
        return PiecewiseFn(self.knots, op(self.left, other), op(self.right, other), op(self.point, other))

    def __add__(self, other):
        return self._combine(other, lambda x, y: x + y)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda x, y: x - y)

    def __rsub__(self, other):
        return self._combine(other, lambda x, y: y - x)

    def __neg__(self):
        return PiecewiseFn(self.knots, -self.left, -self.right, -self.point)

    def __mul__(self, k):
        if isinstance(k, PiecewiseFn):
            raise TypeError("products of affine pieces are not affine")
        return PiecewiseFn(self.knots, self.left * k, self.right * k, self.point * k)

    __rmul__ = __mul__

    def map_values(self, fn):
        """Apply ``fn`` to every stored value; caller guarantees affinity survives."""
        return PiecewiseFn(self.knots, fn(self.left), fn(self.right), fn(self.point))

    # scalar views of matrix functions -------------------------------------

    def entry(self, i, j):
        return PiecewiseFn(self.knots, self.left[:, i, j], self.right[:, i, j], self.point[:, i, j])

    def trace(self):
        tr = lambda v: np.trace(v, axis1=1, axis2=2)
        return PiecewiseFn(self.knots, tr(self.left), tr(self.right), tr(self.point))

    # measure-theoretic quantities -----------------------------------------

    def discontinuities(self):
        """Knots where left limit, right limit and point value are not all equal."""
        axes = tuple(range(1, 1 + len(self.shape)))
        bad = (self.left != self.point) | (self.right != self.point)
        if axes:
            bad = bad.any(axis=axes)
        return self.knots[bad]

    @property
    def is_continuous(self):
        return len(self.discontinuities()) == 0

    def integral(self, space=None):
        """``integral f dmu`` (Lebesgue weight 1 and no atoms when ``space`` is None)."""
        widths = np.diff(self.knots)
        widths = widths.reshape(widths.shape + (1,) * len(self.shape))
        trap = (widths * (self.right[:-1] + self.left[1:])).sum(axis=0) / 2
        if space is None:
            return trap
        total = trap * space.lebesgue_weight
        for p, m in space.atoms:
            total = total + m * self(p)
        return total

    def sup(self):
        return self.all_values().max()

    def inf(self):
        return self.all_values().min()

    def max_abs(self):
        vals = self.all_values()
        if not self.shape:
            return float(np.max(np.abs(vals.astype(float))))
        return float(np.max(np.linalg.norm(vals.astype(complex), ord=2, axis=(1, 2))))

    def inf_on(self, rmset):
        """Infimum over a set (scalar case); exact since pieces are affine."""
        vals = []
        for iv in rmset.intervals:
            inside = (self.knots > iv.a) & (self.knots < iv.b)
            vals.extend(self.point[inside])
            vals.extend(self.left[inside])
            vals.extend(self.right[inside])
            if iv.b > iv.a:
                vals.append(self._one_sided(iv.a, right=True))
                vals.append(self._one_sided(iv.b, right=False))
            if iv.a_closed:
                vals.append(self(iv.a))
            if iv.b_closed:
                vals.append(self(iv.b))
        return min(vals) if vals else np.inf

    def _one_sided(self, t, right):
        j = np.searchsorted(self.knots, t)
        if j < len(self.knots) and self.knots[j] == t:
            return self.right[j] if right else self.left[j]
        return self._interior(np.array([t], dtype=self.knots.dtype))[0]

    # composition ----------------------------------------------------------

    def compose(self, g):
        """``g o f`` for a scalar function and a :class:`PLMap` ``g``."""
        if self.shape:
            raise ValueError("composition is defined for scalar functions")
        u = self.right[:-1].astype(float)
        v = self.left[1:].astype(float)
        k0, k1 = self.knots[:-1].astype(float), self.knots[1:].astype(float)
        extra = []
        for level in g.xs:
            cross = (np.minimum(u, v) < level) & (level < np.maximum(u, v))
            if np.any(cross):
                s = (level - u[cross]) / (v[cross] - u[cross])
                extra.append(k0[cross] + s * (k1[cross] - k0[cross]))
        f = self.refine(np.concatenate(extra)) if extra else self
        return f.map_values(lambda arr: g(arr.astype(float)))

    def abs(self):
        return self.compose(ABS)


def _as_values(v):
    arr = np.asarray(v)
    if arr.dtype == object or arr.dtype.kind == "c":
        return arr
    return arr.astype(float)


# --------------------------------------------------------------------------
# level sets
# --------------------------------------------------------------------------


def superlevel(f, y, space, strict=True):
    """``{f > y}`` (``strict``) or ``{f >= y}`` as an :class:`RMSet`."""
    if f.shape:
        raise ValueError("level sets need a scalar function")
    cmp = (lambda v: v > y) if strict else (lambda v: v >= y)
    pieces = [Interval(k, k) for k, p in zip(f.knots, f.point) if cmp(p)]
    for i in range(len(f.knots) - 1):
        a, b = f.knots[i], f.knots[i + 1]
        u, v = f.right[i], f.left[i + 1]
        if u == v:
            if cmp(u):
                pieces.append(Interval(a, b, False, False))
            continue
        ts = a + (y - u) / (v - u) * (b - a)
        if v > u:
            if ts <= a:
                pieces.append(Interval(a, b, False, False))
            elif ts < b:
                pieces.append(Interval(ts, b, not strict, False))
            elif ts == b and not strict and v == y:
                pass
        else:
            if ts >= b:
                pieces.append(Interval(a, b, False, False))
            elif ts > a:
                pieces.append(Interval(a, ts, False, not strict))
    return RMSet.from_pieces(pieces, space)


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MeasurabilityVerdict:
    measurable: bool
    bad_measure: float
    discontinuities: tuple = ()


def _check_support(f, X):
    if float(f.lo) != float(X.lo) or float(f.hi) != float(X.hi):
        raise ValueError(f"function support [{f.lo}, {f.hi}] differs from space [{X.lo}, {X.hi}]")


def is_riemann_measurable(f, X):
    """Riemann mu-measurability: the discontinuity set must be mu-null."""
    _check_support(f, X)
    if f.dtype != object:
        axes = tuple(range(1, 1 + len(f.shape)))
        undefined = lambda arr: np.isnan(arr).any(axis=axes) if axes else np.isnan(arr)
        piece_nan = undefined(f.right[:-1]) | undefined(f.left[1:])
        for i in np.flatnonzero(piece_nan):
            if X.interval_measure(f.knots[i], f.knots[i + 1], False, False) > 0:
                raise DomainError(f"undefined on ({f.knots[i]}, {f.knots[i + 1]}) of positive measure")
        for k in f.knots[undefined(f.point)]:
            if X.point_mass(k) > 0:
                raise DomainError(f"undefined at the atom {k}")
    disc = f.discontinuities()
    bad = X.measure_points(disc)
    return MeasurabilityVerdict(bad == 0, bad, tuple(float(p) for p in disc))


def build_rcut(f, X, eps):
    """Continuous ``f_minus <= f <= f_plus`` with ``integral(f_plus - f_minus) < eps``.

    Each discontinuity ``p`` gets a tent: the upper function rises linearly
    from ``f(p - h)`` to ``max`` of the values at ``p`` and falls back to
    ``f(p + h)``; the lower one mirrors it.  The ramp width starts at
    ``eps / (4 J max_jump w)`` and is shrunk to stay clear of atoms and
    neighbouring knots, then halved until the gap is certified.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if f.shape:
        raise ValueError("build_rcut handles scalar functions")
    verdict = is_riemann_measurable(f, X)
    if not verdict.measurable:
        raise NoCutError(f"discontinuities carry measure {verdict.bad_measure}")
    disc = np.asarray(verdict.discontinuities, dtype=float)
    if len(disc) == 0:
        return f, f

    knots = f.knots.astype(float)
    idx = np.searchsorted(knots, disc)
    trio = np.stack([f.left[idx], f.point[idx], f.right[idx]]).astype(float)
    highs, lows = trio.max(axis=0), trio.min(axis=0)
    max_jump = float(np.max(highs - lows))
    w = X.lebesgue_weight
    h0 = eps / (4 * len(disc) * max_jump * w) if w > 0 and max_jump > 0 else np.inf

    atoms = X.atom_points
    limits = []
    for i, p in zip(idx, disc):
        lim = h0
        if i > 0:
            lim = min(lim, 0.5 * (knots[i] - knots[i - 1]))
        if i < len(knots) - 1:
            lim = min(lim, 0.5 * (knots[i + 1] - knots[i]))
        if len(atoms):
            d = np.abs(atoms - p)
            d = d[d > 0]
            if len(d):
                lim = min(lim, 0.5 * d.min())
        limits.append(lim)
    h = np.array(limits)

    for _ in range(200):
        f_minus, f_plus = _tents(f, disc, idx, h, lows, highs)
        gap = float((f_plus - f_minus).integral(X))
        if gap < eps:
            return f_minus, f_plus
        h = h / 2
    raise PrecisionError("could not certify the cut gap")


def _tents(f, disc, idx, h, lows, highs):
    lo, hi = float(f.lo), float(f.hi)
    extra = np.concatenate([disc - h, disc + h])
    extra = extra[(extra > lo) & (extra < hi)]
    knots = np.union1d(f.knots.astype(float), extra)
    _, _, point = f.resample(knots)
    base = point.astype(float)
    pos = np.searchsorted(knots, disc)
    upper, lower = base.copy(), base.copy()
    upper[pos] = highs
    lower[pos] = lows
    return PiecewiseFn.continuous(knots, lower), PiecewiseFn.continuous(knots, upper)


def dominates(g, f, tol=0.0):
    """True when ``g >= f - tol`` everywhere (scalar functions, exact)."""
    d = g - f
    return bool(d.inf() >= -tol)


def _admissible(f, X, y):
    # a plateau at height y makes the level boundary degenerate: refuse it
    flat = (f.right[:-1] == y) & (f.left[1:] == y)
    if np.any(flat):
        return None
    O = superlevel(f, y, X, strict=True)
    C = superlevel(f, y, X, strict=False)
    for S in (O, C):
        if any(X.point_mass(p) > 0 for p in S.boundary_points()):
            return None
    return O, C


def level_set_scan(f, X, alpha, beta, max_depth=12, max_results=8):
    """Levels ``y`` in ``(alpha, beta)`` whose super-level sets are Riemann measurable.

    Candidates are visited on successively finer dyadic grids of the interval;
    the scan stops after the first grid level that yields a hit.
    """
    if not 0 < alpha < beta:
        raise ValueError("need 0 < alpha < beta")
    if f.shape:
        raise ValueError("scalar functions only")
    found = []
    for depth in range(1, max_depth + 1):
        n = 2 ** depth
        for j in range(1, n, 2):
            y = alpha + (beta - alpha) * j / n
            sets = _admissible(f, X, y)
            if sets is not None:
                found.append((y, sets[0], sets[1]))
                if len(found) >= max_results:
                    return found
        if found:
            return found
    raise PrecisionError(f"no admissible level in ({alpha}, {beta}) after {max_depth} dyadic refinements")


@dataclass
class CharDecomposition:
    alphas: list = field(default_factory=list)
    sets: list = field(default_factory=list)
    betas: list = field(default_factory=list)

    def __len__(self):
        return len(self.alphas)

    @property
    def total(self):
        return float(sum(self.alphas))

    def partial_sum(self, n, space):
        out = PiecewiseFn.constant(space.lo, space.hi, 0.0)
        for a, S in zip(self.alphas[:n], self.sets[:n]):
            out = out + a * S.indicator()
        return out


def decompose_characteristics(f, X, tol, max_terms=100_000):
    """Write ``f = sum alpha_n chi_n`` with Riemann measurable characteristic functions.

    With residual ``r_n`` and ``beta_n = sup r_n`` the next coefficient is the
    largest admissible level in ``[beta_n/4, beta_n/2]``: ``beta_n / 2`` when
    its level set is measurable, otherwise the first hit of a dyadic scan.
    Stops once ``beta_n <= tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if f.inf() < 0:
        raise ValueError("f must be positive")
    verdict = is_riemann_measurable(f, X)
    if not verdict.measurable:
        raise NoCutError("f is not Riemann measurable")
    out = CharDecomposition(betas=[float(f.sup())])
    r = f
    while out.betas[-1] > tol:
        if len(out) >= max_terms:
            raise PrecisionError("term budget exhausted")
        beta = out.betas[-1]
        y = beta / 2
        sets = _admissible(r, X, y)
        if sets is None:
            y, _, C = level_set_scan(r, X, beta / 4, beta / 2, max_results=1)[0]
        else:
            C = sets[1]
        r = r - y * C.indicator()
        out.alphas.append(y)
        out.sets.append(C)
        out.betas.append(float(r.sup()))
    return out


def support_excess(g, omega, X):
    """``mu(supp g \\ omega)`` for ``g >= 0`` with ``omega`` inside ``{g > 0}``."""
    supp = superlevel(g, 0.0, X, strict=True).closure()
    return X.measure(supp) - X.measure(omega)


def shrink_support(f_plus, omega, X, eps, return_delta=False):
    """Replace ``f_plus`` by ``psi_delta o f_plus`` so its support exceeds ``omega`` by at most ``eps``.

    ``psi_delta`` vanishes on ``[0, 1 - delta]`` and rises linearly to 1 at 1.
    The Chebyshev bound ``mu(supp) <= (eps' + mu(omega)) / (1 - delta)`` with
    ``eps' = integral(f_plus) - mu(omega)`` fixes delta when it applies; the
    exact excess is then verified and, failing that, delta is halved.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if f_plus.inf() < -SLACK or f_plus.sup() > 1 + SLACK:
        raise ValueError("need 0 <= f_plus <= 1")
    if omega and f_plus.inf_on(omega) < 1 - SLACK:
        raise ValueError("need chi_omega <= f_plus")
    if support_excess(f_plus, omega, X) <= eps + SLACK:
        return (f_plus, 1.0) if return_delta else f_plus

    m = X.measure(omega)
    excess_mass = float(f_plus.integral(X)) - m
    candidates = []
    if excess_mass < eps:
        candidates.append(1.0 - (excess_mass + m) / (eps + m))
    candidates.extend(0.5 ** k for k in range(1, 60))
    for delta in candidates:
        if not 0 < delta < 1:
            continue
        g = f_plus.compose(PLMap([1.0 - delta, 1.0], [0.0, 1.0]))
        if support_excess(g, omega, X) <= eps + SLACK:
            return (g, delta) if return_delta else g
    raise ValueError("f_plus equals 1 on too large a set outside omega")


def mollifier(eps):
    """Increasing ``phi_eps``: 0 on ``[0, eps/2]``, 1 on ``[eps, inf)``, linear between."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return PLMap([eps / 2, eps], [0.0, 1.0])


def mollify(f, eps):
    """``phi_eps(|f|)`` as a :class:`PiecewiseFn`."""
    return f.abs().compose(mollifier(eps))


# --------------------------------------------------------------------------
# strongly dense domains
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SymbolicFn:
    """A function known in closed form, monotone between its singular points.

    ``singular_points`` are where ``|f|`` blows up; ``special_values`` fixes
    the value at isolated points (e.g. 0 at the ends of ``(0, 1)``).
    """

    func: Callable
    singular_points: tuple = ()
    special_values: dict = field(default_factory=dict)
    name: str = ""

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.asarray(self.func(t), dtype=float)
        for p, v in self.special_values.items():
            out = np.where(t == p, v, out)
        return out

    @classmethod
    def power(cls, p):
        sing = (0.0,) if p < 0 else ()
        return cls(lambda t: t ** p, sing, {0.0: 0.0} if p < 0 else {}, f"t^{p}")

    @classmethod
    def log_power(cls, alpha):
        """``(-log t)^(-alpha)`` on ``(0, 1)``, set to 0 at ``t = 0, 1``."""
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        return cls(lambda t: (-np.log(t)) ** (-alpha), (1.0,), {0.0: 0.0, 1.0: 0.0}, f"(-log t)^-{alpha}")


@dataclass
class SddSequence:
    sets: list
    complement_measures: list
    bounds: list


def build_sdd(f, X, n_sets=16, ns=None):
    """Increasing Riemann measurable ``G_n`` with ``mu(G_n^c) -> 0`` and ``f`` bounded on each.

    ``ns`` overrides the indices ``1..n_sets`` (e.g. dyadic ``n`` for fast exhaustion).
    """
    if isinstance(f, PiecewiseFn):
        verdict = is_riemann_measurable(f, X)
        if not verdict.measurable:
            raise NoSDDError("f is discontinuous on a set of positive measure")
        whole = RMSet.whole(X)
        return SddSequence([whole], [0.0], [f.max_abs()])
    sing = [s for s in f.singular_points if X.lo <= s <= X.hi]
    if not sing:
        whole = RMSet.whole(X)
        return SddSequence([whole], [0.0], [_sup_abs(f, whole)])
    sets, comps, bounds = [], [], []
    for n in (range(1, n_sets + 1) if ns is None else ns):
        target = 1.0 / (n * len(sing))
        holes = []
        for s in sing:
            r = _radius(X, s, target)
            a, b = s - r, s + r
            holes.append(Interval(max(a, X.lo), min(b, X.hi), a <= X.lo, b >= X.hi))
        G = RMSet.from_pieces(holes, X).complement()
        if not G.is_riemann_measurable:
            raise NoSDDError("could not place measurable truncations")
        sets.append(G)
        comps.append(X.measure(G.complement()))
        bounds.append(_sup_abs(f, G))
    return SddSequence(sets, comps, bounds)


def _radius(X, s, target):
    """Radius of an open ball around ``s`` with measure <= target and no atom on its rim."""
    if X.point_mass(s) > 0:
        raise NoSDDError(f"singular point {s} carries an atom")
    ball = lambda r: X.interval_measure(s - r, s + r, False, False)
    hi = max(s - X.lo, X.hi - s)
    if ball(hi) <= target:
        return hi
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ball(mid) <= target:
            lo = mid
        else:
            hi = mid
    if lo <= 0:
        raise NoSDDError(f"measure concentrates at {s}")
    # an atom sitting on the rim would make the truncation non measurable
    atoms = X.atom_points
    while len(atoms) and np.min(np.abs(np.abs(atoms - s) - lo)) <= ATOM_TOL:
        lo *= 1 - 1e-6
    return lo


def _sup_abs(f, G, samples=257):
    vals = []
    for iv in G.intervals:
        grid = np.linspace(iv.a, iv.b, samples)
        vals.append(np.abs(f(grid)))
    if not vals:
        return 0.0
    return float(np.nanmax(np.concatenate(vals)))

"""Spectral densities, distribution functions and non-increasing rearrangements.

A density is the right-continuous ``N(lam) = tau(e_[0, lam])``.  It is stored
as a table (step or linear interpolation) optionally preceded by a symbolic
head ``b + c lam^a |log lam|^b`` on ``(0, lambda0]`` and followed by a
symbolic tail.  Images under monotone transforms are kept lazily so that
heads transform exactly.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import mpmath
import numpy as np
from scipy import integrate

from ._powerlog import PowerLog
from .errors import NoSDDError
from .measure import Interval, RMSet, SddSequence, SymbolicFn, build_sdd

AGREE_TOL = 1e-9


# --------------------------------------------------------------------------
# monotone transforms
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Transform:
    """Monotone scalar map applied through the functional calculus.

    ``power`` with a negative exponent sends 0 to 0 (the kernel stays the
    kernel); ``falpha`` is ``(-log t)**-alpha`` on ``(0, 1)`` with value 0 at
    both ends; ``heat`` is ``s -> exp(-s)``.
    """

    kind: str = "identity"
    p: object = 1

    @classmethod
    def identity(cls):
        return cls("identity", 1)

    @classmethod
    def power(cls, p):
        if p == 0:
            raise ValueError("the zero power is constant")
        if p == 1:
            return cls.identity()
        return cls("power", p)

    @classmethod
    def heat(cls):
        return cls("heat", 1)

    @classmethod
    def falpha(cls, alpha):
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        return cls("falpha", alpha)

    @property
    def increasing(self):
        return self.kind in ("identity", "falpha") or (self.kind == "power" and self.p > 0)

    @property
    def singular_at_zero(self):
        return self.kind == "power" and self.p < 0

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        p = float(self.p)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if self.kind == "identity":
                return s
            if self.kind == "power":
                return np.where(s > 0, s ** p, 0.0) if p < 0 else s ** p
            if self.kind == "heat":
                return np.exp(-s)
            inside = (s > 0) & (s < 1)
            return np.where(inside, (-np.log(np.where(inside, s, 0.5))) ** (-p), 0.0)

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        p = float(self.p)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if self.kind == "identity":
                return y
            if self.kind == "power":
                return y ** (1.0 / p)
            if self.kind == "heat":
                return -np.log(y)
            return np.exp(-(y ** (-1.0 / p)))

    def then(self, outer):
        """The composite ``outer o self``."""
        if self.kind == "identity":
            return outer
        if outer.kind == "identity":
            return self
        if self.kind == "power" and outer.kind == "power":
            return Transform.power(self.p * outer.p)
        if self.kind == "heat" and outer.kind == "falpha":
            return Transform.power(-outer.p)
        raise ValueError(f"cannot compose {outer.describe()} after {self.describe()}")

    def describe(self):
        if self.kind in ("identity", "heat"):
            return self.kind
        return f"{self.kind}({self.p})"


# --------------------------------------------------------------------------
# densities
# --------------------------------------------------------------------------


class SpectralDensity:
    """Nondecreasing right-continuous ``N`` on ``[0, inf)``.

    ``x``/``y`` form the table; in ``"step"`` mode ``y[i]`` holds on
    ``[x[i], x[i+1])``, in ``"linear"`` mode values are interpolated and a
    repeated abscissa encodes a jump (the last repeated value wins).
    ``head`` describes ``N - limit_at_zero`` on ``(0, lambda0]`` with
    ``lambda0 = x[0]``.  ``tail`` gives ``N`` itself beyond ``x[-1]``.
    """

    def __init__(self, x, y, interp="step", head=None, atom_at_zero=None, limit_at_zero=None,
                 tail=None, total=None, label="", approximate=False):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if x.shape != y.shape or x.ndim != 1 or len(x) == 0:
            raise ValueError("table columns must be nonempty and of equal length")
        if np.any(np.diff(x) < 0) or x[0] < 0:
            raise ValueError("lambda column must be sorted and nonnegative")
        if np.any(np.diff(y) < -1e-15):
            raise ValueError("N must be nondecreasing")
        if interp not in ("step", "linear"):
            raise ValueError("interp is 'step' or 'linear'")
        if atom_at_zero is None:
            atom_at_zero = y[_last_at(x, 0.0)] if x[0] == 0 else 0.0
        if atom_at_zero < 0:
            raise ValueError("negative atom")
        self.x, self.y, self.interp = x, y, interp
        self.head = head
        self.atom_at_zero = float(atom_at_zero)
        if limit_at_zero is None:
            limit_at_zero = y[_last_at(x, 0.0)] if x[0] == 0 else self.atom_at_zero
        self.limit_at_zero = float(limit_at_zero)
        if self.limit_at_zero < self.atom_at_zero - 1e-15:
            raise ValueError("N(0+) cannot be below the kernel mass")
        self.tail = tail
        self.total = float(total) if total is not None else (np.inf if tail is not None else float(y[-1]))
        self.label = label
        self.approximate = approximate
        if head is not None:
            if x[0] <= 0:
                raise ValueError("a head needs the table to start at lambda0 > 0")
            expect = self.limit_at_zero + float(head(x[0]))
            if abs(expect - y[_first_at(x, x[0])]) > AGREE_TOL * max(1.0, abs(expect)):
                raise ValueError("head and table disagree at lambda0")

    # construction ---------------------------------------------------------

    @classmethod
    def from_head(cls, c, a, b=0, lambda0=1.0, atom_at_zero=0.0, limit_at_zero=None, label=""):
        """``N = limit + c lam^a |log lam|^b`` on ``(0, lambda0]``, constant afterwards."""
        limit = atom_at_zero if limit_at_zero is None else limit_at_zero
        head = PowerLog(float(c), a, b)
        if b != 0 and lambda0 >= 1:
            raise ValueError("a log-corrected head must stop below 1")
        top = limit + float(head(lambda0))
        return cls([lambda0], [top], head=head, atom_at_zero=atom_at_zero, limit_at_zero=limit, label=label)

    def dilated(self, sigma):
        """The density ``lam -> N(sigma * lam)``."""
        if sigma <= 0:
            raise ValueError("dilation must be positive")
        tail = self.tail.dilated(sigma) if self.tail is not None else None
        head = self.head.dilated(sigma) if self.head is not None else None
        out = SpectralDensity(self.x / sigma, self.y, interp=self.interp, head=head,
                              atom_at_zero=self.atom_at_zero, limit_at_zero=self.limit_at_zero,
                              tail=tail, total=self.total, label=f"{self.label}({sigma:g}*)",
                              approximate=self.approximate)
        return out

    @property
    def lambda0(self):
        return float(self.x[0]) if self.head is not None else None

    @property
    def b(self):
        return self.limit_at_zero

    @property
    def tordim(self):
        return self.limit_at_zero - self.atom_at_zero

    @property
    def is_pure_step(self):
        return self.head is None and self.tail is None and self.interp == "step"

    # evaluation -----------------------------------------------------------

    def _below_table(self, lam):
        if self.head is not None:
            return self.limit_at_zero + self.head(lam)
        return np.full_like(lam, self.limit_at_zero)

    def _above_table(self, lam):
        if self.tail is not None:
            return self.tail(lam)
        return np.full_like(lam, self.y[-1])

    def _table(self, lam, right=True):
        x, y = self.x, self.y
        if self.interp == "step":
            if right:
                idx = np.searchsorted(x, lam, side="right") - 1
            else:
                idx = np.searchsorted(x, lam, side="left") - 1
            return y[np.clip(idx, 0, len(x) - 1)]
        out = np.empty_like(lam)
        idx_r = np.searchsorted(x, lam, side="right") - 1
        idx_l = np.searchsorted(x, lam, side="left")
        for k, t in enumerate(lam):
            if not right and idx_l[k] < len(x) and x[idx_l[k]] == t:
                out[k] = y[idx_l[k]]
                continue
            i = idx_r[k]
            if i >= len(x) - 1:
                out[k] = y[-1]
            else:
                out[k] = y[i] + (t - x[i]) / (x[i + 1] - x[i]) * (y[i + 1] - y[i])
        return out

    def _eval(self, lam, right):
        scalar = np.ndim(lam) == 0
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        out = np.zeros_like(lam)
        x0, x1 = self.x[0], self.x[-1]
        zero = lam == 0
        below = (lam > 0) & (lam < x0)
        inside = (lam >= x0) & (lam <= x1) & ~zero
        above = lam > x1
        if right:
            out[zero] = self.atom_at_zero
        elif x0 == 0:
            pass
        if np.any(below):
            out[below] = self._below_table(lam[below])
        if np.any(inside):
            vals = self._table(lam[inside], right)
            if not right:
                # left limit at lambda0 comes from the head side
                at_x0 = lam[inside] == x0
                if np.any(at_x0) and x0 > 0:
                    vals[at_x0] = self._below_table(lam[inside][at_x0])
            out[inside] = vals
        if np.any(above):
            out[above] = self._above_table(lam[above])
        return out[0] if scalar else out

    def __call__(self, lam):
        return self._eval(lam, right=True)

    def left_limit(self, lam):
        """``N(lam-)``."""
        return self._eval(lam, right=False)

    def n0(self, lam):
        """``N - N(0+)``."""
        return self(lam) - self.limit_at_zero

    def mass_above(self, y):
        """``tau(e_(y, inf))``."""
        return self.total - self(y)

    def jump_points(self):
        if self.interp == "step":
            return self.x
        dup = np.flatnonzero(np.diff(self.x) == 0)
        return np.unique(self.x[dup])

    def head_dict(self):
        d = {"atom_at_zero": self.atom_at_zero, "limit_at_zero": self.limit_at_zero, "total": self.total,
             "interp": self.interp, "label": self.label}
        if self.head is not None:
            d.update(c=self.head.c, a=_num(self.head.a), b=_num(self.head.b), lambda0=self.lambda0)
        return d


def _first_at(x, v):
    return int(np.searchsorted(x, v, side="left"))


def _last_at(x, v):
    return int(np.searchsorted(x, v, side="right")) - 1


def _num(v):
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else float(v)
    return float(v)


class PushforwardDensity:
    """Density of ``f(x)`` for a monotone transform ``f`` (kept lazily)."""

    def __init__(self, base, transform, sdd=None):
        if isinstance(base, PushforwardDensity):
            transform = base.transform.then(transform)
            base = base.base
        self.base = base
        self.transform = transform
        self.sdd = sdd
        self.total = base.total
        T = transform
        self._mass_at_one = 0.0
        if T.kind == "falpha":
            self._mass_at_one = float(base(1.0) - base.left_limit(1.0))
        if T.kind in ("identity", "power") or T.kind == "falpha":
            self.atom_at_zero = base.atom_at_zero + self._mass_at_one
        else:
            self.atom_at_zero = 0.0
        if T.kind in ("identity", "falpha") or (T.kind == "power" and T.p > 0):
            self.limit_at_zero = self.atom_at_zero + base.tordim
        elif T.kind == "power":
            self.limit_at_zero = self.atom_at_zero
        else:
            self.limit_at_zero = 0.0
        self.head = None
        self.lambda0 = None
        if base.head is not None and T.kind == "power" and T.p > 0:
            self.head = base.head.substituted_power(T.p)
            self.lambda0 = float(base.lambda0) ** float(T.p)
        self.label = f"{T.describe()}({base.label})"
        self.approximate = base.approximate

    @property
    def b(self):
        return self.limit_at_zero

    @property
    def tordim(self):
        return self.limit_at_zero - self.atom_at_zero

    def _eval(self, y, right):
        scalar = np.ndim(y) == 0
        y = np.atleast_1d(np.asarray(y, dtype=float))
        T, base = self.transform, self.base
        out = np.zeros_like(y)
        pos = y > 0
        out[y == 0] = self.atom_at_zero if right else 0.0
        yp = y[pos]
        with np.errstate(divide="ignore", over="ignore"):
            if T.increasing:
                s = T.inverse(yp)
                if T.kind == "falpha":
                    s = np.minimum(s, np.nextafter(1.0, 0.0))
                vals = base(s) if right else base.left_limit(s)
                if T.kind == "falpha":
                    vals = vals + self._mass_at_one
            elif T.kind == "power":
                s = T.inverse(yp)
                # {s^p <= y} = {0} u [y^(1/p), inf)
                vals = base.atom_at_zero + self.total - (base.left_limit(s) if right else base(s))
            else:
                s = T.inverse(yp)
                s = np.where(yp >= 1, 0.0, s)
                vals = self.total - (base.left_limit(s) if right else base(s))
                vals = np.where(yp >= 1, self.total, vals) if right else vals
        out[pos] = vals
        return out[0] if scalar else out

    def __call__(self, y):
        return self._eval(y, True)

    def left_limit(self, y):
        return self._eval(y, False)

    def n0(self, y):
        return self(y) - self.limit_at_zero

    def mass_above(self, y):
        """``nu{f(s) > y}`` computed without subtracting from an infinite total."""
        T, base = self.transform, self.base
        y = np.asarray(y, dtype=float)
        if T.kind == "power" and T.p < 0:
            return base.left_limit(T.inverse(y)) - base.atom_at_zero
        if T.kind == "heat":
            return np.where(y >= 1, 0.0, base.left_limit(np.where(y > 0, T.inverse(np.where(y > 0, y, 1.0)), np.inf)))
        return self.total - self(y)

    @property
    def is_pure_step(self):
        return self.base.is_pure_step

    def jump_points(self):
        return self.transform(self.base.jump_points())


# --------------------------------------------------------------------------
# distribution functions and rearrangements
# --------------------------------------------------------------------------


class Decreasing:
    """Nonincreasing right-continuous function on ``[0, inf)``.

    Used for distribution functions ``lambda_T`` and rearrangements
    ``mu_T``.  ``head_zero`` (valid on ``(0, t_zero]``) and ``head_inf``
    (valid on ``[t_inf, inf)``) are exact symbolic ends; ``steps`` is an
    exact step table ``(knots, values)`` with ``values[i]`` on
    ``[knots[i], knots[i+1])`` and ``ceiling`` on ``[0, knots[0])``.
    """

    def __init__(self, fn=None, head_zero=None, t_zero=None, head_inf=None, t_inf=None,
                 floor=0.0, ceiling=None, steps=None, label="", exact_heads=True):
        self.fn = fn
        self.head_zero, self.t_zero = head_zero, t_zero
        self.head_inf, self.t_inf = head_inf, t_inf
        self.floor = float(floor)
        self.ceiling = ceiling
        self.steps = steps
        self.label = label
        self.exact_heads = exact_heads

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t)
        done = np.zeros(t.shape, dtype=bool)
        if self.steps is not None:
            knots, values = self.steps
            idx = np.searchsorted(knots, t, side="right") - 1
            ceil = self.ceiling if self.ceiling is not None else (values[0] if len(values) else 0.0)
            if len(values) == 0:
                out = np.full(t.shape, float(ceil))
            else:
                out = np.where(idx < 0, ceil, values[np.clip(idx, 0, len(values) - 1)])
            return out[0] if scalar else out
        if self.head_zero is not None:
            m = (t > 0) & (t <= self.t_zero)
            out[m] = self.head_zero(t[m])
            done |= m
        if self.head_inf is not None:
            m = (t >= self.t_inf) & ~done
            out[m] = self.head_inf(t[m])
            done |= m
        rest = ~done
        if np.any(rest):
            out[rest] = self.fn(t[rest])
        return out[0] if scalar else out

    def mp(self, s):
        """Value at an mpmath point (heads are evaluated without underflow)."""
        s = mpmath.mpf(s)
        if self.steps is None:
            if self.head_zero is not None and 0 < s <= self.t_zero:
                return self.head_zero.mp(s)
            if self.head_inf is not None and s >= self.t_inf:
                return self.head_inf.mp(s)
        return mpmath.mpf(float(self(float(s))))

    def scaled(self, k):
        """Rearrangement of ``k A`` for ``k > 0``."""
        if k <= 0:
            raise ValueError("scale must be positive")
        fn = self.fn
        return Decreasing(
            (lambda t: k * np.asarray(fn(t), dtype=float)) if fn is not None else None,
            head_zero=self.head_zero.scaled(k) if self.head_zero is not None else None,
            t_zero=self.t_zero,
            head_inf=self.head_inf.scaled(k) if self.head_inf is not None else None,
            t_inf=self.t_inf,
            floor=self.floor * k,
            ceiling=None if self.ceiling is None else self.ceiling * k,
            steps=None if self.steps is None else (self.steps[0], self.steps[1] * k),
            label=f"{k:g}*{self.label}",
            exact_heads=self.exact_heads,
        )

    def integral(self, a, b):
        """``integral_a^b`` of the function (mpmath number, possibly inf)."""
        if b <= a:
            return mpmath.mpf(0)
        total = mpmath.mpf(0)
        if self.steps is not None:
            return mpmath.mpf(_step_integral(self.steps, self.ceiling, float(a), float(b)))
        if self.head_zero is not None and a < self.t_zero:
            top = min(b, self.t_zero)
            total += self.head_zero.integral(a, top, "zero")
            a = top
        if self.head_inf is not None and b > self.t_inf:
            bottom = max(a, self.t_inf)
            total += self.head_inf.integral(bottom, b, "infinity")
            b = bottom
        if b > a:
            if b == np.inf or b == mpmath.inf:
                raise ValueError("an unbounded range needs a head at infinity")
            val, _ = integrate.quad(lambda s: float(self(s)), float(a), float(b), limit=400,
                                    epsabs=1e-13, epsrel=1e-12)
            total += val
        return total


def _step_integral(steps, ceiling, a, b):
    knots, values = steps
    pts = np.concatenate([[a], knots[(knots > a) & (knots < b)], [b]])
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        idx = np.searchsorted(knots, lo, side="right") - 1
        v = ceiling if idx < 0 else values[idx]
        if v == np.inf:
            return np.inf
        total += (hi - lo) * v
    return total


def _step_table(fn, points, zero_value):
    knots = np.unique(np.asarray(points, dtype=float))
    knots = knots[knots > 0]
    values = np.asarray(fn(knots), dtype=float)
    return knots, values, zero_value


def distribution_from_density(N, transform=None):
    """``lambda_T(t) = tau(e_(t, inf)(T))`` for ``T = transform(x)``."""
    transform = transform or Transform.identity()
    dens = N if transform.kind == "identity" and not isinstance(N, PushforwardDensity) else PushforwardDensity(N, transform)
    if isinstance(dens, PushforwardDensity):
        base, T = dens.base, dens.transform
    else:
        base, T = N, transform
    fn = lambda t: np.asarray(dens.mass_above(t), dtype=float)
    zero_value = float(fn(np.array([0.0]))[0])
    if dens.is_pure_step:
        knots, values, ceil = _step_table(fn, dens.jump_points(), zero_value)
        return Decreasing(fn, steps=(knots, values), ceiling=ceil,
                          floor=float(values[-1]) if len(values) else ceil, label=f"lambda[{T.describe()}]")
    head_inf = t_inf = None
    floor = 0.0
    if T.kind == "power" and T.p < 0:
        floor = base.tordim
        if base.head is not None:
            head_inf = base.head.substituted_power(T.p)
            head_inf = PowerLog(head_inf.c, head_inf.a, head_inf.b, head_inf.kappa, shift=floor)
            t_inf = float(base.lambda0) ** float(T.p)
    elif T.kind == "heat":
        floor = 0.0
    return Decreasing(fn, head_inf=head_inf, t_inf=t_inf, floor=floor, ceiling=zero_value,
                      label=f"lambda[{T.describe()}]")


def generalized_inverse(lam, s):
    """``inf{t >= 0 : lam(t) <= s}`` for a nonincreasing right-continuous ``lam`` (vectorized bisection)."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.zeros_like(s)
    at0 = float(np.atleast_1d(lam(np.array([0.0])))[0])
    todo = s < at0
    if not np.any(todo):
        return out
    st = s[todo]
    hi = np.ones_like(st)
    for _ in range(2100):
        bad = lam(hi) > st
        if not np.any(bad):
            break
        hi = np.where(bad, hi * 2.0, hi)
        if np.all(hi[bad] > 1e300):
            break
    never = lam(hi) > st
    lo = np.zeros_like(st)
    for _ in range(2200):
        mid = np.where(lo > 0, np.sqrt(lo * hi), hi / 2)
        ok = lam(mid) <= st
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
        if np.all((hi - lo) <= 4e-16 * hi):
            break
    res = np.where(never, np.inf, hi)
    out[todo] = res
    return out


def rearrangement(lam):
    """``mu(s) = inf{t >= 0 : lam(t) <= s}`` as a :class:`Decreasing`."""
    if lam.steps is not None:
        knots, values = lam.steps
        ceil = lam.ceiling if lam.ceiling is not None else (values[0] if len(values) else 0.0)
        levels = np.unique(np.concatenate([values, [ceil]]))
        levels = levels[np.isfinite(levels)]

        def mu_at(sv):
            if ceil <= sv:
                return 0.0
            hit = np.flatnonzero(values <= sv)
            return float(knots[hit[0]]) if len(hit) else np.inf

        mu_vals = np.array([mu_at(v) for v in levels])
        s_knots = levels
        below = mu_at(-1.0) if len(levels) == 0 or levels[0] > 0 else None
        steps_ceiling = np.inf if (len(levels) and levels[0] > 0) else (mu_vals[0] if len(mu_vals) else 0.0)
        if len(levels) and levels[0] == 0:
            return Decreasing(lambda s: generalized_inverse(lam, s), steps=(s_knots, mu_vals),
                              ceiling=mu_vals[0], floor=0.0, label=f"mu({lam.label})")
        del below
        return Decreasing(lambda s: generalized_inverse(lam, s), steps=(s_knots, mu_vals),
                          ceiling=steps_ceiling, floor=0.0, label=f"mu({lam.label})")
    head_zero = t_zero = head_inf = t_inf = None
    exact = True
    if lam.head_inf is not None and lam.floor == 0:
        core = PowerLog(lam.head_inf.c, lam.head_inf.a, lam.head_inf.b, lam.head_inf.kappa)
        head_zero = core.inverse()
        t_zero = float(lam(np.array([lam.t_inf]))[0])
        exact = core.b == 0
    if lam.head_zero is not None and lam.head_zero.shift == 0:
        core = lam.head_zero
        head_inf = core.inverse()
        t_inf = float(lam(np.array([lam.t_zero]))[0])
        exact = exact and core.b == 0
    return Decreasing(lambda s: generalized_inverse(lam, s), head_zero=head_zero, t_zero=t_zero,
                      head_inf=head_inf, t_inf=t_inf, label=f"mu({lam.label})", exact_heads=exact)


def rearrangement_from_head(c, a, b=0, kappa=0.0, s0=0.5, label=""):
    """A rearrangement given directly by ``mu(s) = c s^a |kappa + log s|^b`` on ``(0, s0]`` (0 afterwards)."""
    head = PowerLog(float(c), a, b, kappa)
    return Decreasing(lambda s: np.zeros_like(np.asarray(s, dtype=float)), head_zero=head, t_zero=s0,
                      label=label or f"{c} s^{a} |log s|^{b}")


def rearrangement_at_infinity(c, a, b=0, kappa=0.0, s0=2.0, label=""):
    """A rearrangement with ``mu(s) = c s^a |kappa + log s|^b`` on ``[s0, inf)``."""
    head = PowerLog(float(c), a, b, kappa)
    top = float(head(s0))
    return Decreasing(lambda s: np.full_like(np.asarray(s, dtype=float), top), head_inf=head, t_inf=s0,
                      label=label or f"{c} s^{a} |log s|^{b} at infinity")


# --------------------------------------------------------------------------
# Laplace transform of a density
# --------------------------------------------------------------------------


def laplace_theta(N, t):
    """``theta(t) = integral e^(-t lam) dN(lam)``; ``+inf`` when it diverges."""
    if t <= 0:
        raise ValueError("t must be positive")
    if isinstance(N, PushforwardDensity):
        return _theta_pushforward(N, t)
    total = 0.0
    x, y = N.x, N.y
    if x[0] > 0:
        total += N.limit_at_zero
        prev = N.limit_at_zero + (float(N.head(x[0])) if N.head is not None else 0.0)
        if N.head is not None:
            total += _theta_head(N.head, x[0], t)
    else:
        prev = 0.0
    # table part: exact sums of jumps, closed form on linear pieces
    e = np.exp(-t * x)
    jumps = np.empty_like(y)
    jumps[0] = y[0] - prev
    if N.interp == "step":
        jumps[1:] = np.diff(y)
        total += float(np.dot(jumps, e))
    else:
        dx = np.diff(x)
        dy = np.diff(y)
        is_jump = dx == 0
        total += jumps[0] * e[0]
        total += float(np.dot(dy[is_jump], e[1:][is_jump]))
        lin = ~is_jump
        slope = dy[lin] / dx[lin]
        total += float(np.dot(slope, (e[:-1][lin] - e[1:][lin]))) / t
    if N.tail is not None:
        x1 = float(x[-1])
        tail_val = float(N.tail(x1))
        total += (tail_val - y[-1]) * np.exp(-t * x1)
        f = lambda lam: mpmath.exp(-t * lam) * N.tail.mp(lam)
        with mpmath.workdps(30):
            integral = mpmath.quad(f, [x1, x1 + 1, mpmath.inf])
        val = -np.exp(-t * x1) * tail_val + t * float(integral)
        total += val
    return total


def _theta_head(head, lam0, t):
    # integral over (0, lam0] of e^(-t lam) dH with H = head, H(0+) = 0
    a = float(head.a)
    if head.b == 0 and head.kappa == 0:
        with mpmath.workdps(30):
            return float(head.c * a * mpmath.mpf(t) ** (-a) * mpmath.gammainc(a, 0, t * lam0))
    with mpmath.workdps(30):
        integral = mpmath.quad(lambda lam: mpmath.exp(-t * lam) * head.mp(lam), [0, lam0])
        return float(mpmath.exp(-t * lam0) * head.mp(lam0) + t * integral)


def _theta_pushforward(N, t):
    base, T = N.base, N.transform
    if base.is_pure_step:
        jumps = np.diff(np.concatenate([[0.0], base.y]))
        vals = T(base.x)
        if T.kind == "falpha":
            pass
        return float(np.dot(jumps, np.exp(-t * vals)))
    # integration by parts: theta = t * integral_0^inf e^(-t y) N_T(y) dy
    f = lambda yv: float(np.exp(-t * yv) * N(yv))
    val, _ = integrate.quad(f, 0, np.inf, limit=400, epsabs=1e-12, epsrel=1e-12)
    return t * val


# --------------------------------------------------------------------------
# functional calculus
# --------------------------------------------------------------------------


class _SpectralMeasure:
    """The spectral measure of a density, exposed with the interval-measure protocol."""

    def __init__(self, N, hi):
        self.N = N
        self.lo = 0.0
        self.hi = float(hi)
        self.lebesgue_weight = 0.0
        self.atom_points = np.array([0.0]) if N.atom_at_zero > 0 else np.array([])

    def interval_measure(self, a, b, a_closed=True, b_closed=True):
        if b < a:
            return 0.0
        upper = self.N(b) if b_closed else self.N.left_limit(b)
        lower = self.N.left_limit(a) if a_closed else self.N(a)
        return float(upper - lower)

    def point_mass(self, p, tol=0.0):
        return float(self.N(p) - self.N.left_limit(p)) if p > 0 else self.N.atom_at_zero

    def measure_points(self, points):
        return sum(self.point_mass(p) for p in points)

    def measure(self, rmset):
        return sum(self.interval_measure(iv.a, iv.b, iv.a_closed, iv.b_closed) for iv in rmset.intervals)


def spectral_sdd(N, transform, n_sets=16, top=None):
    """Truncations on which ``transform`` stays bounded, with vanishing complement mass.

    A transform blowing up at ``0+`` needs ``N(r-) - N(0) -> 0``: a positive
    torsion dimension leaves mass arbitrarily close to 0 and no truncation works.
    """
    top = float(N.x[-1]) if top is None else top
    space = _SpectralMeasure(N, top)
    sets, comps, bounds = [], [], []
    if transform.singular_at_zero:
        if N.tordim > 0:
            raise NoSDDError(f"torsion dimension {N.tordim:g} > 0: mass accumulates at 0+")
        for n in range(1, n_sets + 1):
            target = 1.0 / n
            lo, hi = 0.0, top
            if space.interval_measure(0, top, False, True) <= target:
                r = top
            else:
                for _ in range(200):
                    mid = 0.5 * (lo + hi)
                    if space.interval_measure(0, mid, False, False) <= target:
                        lo = mid
                    else:
                        hi = mid
                r = lo
                if r <= 0:
                    raise NoSDDError("no truncation has small enough complement")
            pieces = [Interval(0.0, 0.0)] + ([Interval(r, top)] if r < top else [])
            G = RMSet.from_pieces(pieces, space)
            sets.append(G)
            comps.append(space.interval_measure(0, r, False, False))
            bounds.append(float(transform(np.array([r]))[0]) if r < top else 0.0)
        return SddSequence(sets, comps, bounds)
    whole = RMSet((Interval(0.0, top),), space)
    vals = transform(np.array([0.0, top]))
    return SddSequence([whole], [0.0], [float(np.max(np.abs(vals)))])


def functional_calculus(N, f, sdd=None):
    """Density of ``f(x)``; unbounded ``f`` is admitted only through a strongly dense domain."""
    if isinstance(f, str):
        f = {"identity": Transform.identity(), "heat": Transform.heat()}[f]
    base = N.base if isinstance(N, PushforwardDensity) else N
    full = N.transform.then(f) if isinstance(N, PushforwardDensity) else f
    if full.singular_at_zero and sdd is None:
        sdd = spectral_sdd(base, full)
    return PushforwardDensity(N, f, sdd=sdd)


# --------------------------------------------------------------------------
# limits of monotone sequences
# --------------------------------------------------------------------------


@dataclass
class LimitReport:
    values: list
    status: str
    limit: Optional[float] = None
    ratio: Optional[float] = None
    notes: list = field(default_factory=list)


def detect_limit(values, tol=1e-9, window=4):
    """Classify a sequence as converged, divergent, oscillating or unresolved.

    Geometric tails are extrapolated with Aitken's delta-squared; tails whose
    increments keep the same size are reported as divergent.
    """
    v = np.asarray(values, dtype=float)
    if len(v) < window + 2:
        return LimitReport(list(v), "unresolved", notes=["too few terms"])
    if np.any(np.isinf(v)):
        return LimitReport(list(v), "divergent", limit=float(v[np.isinf(v)][0]))
    d = np.diff(v)
    tail = d[-window:]
    scale = max(1.0, abs(v[-1]))
    if np.all(np.abs(tail) <= tol * scale):
        return LimitReport(list(v), "converged", limit=float(v[-1]))
    signs = np.sign(tail)
    if np.all(signs[1:] * signs[:-1] < 0):
        ratios = np.abs(tail[1:] / tail[:-1])
        if np.all(ratios < 0.95):
            r = -float(np.mean(ratios))
            return LimitReport(list(v), "converged", float(v[-1] + d[-1] * r / (1 - r)), r)
        return LimitReport(list(v), "oscillating", notes=["alternating increments do not decay"])
    if np.all(signs == signs[0]):
        ratios = tail[1:] / tail[:-1]
        r = float(ratios[-1])
        if np.all(ratios < 0.95) and np.all(ratios > 0):
            lim = float(v[-1] + d[-1] * r / (1 - r))
            return LimitReport(list(v), "converged", lim, r)
        if np.all(ratios >= 0.99):
            return LimitReport(list(v), "divergent", limit=float(np.inf * signs[0]), ratio=r)
    return LimitReport(list(v), "unresolved", notes=["irregular increments"])


def trace_via_exhaustion(f, X, levels=None, tol=1e-9):
    """``tau(e_n A e_n)`` for multiplication by ``f`` along SDD truncations ``G_n``.

    ``levels`` lists the ``n`` used (dyadic by default) and the limit is
    detected with :func:`detect_limit`.
    """
    levels = [2 ** k for k in range(0, 61)] if levels is None else list(levels)
    sdd = build_sdd(f, X, ns=levels) if isinstance(f, SymbolicFn) else None
    values = []
    for i, n in enumerate(levels):
        G = sdd.sets[i] if sdd is not None else RMSet.whole(X)
        values.append(_integrate_over(f, X, G))
    rep = detect_limit(values, tol)
    rep.notes.append(f"levels {levels[0]}..{levels[-1]}")
    return rep


def _integrate_over(f, X, G):
    total = 0.0
    for iv in G.intervals:
        a, b = float(iv.a), float(iv.b)
        if b <= a:
            continue
        if X.lebesgue_weight:
            if isinstance(f, SymbolicFn):
                pts = [a]
                if a > 0:
                    # geometric splitting resolves integrands that vary on a log scale
                    k = int(np.ceil(np.log2(b / a)))
                    pts = list(a * 2.0 ** np.arange(0, k)) if k > 0 else [a]
                pts = [p for p in pts if p < b] + [b]
                for lo, hi in zip(pts[:-1], pts[1:]):
                    val, _ = integrate.quad(lambda t: float(f(t)), lo, hi, limit=200, epsabs=1e-14, epsrel=1e-13)
                    total += val
            else:
                total += float(f.integral())
        for p, m in X.atoms:
            if iv.contains(p):
                total += m * float(f(p))
    return total

"""Power-log profiles ``shift + c * x**a * |kappa + log x|**b`` and their integrals.

These are the symbolic heads used throughout the package: spectral densities
near 0, distribution tails near infinity and rearrangements near 0.  All
integrals are evaluated in closed form with mpmath so that ratios can be taken
at scales such as ``t = 2**-(2**40)`` without underflow.
"""
from dataclasses import dataclass, replace

import mpmath
import numpy as np

MP_DPS = 40


@dataclass(frozen=True)
class PowerLog:
    """The profile ``x -> shift + c * x**a * |kappa + log x|**b``.

    The log factor is only meaningful on one side of ``x* = exp(-kappa)``;
    a head near 0 lives on ``(0, x*)`` and a head near infinity on
    ``(x*, inf)``.  With ``kappa = 0`` and ``b = 0`` this is a plain power.
    """

    c: float
    a: float
    b: float = 0.0
    kappa: float = 0.0
    shift: float = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            core = self.c * x ** float(self.a)
            if self.b != 0:
                core = core * np.abs(self.kappa + np.log(x)) ** float(self.b)
        return self.shift + core

    def mp(self, x):
        """Evaluate in mpmath (x may be far outside the float range)."""
        x = mpmath.mpf(x)
        core = mpmath.mpf(self.c) * x ** float(self.a)
        if self.b != 0:
            core *= abs(self.kappa + mpmath.log(x)) ** float(self.b)
        return self.shift + core

    def log_core(self, log_x):
        """``log(c x^a |kappa + log x|^b)`` from ``log x``; ignores ``shift``."""
        out = np.log(self.c) + float(self.a) * np.asarray(log_x, dtype=float)
        if self.b != 0:
            out = out + float(self.b) * np.log(np.abs(self.kappa + np.asarray(log_x, dtype=float)))
        return out

    @property
    def pivot(self):
        """Point where the log factor vanishes."""
        return float(np.exp(-self.kappa))

    def dilated(self, sigma):
        """Profile of ``x -> self(sigma * x)``."""
        sigma = float(sigma)
        return replace(self, c=self.c * sigma ** float(self.a), kappa=self.kappa + float(np.log(sigma)))

    def substituted_power(self, p):
        """Profile of ``y -> self(y ** (1/p))``.

        Exponents stay exact when ``a`` and ``p`` are Fractions.
        """
        return replace(
            self,
            c=self.c * abs(1.0 / float(p)) ** float(self.b),
            a=self.a / p,
            kappa=self.kappa * float(p),
        )

    def inverse(self):
        """Profile of the inverse function at the same end.

        Exact for pure powers; with a log factor the result is the leading
        asymptotic inverse (the ratio of the two tends to 1).
        """
        if self.shift:
            raise ValueError("invert the shift-free part")
        a = float(self.a)
        if a == 0:
            raise ValueError("a flat profile has no inverse")
        inv_a = 1 / self.a
        if self.b == 0:
            return PowerLog(self.c ** (-1 / a), inv_a)
        b = float(self.b)
        return PowerLog(
            self.c ** (-1 / a) * abs(a) ** (b / a),
            inv_a,
            -self.b / self.a,
            kappa=a * self.kappa - float(np.log(self.c)),
        )

    def scaled(self, k):
        return replace(self, c=self.c * k, shift=self.shift * k)

    def integral(self, lo, hi, side):
        """Exact ``integral_lo^hi self(x) dx`` on one side of the pivot.

        ``side`` is ``"zero"`` when ``[lo, hi]`` lies below the pivot and
        ``"infinity"`` when it lies above.  Returns an mpmath number, possibly
        ``mpmath.inf``.
        """
        with mpmath.workdps(MP_DPS):
            lo = mpmath.mpf(lo)
            hi = mpmath.mpf(hi) if hi != np.inf else mpmath.inf
            if hi <= lo:
                return mpmath.mpf(0)
            extra = self.shift * (hi - lo) if self.shift else mpmath.mpf(0)
            if self.c == 0:
                return extra
            k = float(self.a) + 1.0
            pref = mpmath.mpf(self.c) * mpmath.exp(-k * mpmath.mpf(self.kappa))
            if side == "zero":
                u_hi = -(self.kappa + mpmath.log(hi))
                u_lo = mpmath.inf if lo == 0 else -(self.kappa + mpmath.log(lo))
                core = pref * exp_power_integral(-k, float(self.b), u_hi, u_lo)
            elif side == "infinity":
                u_lo = self.kappa + mpmath.log(lo)
                u_hi = mpmath.inf if hi == mpmath.inf else self.kappa + mpmath.log(hi)
                core = pref * exp_power_integral(k, float(self.b), u_lo, u_hi)
            else:
                raise ValueError(f"unknown side {side!r}")
            return core + extra


def exp_power_integral(k, b, u0, u1):
    """``integral_{u0}^{u1} exp(k u) u**b du`` for ``0 <= u0 < u1 <= inf``."""
    k = mpmath.mpf(k)
    b = mpmath.mpf(b)
    u0 = mpmath.mpf(u0)
    u1 = mpmath.mpf(u1) if u1 != mpmath.inf else mpmath.inf
    if u1 <= u0:
        return mpmath.mpf(0)
    if k == 0:
        if b == -1:
            if u0 == 0 or u1 == mpmath.inf:
                return mpmath.inf
            return mpmath.log(u1 / u0)
        e = b + 1
        if u1 == mpmath.inf and e >= 0:
            return mpmath.inf
        if u0 == 0 and e <= 0:
            return mpmath.inf
        top = mpmath.mpf(0) if u1 == mpmath.inf else u1 ** e
        bottom = mpmath.mpf(0) if u0 == 0 else u0 ** e
        return (top - bottom) / e
    if k < 0:
        m = -k
        if u0 == 0 and b <= -1:
            return mpmath.inf
        return m ** (-b - 1) * mpmath.gammainc(b + 1, m * u0, m * u1)
    # k > 0
    if u1 == mpmath.inf:
        return mpmath.inf
    if u0 == 0 and b <= -1:
        return mpmath.inf
    return k ** (-b - 1) * (_exp_pow_antiderivative(b, k * u1) - _exp_pow_antiderivative(b, k * u0))


def _exp_pow_antiderivative(b, v):
    # antiderivative of e^v v^b on v > 0
    if v == 0:
        return mpmath.mpf(0)
    if b == int(b) and b <= -1:
        n = int(-b)
        if n == 1:
            return mpmath.ei(v)
        return -mpmath.exp(v) * v ** (1 - n) / (n - 1) + _exp_pow_antiderivative(b + 1, v) / (n - 1)
    return v ** (b + 1) / (b + 1) * mpmath.hyp1f1(b + 1, b + 2, v)

"""Lattice Laplacian models and Novikov-Shubin type invariants.

The torus ``Z_N^d`` has Laplacian eigenvalues ``sum_i 4 sin^2(pi k_i / N)``;
its integrated density of states is an exact step table.  Exponents are read
off symbolic heads exactly, or fitted on tables with diagnostics.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import BudgetError, NotEccentricError
from .singular import EccentricityReport, LimitScheme, classify_eccentric, singular_trace
from .spectral import (
    SpectralDensity,
    Transform,
    detect_limit,
    distribution_from_density,
    laplace_theta,
    rearrangement,
)

MAX_LOG2_SITES = 24
MERGE_TOL = 1e-12
FIT_HI = 0.1


@dataclass(frozen=True)
class LatticeModel:
    d: int
    N: int = 0
    model: str = "torus"
    n_max: int = 64

    def __post_init__(self):
        if self.model not in ("torus", "open_lattice"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.d < 1:
            raise ValueError("dimension must be positive")
        if self.model == "torus" and self.N < 1:
            raise ValueError("torus side must be positive")

    @classmethod
    def from_dict(cls, spec):
        model = spec.get("model", "torus")
        if "d" not in spec:
            raise KeyError("model spec needs 'd'")
        n_max = spec.get("exhaustion", {}).get("n_max", 64)
        if model == "torus" and "N" not in spec:
            raise KeyError("torus spec needs 'N'")
        return cls(int(spec["d"]), int(spec.get("N", 0)), model, int(n_max))


def torus_eigenvalues_1d(N):
    k = np.arange(N)
    # k and N - k give the same eigenvalue; fold so they agree bitwise
    return 4.0 * np.sin(np.pi * np.minimum(k, N - k) / N) ** 2


def torus_eigenvalues(d, N):
    """All ``N**d`` eigenvalues (unsorted) of the torus graph Laplacian."""
    if d * np.log2(max(N, 1)) > MAX_LOG2_SITES + 1e-9:
        raise BudgetError(
            f"{N}^{d} sites exceed the enumeration budget 2^{MAX_LOG2_SITES}; "
            "use a smaller side or sample eigenvalues instead"
        )
    e = torus_eigenvalues_1d(N)
    total = np.zeros(1)
    for _ in range(d):
        total = (total[:, None] + e[None, :]).ravel()
    return total


@dataclass
class HeadFit:
    c: float
    a: float
    window: tuple
    residual: float
    points: int


def lattice_ids(d, N):
    """Exact integrated density of states of the torus as a step table.

    Equal eigenvalues computed along different summation orders are merged
    within ``MERGE_TOL``.  A power head ``c lam^a`` fitted on
    ``[10 lam_1, 0.1]`` is attached as ``.fit`` (diagnostic only).
    """
    if d not in (1, 2, 3):
        raise ValueError("lattice models are provided for d in {1, 2, 3}")
    lam = np.sort(torus_eigenvalues(d, N))
    lam[np.abs(lam) < 1e-13] = 0.0
    gaps = np.diff(lam) > MERGE_TOL * np.maximum(1.0, lam[1:])
    starts = np.concatenate([[0], np.flatnonzero(gaps) + 1])
    x = lam[starts]
    ends = np.concatenate([starts[1:], [len(lam)]])
    y = ends / float(len(lam))
    ids = SpectralDensity(x, y, interp="step", label=f"torus(d={d}, N={N})")
    ids.model = LatticeModel(d, N)
    ids.fit = fit_power_head(ids)
    return ids


def fit_power_head(ids, window=None):
    """Least-squares ``log N0 = log c + a log lam`` over the fit window."""
    b = ids.limit_at_zero
    nz = ids.x[ids.x > 0]
    if len(nz) == 0:
        return None
    windows = [window] if window else [(10 * nz[0], FIT_HI), (2 * nz[0], 5 * FIT_HI)]
    for lo, hi in windows:
        sel = nz[(nz >= lo) & (nz <= hi)]
        if len(sel) >= 3:
            break
    else:
        return None
    mid = 0.5 * (ids(sel) + ids.left_limit(sel)) - b
    X = np.log(sel)
    Y = np.log(mid)
    a, logc = np.polyfit(X, Y, 1)
    resid = float(np.sqrt(np.mean((Y - (a * X + logc)) ** 2)))
    return HeadFit(float(np.exp(logc)), float(a), (float(lo), float(hi)), resid, len(sel))


# --------------------------------------------------------------------------
# exhaustion
# --------------------------------------------------------------------------


@dataclass
class ExhaustionReport:
    t: float
    d: int
    M: int
    ns: list
    values: list
    restricted_values: list
    status: str
    limit: Optional[float]
    folner: list
    notes: list = field(default_factory=list)

    @property
    def restricted_bias(self):
        if self.limit is None:
            return None
        return [abs(v - self.limit) for v in self.restricted_values]


def _torus_diag_1d(t, M):
    return float(np.mean(np.exp(-t * torus_eigenvalues_1d(M))))


def _path_trace_1d(t, m):
    # free (Neumann) path graph on m vertices: eigenvalues 4 sin^2(pi k / (2m))
    k = np.arange(m)
    return float(np.mean(np.exp(-4.0 * t * np.sin(np.pi * k / (2 * m)) ** 2)))


def exhaustion_trace(d, t, ns=None, M=None):
    """Box averages of the diagonal heat kernel over ``K_n = [-n, n]^d``.

    The infinite lattice is replaced by a torus of side ``M >= 8 n_max``.
    ``restricted_values`` compress the Laplacian itself to the box (free
    boundary) and show the boundary bias that the exhaustion removes.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    ns = list(ns) if ns is not None else [2 ** k for k in range(1, 8)]
    M = M or max(4096, 8 * max(ns))
    if M < 8 * max(ns):
        raise ValueError("torus proxy must have side at least 8 n_max")
    diag = _torus_diag_1d(t, M) ** d
    values, restricted, folner = [], [], []
    for n in ns:
        side = 2 * n + 1
        # the ambient kernel is translation invariant, so every site of the box sees the same diagonal
        values.append(diag)
        restricted.append(_path_trace_1d(t, side) ** d)
        folner.append(1 - ((side - 2) / side) ** d)
    rep = detect_limit(values, tol=1e-12, window=min(4, max(1, len(values) - 2)))
    limit = rep.limit if rep.status == "converged" else None
    return ExhaustionReport(float(t), d, M, ns, values, restricted, rep.status, limit, folner,
                            [f"torus proxy side {M}"])


def torus_theta(d, N, t):
    """``(1/N^d) sum_k exp(-t lam(k))`` by factorization over coordinates."""
    return _torus_diag_1d(t, N) ** d


# --------------------------------------------------------------------------
# invariants
# --------------------------------------------------------------------------


def betti_and_tordim(N):
    """``(b, tordim)`` with ``b = N(0+)`` and ``tordim = N(0+) - N(0)``."""
    b = N.limit_at_zero
    return b, b - N.atom_at_zero


@dataclass
class NSReport:
    b_p: float
    tordim: float
    alpha: object
    alpha_lower: object
    alpha_prime: object
    alpha_prime_lower: object
    asymptotic_dimension: object
    mode: str
    fit_window: Optional[tuple] = None
    residuals: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def as_dict(self):
        conv = lambda v: (float(v) if isinstance(v, Fraction) else v)
        return {
            "b_p": self.b_p, "tordim": self.tordim, "alpha": conv(self.alpha),
            "alpha_lower": conv(self.alpha_lower), "alpha_prime": conv(self.alpha_prime),
            "alpha_prime_lower": conv(self.alpha_prime_lower),
            "asymptotic_dimension": conv(self.asymptotic_dimension), "mode": self.mode,
            "fit_window": self.fit_window, "residuals": self.residuals, "notes": self.notes,
        }


def ns_exponents(N):
    """Novikov-Shubin exponents of a density.

    A head ``c lam^a |log lam|^b`` gives every exponent as ``2a`` exactly
    (the log factor does not move a power-scale limit); a table is fitted on
    ``[10 lam_1, 0.1]`` and on the matching heat-time window.
    """
    b, tordim = betti_and_tordim(N)
    if N.head is not None:
        head = N.head
        if head.c == 0:
            inf = float("inf")
            return NSReport(b, tordim, inf, inf, inf, inf, None, "symbolic",
                            notes=["N0 vanishes near 0: spectral gap"])
        alpha = 2 * head.a
        notes = []
        if head.b != 0:
            notes.append(f"log correction |log lam|^{head.b} does not change the exponent")
        dim = asymptotic_dimension_from_density(N).dimension
        return NSReport(b, tordim, alpha, alpha, alpha, alpha, dim, "symbolic", notes=notes)
    fit = fit_power_head(N)
    if fit is None:
        return NSReport(b, tordim, None, None, None, None, None, "empirical", notes=["fit window too short"])
    alpha_n = 2 * fit.a
    lo, hi = fit.window
    ts = np.geomspace(1.0 / hi, 1.0 / lo, 24)
    theta0 = np.array([laplace_theta(N, t) - b for t in ts])
    keep = theta0 > 0
    slope, _ = np.polyfit(np.log(1.0 / ts[keep]), np.log(theta0[keep]), 1)
    alpha_t = 2 * float(slope)
    lower = min(alpha_n, alpha_t)
    upper = max(alpha_n, alpha_t)
    dim = asymptotic_dimension_from_density(N).dimension
    return NSReport(b, tordim, upper, lower, alpha_t, lower, dim, "empirical", fit.window,
                    {"N_fit": fit.residual, "points": fit.points},
                    ["table exponents are fit slopes; limsup and liminf coincide within the fit"])


def ns_richardson(d, N):
    """Exponent from sides ``N`` and ``2N`` extrapolated as ``2 alpha(2N) - alpha(N)``."""
    a1 = 2 * lattice_ids(d, N).fit.a
    a2 = 2 * lattice_ids(d, 2 * N).fit.a
    return 2 * a2 - a1, (a1, a2)


# --------------------------------------------------------------------------
# asymptotic dimension and eccentricity
# --------------------------------------------------------------------------


@dataclass
class DimensionReport:
    dimension: object
    exponent: object
    mode: str
    alpha: object = None
    notes: list = field(default_factory=list)

    @property
    def discrepancy(self):
        if self.alpha is None or self.dimension is None:
            return None
        return abs(self.dimension - self.alpha)


def inverse_sqrt_rearrangement(N):
    """``mu`` of ``Delta^(-1/2)`` from the density of ``Delta``."""
    return rearrangement(distribution_from_density(N, Transform.power(Fraction(-1, 2))))


def asymptotic_dimension(mu, t_window=None):
    """``(liminf_{t->0} log mu(t) / log(1/t))^-1``.

    Exact on a head ``c t^a |log t|^b`` (the value is ``-1/a``); on a table the
    liminf is replaced by the least-squares slope over ``t_window``.
    """
    head = mu.head_zero
    if head is not None:
        if head.a >= 0:
            return DimensionReport(None, head.a, "symbolic", notes=["mu is bounded near 0: no asymptotic regime"])
        return DimensionReport(-1 / head.a if isinstance(head.a, Fraction) else -1.0 / head.a,
                               -head.a, "symbolic")
    if t_window is None:
        raise ValueError("a table rearrangement needs a sampling window")
    ts = np.geomspace(t_window[0], t_window[1], 40)
    vals = np.asarray(mu(ts), dtype=float)
    keep = np.isfinite(vals) & (vals > 0)
    if keep.sum() < 5:
        return DimensionReport(None, None, "empirical", notes=["too few positive samples"])
    slope, _ = np.polyfit(np.log(1.0 / ts[keep]), np.log(vals[keep]), 1)
    if slope <= 0:
        return DimensionReport(None, float(slope), "empirical", notes=["mu does not blow up: no asymptotic regime"])
    return DimensionReport(1.0 / float(slope), float(slope), "empirical")


def asymptotic_dimension_from_density(N):
    """Dimension via ``Delta^(-1/2)``, with ``|dim - alpha|`` recorded."""
    if N.tordim > 0:
        return DimensionReport(None, None, "symbolic" if N.head is not None else "empirical",
                               notes=["positive torsion dimension: mu is infinite near 0"])
    mu = inverse_sqrt_rearrangement(N)
    if N.head is not None:
        rep = asymptotic_dimension(mu)
        rep.alpha = 2 * N.head.a
        return rep
    fit = fit_power_head(N)
    if fit is None:
        return DimensionReport(None, None, "empirical", notes=["fit window too short"])
    lo, hi = fit.window
    b = N.limit_at_zero
    # lam(t) = N0(t^-2), so the spectral window maps to mass levels N0(lo)..N0(hi)
    t_window = (float(N(lo) - b), float(N.left_limit(hi) - b))
    rep = asymptotic_dimension(mu, t_window)
    rep.alpha = 2 * fit.a
    return rep


@dataclass
class EccentricLaplacianReport:
    exponent: object
    log_ratio_liminf: object
    eccentricity: EccentricityReport
    trace_of_T: Optional[float]


def eccentric_laplacian(N, alpha_p, scheme=None):
    """Check that ``Delta^(-alpha_p/2)`` is 0-eccentric and normalizes ``tau_omega``."""
    if not (0 < alpha_p < float("inf")):
        raise ValueError("alpha_p must be finite and nonzero")
    if N.head is None:
        raise ValueError("eccentricity of the Laplacian is decided on a symbolic head")
    p = -Fraction(alpha_p) / 2 if isinstance(alpha_p, (int, Fraction)) else -alpha_p / 2
    mu = rearrangement(distribution_from_density(N, Transform.power(p)))
    exponent = mu.head_zero.a
    liminf = -exponent
    report = classify_eccentric(mu, "zero")
    value = None
    if report.eccentric:
        value = singular_trace(mu, mu, scheme or LimitScheme()).value
    return EccentricLaplacianReport(exponent, liminf, report, value)


def require_eccentric(N, alpha_p):
    rep = eccentric_laplacian(N, alpha_p)
    if not rep.eccentricity.eccentric:
        raise NotEccentricError(f"Delta^(-{alpha_p}/2) is not eccentric at 0")
    return rep


# --------------------------------------------------------------------------
# dilatation equivalence
# --------------------------------------------------------------------------


@dataclass
class EquivalenceReport:
    equivalent: bool
    lam: Optional[float]
    alphas: tuple
    checked: int
    notes: list = field(default_factory=list)


def _log_n0(N):
    """``log N0`` as a function of ``log t`` plus its valid range."""
    b = N.limit_at_zero
    if N.head is not None:
        head = N.head
        top = np.log(N.lambda0)
        if head.b != 0:
            top = min(top, np.log(0.5 * head.pivot))
        return (lambda lt: head.log_core(lt)), (top - 2000.0, top), True
    nz = N.x[N.x > 0]
    lo, hi = nz[0], N.x[-1]

    def f(lt):
        with np.errstate(divide="ignore"):
            return np.log(np.maximum(N(np.exp(lt)) - b, 0.0))
    return f, (np.log(lo), np.log(hi)), False


def dilatation_equivalence(N1, N2, lam_max=1e4, steps_per_octave=8, samples=400):
    """Smallest ``lam`` on a log grid with ``N1(t/lam)/2 <= N2(t) <= 2 N1(lam t)`` near 0."""
    f1, r1, sym1 = _log_n0(N1)
    f2, r2, sym2 = _log_n0(N2)
    log2 = np.log(2.0)
    grid = np.exp(np.arange(0, np.log2(lam_max) * steps_per_octave + 1) * log2 / steps_per_octave)
    alphas = (ns_exponents(N1).alpha, ns_exponents(N2).alpha)
    checked = 0
    for lam in grid:
        ll = np.log(lam)
        lo = max(r1[0] + ll, r2[0])
        hi = min(r1[1] - ll, r2[1])
        if hi - lo < np.log(10.0):
            continue
        lt = np.linspace(lo, hi, samples)
        a = f1(lt - ll) - log2
        m = f2(lt)
        c = f1(lt + ll) + log2
        checked += 1
        slack = 1e-12
        if np.all(a <= m + slack) and np.all(m <= c + slack):
            notes = []
            if alphas[0] != alphas[1]:
                notes.append("equivalent densities with different fitted exponents")
            return EquivalenceReport(True, float(lam), alphas, checked, notes)
    return EquivalenceReport(False, None, alphas, checked, ["no dilation on the grid satisfies both bounds"])

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ncriemann.errors import NoSDDError
from ncriemann.measure import MeasuredSpace, PiecewiseFn, SymbolicFn
from ncriemann.spectral import (
    Decreasing,
    SpectralDensity,
    Transform,
    detect_limit,
    distribution_from_density,
    functional_calculus,
    generalized_inverse,
    laplace_theta,
    rearrangement,
    spectral_sdd,
    trace_via_exhaustion,
)

from oracles import grid_inverse


def uniform():
    """N(lam) = lam on [0, 1]: multiplication by t on Lebesgue [0, 1]."""
    return SpectralDensity([0.0, 1.0], [0.0, 1.0], interp="linear")


@st.composite
def step_densities(draw):
    n = draw(st.integers(1, 8))
    xs = sorted(set(draw(st.lists(st.floats(0.0, 20.0), min_size=n, max_size=n))))
    jumps = draw(st.lists(st.floats(0.01, 3.0), min_size=len(xs), max_size=len(xs)))
    return SpectralDensity(xs, np.cumsum(jumps))


# transforms ----------------------------------------------------------------------


def test_transform_composition():
    assert Transform.power(2).then(Transform.power(Fraction(-1, 4))) == Transform.power(Fraction(-1, 2))
    assert Transform.heat().then(Transform.falpha(0.5)) == Transform.power(-0.5)
    assert Transform.identity().then(Transform.heat()) == Transform.heat()
    with pytest.raises(ValueError):
        Transform.falpha(1).then(Transform.heat())


@pytest.mark.parametrize("T", [Transform.power(2), Transform.power(-0.5), Transform.heat(), Transform.falpha(1.5)])
def test_transform_inverse(T):
    s = np.array([0.1, 0.3, 0.7])
    assert np.allclose(T.inverse(T(s)), s)


def test_falpha_of_heat_is_negative_power():
    lam = np.array([0.5, 2.0, 7.0])
    assert np.allclose(Transform.falpha(0.75)(Transform.heat()(lam)), lam ** -0.75)


# densities --------------------------------------------------------------------------


def test_step_density_conventions():
    N = SpectralDensity([0.0, 2.0, 4.0], [0.25, 0.75, 1.0])
    assert N(0.0) == 0.25 and N.atom_at_zero == 0.25
    assert N(1.0) == 0.25 and N(2.0) == 0.75 and N.left_limit(2.0) == 0.25
    assert N(10.0) == 1.0


def test_head_must_match_table():
    with pytest.raises(ValueError):
        from ncriemann._powerlog import PowerLog
        SpectralDensity([0.5], [3.0], head=PowerLog(1.0, 1))


def test_dilation_substitutes_argument():
    N = SpectralDensity.from_head(2.0, Fraction(1, 2), lambda0=0.5)
    M = N.dilated(3.0)
    lam = np.array([0.01, 0.05, 0.1])
    assert np.allclose(M(lam), N(3.0 * lam))


# distribution functions and rearrangements -------------------------------------------------


def test_distribution_of_uniform():
    lam = distribution_from_density(uniform())
    t = np.array([0.0, 0.2, 0.5, 0.9, 1.0, 2.0])
    assert np.allclose(lam(t), np.maximum(0.0, 1 - t))


def test_distribution_inverse_sqrt_head():
    c, d = 0.7, 3
    N = SpectralDensity.from_head(c, Fraction(d, 2), lambda0=0.5)
    lam = distribution_from_density(N, Transform.power(Fraction(-1, 2)))
    t = np.array([5.0, 20.0, 100.0])
    assert np.allclose(lam(t), c * t ** -d)
    assert np.allclose(lam(t), N(t ** -2.0))


def test_distribution_of_zero_density():
    lam = distribution_from_density(SpectralDensity([0.0], [0.0]))
    assert np.all(lam(np.array([0.0, 1.0, 5.0])) == 0)


def test_rearrangement_of_uniform():
    mu = rearrangement(distribution_from_density(uniform()))
    s = np.array([0.0, 0.25, 0.5, 1.0, 3.0])
    assert np.allclose(mu(s), np.maximum(0.0, 1 - s), atol=1e-12)


def test_rearrangement_of_zero():
    mu = rearrangement(Decreasing(steps=(np.array([0.0]), np.array([0.0])), ceiling=0.0))
    assert np.all(mu(np.array([0.0, 1.0])) == 0)


def test_rearrangement_of_rectangle():
    lam = Decreasing(steps=(np.array([0.0, 2.0]), np.array([3.0, 0.0])), ceiling=3.0)
    mu = rearrangement(lam)
    s = np.array([0.0, 1.0, 2.999, 3.0, 5.0])
    assert list(mu(s)) == [2.0, 2.0, 2.0, 0.0, 0.0]


@settings(max_examples=40, deadline=None)
@given(step_densities())
def test_rearrangement_round_trip(N):
    lam = distribution_from_density(N)
    mu = rearrangement(lam)
    knots, values = mu.steps
    # lambda of mu is the Lebesgue measure of {mu > t}
    ts = np.linspace(0.0, float(N.x[-1]) + 1.0, 97)
    ts = ts[~np.isin(ts, N.x)]
    edges = np.concatenate([knots, [np.inf]])
    for t in ts:
        lengths = np.diff(edges)[values > t]
        below = knots[0] if mu.ceiling > t else 0.0
        assert float(np.sum(lengths) + below) == pytest.approx(float(lam(t)), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(step_densities(), st.floats(0.0, 10.0))
def test_generalized_inverse_against_scan(N, s):
    lam = distribution_from_density(N)
    grid = np.concatenate([[0.0], np.sort(N.x)])
    got = float(generalized_inverse(lam, np.array([s]))[0])
    want = grid_inverse(lam, s, grid)
    assert got == pytest.approx(want, rel=1e-12, abs=1e-12)


# theta ------------------------------------------------------------------------------------------


def test_theta_of_uniform():
    assert laplace_theta(uniform(), 1.0) == pytest.approx(1 - math.exp(-1), abs=1e-12)


def test_theta_of_atom():
    N = SpectralDensity([0.0], [0.4])
    assert [laplace_theta(N, t) for t in (0.1, 1.0, 50.0)] == [0.4, 0.4, 0.4]


def test_theta_of_head_matches_quadrature():
    from scipy import integrate
    c, a, lam0 = 1.3, 0.75, 0.5
    N = SpectralDensity.from_head(c, a, lambda0=lam0, atom_at_zero=0.1)
    t = 2.0
    dens = lambda x: math.exp(-t * x) * c * a * x ** (a - 1)
    want = 0.1 + integrate.quad(dens, 0, lam0)[0]
    assert laplace_theta(N, t) == pytest.approx(want, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(step_densities(), st.floats(0.05, 5.0))
def test_theta_completely_monotone(N, t0):
    h = 0.25
    v = np.array([laplace_theta(N, t0 + k * h) for k in range(4)])
    d1, d2, d3 = np.diff(v), np.diff(v, 2), np.diff(v, 3)
    scale = 1e-12 * max(1.0, v[0])
    assert np.all(d1 <= scale) and np.all(d2 >= -scale) and np.all(d3 <= scale)


@pytest.mark.parametrize("N", [
    SpectralDensity([0.0, 1.0, 3.0], [0.2, 0.6, 1.0]),
    SpectralDensity([0.0, 0.01, 3.0], [0.5, 0.6, 1.0]),
    SpectralDensity.from_head(1.0, 1.5, lambda0=0.25, atom_at_zero=0.2, limit_at_zero=0.3),
])
def test_theta_at_large_time_recovers_limit_at_zero(N):
    assert laplace_theta(N, 1e3) == pytest.approx(N.limit_at_zero, rel=1e-3)


@pytest.mark.parametrize("a", [0.25, 0.5, 1.5])
def test_theta_excess_decays_like_head(a):
    # theta - N(0+) ~ c Gamma(a + 1) t^-a
    N = SpectralDensity.from_head(1.0, a, lambda0=0.5, atom_at_zero=0.05)
    t = 1e6
    assert laplace_theta(N, t) - 0.05 == pytest.approx(math.gamma(a + 1) * t ** -a, rel=1e-9)


# functional calculus -------------------------------------------------------------------------


def test_identity_calculus_keeps_density():
    N = SpectralDensity([0.0, 1.0, 3.0], [0.2, 0.6, 1.0])
    P = functional_calculus(N, "identity")
    lam = np.array([0.0, 0.5, 1.0, 2.0, 5.0])
    assert np.array_equal(P(lam), N(lam))


def test_square_of_uniform():
    P = functional_calculus(uniform(), Transform.power(2))
    y = np.array([0.04, 0.25, 0.81])
    assert np.allclose(P(y), np.sqrt(y))
    assert P(5.0) == uniform()(5.0)


def test_negative_power_of_heat_head():
    d, alpha = 3, 0.5
    N = SpectralDensity.from_head(0.4, Fraction(d, 2), lambda0=0.5)
    heat = functional_calculus(N, Transform.heat())
    T = functional_calculus(heat, Transform.falpha(alpha))
    assert T.transform == Transform.power(-alpha)
    mu = rearrangement(distribution_from_density(T.base, T.transform))
    assert mu.head_zero.a == pytest.approx(-2 * alpha / d)


@settings(max_examples=30, deadline=None)
@given(step_densities(), st.sampled_from([0.5, 2.0, 3.0]))
def test_bijective_calculus_preserves_mass(N, p):
    P = functional_calculus(N, Transform.power(p))
    assert P(1e9) == pytest.approx(N(1e9))


@settings(max_examples=30, deadline=None)
@given(step_densities(), st.floats(0.1, 3.0))
def test_calculus_monotone_in_f(N, t):
    # f = s <= g = s^2 + s: integrals of nondecreasing phi(y) = 1 - exp(-t y) are ordered
    phi_f = N.total - laplace_theta(N, t)
    g = functional_calculus(N, Transform.power(2))
    phi_sq = g.total - laplace_theta(g, t)
    pts = np.sort(N.x)
    jumps = np.diff(np.concatenate([[0.0], N(pts)]))
    phi_g = float(np.dot(jumps, 1 - np.exp(-t * (pts ** 2 + pts))))
    assert phi_f <= phi_g + 1e-12 and phi_sq <= phi_g + 1e-12


def test_unbounded_calculus_needs_sdd():
    N = SpectralDensity.from_head(1.0, 0.5, lambda0=0.5, atom_at_zero=0.1, limit_at_zero=0.3)
    with pytest.raises(NoSDDError):
        functional_calculus(N, Transform.power(-0.5))
    ok = SpectralDensity.from_head(1.0, 0.5, lambda0=0.5, atom_at_zero=0.1)
    sdd = spectral_sdd(ok, Transform.power(-0.5), n_sets=6)
    comps = sdd.complement_measures
    assert all(c2 <= c1 for c1, c2 in zip(comps, comps[1:])) and comps[-1] <= 1 / 6


# exhaustion -------------------------------------------------------------------------------------


def test_detect_limit_cases():
    assert detect_limit([1.0] * 8).status == "converged"
    geo = [2 - 0.5 ** k for k in range(12)]
    rep = detect_limit(geo)
    assert rep.status == "converged" and rep.limit == pytest.approx(2.0, abs=1e-12)
    assert detect_limit([float(k) for k in range(10)]).status == "divergent"
    assert detect_limit([(-1.0) ** k for k in range(10)]).status == "oscillating"


def test_exhaustion_of_finite_trace_is_constant():
    f = PiecewiseFn.continuous([0.0, 1.0], [1.0, 3.0])
    rep = trace_via_exhaustion(f, MeasuredSpace(0.0, 1.0), levels=range(1, 9))
    assert rep.status == "converged" and set(rep.values) == {2.0}


def test_exhaustion_of_inverse_is_divergent():
    rep = trace_via_exhaustion(SymbolicFn.power(-1.0), MeasuredSpace(0.0, 1.0), levels=[2 ** k for k in range(1, 12)])
    assert rep.status == "divergent"
    assert rep.values[3] == pytest.approx(math.log(16), rel=1e-9)


def test_exhaustion_of_inverse_sqrt():
    rep = trace_via_exhaustion(SymbolicFn.power(-0.5), MeasuredSpace(0.0, 1.0))
    assert rep.status == "converged" and rep.limit == pytest.approx(2.0, abs=1e-9)

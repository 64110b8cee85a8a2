import math
from fractions import Fraction

import numpy as np
import pytest

from ncriemann import novikov as nv
from ncriemann.errors import BudgetError, NotEccentricError
from ncriemann.spectral import SpectralDensity, rearrangement_from_head

from oracles import direct_theta, ids_count, torus_eigs_bruteforce, torus_heat_diagonal


# lattice spectra ---------------------------------------------------------------------


def test_small_torus_table():
    ids = nv.lattice_ids(1, 4)
    assert ids.x == pytest.approx([0.0, 2.0, 4.0], abs=1e-15)
    assert (ids(1.0), ids(3.0), ids(5.0)) == (0.25, 0.75, 1.0)


@pytest.mark.parametrize("d,N", [(1, 7), (1, 16), (2, 6), (2, 8), (3, 4)])
def test_ids_matches_bruteforce_count(d, N):
    eigs = torus_eigs_bruteforce(d, N)
    ids = nv.lattice_ids(d, N)
    for lam in np.linspace(0, 4 * d + 0.5, 57):
        assert ids(lam) == pytest.approx(ids_count(eigs, lam), abs=1e-15)
    assert sorted(nv.torus_eigenvalues(d, N)) == pytest.approx(sorted(eigs), abs=1e-12)


@pytest.mark.parametrize("d,N", [(1, 9), (2, 5), (3, 6)])
def test_kernel_atom(d, N):
    assert nv.lattice_ids(d, N).atom_at_zero == pytest.approx(1.0 / N ** d, abs=1e-15)


def test_torus_theta_direct_sum():
    for t in (0.1, 1.0, 10.0):
        assert nv.torus_theta(2, 12, t) == pytest.approx(direct_theta(2, 12, t), rel=1e-12)


def test_budget_refused():
    with pytest.raises(BudgetError):
        nv.torus_eigenvalues(3, 512)


def test_model_spec():
    assert nv.LatticeModel.from_dict({"d": 2, "N": 8}) == nv.LatticeModel(2, 8)
    with pytest.raises(KeyError):
        nv.LatticeModel.from_dict({"N": 8})
    with pytest.raises(KeyError):
        nv.LatticeModel.from_dict({"d": 1, "model": "torus"})
    with pytest.raises(ValueError):
        nv.LatticeModel(1, 4, model="sphere")


# invariants --------------------------------------------------------------------------


def test_betti_of_torus():
    b, tordim = nv.betti_and_tordim(nv.lattice_ids(2, 64))
    assert b == 1 / 4096 and tordim == 0


def test_betti_with_torsion():
    N = SpectralDensity.from_head(1.0, Fraction(1, 2), atom_at_zero=0.3, limit_at_zero=0.5)
    b, tordim = nv.betti_and_tordim(N)
    assert b == 0.5 and tordim == pytest.approx(0.2)


@pytest.mark.parametrize("a", [Fraction(1, 2), Fraction(3, 2), Fraction(1, 3), 2])
def test_symbolic_exponents_exact(a):
    rep = nv.ns_exponents(SpectralDensity.from_head(2.0, a))
    assert rep.mode == "symbolic"
    assert rep.alpha == rep.alpha_lower == rep.alpha_prime == rep.alpha_prime_lower == 2 * a
    assert rep.asymptotic_dimension == 2 * a


def test_log_corrected_head_keeps_exponent():
    rep = nv.ns_exponents(SpectralDensity.from_head(2.0, Fraction(1, 2), 1, lambda0=0.5))
    assert rep.alpha == 1 and rep.notes


def test_table_exponents_ordered():
    rep = nv.ns_exponents(nv.lattice_ids(1, 256))
    assert rep.mode == "empirical"
    assert rep.alpha_lower <= rep.alpha and rep.alpha_prime_lower <= rep.alpha_prime
    assert abs(rep.alpha - 1) < 0.15


def test_richardson_improves_on_raw_fit():
    alpha, (a1, a2) = nv.ns_richardson(1, 128)
    assert abs(alpha - 1) < abs(a2 - 1) < abs(a1 - 1)


@pytest.mark.parametrize("a", [Fraction(-1, 2), Fraction(-1, 3), Fraction(-2, 5), Fraction(-3, 4)])
def test_dimension_of_power_head(a):
    rep = nv.asymptotic_dimension(rearrangement_from_head(1.5, a))
    assert rep.dimension == -1 / a and isinstance(rep.dimension, Fraction)


def test_dimension_bounded_mu():
    rep = nv.asymptotic_dimension(rearrangement_from_head(1.0, 0))
    assert rep.dimension is None and rep.notes


def test_dimension_with_torsion_is_undefined():
    N = SpectralDensity.from_head(1.0, Fraction(1, 2), atom_at_zero=0.3, limit_at_zero=0.5)
    assert nv.asymptotic_dimension_from_density(N).dimension is None


# eccentricity ------------------------------------------------------------------------


def test_laplacian_at_its_exponent_is_eccentric():
    N = SpectralDensity.from_head(1.0, Fraction(1, 2))
    rep = nv.eccentric_laplacian(N, 1)
    assert rep.exponent == -1 and rep.eccentricity.eccentric and rep.trace_of_T == 1.0


def test_laplacian_below_exponent_is_not():
    N = SpectralDensity.from_head(1.0, Fraction(1, 2))
    rep = nv.eccentric_laplacian(N, Fraction(1, 2))
    assert rep.exponent == Fraction(-1, 2) and rep.eccentricity.eccentric is False
    with pytest.raises(NotEccentricError):
        nv.require_eccentric(N, Fraction(1, 2))


def test_eccentric_laplacian_validation():
    N = SpectralDensity.from_head(1.0, Fraction(1, 2))
    with pytest.raises(ValueError):
        nv.eccentric_laplacian(N, 0)


# dilatation ----------------------------------------------------------------------------


def test_equivalence_reflexive():
    A = SpectralDensity.from_head(1.0, Fraction(1, 2))
    rep = nv.dilatation_equivalence(A, A)
    assert rep.equivalent and rep.lam == 1.0


def test_equivalence_of_strong_dilation():
    A = SpectralDensity.from_head(1.0, Fraction(1, 2))
    fwd = nv.dilatation_equivalence(A, A.dilated(100.0))
    back = nv.dilatation_equivalence(A.dilated(100.0), A)
    # 10 sqrt(t) <= 2 sqrt(lam t) needs lam >= 25
    assert fwd.equivalent and back.equivalent and 25 <= fwd.lam <= 100 and 25 <= back.lam <= 100


def test_different_powers_not_equivalent():
    A = SpectralDensity.from_head(1.0, Fraction(1, 2))
    rep = nv.dilatation_equivalence(A, SpectralDensity.from_head(1.0, 1))
    assert not rep.equivalent and rep.alphas == (1, 2)


def test_table_equivalence():
    T = nv.lattice_ids(1, 64)
    assert nv.dilatation_equivalence(T, T.dilated(2.0)).equivalent


# exhaustion ---------------------------------------------------------------------------


def test_exhaustion_at_time_zero():
    assert nv.exhaustion_trace(2, 0.0).limit == 1.0


def test_exhaustion_matches_torus_oracle():
    rep = nv.exhaustion_trace(1, 1.0)
    assert rep.status == "converged"
    assert rep.limit == pytest.approx(torus_heat_diagonal(1.0, 4096), abs=1e-12)


def test_restricted_bias_shrinks():
    rep = nv.exhaustion_trace(1, 1.0)
    bias = rep.restricted_bias
    assert all(b2 < b1 for b1, b2 in zip(bias, bias[1:]))
    assert all(f2 < f1 for f1, f2 in zip(rep.folner, rep.folner[1:]))


def test_exhaustion_validation():
    with pytest.raises(ValueError):
        nv.exhaustion_trace(1, -1.0)
    with pytest.raises(ValueError):
        nv.exhaustion_trace(1, 1.0, ns=[64], M=128)

"""One test per acceptance criterion; each records a PASS/FAIL line for the terminal summary."""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE
from ncriemann import novikov as nv
from ncriemann.algebra import (
    DyadicSquareWave,
    counterexample_notalg,
    f_minus_delta,
    f_plus_delta,
    f_resolvent,
    matrix_function,
    min_eig,
    offdiag_bound_check,
)
from ncriemann.measure import MeasuredSpace, PiecewiseFn, decompose_characteristics
from ncriemann.singular import LimitScheme, classify_eccentric, singular_trace, trace_property_suite
from ncriemann.spectral import (
    Decreasing,
    SpectralDensity,
    laplace_theta,
    rearrangement_at_infinity,
    rearrangement_from_head,
)

from oracles import (
    direct_theta,
    eccentricity_oracle,
    lattice_heat_diagonal,
    ordered_pair,
    random_hermitian,
    spectral_projection,
    torus_heat_diagonal,
)


def verdict(n, ok, detail):
    ACCEPTANCE[n] = (bool(ok), detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


def test_c01_counterexample_gap():
    start = time.perf_counter()
    ok, rows = True, []
    for text in ("0.1", "0.05", "0.01"):
        eps = Fraction(text)
        rep = counterexample_notalg(DyadicSquareWave(), eps)
        want = 2 * eps + eps ** 3
        ok &= rep.gap == want and rep.f.in_AU and not rep.f.in_AR and not rep.f_squared.in_AU
        rows.append(f"{text}->{rep.gap}")
    elapsed = time.perf_counter() - start
    verdict(1, ok and elapsed < 1.0, f"gaps {', '.join(rows)}; {elapsed:.3f}s")


def test_c02_decomposition_bound():
    rng = np.random.default_rng(2)
    X = MeasuredSpace(0.0, 1.0)
    start = time.perf_counter()
    worst_ratio, worst_sum = 0.0, 0.0
    for _ in range(50):
        k = int(rng.integers(1, 9))
        knots = np.concatenate([[0.0], np.sort(rng.uniform(0.01, 0.99, k - 1)), [1.0]])
        f = PiecewiseFn.step(knots, rng.uniform(0.05, 2.0, k))
        dec = decompose_characteristics(f, X, 1e-11)
        b0 = dec.betas[0]
        worst_ratio = max(worst_ratio, max(b / (0.75 ** n * b0) for n, b in enumerate(dec.betas)))
        worst_sum = max(worst_sum, abs(math.fsum(dec.alphas) - f.sup()))
    elapsed = time.perf_counter() - start
    ok = worst_ratio <= 1 + 1e-12 and worst_sum <= 1e-9 and elapsed < 10
    verdict(2, ok, f"max beta_n/(3/4)^n beta_0 = {worst_ratio:.6f}, max |sum - norm| = {worst_sum:.1e}; {elapsed:.2f}s")


def test_c03_theta_against_direct_sum():
    start = time.perf_counter()
    worst = 0.0
    for d, N in ((1, 512), (2, 128), (3, 32)):
        ids = nv.lattice_ids(d, N)
        for t in (0.1, 1.0, 10.0):
            ref = direct_theta(d, N, t)
            worst = max(worst, abs(laplace_theta(ids, t) - ref) / ref)
    elapsed = time.perf_counter() - start
    verdict(3, worst <= 1e-9 and elapsed < 30, f"max rel err {worst:.1e}; {elapsed:.1f}s")


def test_c04_ns_dimension_recovery():
    start = time.perf_counter()
    got = {d: nv.ns_richardson(d, N)[0] for d, N in ((1, 512), (2, 128), (3, 128))}
    elapsed = time.perf_counter() - start
    ok = all(abs(a - d) <= 0.1 * d for d, a in got.items()) and elapsed < 120
    verdict(4, ok, ", ".join(f"d={d}: {a:.3f}" for d, a in got.items()) + f"; {elapsed:.1f}s")


def test_c05_dimension_equals_alpha():
    heads = [Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), 1, Fraction(3, 2), 2, Fraction(5, 2),
             Fraction(1, 4), Fraction(3, 4), Fraction(7, 5), 3]
    exact = 0
    for a in heads:
        rep = nv.ns_exponents(SpectralDensity.from_head(1.7, a))
        exact += rep.asymptotic_dimension == rep.alpha
    torus = nv.asymptotic_dimension_from_density(nv.lattice_ids(1, 512))
    ok = exact == len(heads) and torus.discrepancy <= 0.1
    verdict(5, ok, f"{exact}/{len(heads)} heads exact; torus d=1 dim {torus.dimension:.3f} vs alpha {torus.alpha:.3f}")


def test_c06_eccentricity_oracle():
    agree, total = 0, 0
    for loc in ("zero", "infinity"):
        for a in (0, Fraction(1, 2), 1):
            for b in (0, 1, 2):
                ecc, finite, _ = eccentricity_oracle(a, b, loc)
                if loc == "zero":
                    mu = rearrangement_from_head(1.0, -a, -b, s0=0.25)
                else:
                    mu = rearrangement_at_infinity(1.0, -a, -b)
                rep = classify_eccentric(mu, loc)
                agree += rep.eccentric == ecc and (rep.integrability == "finite") == finite
                total += 1
    verdict(6, agree == total, f"{agree}/{total} agree")


def test_c07_singular_trace_properties():
    inf_T = rearrangement_from_head(1.0, -1, s0=0.5)
    fin_T = rearrangement_from_head(1.0, -1, -2, s0=0.25)
    compact = Decreasing(steps=(np.array([0.0, 0.25]), np.array([2.0, 0.0])), ceiling=2.0)
    schemes = [LimitScheme("plain"), LimitScheme("log_cesaro"), LimitScheme("pinned", pins=tuple(range(20, 64, 3)))]
    norm = max(abs(singular_trace(T, T).value - 1) for T in (inf_T, fin_T))
    homog = 0.0
    for T, b in ((inf_T, 0), (fin_T, -2)):
        A = rearrangement_from_head(1.3, -1, b, s0=0.125)
        base = singular_trace(T, A).value
        for c in (0.5, 2.0, 3.0):
            homog = max(homog, abs(singular_trace(T, A.scaled(c)).value - c * base))
    vanish = max(abs(singular_trace(inf_T, rearrangement_from_head(5.0, 0, s0=0.5)).value),
                 abs(singular_trace(fin_T, compact).value))
    spread = 0.0
    for T, b in ((inf_T, 0), (fin_T, -2)):
        A = rearrangement_from_head(3.0, -1, b, s0=0.125)
        vals = [singular_trace(T, A, s).value for s in schemes]
        spread = max(spread, max(vals) - min(vals))
    suite = trace_property_suite(inf_T, elements=[rearrangement_from_head(2.0, -1, s0=0.5)],
                                 bounded=[rearrangement_from_head(4.0, 0, s0=0.5)], finite_trace=[compact])
    ok = norm == 0 and homog <= 1e-12 and vanish <= 1e-6 and spread <= 1e-12 and suite.passed
    verdict(7, ok, f"|tau(T)-1| {norm:.0e}, homogeneity {homog:.0e}, vanishing {vanish:.1e}, scheme spread {spread:.0e}")


def test_c08_matrix_order():
    rng = np.random.default_rng(8)
    n_inst = 10_000
    fails = {"f_t": 0, "f+": 0, "f-": 0, "offdiag": 0}
    A, B = ordered_pair(rng, 3, n_inst, 0.0, 1.0)
    ts = rng.uniform(0.0, 0.9, n_inst)
    deltas = rng.uniform(0.01, 2.0, n_inst)
    for name, make, params in (("f_t", f_resolvent, ts), ("f+", f_plus_delta, deltas), ("f-", f_minus_delta, deltas)):
        # one scalar function per instance, broadcast along the batch axis
        fn = make(params[:, None])
        low = min_eig(matrix_function(fn, B) - matrix_function(fn, A))
        fails[name] = int(np.count_nonzero(low < -1e-9))
    es = spectral_projection(rng, 4, n_inst)
    ab = rng.uniform(0.1, 3.0, (n_inst, 2))
    eye = np.eye(4)
    for e, (alpha, beta) in zip(es, ab):
        top = alpha * e + beta * (eye - e)
        w, v = np.linalg.eigh(top)
        root = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
        h = random_hermitian(rng, 4, 1)[0]
        hw = np.linalg.eigvalsh(h)
        x = root @ ((h - hw[0] * eye) / max(hw[-1] - hw[0], 1e-12)) @ root
        fails["offdiag"] += not offdiag_bound_check(x, e, alpha, beta)["holds"]
    verdict(8, not any(fails.values()), f"{n_inst} instances each, failures {fails}")


def test_c09_dilatation_invariance():
    rng = np.random.default_rng(9)
    exps = [Fraction(k, 4) for k in range(1, 21)]
    certified = 0
    for a in exps:
        N = SpectralDensity.from_head(float(rng.uniform(0.5, 2.0)), a)
        rep = nv.dilatation_equivalence(N, N.dilated(float(rng.uniform(0.2, 8.0))))
        certified += rep.equivalent and rep.alphas[0] == rep.alphas[1]
    rejected = 0
    mismatched = [(Fraction(1, 2), 1), (Fraction(1, 2), Fraction(3, 2)), (1, 2), (Fraction(3, 4), Fraction(5, 4))]
    for a1, a2 in mismatched:
        rep = nv.dilatation_equivalence(SpectralDensity.from_head(1.0, a1), SpectralDensity.from_head(1.0, a2))
        rejected += not rep.equivalent
    ok = certified == len(exps) and rejected == len(mismatched)
    verdict(9, ok, f"{certified}/{len(exps)} dilated pairs certified, {rejected}/{len(mismatched)} mismatched rejected")


def test_c10_exhaustion_convergence():
    ref = torus_heat_diagonal(1.0, 4096)
    rep = nv.exhaustion_trace(1, 1.0, ns=[64, 128, 256, 512], M=4096)
    err = max(abs(v - ref) for v in rep.values)
    # the torus proxy itself must sit on the infinite chain's Bessel value
    chain = abs(ref - lattice_heat_diagonal(1.0))
    ok = err <= 1e-3 and chain <= 1e-12 and rep.status == "converged"
    verdict(10, ok, f"max |box average - oracle| {err:.1e} for n in {rep.ns}; torus vs chain {chain:.1e}")

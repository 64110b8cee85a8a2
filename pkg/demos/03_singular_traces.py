"""Singular traces built from rearrangements that are barely not trace class.

mu(s) = 1/s has a logarithmically divergent integral at 0; the trace it
normalizes ignores every bounded operator.  mu(s) = 1/(s log^2(1/s)) has a
finite integral, and the trace it normalizes ignores compact support instead.
A plain power s^-1/2 is not eccentric, and no trace is built on it.
"""
from fractions import Fraction

import numpy as np

from ncriemann.errors import NotEccentricError
from ncriemann.singular import LimitScheme, classify_eccentric, singular_trace
from ncriemann.spectral import Decreasing, rearrangement_from_head

harmonic = rearrangement_from_head(1.0, -1, s0=0.5)
borderline = rearrangement_from_head(1.0, -1, -2, s0=0.25)
root = rearrangement_from_head(1.0, Fraction(-1, 2))

for name, mu in (("1/s", harmonic), ("1/(s log^2)", borderline), ("s^-1/2", root)):
    rep = classify_eccentric(mu)
    print(f"{name:12} eccentric={rep.eccentric!s:5}  branch={rep.integrability:8}  ratio->{rep.ratio_limit}")

schemes = [LimitScheme("plain"), LimitScheme("log_cesaro"), LimitScheme("pinned", pins=tuple(range(20, 64, 3)))]
A = rearrangement_from_head(3.0, -1, s0=0.125)
print("\ntau(A) for mu_A = 3/s under each scheme:", [singular_trace(harmonic, A, s).value for s in schemes])
print("bounded mu_A = 5:", singular_trace(harmonic, rearrangement_from_head(5.0, 0, s0=0.5)).value)

box = Decreasing(steps=(np.array([0.0, 0.25]), np.array([2.0, 0.0])), ceiling=2.0)
print("finite branch, compact mu_A:", singular_trace(borderline, box).value)

try:
    singular_trace(root, harmonic)
except NotEccentricError as exc:
    print("refused:", exc)

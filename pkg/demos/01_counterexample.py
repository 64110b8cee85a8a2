"""A 2x2 matrix function whose Riemann cut closes but whose square escapes.

The off-diagonal element x(t) = [[0, g], [g, 0]] is squeezed between two
continuous matrix functions; the trace gap shrinks like 2 eps + eps^3, so x
is unbounded Riemann measurable.  Its square is diagonal with g^2 on both
entries and picks up a discontinuity that no cut can close.
"""
from fractions import Fraction

from ncriemann.algebra import DyadicSquareWave, counterexample_notalg

g = DyadicSquareWave()  # +-1 on dyadic halves, flips at every 2^-k

print(f"{'eps':>8}  {'gap':>16}  2eps+eps^3")
for eps in (Fraction(1, 10), Fraction(1, 20), Fraction(1, 100), Fraction(1, 1000)):
    rep = counterexample_notalg(g, eps)
    print(f"{str(eps):>8}  {str(rep.gap):>16}  {rep.gap == 2 * eps + eps ** 3}")

rep = counterexample_notalg(g, Fraction(1, 100))
print()
print("f   in A^U:", rep.f.in_AU, " in A^R:", rep.f.in_AR)
print("f^2 in A^U:", rep.f_squared.in_AU)
for why in rep.f_squared.reasons:
    print("   ", why)

"""Box averages of the heat kernel on Z as the boxes grow.

Averaging the ambient kernel over [-n, n] gives the diagonal value at once,
since the chain is translation invariant.  Compressing the Laplacian to the
box instead sees a free boundary, and that bias only dies off like 1/n.
"""
import mpmath

from ncriemann import novikov as nv

t = 1.0
exact = float(mpmath.exp(-2 * t) * mpmath.besseli(0, 2 * t))
rep = nv.exhaustion_trace(1, t, ns=[2 ** k for k in range(1, 10)])
print(f"e^-2t I0(2t) = {exact:.12f}   (torus proxy side {rep.M})")
print(f"{'n':>5} {'box avg':>14} {'compressed':>14} {'bias':>10} {'boundary frac':>14}")
for n, v, r, b, f in zip(rep.ns, rep.values, rep.restricted_values, rep.restricted_bias, rep.folner):
    print(f"{n:5d} {v:14.12f} {r:14.12f} {b:10.2e} {f:14.5f}")

"""Reading the dimension of Z^d off the bottom of its Laplacian spectrum.

The torus Z_N^d has an exact eigenvalue table.  Near zero the counting function
grows like lam^(d/2), so twice the fitted slope should approach d.  A single
size is biased by the discreteness of the low spectrum; extrapolating across
two sides fixes most of that.
"""
import numpy as np

from ncriemann import novikov as nv
from ncriemann.spectral import laplace_theta

for d, N in ((1, 512), (2, 128), (3, 128)):
    alpha, (a1, a2) = nv.ns_richardson(d, N)
    print(f"d={d}: alpha(N={N}) {a1:.3f}  alpha(N={2 * N}) {a2:.3f}  extrapolated {alpha:.3f}")

# heat trace from the table vs direct summation over wave vectors
ids = nv.lattice_ids(2, 64)
for t in (0.1, 1.0, 10.0):
    print(f"t={t:5}: theta {laplace_theta(ids, t):.15f}  direct {nv.torus_theta(2, 64, t):.15f}")

# kernel mass is the constant mode: 1/N^d
b, tordim = nv.betti_and_tordim(ids)
print("b =", b, "= 1/64^2:", np.isclose(b, 64.0 ** -2), " tordim =", tordim)

# # Floquet data of the linearized operator
#
# Projecting the linearization onto spherical harmonics of degree `j` gives a
# fourth-order ODE with periodic coefficients.  Its monodromy over one period
# decides which Jacobi fields grow and which decay.

# %%
import numpy as np

from delaunay4 import make_params
from delaunay4 import spectral as S
from delaunay4.orbits import shoot

p = make_params(5)
orb = shoot(p, 0.6 * p.a0)

# %%
for j in (0, 1, 2):
    rep = S.monodromy(p, orb, j)
    print(f"j={j}  |det M - 1|={rep.det_residual:.1e}  roots={np.round(np.sort(rep.indicial_roots), 5)}")
    if j == 0:
        print(f"      mu=1 multiplicity {rep.zero_freq_multiplicity}, rank(M - I) on it {rep.jordan_rank}")

# %% [markdown]
# The same numbers at the two ends of the family have closed forms.

# %%
for which in ("spherical", "cylindrical"):
    for j in (0, 1, 2):
        r = S.indicial_roots_limit(p, which, j)
        print(which, j, np.round(r.roots, 5))

# %% [markdown]
# Vector solutions `Lambda * u` split into one block along `Lambda` and
# `p - 1` identical blocks across it.

# %%
lam = np.ones(3) / np.sqrt(3)
dec = S.decompose_block(p, lam, orb, 1)
vec = S.vector_monodromy(p, orb, 1, lam)
print("basis count", dec.basis_count)
print("block union", np.round(np.sort(dec.clustered_exponents().real), 6))
print("full system", np.round(np.sort(vec.clustered_exponents().real), 6))

# %% [markdown]
# A band scan shifts the operator by `sigma` and asks whether some Bloch
# solution stays bounded.

# %%
scan = S.band_scan(p, orb, 0, np.linspace(-1.0, 0.0, 6))
for s, inside in zip(scan.sigma, scan.in_band):
    print(f"sigma={s:+.1f}  in band: {inside}")
print("lowest periodic eigenvalue", S.quasi_periodic_spectrum(p, orb, 0)[:2])

# # Profiles in the punctured ball
#
# A periodic orbit becomes a singular solution `u(x) = |x|^-gamma v(-ln|x| + T)`.
# Composing inversion, translation and inversion gives the deformed family,
# whose cylinder picture differs from `v` by `O(e^-t)`.

# %%
import numpy as np

from delaunay4 import make_params
from delaunay4 import profiles as P
from delaunay4.invariants import invariant_curve, pohozaev_of_orbit
from delaunay4.orbits import shoot

p = make_params(5)
orb = shoot(p, 0.6 * p.a0)

x = np.array([[0.3, 0.1, 0.0, 0.0, 0.0], [0.0, 0.0, 0.05, 0.0, 0.0]])
print("fowler  ", P.eval_profile(p, P.fowler(orb.a), x))
print("deformed", P.eval_profile(p, P.deformed(orb.a, 0.0, [0.1, 0, 0, 0, 0]), x))
print("bubble  ", P.eval_profile(p, P.spherical(), x))

# %% [markdown]
# Radial bounds and superharmonicity on `(0, 1/2]`.

# %%
print(P.fowler_bounds(p, orb, T=0.4))

# %% [markdown]
# The Pohozaev invariant vanishes for the smooth bubble and is negative on
# every Fowler orbit, tending to zero as the neck closes.

# %%
print("bubble", pohozaev_of_orbit(p, P.spherical()).cyl)
curve = invariant_curve(p, [f * p.a0 for f in (0.05, 0.2, 0.5, 0.8, 1.0)])
for a, val, *_ in curve.points:
    print(f"a/a0={a / p.a0:.2f}  P_cyl={val:+.6f}")

# %% [markdown]
# Subtracting the `e^-t` term leaves an `e^-2t` remainder.  The fitted rate
# wobbles with the orbit's phase unless the window covers about a period.

# %%
x0 = np.array([0.1, 0, 0, 0, 0])
for window in [(3.0, 8.0), (2.0, 2.0 + 1.5 * orb.period)]:
    sub = P.deformed_expansion_residual(p, orb, x0, window)
    raw = P.deformed_expansion_residual(p, orb, x0, window, subtract=False)
    print(f"window {window[0]:.1f}..{window[1]:.1f}: {sub.slope:.3f} (subtracted) {raw.slope:.3f} (raw)")

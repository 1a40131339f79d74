# # Periodic orbits of the Fowler equation
#
# Every positive periodic solution of the radial equation on the cylinder is
# pinned down by its minimum `a`, which lives in `(0, a0]`.  At `a0` the orbit
# is the constant cylinder; as `a` shrinks the orbit spends longer and longer
# near zero and its period blows up.

# %%
import numpy as np

from delaunay4 import make_params
from delaunay4.orbits import energy_drift_over_periods, linear_period, shoot

p = make_params(5)
print(f"gamma={p.gamma}, a0={p.a0:.12f}, c_n={p.c_n}")

# %% [markdown]
# `shoot` finds the initial curvature `b(a)` that makes the orbit bounded, then
# polishes it so the orbit closes up to ~1e-13.

# %%
for frac in (0.1, 0.3, 0.6, 0.9, 0.99, 1.0):
    orb = shoot(p, frac * p.a0)
    print(f"a/a0={frac:5.2f}  b={orb.b_of_a:+.6e}  T={orb.period:8.4f}  "
          f"H={orb.energy:+.6f}  closure={orb.periodicity_residual:.1e}")

# %% [markdown]
# Near the cylinder the period approaches that of the linearized oscillation.

# %%
print("linear period", linear_period(p))

# %% [markdown]
# The Hamiltonian is conserved.  Orbits are unstable in the zero mode, so a
# long run is restarted on the symmetry section every half period.

# %%
orb = shoot(p, 0.6 * p.a0)
print("relative drift over 10 periods:", energy_drift_over_periods(p, orb, 10))
t = np.linspace(0, orb.period, 5)
print(np.round(orb.state(t), 6))

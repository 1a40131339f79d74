# # Recovering parameters from samples
#
# Given `v(t, theta)` on a handful of directions, `fit_parameters` estimates
# the Fowler parameter, the phase, the translation `x0` and the two decay
# rates.  The same pipeline is available as `delaunay4 profile` followed by
# `delaunay4 fit`.

# %%
import numpy as np

from delaunay4 import make_params
from delaunay4.fit import fit_parameters
from delaunay4.orbits import shoot
from delaunay4.profiles import cylinder_samples, deformed, theta_grid

p = make_params(5)
a, x0 = 0.6 * p.a0, np.array([0.1, 0.0, 0.0, 0.0, 0.0])
orb = shoot(p, a)
theta = theta_grid(5, 2)
t = np.linspace(0.0, 3.2 * orb.period, 1500)
V = cylinder_samples(p, deformed(a, 0.0, x0), t, theta)

# %%
res = fit_parameters(p, t, theta, V, window=(2.0, 2.0 + 1.5 * orb.period))
print(f"a_hat/a0 = {res.a_hat / p.a0:.10f}")
print(f"T_hat    = {res.T_hat:.3e} (mod {res.period:.4f})")
print("x0_hat   =", np.round(res.x0_hat, 8))
print(f"beta0 = {res.beta0:.3f} +- {res.beta0_stderr:.3f}")
print(f"beta1 = {res.beta1:.3f} +- {res.beta1_stderr:.3f}")

"""
The fundamental solution of the nonlocal flow
=============================================

The linear flow ``u_t = J*u - u`` has fundamental solution
``e^-t delta + W(x, t)``.  ``W`` carries mass ``1 - e^-t`` and approaches
the heat kernel ``U_a`` of diffusivity ``a``.
"""
import math

import numpy as np

from nonlocal_absorption import Grid, fit_rate, make_kernel, w_estimate_curves, w_part

k = make_kernel("bump", 1.0, 1)
g = Grid(1, 200.0, 2**14)

# %%
# Mass identity.
for t in (0.5, 1.0, 5.0, 10.0):
    print(f"t={t:5.1f}  int W = {w_part(k, t, g).integral():.15f}  1 - e^-t = {1 - math.exp(-t):.15f}")

# %%
# Decay of ``|W - U_a|`` in ``L^q'`` for several ``q``.  The fitted
# exponents sit near ``-1 - 1/(2q)``, which is faster than the general
# upper bound ``-(N+1)/(2q)``.
times = np.geomspace(10, 1000, 9)
for curve in w_estimate_curves(k, g, times, (1.0, 2.0, 4.0)):
    print(f"{curve.label:10s} slope {fit_rate(curve).exponent:+.3f}")

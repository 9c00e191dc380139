"""
Nonlocal versus local linear flow
=================================

For a datum with tail ``A |x|^-alpha`` the rescaled gap
``t^(alpha/2) |u_L - u_Delta|_inf`` between the nonlocal flow and the heat
flow with diffusivity ``a`` tends to zero.
"""
import numpy as np

from nonlocal_absorption import Grid, InitialDatum, fit_rate, linear_error_curve, make_kernel

k = make_kernel("bump", 1.0, 1)
g = Grid(1, 400.0, 2**15)
datum = InitialDatum(1.0, 0.5)

curve = linear_error_curve(k, datum, g, np.geomspace(10, 1000, 9))
for t, v in zip(curve.times, curve.values):
    print(f"t={t:8.2f}  t^(1/4)|u_L - u_Delta| = {v:.4e}")
print("fitted slope:", round(fit_rate(curve).exponent, 3))

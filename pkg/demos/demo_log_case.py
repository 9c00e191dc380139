"""
The borderline tail alpha = N
=============================

When the datum decays like ``A |x|^-N`` its mass within ``|x| < sqrt t``
grows like ``log t``.  The solution then behaves like
``C log t U_a(x, t)`` with ``C = A |S^(N-1)| / 2``.
"""
import math

from nonlocal_absorption import (
    Grid,
    InitialDatum,
    ProblemSpec,
    log_case_constant,
    log_constant_oracle,
    log_error_curve,
    make_kernel,
    solve,
)

k = make_kernel("bump", 1.0, 1)
A = 0.1
C = log_case_constant(A, 1)
print("C =", C.value, " heat-flow fit:", log_constant_oracle(A, 1, k.diffusivity, (1e2, 1e4)))
print("N = 2: C / A =", log_case_constant(1.0, 2).value, "(= pi)")

spec = ProblemSpec(k, InitialDatum(A, 1.0), 4.0, Grid(1, 400.0, 2**15))
traj = solve(spec, [10, 20, 50, 100, 200, 500, 1000])
curve = log_error_curve(traj, C, k.diffusivity, 2.0)
for t, v in zip(curve.times, curve.values):
    print(f"t={t:6.0f}  t^(1/2)|u/log t - C U_a| = {v:.4e}  (log t = {math.log(t):.2f})")

"""
Validating the time stepper
===========================

Strang splitting alternates the exact absorption flow with the exact
linear step.  On short horizons the Duhamel formula is a contraction, and
its fixed point gives an independent solution to compare against.
"""
from nonlocal_absorption import (
    Grid,
    InitialDatum,
    ProblemSpec,
    contraction_constant,
    make_kernel,
    outer_decade_range,
    picard_solve,
    richardson_order,
    solve,
    solve_fixed,
)

k = make_kernel("bump", 1.0, 1)
spec = ProblemSpec(k, InitialDatum(0.3, 0.5), 6.0, Grid(1, 100.0, 4096))
print("contraction estimate on [0, 0.5]:", contraction_constant(spec, 0.5))
res = picard_solve(spec, 0.5, n_time=100)
print("Picard iterations:", res.iterations)
print("sup |Picard - Strang|:", abs(res.field.values - solve_fixed(spec, 0.5, 100).values).max())

# %%
# Halving the step divides the error by four.
stiff = ProblemSpec(k, InitialDatum(1.0, 0.5), 3.0, Grid(1, 32.0, 512))
print("observed order:", richardson_order(stiff, 1.0, 10))

# %%
# The absorption does not touch the tail on bounded time intervals:
# |x|^alpha u stays near A on the outer decade of the domain.
tail = ProblemSpec(k, InitialDatum(1.0, 0.5), 6.0, Grid(1, 400.0, 2**15))
for u in solve(tail, [1.0, 2.0, 5.0]).snapshots:
    print(f"t={u.time}: |x|^(1/2) u in", outer_decade_range(u, 0.5))

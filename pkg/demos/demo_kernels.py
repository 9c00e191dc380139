"""
Kernels and their diffusivity
=============================

A radially symmetric probability kernel ``J`` behaves, at large scales,
like the Laplacian with diffusivity ``a = (1/2N) int J(z) |z|^2 dz``.
"""
import numpy as np

from nonlocal_absorption import Grid, kernel_symbol, make_kernel, symbol_diffusivity

# %%
# Three shapes on the unit ball, in one and two dimensions.
for N in (1, 2):
    for shape in ("bump", "uniform", "quadratic"):
        k = make_kernel(shape, 1.0, N)
        print(f"N={N} {shape:9s} a = {k.diffusivity:.10f}")

# %%
# The diffusivity scales with the square of the support radius.
k = make_kernel("bump", 1.0, 1)
print("radius 2 / radius 1:", k.scaled(2.0).diffusivity / k.diffusivity)

# %%
# On a periodic grid the discrete symbol satisfies ``J^(0) = 1`` and
# ``J^(xi) = 1 - a xi^2 + O(xi^4)``; a fit near zero recovers ``a``.
g = Grid(1, 200.0, 2**14)
sym = kernel_symbol(k, g)
print("J^(0) =", sym[0])
print("a from the symbol:", symbol_diffusivity(k, g), " exact:", k.diffusivity)

# %%
# The uniform kernel has symbol sin(xi)/xi.
u = make_kernel("uniform", 1.0, 1)
xi = g.frequencies[1:6]
print(np.c_[xi, kernel_symbol(u, g)[1:6], np.sin(xi) / xi])

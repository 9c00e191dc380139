"""
The self-similar heat profile
=============================

The heat flow from ``A |x|^-alpha`` is ``t^(-alpha/2) f(|x|/sqrt t)``.  The
profile ``f`` is tabulated by quadrature; it also has a closed form through
Kummer's function, which serves as a check.
"""
import math

import numpy as np
from scipy import special

from nonlocal_absorption import self_similar_profile

alpha, A, a = 0.5, 1.0, 1 / 6
prof = self_similar_profile(alpha, A, a, eta_max=4.0, n_eta=401)

eta = np.linspace(0, 4, 9)
closed = A * (4 * a) ** (-alpha / 2) * math.gamma((1 - alpha) / 2) / math.gamma(0.5) * special.hyp1f1(
    alpha / 2, 0.5, -(eta**2) / (4 * a)
)
for e, f, c in zip(eta, prof.f(eta), closed):
    print(f"eta={e:4.1f}  f={f:.10f}  closed form={c:.10f}")

# %%
# Far out the profile recovers the tail of the datum: eta^alpha f(eta) -> A.
far = self_similar_profile(alpha, A, a, eta_max=20.0, n_eta=201)
print("20^alpha f(20) =", 20**alpha * far.values[-1])

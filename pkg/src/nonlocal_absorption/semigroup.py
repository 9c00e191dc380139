"""Spectral evaluation of the linear flows.

The discrete generator ``f -> J*f - f`` is diagonal in Fourier space with
eigenvalues ``J^(xi) - 1``, so ``S(t)`` is applied exactly by multiplying
by ``exp((J^(xi) - 1) t)``.  The heat flow with diffusivity ``a`` uses the
multiplier ``exp(-a |xi|^2 t)`` on the same frequencies.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import integrate, interpolate, special

from .grid import Field, Grid, _check_finite
from .kernel import Kernel, sphere_measure


def _linear_multiplier(k: Kernel, grid: Grid, dt: float) -> np.ndarray:
    return np.exp((k.rsymbol(grid) - 1.0) * dt)


def propagate_linear(k: Kernel, f: Field, dt: float) -> Field:
    """``S(dt) f``; the time stamp advances by ``dt``."""
    if dt < 0:
        raise ValueError(f"cannot propagate backwards in time (dt = {dt})")
    _check_finite(f)
    g = f.grid
    if dt == 0:
        return f.replace(f.values.copy())
    out = g.irfft(g.rfft(f.values) * _linear_multiplier(k, g, dt))
    return f.replace(out, f.time + dt)


def w_part(k: Kernel, t: float, grid: Grid) -> Field:
    """Smooth part ``W(., t)`` of the fundamental solution ``e^-t delta + W``.

    Computed as the inverse transform of ``exp((J^ - 1) t) - exp(-t)``; the
    discrete delta is ``1 / h^N`` at the origin node.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    k.check_resolved(grid)
    mult = _linear_multiplier(k, grid, t) - math.exp(-t)
    vals = np.fft.fftshift(grid.irfft(mult)) / grid.cell_volume
    return Field(grid, vals, t)


def heat_kernel(a: float, t: float, grid: Grid) -> Field:
    """Gaussian ``(4 pi a t)^(-N/2) exp(-|x|^2 / (4 a t))`` sampled on the grid."""
    if t <= 0:
        raise ValueError(f"heat kernel needs t > 0, got {t}")
    if not a > 0:
        raise ValueError("diffusivity must be positive")
    N = grid.dimension
    vals = (4 * math.pi * a * t) ** (-N / 2) * np.exp(-grid.radius**2 / (4 * a * t))
    return Field(grid, vals, t)


def heat_semigroup(f: Field, a: float, dt: float) -> Field:
    """Heat flow with diffusivity ``a`` over ``dt``, by Fourier multiplication."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    g = f.grid
    if dt == 0:
        return f.replace(f.values.copy())
    out = g.irfft(g.rfft(f.values) * np.exp(-a * g.rfreq_sq * dt))
    return f.replace(out, f.time + dt)


# ---------------------------------------------------------------------------
# self-similar profile of the heat flow from A |x|^-alpha


def _profile_integral(eta: float, alpha: float, a: float, N: int, rho: float) -> float:
    """``int G_a(eta - z, 1) |z|^-alpha dz`` reduced to a radial integral.

    The inner part ``|z| <= rho`` is integrated against the algebraic weight
    ``r^(N-1-alpha)`` (QUADPACK QAWS), so the singularity is exact; the outer
    part is smooth and handled adaptively, truncated where the Gaussian
    factor is below ``1e-40``.
    """
    width = math.sqrt(4 * a) * 10.0
    if N == 1:
        c = 1.0 / math.sqrt(4 * math.pi * a)

        def smooth(r):
            return c * (math.exp(-((eta - r) ** 2) / (4 * a)) + math.exp(-((eta + r) ** 2) / (4 * a)))

    else:

        def smooth(r):
            return math.exp(-((eta - r) ** 2) / (4 * a)) * special.i0e(eta * r / (2 * a)) / (2 * a)

    power = N - 1 - alpha
    inner, _ = integrate.quad(smooth, 0.0, rho, weight="alg", wvar=(power, 0.0), epsabs=1e-14, epsrel=1e-12)
    hi = eta + width
    pts = [p for p in (eta - width, eta) if rho < p < hi]
    outer, _ = integrate.quad(
        lambda r: smooth(r) * r**power, rho, hi, points=pts or None, epsabs=1e-14, epsrel=1e-12, limit=400
    )
    return inner + outer


@dataclass(frozen=True, eq=False)
class SelfSimilarProfile:
    """``U(x, t) = t^(-alpha/2) f(|x| / sqrt(t))`` for the heat flow from ``A |x|^-alpha``.

    Only the supercritical (absorption-free) limit is represented.
    """

    alpha: float
    amplitude: float
    diffusivity: float
    dimension: int
    eta: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "_spline", interpolate.CubicSpline(self.eta, self.values, bc_type=((1, 0.0), "not-a-knot")))

    @property
    def eta_max(self) -> float:
        return float(self.eta[-1])

    def f(self, eta):
        eta = np.abs(np.asarray(eta, dtype=float))
        if np.any(eta > self.eta_max * (1 + 1e-12)):
            raise ValueError(f"profile evaluated beyond eta_max = {self.eta_max}")
        return self._spline(eta)

    def __call__(self, r, t: float):
        """``U(r, t)`` at distance ``r`` and time ``t > 0``."""
        return t ** (-self.alpha / 2) * self.f(np.asarray(r) / math.sqrt(t))

    def field(self, grid: Grid, t: float, mask: np.ndarray | None = None) -> Field:
        vals = np.zeros(grid.shape)
        m = np.ones(grid.shape, bool) if mask is None else mask
        vals[m] = self(grid.radius[m], t)
        return Field(grid, vals, t)

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            fh.write(f"# alpha={self.alpha!r}\n# A={self.amplitude!r}\n")
            fh.write(f"# diffusivity={self.diffusivity!r}\n# N={self.dimension!r}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["eta", "f"])
            for e, v in zip(self.eta, self.values):
                w.writerow([repr(float(e)), repr(float(v))])
        return path


def self_similar_profile(
    alpha: float, A: float, a: float, eta_max: float = 4.0, n_eta: int = 401, dimension: int = 1
) -> SelfSimilarProfile:
    """Tabulate ``f(eta) = A int G_a(eta - z, 1) |z|^-alpha dz`` on ``[0, eta_max]``.

    The table is interpolated by a cubic spline with ``f'(0) = 0``.
    """
    N = int(dimension)
    if alpha >= N:
        raise ValueError("self-similar profile needs alpha < N; for alpha = N use log_case_constant")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if n_eta < 8 or not eta_max > 0:
        raise ValueError("need eta_max > 0 and at least 8 profile nodes")
    rho = 0.1 * min(1.0, math.sqrt(a))
    eta = np.linspace(0.0, eta_max, n_eta)
    vals = np.array([A * _profile_integral(e, alpha, a, N, rho) for e in eta])
    return SelfSimilarProfile(alpha, A, a, N, eta, vals)


@dataclass(frozen=True)
class LogCaseConstant:
    """Constant ``C`` with ``u / log t ~ C U_a`` when ``alpha = N``."""

    value: float
    amplitude: float
    dimension: int

    def __post_init__(self):
        if not self.value > 0 and self.amplitude > 0:
            raise ValueError("log-case constant must be positive")


def log_case_constant(A: float, N: int) -> LogCaseConstant:
    """``C = A |S^(N-1)| / 2``.

    The heat flow from a datum with tail ``A |x|^-N`` sees an effective mass
    ``int_{1 < |y| < sqrt(t)} A |y|^-N dy = (A |S^(N-1)| / 2) log t``.
    """
    if N not in (1, 2):
        raise ValueError("log-case constant is provided for N = 1, 2")
    return LogCaseConstant(A * sphere_measure(N) / 2.0, A, N)

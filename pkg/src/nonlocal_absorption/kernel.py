"""Radial, compactly supported probability kernels ``J`` and their symbols."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft
from scipy import integrate

from .grid import Grid

SHAPES = ("bump", "uniform", "quadratic")


def _bump(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    m = s < 1.0
    out[m] = np.exp(-1.0 / (1.0 - s[m] ** 2))
    return out


def _uniform(s):
    return (np.asarray(s, dtype=float) < 1.0).astype(float)


def _quadratic(s):
    return np.clip(1.0 - np.asarray(s, dtype=float) ** 2, 0.0, None)


_PROFILES = {"bump": _bump, "uniform": _uniform, "quadratic": _quadratic}


def sphere_measure(dimension: int) -> float:
    """Surface measure of the unit sphere in R^N (2 for N = 1, 2 pi for N = 2)."""
    return 2.0 * math.pi ** (dimension / 2) / math.gamma(dimension / 2)


def _radial_moment(shape: str, power: int) -> float:
    """``int_0^1 phi(s) s^power ds`` for the unscaled profile."""
    phi = _PROFILES[shape]
    val, _ = integrate.quad(lambda s: float(phi(s)) * s**power, 0.0, 1.0, epsabs=1e-15, epsrel=1e-13, limit=200)
    return val


@dataclass(frozen=True)
class Kernel:
    """``J(x) = c * phi(|x| / R)`` with ``int J = 1``.

    Build instances with :func:`make_kernel`; the normalization constant and
    the diffusivity are computed there by radial quadrature.
    """

    shape: str
    support_radius: float
    dimension: int
    normalization_constant: float
    diffusivity: float

    @property
    def R(self) -> float:
        return self.support_radius

    def __call__(self, r):
        """Kernel value at distance ``r`` from the origin."""
        return self.normalization_constant * _PROFILES[self.shape](np.abs(r) / self.support_radius)

    def check_resolved(self, grid: Grid):
        if grid.dimension != self.dimension:
            raise ValueError(f"kernel dimension {self.dimension} does not match grid dimension {grid.dimension}")
        if grid.spacing > self.support_radius / 4 * (1 + 1e-12):
            raise ValueError(
                f"grid spacing {grid.spacing:.4g} is coarser than R/4 = {self.support_radius / 4:.4g}; kernel unresolved"
            )

    def sample(self, grid: Grid) -> np.ndarray:
        return _samples(self, grid).copy()

    def rsymbol(self, grid: Grid) -> np.ndarray:
        """Discrete symbol on the real-FFT layout (cached per grid)."""
        return _rsymbol(self, grid)

    def scaled(self, h: float) -> "Kernel":
        """The kernel ``h^-N J(x / h)``."""
        return make_kernel(self.shape, self.support_radius * h, self.dimension)


def make_kernel(shape: str = "bump", radius: float = 1.0, dimension: int = 1) -> Kernel:
    if shape not in _PROFILES:
        raise ValueError(f"unknown kernel shape {shape!r}; expected one of {SHAPES}")
    if not radius > 0:
        raise ValueError(f"kernel radius must be positive, got {radius}")
    if int(dimension) != dimension or dimension < 1:
        raise ValueError(f"dimension must be a positive integer, got {dimension}")
    N = int(dimension)
    sigma = sphere_measure(N)
    mass = sigma * radius**N * _radial_moment(shape, N - 1)
    c = 1.0 / mass
    second = c * sigma * radius ** (N + 2) * _radial_moment(shape, N + 1)
    return Kernel(shape, float(radius), N, c, second / (2 * N))


def diffusivity(k: Kernel) -> float:
    """``(1 / 2N) int J(z) |z|^2 dz``."""
    return k.diffusivity


def kernel_from_spec(spec: dict) -> Kernel:
    """Build from ``{"shape": ..., "radius": ..., "dimension": ...}``."""
    unknown = set(spec) - {"shape", "radius", "dimension"}
    if unknown:
        raise ValueError(f"unknown kernel keys {sorted(unknown)}")
    return make_kernel(spec.get("shape", "bump"), float(spec.get("radius", 1.0)), int(spec.get("dimension", 1)))


def _cell_fraction_1d(x, h, R):
    lo = np.maximum(x - h / 2, -R)
    hi = np.minimum(x + h / 2, R)
    return np.clip(hi - lo, 0.0, None) / h


@lru_cache(maxsize=32)
def _samples(k: Kernel, grid: Grid) -> np.ndarray:
    k.check_resolved(grid)
    h = grid.spacing
    vals = k(grid.radius)
    if k.shape == "uniform":
        # a jump at |x| = R: weight nodes by the part of their cell inside the ball
        if grid.dimension == 1:
            vals = k.normalization_constant * _cell_fraction_1d(grid.axis, h, k.R)
        else:
            sub = (np.arange(16) + 0.5) / 16 - 0.5
            x, y = grid.coords
            near = np.abs(grid.radius - k.R) < h
            frac = (grid.radius < k.R).astype(float)
            xs = x[near][:, None, None] + h * sub[None, :, None]
            ys = y[near][:, None, None] + h * sub[None, None, :]
            frac[near] = np.mean(np.hypot(xs, ys) < k.R, axis=(1, 2))
            vals = k.normalization_constant * frac
    vals = vals / (vals.sum() * grid.cell_volume)
    vals.setflags(write=False)
    return vals


@lru_cache(maxsize=32)
def _rsymbol(k: Kernel, grid: Grid) -> np.ndarray:
    s = _samples(k, grid)
    sym = sfft.rfftn(np.fft.ifftshift(s)).real * grid.cell_volume
    sym.setflags(write=False)
    return sym


def kernel_symbol(k: Kernel, grid: Grid) -> np.ndarray:
    """``J^(xi)`` on the grid's full FFT frequency layout.

    The transform is taken of the sampled kernel, so ``J^(0) = 1`` exactly.
    """
    s = _samples(k, grid)
    return sfft.fftn(np.fft.ifftshift(s)).real * grid.cell_volume


def discrete_diffusivity(k: Kernel, grid: Grid) -> float:
    """Second-moment constant of the sampled kernel."""
    s = _samples(k, grid)
    return float(np.sum(s * grid.radius**2) * grid.cell_volume / (2 * grid.dimension))


def symbol_diffusivity(k: Kernel, grid: Grid, xi_max: float = 0.1) -> float:
    """Recover the diffusivity from ``(1 - J^(xi)) / xi^2 = a - b xi^2`` for ``0 < |xi| <= xi_max``."""
    sym = kernel_symbol(k, grid)
    line = sym if grid.dimension == 1 else sym[:, 0]
    xi = grid.frequencies
    m = (xi > 0) & (xi <= xi_max)
    if m.sum() < 3:
        raise ValueError("too few frequencies below xi_max; enlarge the domain")
    y = (1.0 - line[m]) / xi[m] ** 2
    coef = np.polyfit(xi[m] ** 2, y, 1)
    return float(coef[1])

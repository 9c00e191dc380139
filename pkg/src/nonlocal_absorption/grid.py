"""Periodic grids, sampled fields, initial data and the norms used by the checks.

Every field lives on a uniform periodic grid covering ``[-L, L)^N`` with ``n``
points per axis.  The node at index ``n // 2`` is the origin, so kernels and
data sampled with :meth:`Grid.radius` are centred.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.fft as sfft

FFT_WORKERS = 1


@dataclass(frozen=True)
class Grid:
    dimension: int
    half_length: float
    points_per_axis: int

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError(f"only N = 1 or N = 2 grids are supported, got N = {self.dimension}")
        n = self.points_per_axis
        if n < 16 or n & (n - 1):
            raise ValueError(f"points_per_axis must be a power of two >= 16, got {n}")
        if not self.half_length > 0:
            raise ValueError("half_length must be positive")

    @property
    def n(self) -> int:
        return self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dimension

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.n

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dimension

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.half_length + self.spacing * np.arange(self.n)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        if self.dimension == 1:
            return (self.axis,)
        return tuple(np.meshgrid(self.axis, self.axis, indexing="ij"))

    @cached_property
    def radius(self) -> np.ndarray:
        if self.dimension == 1:
            return np.abs(self.axis)
        x, y = self.coords
        return np.hypot(x, y)

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Angular frequencies of one axis in FFT order (period ``2L``)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)

    @cached_property
    def freq_sq(self) -> np.ndarray:
        """``|xi|^2`` on the full FFT layout."""
        return self._freq_sq(self.frequencies)

    @cached_property
    def rfreq_sq(self) -> np.ndarray:
        """``|xi|^2`` on the real-FFT layout used for time evolution."""
        last = 2.0 * np.pi * np.fft.rfftfreq(self.n, d=self.spacing)
        if self.dimension == 1:
            return last**2
        return self.frequencies[:, None] ** 2 + last[None, :] ** 2

    def _freq_sq(self, xi):
        if self.dimension == 1:
            return xi**2
        return xi[:, None] ** 2 + xi[None, :] ** 2

    def doubled(self) -> "Grid":
        """Same spacing on twice the domain, used by truncation audits."""
        return Grid(self.dimension, 2.0 * self.half_length, 2 * self.n)

    def restrict(self, values: np.ndarray, coarse: "Grid") -> np.ndarray:
        """Restrict values on this (larger, same-spacing) grid to ``coarse``."""
        if not math.isclose(coarse.spacing, self.spacing, rel_tol=1e-12):
            raise ValueError("restriction needs grids with equal spacing")
        off = (self.n - coarse.n) // 2
        sl = (slice(off, off + coarse.n),) * self.dimension
        return values[sl]

    # transforms on the real-FFT layout
    def rfft(self, values):
        return sfft.rfftn(values, workers=FFT_WORKERS)

    def irfft(self, coeffs):
        return sfft.irfftn(coeffs, s=self.shape, workers=FFT_WORKERS)


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples on a grid, stamped with a time."""

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values of shape {vals.shape} do not match grid shape {self.grid.shape}")
        if self.time < 0:
            raise ValueError("time stamp must be nonnegative")
        object.__setattr__(self, "values", vals)

    def replace(self, values, time=None) -> "Field":
        return Field(self.grid, values, self.time if time is None else time)

    def integral(self) -> float:
        return float(self.values.sum() * self.grid.cell_volume)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def __sub__(self, other: "Field") -> "Field":
        return self.replace(self.values - other.values)

    def to_csv(self, path, **header) -> Path:
        """Write ``x[,y],value`` rows; ``header`` entries become ``# key=value`` lines."""
        path = Path(path)
        meta = {"t": self.time, "L": self.grid.half_length, "n": self.grid.n}
        meta.update(header)
        with path.open("w", newline="") as fh:
            for key, val in meta.items():
                fh.write(f"# {key}={val!r}\n")
            writer = csv.writer(fh, lineterminator="\n")
            if self.grid.dimension == 1:
                writer.writerow(["x", "value"])
                for x, v in zip(self.grid.axis, self.values):
                    writer.writerow([repr(float(x)), repr(float(v))])
            else:
                writer.writerow(["x", "y", "value"])
                x, y = self.grid.coords
                for xi, yi, v in zip(x.ravel(), y.ravel(), self.values.ravel()):
                    writer.writerow([repr(float(xi)), repr(float(yi)), repr(float(v))])
        return path


def read_field_csv(path) -> Field:
    """Inverse of :meth:`Field.to_csv`."""
    meta = {}
    rows = []
    with Path(path).open() as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key] = val
            else:
                rows.append(line)
    reader = csv.reader(rows)
    header = next(reader)
    data = np.array([[float(c) for c in row] for row in reader])
    dim = len(header) - 1
    grid = Grid(dim, float(meta["L"]), int(meta["n"]))
    values = data[:, -1].reshape(grid.shape)
    return Field(grid, values, float(meta["t"]))


@dataclass(frozen=True)
class ParabolaWindow:
    """The ball ``|x| <= K sqrt(t)`` over which the rescaled errors are measured."""

    K: float

    def __post_init__(self):
        if not self.K > 0:
            raise ValueError("window constant K must be positive")

    def radius(self, t: float) -> float:
        return self.K * math.sqrt(t)

    def mask(self, grid: Grid, t: float) -> np.ndarray:
        r = self.radius(t)
        if r > grid.half_length / 2 * (1 + 1e-12):
            raise ValueError(
                f"window radius K*sqrt(t) = {r:.4g} exceeds half the domain (L/2 = {grid.half_length / 2:.4g})"
            )
        return grid.radius <= r * (1 + 1e-12)


@dataclass(frozen=True, eq=False)
class InitialDatum:
    """Bounded nonnegative datum with ``|x|^alpha u0(x) -> A``.

    ``form`` is one of

    * ``"regularized"``: ``A (1 + |x|^2)^(-alpha/2)``;
    * ``"matched_core"``: ``A |x|^-alpha`` outside ``|x| < core_radius`` and the
      constant carrying the same mass inside (needs ``alpha < N``);
    * ``"samples"``: user values on a given grid, with declared ``A`` and ``alpha``.
    """

    amplitude: float
    alpha: float
    form: str = "regularized"
    core_radius: float = 1.0
    samples: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude A must be nonnegative")
        if not self.alpha > 0:
            raise ValueError("tail exponent alpha must be positive")
        if self.form not in ("regularized", "matched_core", "samples"):
            raise ValueError(f"unknown datum form {self.form!r}")
        if self.form == "samples" and self.samples is None:
            raise ValueError("form 'samples' needs sample values")

    @property
    def bound(self) -> float:
        """A constant ``B`` with ``(1 + |x|)^alpha u0(x) <= B``."""
        A, a = self.amplitude, self.alpha
        if self.form == "regularized":
            # (1+r)^2 <= 2 (1+r^2)
            return A * 2.0 ** (a / 2)
        if self.form == "matched_core":
            r0 = self.core_radius
            return max(self.core_value(1) * (1 + r0) ** a, A * (1 + 1 / r0) ** a)
        return float("nan")

    def core_value(self, dimension: int) -> float:
        if self.alpha >= dimension:
            raise ValueError("a mass-matched core needs alpha < N")
        return self.amplitude * self.core_radius ** (-self.alpha) * dimension / (dimension - self.alpha)

    def sup(self, dimension: int = 1) -> float:
        if self.form == "regularized":
            return self.amplitude
        if self.form == "matched_core":
            return self.core_value(dimension)
        return float(np.max(np.abs(self.samples)))

    def sample(self, grid: Grid) -> Field:
        A, a = self.amplitude, self.alpha
        r = grid.radius
        if self.form == "regularized":
            vals = A * (1.0 + r**2) ** (-a / 2)
        elif self.form == "matched_core":
            inside = r < self.core_radius
            vals = np.empty_like(r)
            vals[inside] = self.core_value(grid.dimension)
            vals[~inside] = A * r[~inside] ** (-a)
        else:
            vals = np.asarray(self.samples, dtype=float)
            if vals.shape != grid.shape:
                raise ValueError("sample array does not match the grid")
            if vals.min() < 0:
                raise ValueError("initial datum must be nonnegative")
        return Field(grid, vals, 0.0)

    def check_tail(self, grid: Grid, tol: float = 0.02) -> tuple[float, float]:
        """Raise unless ``|x|^alpha u0`` lies within ``tol`` of ``A`` on the outer decade."""
        lo, hi = outer_decade_range(self.sample(grid), self.alpha)
        A = self.amplitude
        if A == 0:
            if hi > 0:
                raise ValueError("zero-amplitude datum must vanish on the outer decade")
            return lo, hi
        if abs(lo - A) > tol * A or abs(hi - A) > tol * A:
            raise ValueError(
                f"tail law not resolved: |x|^alpha u0 in [{lo:.4g}, {hi:.4g}] on the outer decade, A = {A}"
            )
        return lo, hi


def zero_datum(alpha: float = 0.5) -> InitialDatum:
    return InitialDatum(0.0, alpha)


def _check_finite(f: Field):
    if not f.is_finite():
        raise FloatingPointError("field contains NaN or infinite values")


def convolve(k, f: Field) -> Field:
    """Periodic convolution ``J * f`` through the kernel's discrete symbol."""
    _check_finite(f)
    g = f.grid
    sym = k.rsymbol(g)
    return f.replace(g.irfft(g.rfft(f.values) * sym))


def sup_norm(f: Field, window: ParabolaWindow | None = None, t: float | None = None) -> float:
    if window is None:
        return float(np.max(np.abs(f.values)))
    t = f.time if t is None else t
    mask = window.mask(f.grid, t)
    return float(np.max(np.abs(f.values[mask])))


def lq_norm(f: Field, q: float) -> float:
    if q < 1:
        raise ValueError(f"L^q norms need q >= 1, got {q}")
    if math.isinf(q):
        return sup_norm(f)
    return float((np.sum(np.abs(f.values) ** q) * f.grid.cell_volume) ** (1.0 / q))


def weak_lq_seminorm(f: Field, q: float, levels: int | None = 64) -> float:
    """``sup_lambda lambda |{|f| >= lambda}|^(1/q)`` over sampled levels.

    Levels are ``levels`` geometric values between the smallest positive and
    the largest ``|f|``.  The level set is closed (``>=``), which is the
    left limit of the open one, so a supremum approached as ``lambda`` rises
    to a data value is attained.  ``levels=None`` uses every data value,
    which gives the exact supremum of the sampled function.
    """
    if q < 1:
        raise ValueError(f"weak L^q needs q >= 1, got {q}")
    a = np.abs(f.values).ravel()
    a = a[a > 0]
    if a.size == 0:
        return 0.0
    vol = f.grid.cell_volume
    desc = np.sort(a)[::-1]
    if levels is None:
        counts = np.arange(1, desc.size + 1)
        return float(np.max(desc * (counts * vol) ** (1.0 / q)))
    lam = np.geomspace(desc[-1], desc[0], levels)
    # number of samples >= lam
    counts = desc.size - np.searchsorted(desc[::-1], lam, side="left")
    return float(np.max(lam * (counts * vol) ** (1.0 / q)))


def tail_ratio(f: Field, alpha: float, r_max: float | None = None, n_shells: int | None = None):
    """Statistics of ``|x|^alpha f`` over dyadic shells ``[r/2, r)``.

    Returns an array with rows ``(r_inner, r_outer, max, min)``, outermost
    shell first.  Shells stop at ``r_max`` (default ``L``) so that corners of
    a square domain are left out.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    g = f.grid
    r_max = g.half_length if r_max is None else r_max
    r = g.radius
    weighted = r**alpha * f.values
    rows = []
    outer = r_max
    while outer > 2 * g.spacing and (n_shells is None or len(rows) < n_shells):
        inner = outer / 2
        m = (r >= inner) & (r <= outer)
        if m.any():
            rows.append((inner, outer, float(weighted[m].max()), float(weighted[m].min())))
        outer = inner
    return np.array(rows)


def outer_decade_range(f: Field, alpha: float, r_max: float | None = None) -> tuple[float, float]:
    """Min and max of ``|x|^alpha f`` over ``r_max/10 <= |x| <= r_max``."""
    g = f.grid
    r_max = g.half_length if r_max is None else r_max
    r = g.radius
    m = (r >= r_max / 10) & (r <= r_max)
    w = r[m] ** alpha * f.values[m]
    return float(w.min()), float(w.max())

"""Solvers for ``u_t = J*u - u - |u|^(p-1) u`` on a periodic grid.

:func:`solve` uses Strang splitting in which both sub-flows are exact: the
linear flow is spectral (see :mod:`.semigroup`) and the absorption ODE
``w' = -|w|^(p-1) w`` has a closed form.  :func:`picard_solve` iterates the
variation-of-constants map instead and exists to cross-check the splitting.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import Field, Grid, InitialDatum, sup_norm
from .kernel import Kernel
from .semigroup import _linear_multiplier, propagate_linear

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    kernel: Kernel
    datum: InitialDatum
    p: float
    grid: Grid

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"absorption exponent must satisfy p > 1, got {self.p}")
        self.kernel.check_resolved(self.grid)

    @property
    def supercritical(self) -> bool:
        return self.p > 1 + 2 / self.datum.alpha

    def require_supercritical(self):
        if not self.supercritical:
            raise ValueError(
                f"p = {self.p} is not supercritical for alpha = {self.datum.alpha} (need p > {1 + 2 / self.datum.alpha})"
            )

    def initial_field(self) -> Field:
        return self.datum.sample(self.grid)

    def on_grid(self, grid: Grid) -> "ProblemSpec":
        return ProblemSpec(self.kernel, self.datum, self.p, grid)


@dataclass(frozen=True)
class SolverConfig:
    """Time-step schedule ``dt = min(dt_max, max(dt_min, t * dt_fraction))``."""

    dt_max: float = 2.0
    dt_min: float = 0.02
    dt_fraction: float = 1 / 50

    def __post_init__(self):
        if not (0 < self.dt_min <= self.dt_max and self.dt_fraction > 0):
            raise ValueError("need 0 < dt_min <= dt_max and dt_fraction > 0")

    def dt(self, t: float) -> float:
        return min(self.dt_max, max(self.dt_min, t * self.dt_fraction))

    def refined(self, factor: float = 2.0) -> "SolverConfig":
        return SolverConfig(self.dt_max / factor, self.dt_min / factor, self.dt_fraction / factor)


@dataclass(eq=False)
class Trajectory:
    snapshots: list[Field]
    spec: ProblemSpec
    config: SolverConfig
    steps: list[int] = field(default_factory=list)
    last_dt: list[float] = field(default_factory=list)
    splitting: str = "strang"

    @property
    def times(self) -> list[float]:
        return [s.time for s in self.snapshots]

    def at(self, t: float) -> Field:
        for s in self.snapshots:
            if math.isclose(s.time, t, rel_tol=1e-12, abs_tol=1e-12):
                return s
        raise KeyError(f"no snapshot at t = {t}; available: {self.times}")

    def export(self, directory, prefix: str = "u", audit_flags: dict | None = None) -> Path:
        """One field CSV per snapshot and an ``index.csv`` listing them."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        index = directory / f"{prefix}_index.csv"
        flags = audit_flags or {}
        with index.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "filename", "steps", "last_dt", "audit"])
            for i, snap in enumerate(self.snapshots):
                name = f"{prefix}_{i:03d}.csv"
                snap.to_csv(directory / name, alpha=self.spec.datum.alpha, A=self.spec.datum.amplitude)
                audit = ";".join(f"{k}={v}" for k, v in sorted(flags.items()))
                w.writerow([repr(snap.time), name, self.steps[i], repr(self.last_dt[i]), audit])
        return index


def absorption_step(f: Field, p: float, dt: float) -> Field:
    """Exact flow of ``w' = -|w|^(p-1) w`` over ``dt``, pointwise."""
    if not p > 1:
        raise ValueError(f"absorption exponent must satisfy p > 1, got {p}")
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    return f.replace(_absorb(f.values, p, dt), f.time + dt)


def _absorb(w: np.ndarray, p: float, dt: float) -> np.ndarray:
    # w (1 + (p-1) dt |w|^(p-1))^(-1/(p-1)) == sign(w) (|w|^(1-p) + (p-1) dt)^(-1/(p-1)), and 0 stays 0
    aw = np.abs(w)
    return w * (1.0 + (p - 1) * dt * aw ** (p - 1)) ** (-1.0 / (p - 1))


def _strang(values, grid, mult, p, dt):
    v = _absorb(values, p, dt / 2)
    v = grid.irfft(grid.rfft(v) * mult)
    return _absorb(v, p, dt / 2)


def step(f: Field, spec: ProblemSpec, dt: float) -> Field:
    """One Strang step: half absorption, exact linear step, half absorption."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    g = f.grid
    out = _strang(f.values, g, _linear_multiplier(spec.kernel, g, dt), spec.p, dt)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError(f"non-finite values after a step of size {dt} from t = {f.time}")
    return f.replace(out, f.time + dt)


def _evolve(values, t, t_end, spec, config, grid):
    """March from ``t`` to ``t_end``; returns the values, steps taken and last dt."""
    cache = {}
    n = 0
    dt = 0.0
    while t < t_end - 1e-12 * max(1.0, t_end):
        dt = min(config.dt(t), t_end - t)
        mult = cache.get(dt)
        if mult is None:
            mult = _linear_multiplier(spec.kernel, grid, dt)
            if len(cache) < 64:
                cache[dt] = mult
        values = _strang(values, grid, mult, spec.p, dt)
        t += dt
        n += 1
        if not np.all(np.isfinite(values)):
            raise FloatingPointError(f"non-finite values at t = {t:.6g} (dt = {dt:.3g})")
    return values, n, dt


def solve(spec: ProblemSpec, sample_times, config: SolverConfig | None = None, start: Field | None = None) -> Trajectory:
    """Snapshots of the solution at the requested times.

    ``start`` restarts from a stored field instead of the initial datum.
    """
    config = config or SolverConfig()
    times = [float(t) for t in sample_times]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("sample times must be strictly increasing")
    grid = spec.grid
    cur = start if start is not None else spec.initial_field()
    if times and times[0] < cur.time:
        raise ValueError("sample times precede the starting time")
    values, t = cur.values, cur.time
    traj = Trajectory([], spec, config)
    for T in times:
        values, n, dt = _evolve(values, t, T, spec, config, grid)
        t = T
        traj.snapshots.append(Field(grid, values, T))
        traj.steps.append(n)
        traj.last_dt.append(dt)
        log.debug("t = %g reached after %d steps (last dt %.3g)", T, n, dt)
    return traj


def solve_fixed(spec: ProblemSpec, horizon: float, n_steps: int) -> Field:
    """Uniform-step Strang solution at ``horizon``."""
    g = spec.grid
    dt = horizon / n_steps
    mult = _linear_multiplier(spec.kernel, g, dt)
    v = spec.initial_field().values
    for _ in range(n_steps):
        v = _strang(v, g, mult, spec.p, dt)
    return Field(g, v, horizon)


def richardson_order(spec: ProblemSpec, horizon: float, n_steps: int = 10) -> float:
    """Observed order from runs with ``n``, ``2n`` and ``4n`` uniform steps."""
    u1, u2, u4 = (solve_fixed(spec, horizon, m * n_steps).values for m in (1, 2, 4))
    e1 = np.max(np.abs(u1 - u2))
    e2 = np.max(np.abs(u2 - u4))
    return float(math.log2(e1 / e2))


def contraction_constant(spec: ProblemSpec, horizon: float) -> float:
    """Lipschitz bound ``p (2 |u0|_inf)^(p-1) horizon`` of the Duhamel map."""
    return spec.p * (2 * spec.datum.sup(spec.grid.dimension)) ** (spec.p - 1) * horizon


@dataclass
class PicardResult:
    field: Field
    iterations: int
    distances: list[float]


def picard_solve(spec: ProblemSpec, horizon: float, tol: float = 1e-12, n_time: int = 200, max_iter: int = 100):
    """Fixed point of ``T v = S(t) u0 - int_0^t S(t - s) |v|^(p-1) v ds``.

    The time integral uses the trapezoid rule on ``n_time`` uniform
    intervals, accumulated recursively in Fourier space.  Iterates start at
    ``v = S(t) u0`` and stop once successive sup-distances drop below
    ``tol``.  Returns a :class:`PicardResult`; the solution is ``.field``.
    """
    q = contraction_constant(spec, horizon)
    if q >= 0.5:
        raise ValueError(f"contraction estimate {q:.3g} >= 1/2; choose a horizon below {0.5 * horizon / q:.3g}")
    g = spec.grid
    ds = horizon / n_time
    e1 = _linear_multiplier(spec.kernel, g, ds)
    u0 = spec.initial_field().values
    # linear part at all mesh times
    lin = np.empty((n_time + 1,) + g.shape)
    c = g.rfft(u0)
    lin[0] = u0
    for j in range(1, n_time + 1):
        c = c * e1
        lin[j] = g.irfft(c)
    v = lin.copy()
    p = spec.p
    distances = []
    for it in range(1, max_iter + 1):
        new = np.empty_like(v)
        new[0] = u0
        acc = np.zeros_like(g.rfft(u0))
        prev = g.rfft(np.abs(v[0]) ** (p - 1) * v[0])
        for j in range(1, n_time + 1):
            cur = g.rfft(np.abs(v[j]) ** (p - 1) * v[j])
            acc = e1 * (acc + 0.5 * ds * prev) + 0.5 * ds * cur
            new[j] = lin[j] - g.irfft(acc)
            prev = cur
        d = float(np.max(np.abs(new - v)))
        distances.append(d)
        v = new
        if len(distances) > 2 and d > distances[-2] and d > tol:
            raise ValueError("Picard iterates diverge; choose a smaller horizon")
        if d < tol:
            break
    else:
        raise ValueError(f"Picard iteration did not reach tol = {tol} in {max_iter} iterations")
    return PicardResult(Field(g, v[-1], horizon), it, distances)


def linear_companion(k: Kernel, restart: Field, t: float) -> Field:
    """``S(t - t0)`` applied to a field stamped at ``t0``."""
    if t < restart.time:
        raise ValueError(f"companion requested at t = {t} before the restart time {restart.time}")
    return propagate_linear(k, restart, t - restart.time)


@dataclass(frozen=True)
class DuhamelResidual:
    direct: float
    quadrature: float
    t0: float
    t: float

    @property
    def relative_gap(self) -> float:
        return abs(self.direct - self.quadrature) / max(self.direct, self.quadrature, 1e-300)


def duhamel_residual(traj: Trajectory, t0: float, t: float, n_quad: int = 400) -> DuhamelResidual:
    """Two independent evaluations of ``|u(t) - S(t - t0) u(t0)|_inf``.

    ``direct`` subtracts the linear companion from the stored snapshot.
    ``quadrature`` re-solves from the snapshot at ``t0`` on ``n_quad``
    uniform steps and integrates ``int_{t0}^t S(t - s) |u|^(p-1) u ds``
    with the trapezoid rule.
    """
    if not t0 < t:
        raise ValueError("need t0 < t")
    try:
        start = traj.at(t0)
        end = traj.at(t)
    except KeyError as exc:
        raise ValueError(f"insufficient snapshots for the Duhamel quadrature: {exc}") from None
    spec = traj.spec
    k, g, p = spec.kernel, spec.grid, spec.p
    direct = sup_norm(end - linear_companion(k, start, t))

    ds = (t - t0) / n_quad
    e1 = _linear_multiplier(k, g, ds)
    v = start.values
    prev = g.rfft(np.abs(v) ** (p - 1) * v)
    acc = np.zeros_like(prev)
    for _ in range(n_quad):
        v = _strang(v, g, e1, p, ds)
        cur = g.rfft(np.abs(v) ** (p - 1) * v)
        acc = e1 * (acc + 0.5 * ds * prev) + 0.5 * ds * cur
        prev = cur
    quad = float(np.max(np.abs(g.irfft(acc))))
    return DuhamelResidual(direct, quad, t0, t)

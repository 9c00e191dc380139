"""Rescaled error curves and log-log rate fits."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import Field, Grid, InitialDatum, ParabolaWindow, lq_norm, sup_norm
from .kernel import Kernel
from .semigroup import LogCaseConstant, SelfSimilarProfile, heat_kernel, heat_semigroup, propagate_linear, w_part
from .solver import Trajectory


@dataclass
class ErrorCurve:
    label: str
    times: np.ndarray
    values: np.ndarray
    rescaling: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("curve times must increase")
        if np.any(self.values < 0):
            raise ValueError("error curves are nonnegative")

    def at(self, t: float) -> float:
        i = np.flatnonzero(np.isclose(self.times, t, rtol=1e-12))
        if i.size == 0:
            raise KeyError(f"curve {self.label!r} has no point at t = {t}")
        return float(self.values[i[0]])

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            fh.write(f"# label={self.label}\n")
            for k, v in sorted(self.rescaling.items()):
                fh.write(f"# {k}={v!r}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "value"])
            for t, v in zip(self.times, self.values):
                w.writerow([repr(float(t)), repr(float(v))])
        return path


@dataclass(frozen=True)
class RateFit:
    exponent: float
    log_constant: float
    residual: float
    n_points: int

    @property
    def constant(self) -> float:
        return math.exp(self.log_constant)


def fit_rate(curve: ErrorCurve) -> RateFit:
    """Least-squares line through ``(log t, log value)`` over the positive points."""
    m = curve.values > 0
    if m.sum() < 4:
        raise ValueError(f"curve {curve.label!r} has {int(m.sum())} positive points; a rate fit needs 4")
    x = np.log(curve.times[m])
    y = np.log(curve.values[m])
    slope, icpt = np.polyfit(x, y, 1)
    resid = float(np.max(np.abs(y - (slope * x + icpt))))
    return RateFit(float(slope), float(icpt), resid, int(m.sum()))


def conjugate(q: float) -> float:
    if q == 1:
        return math.inf
    if math.isinf(q):
        return 1.0
    return q / (q - 1)


def decade_means(curve: ErrorCurve) -> tuple[float, float]:
    """Means over the first and the last decade of the curve's time range."""
    t = curve.times
    first = curve.values[t <= t[0] * 10 * (1 + 1e-12)]
    last = curve.values[t >= t[-1] / 10 * (1 - 1e-12)]
    return float(first.mean()), float(last.mean())


def converges_to_zero(curve: ErrorCurve) -> bool:
    """Last-decade mean below half the first-decade mean, with a negative fitted slope."""
    first, last = decade_means(curve)
    return last < 0.5 * first and fit_rate(curve).exponent < 0


def _require_times(times):
    times = np.asarray(times, dtype=float)
    if times.size and times[-1] < 10 * times[0] * (1 - 1e-12):
        raise ValueError("times must span at least one decade")
    return times


def linear_error_curve(kernel: Kernel, datum: InitialDatum, grid: Grid, times) -> ErrorCurve:
    """``t^(alpha/2) |u_L(t) - u_Delta(t)|_inf`` from the same sampled datum."""
    times = _require_times(times)
    u0 = datum.sample(grid)
    a = kernel.diffusivity
    vals = []
    for t in times:
        uL = propagate_linear(kernel, u0, t)
        uD = heat_semigroup(u0, a, t)
        vals.append(t ** (datum.alpha / 2) * sup_norm(uL - uD))
    return ErrorCurve("linear", times, vals, {"power": datum.alpha / 2, "norm": "Linf"})


def supercritical_error_curve(traj: Trajectory, profile: SelfSimilarProfile, K: float, times=None) -> ErrorCurve:
    """``t^(alpha/2) sup_{|x| <= K sqrt t} |u - U_{alpha,A}|``."""
    if profile.alpha >= profile.dimension:
        raise ValueError("alpha = N has no self-similar profile; use log_error_curve")
    if K > profile.eta_max:
        raise ValueError(f"window constant K = {K} exceeds the profile range eta_max = {profile.eta_max}")
    window = ParabolaWindow(K)
    times = traj.times if times is None else times
    vals = []
    for t in times:
        u = traj.at(t)
        m = window.mask(u.grid, t)
        U = profile(u.grid.radius[m], t)
        vals.append(t ** (profile.alpha / 2) * float(np.max(np.abs(u.values[m] - U))))
    return ErrorCurve("supercritical", times, vals, {"power": profile.alpha / 2, "K": K})


def log_error_curve(traj: Trajectory, C: LogCaseConstant, a: float, K: float, times=None) -> ErrorCurve:
    """``t^(N/2) sup_{|x| <= K sqrt t} |u / log t - C U_a|``."""
    times = traj.times if times is None else times
    if min(times) < math.e**2:
        raise ValueError("log-case curves start at t >= e^2")
    window = ParabolaWindow(K)
    vals = []
    for t in times:
        u = traj.at(t)
        g = u.grid
        m = window.mask(g, t)
        G = heat_kernel(a, t, g).values[m]
        vals.append(t ** (g.dimension / 2) * float(np.max(np.abs(u.values[m] / math.log(t) - C.value * G))))
    return ErrorCurve("log-case", times, vals, {"power": "N/2", "log": True, "K": K})


def field_log_error(u: Field, C: LogCaseConstant, a: float, K: float) -> float:
    """Single-field version of :func:`log_error_curve`."""
    t = u.time
    g = u.grid
    m = ParabolaWindow(K).mask(g, t)
    G = heat_kernel(a, t, g).values[m]
    return t ** (g.dimension / 2) * float(np.max(np.abs(u.values[m] / math.log(t) - C.value * G)))


def w_estimate_curves(kernel: Kernel, grid: Grid, times, q_list=(1, 2, 4)) -> list[ErrorCurve]:
    """``|W - U_a|_{q'}`` and ``|W|_{q'}`` versus ``t`` for each ``q``."""
    times = np.asarray(times, dtype=float)
    for q in q_list:
        if q < 1:
            raise ValueError("q must lie in [1, inf]")
    a = kernel.diffusivity
    diff = {q: [] for q in q_list}
    whole = {q: [] for q in q_list}
    for t in times:
        W = w_part(kernel, t, grid)
        G = heat_kernel(a, t, grid)
        for q in q_list:
            qp = conjugate(q)
            diff[q].append(lq_norm(W - G, qp))
            whole[q].append(lq_norm(W, qp))
    curves = []
    for q in q_list:
        qp = conjugate(q)
        curves.append(ErrorCurve(f"W-U q={q}", times, diff[q], {"q": q, "q_conj": qp}))
        curves.append(ErrorCurve(f"W q={q}", times, whole[q], {"q": q, "q_conj": qp}))
    return curves


def truncation_audit(coarse: ErrorCurve, fine: ErrorCurve, tol: float = 0.1) -> tuple[bool, float]:
    """Compare a curve with its doubled-domain recomputation.

    Passes when every point changes by at most ``tol`` times its value.
    """
    change = np.abs(coarse.values - fine.values)
    scale = np.maximum(np.abs(coarse.values), 1e-300)
    worst = float(np.max(change / scale))
    return worst <= tol, worst

"""Acceptance criteria, one test each, at their stated tolerances.

Every test appends a ``PASS``/``FAIL`` line to the terminal summary.  The
long supercritical and log-case runs are shared between the criteria that
read them.
"""
import math
import time

import numpy as np
import pytest

from nonlocal_absorption.asymptotics import (
    ErrorCurve,
    fit_rate,
    linear_error_curve,
    log_error_curve,
    supercritical_error_curve,
)
from nonlocal_absorption.experiments import log_constant_oracle
from nonlocal_absorption.grid import Grid, InitialDatum, lq_norm, outer_decade_range, sup_norm
from nonlocal_absorption.kernel import make_kernel, symbol_diffusivity
from nonlocal_absorption.semigroup import (
    heat_kernel,
    log_case_constant,
    propagate_linear,
    self_similar_profile,
    w_part,
)
from nonlocal_absorption.solver import (
    ProblemSpec,
    linear_companion,
    picard_solve,
    richardson_order,
    solve,
    solve_fixed,
)

BUMP = make_kernel("bump", 1.0, 1)
W_GRID = Grid(1, 200.0, 2**14)
W_TIMES = np.geomspace(10, 1000, 9)
LONG_GRID = Grid(1, 400.0, 2**15)


class Criterion:
    def __init__(self, log, number, title, budget=None):
        self.log, self.number, self.title, self.budget = log, number, title, budget
        self.start = time.perf_counter()
        self.parts = []

    def check(self, ok, detail):
        self.parts.append((bool(ok), detail))

    def finish(self):
        elapsed = time.perf_counter() - self.start
        if self.budget is not None:
            self.check(elapsed < self.budget, f"runtime {elapsed:.2f}s < {self.budget}s")
        ok = all(p for p, _ in self.parts)
        detail = "; ".join(d for _, d in self.parts)
        self.log.append(f"[{'PASS' if ok else 'FAIL'}] {self.number:>2}. {self.title}: {detail}")
        failed = [d for p, d in self.parts if not p]
        assert ok, "; ".join(failed)


def test_01_mass_identity(acceptance_log):
    c = Criterion(acceptance_log, 1, "mass identity of W", budget=5)
    worst = max(abs(w_part(BUMP, t, W_GRID).integral() - (1 - math.exp(-t))) for t in (0.5, 1, 5, 10))
    c.check(worst <= 1e-8, f"max |sum W h - (1 - e^-t)| = {worst:.2e} <= 1e-8")
    c.finish()


def test_02_diffusivity_oracle(acceptance_log):
    c = Criterion(acceptance_log, 2, "diffusivity of the uniform kernel", budget=1)
    k = make_kernel("uniform", 1.0, 1)
    err = abs(k.diffusivity - 1 / 6)
    c.check(err <= 1e-10, f"|a - 1/6| = {err:.1e} <= 1e-10")
    err_sym = abs(symbol_diffusivity(k, W_GRID) - 1 / 6)
    c.check(err_sym <= 1e-4, f"symbol fit error {err_sym:.1e} <= 1e-4")
    c.finish()


def _w_minus_heat(q_conj):
    a = BUMP.diffusivity
    return np.array([lq_norm(w_part(BUMP, t, W_GRID) - heat_kernel(a, t, W_GRID), q_conj) for t in W_TIMES])


def test_03_w_heat_linf_rate(acceptance_log):
    c = Criterion(acceptance_log, 3, "|W - U_a|_inf rate", budget=30)
    vals = _w_minus_heat(math.inf)
    slope = fit_rate(ErrorCurve("W-U inf", W_TIMES, vals)).exponent
    c.check(abs(slope + 1.0) <= 0.15, f"slope {slope:.3f} in -1.0 +- 0.15")
    scaled = W_TIMES * vals
    ratio = scaled.max() / scaled.min()
    c.check(ratio <= 3, f"t |W - U_a|_inf max/min {ratio:.2f} <= 3")
    c.finish()


def test_04_w_heat_lq_rates(acceptance_log):
    c = Criterion(acceptance_log, 4, "|W - U_a|_q' rates", budget=60)
    N = 1
    for q in (1.0, 2.0, 4.0):
        q_conj = math.inf if q == 1 else q / (q - 1)
        slope = fit_rate(ErrorCurve(f"q={q}", W_TIMES, _w_minus_heat(q_conj))).exponent
        target = -(N + 1) / (2 * q)
        c.check(abs(slope - target) <= 0.15, f"q={q:g}: slope {slope:.3f} vs {target:.3f} +- 0.15")
    c.finish()


def test_05_linear_asymptotics(acceptance_log):
    c = Criterion(acceptance_log, 5, "linear asymptotics u_L vs u_Delta", budget=60)
    curve = linear_error_curve(BUMP, InitialDatum(1.0, 0.5), LONG_GRID, W_TIMES)
    dec = bool(np.all(np.diff(curve.values) < 0))
    c.check(dec, "t^(1/4)|u_L - u_Delta|_inf decreasing on [10, 1000]" if dec else "curve not decreasing")
    slope = fit_rate(curve).exponent
    c.check(slope <= -0.1, f"slope {slope:.3f} <= -0.1")
    c.finish()


def test_06_tail_preservation(acceptance_log):
    c = Criterion(acceptance_log, 6, "tail preservation", budget=60)
    datum = InitialDatum(1.0, 0.5)
    spec = ProblemSpec(BUMP, datum, 6.0, LONG_GRID)
    lo, hi = outer_decade_range(spec.initial_field(), 0.5)
    c.check(max(abs(lo - 1), abs(hi - 1)) <= 0.02, f"datum outer decade in [{lo:.4f}, {hi:.4f}]")
    traj = solve(spec, [1.0, 2.0, 5.0])
    worst = 0.0
    for u in traj.snapshots:
        lo, hi = outer_decade_range(u, 0.5)
        worst = max(worst, abs(lo - 1), abs(hi - 1))
    c.check(worst <= 0.05, f"|x|^(1/2) u within {worst:.4f} <= 0.05 of A for t <= 5")
    c.finish()


SUPER_TIMES = [10, 20, 40, 80, 100, 200, 400, 1000]


@pytest.fixture(scope="module")
def supercritical_run():
    start = time.perf_counter()
    datum = InitialDatum(0.1, 0.5, "matched_core")
    spec = ProblemSpec(BUMP, datum, 6.0, LONG_GRID)
    traj = solve(spec, SUPER_TIMES)
    return spec, traj, time.perf_counter() - start


def test_07_comparison(acceptance_log, supercritical_run):
    c = Criterion(acceptance_log, 7, "comparison 0 <= u <= u_L")
    spec, traj, _ = supercritical_run
    u0 = spec.initial_field()
    low = min(float(u.values.min()) for u in traj.snapshots)
    gap = max(float(np.max(u.values - propagate_linear(BUMP, u0, u.time).values)) for u in traj.snapshots)
    c.check(low >= -1e-10, f"min u = {low:.2e} >= -1e-10")
    c.check(gap <= 1e-10, f"max(u - u_L) = {gap:.2e} <= 1e-10")
    c.finish()


def test_08_main_theorem_supercritical(acceptance_log, supercritical_run):
    c = Criterion(acceptance_log, 8, "main theorem alpha < N")
    spec, traj, elapsed = supercritical_run
    t0 = time.perf_counter()
    prof = self_similar_profile(0.5, spec.datum.amplitude, BUMP.diffusivity, eta_max=3.5, n_eta=1401)
    curve = supercritical_error_curve(traj, prof, 3.0)
    ratio = curve.at(100) / curve.at(10)
    c.check(ratio < 0.5, f"E(100)/E(10) = {ratio:.3f} < 0.5")
    slope = fit_rate(curve).exponent
    c.check(slope < 0, f"slope on [10, 1000] = {slope:.3f} < 0")
    total = elapsed + time.perf_counter() - t0
    c.check(total < 300, f"runtime {total:.1f}s < 300s")
    c.finish()


@pytest.fixture(scope="module")
def log_run():
    start = time.perf_counter()
    spec = ProblemSpec(BUMP, InitialDatum(0.1, 1.0), 4.0, LONG_GRID)
    traj = solve(spec, [10, 20, 50, 100, 200, 500, 1000])
    return spec, traj, time.perf_counter() - start


def test_09_main_theorem_log_case(acceptance_log, log_run):
    c = Criterion(acceptance_log, 9, "main theorem alpha = N")
    spec, traj, elapsed = log_run
    t0 = time.perf_counter()
    A = spec.datum.amplitude
    C = log_case_constant(A, 1)
    oracle = log_constant_oracle(A, 1, BUMP.diffusivity, (1e2, 1e4))
    agree = abs(oracle - C.value) / C.value
    c.check(agree <= 0.03, f"C = A vs heat-flow fit {oracle / A:.4f} A ({agree:.1%} <= 3%)")
    curve = log_error_curve(traj, C, BUMP.diffusivity, 2.0)
    ratio = curve.at(1000) / curve.at(100)
    c.check(ratio < 1, f"E(1000)/E(100) = {ratio:.3f} < 1")
    total = elapsed + time.perf_counter() - t0
    c.check(total < 300, f"runtime {total:.1f}s < 300s")
    c.finish()


def test_10_duhamel_trend(acceptance_log, supercritical_run):
    c = Criterion(acceptance_log, 10, "Duhamel remainder trend")
    spec, traj, _ = supercritical_run
    vals = []
    for t0 in (10, 20, 40):
        t = 2 * t0
        comp = linear_companion(BUMP, traj.at(t0), t)
        vals.append(t ** 0.25 * sup_norm(traj.at(t) - comp))
    dec = all(b < a for a, b in zip(vals, vals[1:]))
    c.check(dec, "t^(1/4)|u - S(t - t0)u(t0)|_inf at t = 2 t0: " + ", ".join(f"{v:.3e}" for v in vals))
    c.finish()


def test_11_solver_crossval(acceptance_log):
    c = Criterion(acceptance_log, 11, "Picard vs Strang", budget=30)
    spec = ProblemSpec(BUMP, InitialDatum(0.3, 0.5), 6.0, Grid(1, 100.0, 4096))
    res = picard_solve(spec, 0.5, n_time=100)
    dist = float(np.max(np.abs(res.field.values - solve_fixed(spec, 0.5, 100).values)))
    c.check(dist <= 1e-5, f"sup distance {dist:.1e} <= 1e-5")
    order = richardson_order(ProblemSpec(BUMP, InitialDatum(1.0, 0.5), 3.0, Grid(1, 32.0, 512)), 1.0, 10)
    c.check(order >= 1.9, f"Richardson order {order:.3f} >= 1.9")
    c.finish()

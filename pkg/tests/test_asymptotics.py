import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonlocal_absorption.asymptotics import (
    ErrorCurve,
    conjugate,
    converges_to_zero,
    fit_rate,
    linear_error_curve,
    log_error_curve,
    supercritical_error_curve,
    truncation_audit,
    w_estimate_curves,
)
from nonlocal_absorption.grid import Field, Grid, InitialDatum, zero_datum
from nonlocal_absorption.kernel import make_kernel
from nonlocal_absorption.semigroup import heat_kernel, log_case_constant, self_similar_profile
from nonlocal_absorption.solver import ProblemSpec, SolverConfig, Trajectory

K1 = make_kernel("bump", 1.0, 1)
T = np.geomspace(10, 1000, 9)


def test_fit_exact_power():
    fit = fit_rate(ErrorCurve("x", T, 3 * T**-2.0))
    assert fit.exponent == pytest.approx(-2, abs=1e-10)
    assert fit.log_constant == pytest.approx(math.log(3), abs=1e-10)
    assert fit.residual < 1e-10
    assert fit.n_points == 9


def test_fit_constant_and_wiggle():
    assert fit_rate(ErrorCurve("c", T, np.full(9, 2.0))).exponent == pytest.approx(0, abs=1e-12)
    wig = T**-1.0 * (1 + 0.1 * np.sin(np.log(T)))
    assert fit_rate(ErrorCurve("w", T, wig)).exponent == pytest.approx(-1, abs=0.05)


@settings(max_examples=50, deadline=None)
@given(mu=st.floats(-4, 4), c=st.floats(1e-3, 1e3))
def test_fit_recovers_any_power(mu, c):
    assert fit_rate(ErrorCurve("p", T, c * T**mu)).exponent == pytest.approx(mu, abs=1e-9)


def test_fit_needs_four_positive_points():
    with pytest.raises(ValueError, match="4"):
        fit_rate(ErrorCurve("z", T[:5], [1.0, 0.0, 0.0, 2.0, 3.0]))


def test_curve_invariants():
    with pytest.raises(ValueError):
        ErrorCurve("bad", [1, 2], [1.0, -1.0])
    with pytest.raises(ValueError):
        ErrorCurve("bad", [2, 1], [1.0, 1.0])
    c = ErrorCurve("ok", [1.0, 2.0], [3.0, 4.0])
    assert c.at(2.0) == 4.0
    with pytest.raises(KeyError):
        c.at(5.0)


@pytest.mark.parametrize("q", [1.0, 1.5, 2.0, 4.0, math.inf])
def test_conjugate_pairs(q):
    qp = conjugate(q)
    inv = lambda x: 0.0 if math.isinf(x) else 1 / x
    assert inv(q) + inv(qp) == pytest.approx(1.0)


def test_converges_to_zero_rule():
    assert converges_to_zero(ErrorCurve("d", T, T**-0.5))
    assert not converges_to_zero(ErrorCurve("f", T, np.ones(9)))


def test_curve_csv(tmp_path):
    c = ErrorCurve("lin", [10.0, 100.0], [0.5, 0.25], {"power": 0.25})
    lines = c.to_csv(tmp_path / "c.csv").read_text().splitlines()
    assert lines == ["# label=lin", "# power=0.25", "t,value", "10.0,0.5", "100.0,0.25"]


def test_linear_curve_zero_datum():
    g = Grid(1, 200.0, 2**13)
    c = linear_error_curve(K1, zero_datum(), g, [10.0, 100.0])
    assert np.all(c.values == 0)


def test_linear_curve_needs_a_decade():
    with pytest.raises(ValueError, match="decade"):
        linear_error_curve(K1, InitialDatum(1.0, 0.5), Grid(1, 200.0, 2**13), [10.0, 50.0])


def _fake_traj(fields):
    g = fields[0].grid
    spec = ProblemSpec(K1, InitialDatum(1.0, 0.5), 6.0, g)
    return Trajectory(fields, spec, SolverConfig(), [0] * len(fields), [0.0] * len(fields))


def test_supercritical_curve_vanishes_on_profile_and_is_window_monotone():
    g = Grid(1, 400.0, 2**13)
    prof = self_similar_profile(0.5, 1.0, K1.diffusivity, eta_max=3.5)
    times = [10.0, 100.0]
    exact = [prof.field(g, t, g.radius <= 3.5 * math.sqrt(t)) for t in times]
    assert np.all(supercritical_error_curve(_fake_traj(exact), prof, 3.0).values < 1e-14)
    perturbed = [f.replace(f.values + 0.01 * np.exp(-g.radius / 20)) for f in exact]
    traj = _fake_traj(perturbed)
    small = supercritical_error_curve(traj, prof, 1.0).values
    big = supercritical_error_curve(traj, prof, 3.0).values
    assert np.all(small <= big)


def test_supercritical_curve_rejections():
    prof = self_similar_profile(0.5, 1.0, K1.diffusivity, eta_max=2.0)
    g = Grid(1, 400.0, 2**13)
    with pytest.raises(ValueError, match="eta_max"):
        supercritical_error_curve(_fake_traj([Field(g, np.zeros(g.n), 10.0)]), prof, 3.0)


def test_log_curve_vanishes_on_its_limit():
    g = Grid(1, 400.0, 2**13)
    a = K1.diffusivity
    C = log_case_constant(1.0, 1)
    fields = [heat_kernel(a, t, g).replace(C.value * math.log(t) * heat_kernel(a, t, g).values) for t in (10.0, 100.0)]
    assert np.all(log_error_curve(_fake_traj(fields), C, a, 2.0).values < 1e-15)
    early = [heat_kernel(a, 5.0, g)]
    with pytest.raises(ValueError, match="e\\^2"):
        log_error_curve(_fake_traj(early), C, a, 2.0)


def test_log_curve_relative_shape_is_homogeneous():
    # linear companion: doubling A doubles u and C, the relative curve is unchanged
    from nonlocal_absorption.semigroup import propagate_linear

    g = Grid(1, 400.0, 2**13)
    a = K1.diffusivity
    curves = []
    for A in (1.0, 2.0):
        u0 = InitialDatum(A, 1.0).sample(g)
        fields = [propagate_linear(K1, u0, t) for t in (10.0, 100.0, 1000.0)]
        c = log_error_curve(_fake_traj(fields), log_case_constant(A, 1), a, 2.0)
        curves.append(c.values / c.values[0])
    np.testing.assert_allclose(curves[0], curves[1], rtol=0.25)


def test_w_curves_mass_norm():
    g = Grid(1, 200.0, 2**14)
    times = [1.0, 5.0, 20.0]
    curves = {c.label: c for c in w_estimate_curves(K1, g, times, (2.0, math.inf))}
    np.testing.assert_allclose(curves["W q=inf"].values, 1 - np.exp(-np.array(times)), atol=1e-12)
    assert set(curves) == {"W-U q=2.0", "W q=2.0", "W-U q=inf", "W q=inf"}
    with pytest.raises(ValueError):
        w_estimate_curves(K1, g, times, (0.5,))


def test_truncation_audit():
    a = ErrorCurve("a", [1.0, 2.0], [1.0, 1.0])
    ok, worst = truncation_audit(a, ErrorCurve("b", [1.0, 2.0], [1.05, 1.0]))
    assert ok and worst == pytest.approx(0.05)
    assert not truncation_audit(a, ErrorCurve("c", [1.0, 2.0], [1.5, 1.0]))[0]


@pytest.mark.parametrize("q", [1.0, 2.0, 4.0])
def test_w_heat_gap_follows_sharp_rate(q):
    # For an even kernel the symbol's xi^4 term gives |W - U_a|_{q'} ~ t^(-1 - N/(2q)),
    # faster than the upper bound t^(-(N+1)/(2q)).
    g = Grid(1, 200.0, 2**14)
    times = np.geomspace(10, 1000, 9)
    curves = {c.label: c for c in w_estimate_curves(K1, g, times, (q,))}
    diff = fit_rate(curves[f"W-U q={q}"]).exponent
    whole = fit_rate(curves[f"W q={q}"]).exponent
    assert diff == pytest.approx(-1 - 1 / (2 * q), abs=0.05)
    assert diff <= -(1 + 1) / (2 * q)
    # |W|_{q'} ~ t^(-N/(2q)) from the Gaussian scaling
    assert whole == pytest.approx(-1 / (2 * q), abs=0.02)

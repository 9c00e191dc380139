"""Numerical laboratory for ``u_t = J*u - u - u^p`` with power-like initial tails.

The linear nonlocal flow is evaluated spectrally on a periodic grid, the
absorption problem is solved by Strang splitting with exact sub-flows, and
the long-time statements are checked through rescaled error curves.
"""
from .grid import (
    Field,
    Grid,
    InitialDatum,
    ParabolaWindow,
    convolve,
    lq_norm,
    outer_decade_range,
    sup_norm,
    tail_ratio,
    weak_lq_seminorm,
)
from .kernel import Kernel, diffusivity, kernel_symbol, make_kernel, symbol_diffusivity
from .semigroup import (
    LogCaseConstant,
    SelfSimilarProfile,
    heat_kernel,
    heat_semigroup,
    log_case_constant,
    propagate_linear,
    self_similar_profile,
    w_part,
)
from .solver import (
    ProblemSpec,
    SolverConfig,
    Trajectory,
    absorption_step,
    contraction_constant,
    duhamel_residual,
    linear_companion,
    picard_solve,
    richardson_order,
    solve,
    solve_fixed,
    step,
)
from .asymptotics import (
    ErrorCurve,
    RateFit,
    fit_rate,
    linear_error_curve,
    log_error_curve,
    supercritical_error_curve,
    truncation_audit,
    w_estimate_curves,
)
from .experiments import log_constant_oracle

__version__ = "0.1.0"

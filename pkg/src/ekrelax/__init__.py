"""Fractional relaxation and damped oscillation with power-law coefficients.

The public API re-exports the solver modules; the experiment runner lives in
:mod:`ekrelax.harness`.
"""

from __future__ import annotations

from ._backend import BACKEND
from .bagley_torvik import BTParams, affine_forcing, solve_bt, zero_forcing
from .errors import (
    EkRelaxError,
    PoleError,
    SeriesDivergenceError,
    SolverError,
    StepUnderflowError,
    ValidationError,
)
from .grid import GridMode, GridPolicy, adaptive_step
from .operators import (
    GLWeights,
    Trajectory,
    caputo_derivative,
    ek_integral,
    gl_weights,
    resample_linear,
    resample_quadratic,
    rl_integral,
)
from .oscillator import (
    Classification,
    DiagnosticsReport,
    OscParams,
    SturmWindow,
    alpha1_general_solution,
    classify_trajectory,
    oscillation_window,
    solve_oscillator,
    sturm_q,
    verify_sturm_bound,
)
from .relax import (
    RelaxParams,
    closed_form_alpha1,
    coupled_series_solution,
    decay_rate,
    ek_solution,
    solve_coupled_form,
    solve_relaxation,
)
from .specfun import SaigoKilbasArgs, SeriesConfig, SeriesInfo, gamma, saigo_kilbas_ml

__all__ = [
    "BACKEND",
    "BTParams",
    "Classification",
    "DiagnosticsReport",
    "EkRelaxError",
    "GLWeights",
    "GridMode",
    "GridPolicy",
    "OscParams",
    "PoleError",
    "RelaxParams",
    "SaigoKilbasArgs",
    "SeriesConfig",
    "SeriesDivergenceError",
    "SeriesInfo",
    "SolverError",
    "StepUnderflowError",
    "SturmWindow",
    "Trajectory",
    "ValidationError",
    "adaptive_step",
    "affine_forcing",
    "alpha1_general_solution",
    "caputo_derivative",
    "classify_trajectory",
    "closed_form_alpha1",
    "coupled_series_solution",
    "decay_rate",
    "ek_integral",
    "ek_solution",
    "gamma",
    "gl_weights",
    "oscillation_window",
    "resample_linear",
    "resample_quadratic",
    "rl_integral",
    "saigo_kilbas_ml",
    "solve_bt",
    "solve_coupled_form",
    "solve_oscillator",
    "solve_relaxation",
    "sturm_q",
    "verify_sturm_bound",
    "zero_forcing",
]

from __future__ import annotations

import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ekrelax.errors import StepUnderflowError, ValidationError
from ekrelax.grid import UNDERFLOW_PATIENCE, GridPolicy, StepController, adaptive_step
from ekrelax.operators import Trajectory
from ekrelax.relax import (
    RelaxParams,
    closed_form_alpha1,
    coupled_series_solution,
    decay_rate,
    ek_solution,
    solve_coupled_form,
    solve_relaxation,
)
from ekrelax.specfun import saigo_kilbas_ml

UNIFORM = GridPolicy.uniform(1e-3, 5.0)


# {{{ parameters and grids


@pytest.mark.parametrize(
    "kwargs",
    [
        {"alpha": 0.0},
        {"alpha": 1.1},
        {"alpha": 0.9, "beta": -0.9},
        {"alpha": 0.9, "lam": 0.0},
        {"alpha": 0.9, "eta": -1.0},
    ],
)
def test_relax_params_validation(kwargs):
    with pytest.raises(ValidationError):
        RelaxParams(**kwargs)


def test_monotone_range_flag():
    assert RelaxParams(0.9, 0.1).in_monotone_range
    assert not RelaxParams(0.9, 0.5).in_monotone_range


@pytest.mark.parametrize(
    "kwargs",
    [
        {"h": 0.0, "t_end": 1.0},
        {"h": 0.1, "t_end": 0.0},
        {"h": 0.1, "t_end": 1.0, "h_min": 0.2},
        {"h": 0.1, "t_end": 1.0, "n_warmup": 3},
    ],
)
def test_grid_validation(kwargs):
    with pytest.raises(ValidationError):
        GridPolicy(**kwargs)


# }}}


# {{{ adaptive step rule


def _history(u, du, dt=1e-3):
    t = np.arange(len(u)) * dt
    return Trajectory(t, np.asarray(u, dtype=float), np.asarray(du, dtype=float))


def test_adaptive_step_inverse_proportional():
    # c = (2 - 0) / (3 - 2) = 2
    du = [0.0, 2.0, 3.0, 4.0]
    small = adaptive_step(_history([1.0, 0.9, 0.8, 0.79], du), 1e-3, (1e-9, 1.0))
    large = adaptive_step(_history([1.0, 0.9, 0.8, -2.2], du), 1e-3, (1e-9, 1.0))
    assert large < small
    assert large == pytest.approx(2e-3 / 3.0)
    assert large < 1e-3


def test_adaptive_step_clamped():
    # c = (2 - 0) / (3 - 2) = 2, raw step 2 * 0.001 / 0.0005 = 4
    hist = _history([1.0, 1.0, 1.0, 0.9995], [0.0, 2.0, 3.0, 4.0])
    assert adaptive_step(hist, 1e-3, (1e-4, 1e-2)) == 1e-2
    assert adaptive_step(hist, 1e-3, (1e-4, 10.0)) == pytest.approx(4.0)


def test_adaptive_step_fallback_on_zero_denominator():
    hist = _history([1.0, 0.9, 0.8, 0.7], [1.0, 2.0, 3.0, 3.0], dt=0.01)
    assert adaptive_step(hist, 1e-3, (1e-4, 1.0)) == pytest.approx(0.01)


def test_adaptive_step_uses_fractional_rhs():
    # c = 2 / (5 - 2)
    hist = _history([1.0, 0.9, 0.8, 0.79], [0.0, 2.0, 3.0, 4.0])
    assert adaptive_step(hist, 1e-3, (1e-9, 1.0), frac_deriv=5.0) == pytest.approx(2e-3 / 3 / 0.01)


def test_adaptive_step_needs_history():
    with pytest.raises(ValidationError):
        adaptive_step(_history([1.0, 0.9, 0.8], [0.0, 1.0, 2.0]), 1e-3, (1e-4, 1.0))


@given(st.lists(st.floats(-10, 10), min_size=8, max_size=8))
def test_adaptive_step_within_clamps(vals):
    hist = _history(vals[:4], vals[4:])
    h = adaptive_step(hist, 1e-3, (1e-4, 1e-1))
    assert 1e-4 <= h <= 1e-1 or h == pytest.approx(1e-3)


# }}}


# {{{ closed form


def test_closed_form_examples():
    assert closed_form_alpha1(0.0, 1.0, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-15)
    assert closed_form_alpha1(0.5, 1.0, 1.0) == pytest.approx(0.51342, abs=1e-5)
    assert closed_form_alpha1(-0.5, 3.0, 0.0) == 1.0
    with pytest.raises(ValidationError):
        closed_form_alpha1(-1.0, 1.0, 1.0)


# }}}


# {{{ predictor-corrector solver


@pytest.mark.parametrize("method", ["implicit", "pece"])
def test_methods_agree_with_closed_form(method):
    u = solve_relaxation(RelaxParams(1.0, 0.5, 1.0), UNIFORM, method=method)
    assert np.max(np.abs(u.values - closed_form_alpha1(0.5, 1.0, u.times))) <= 1e-6


def test_unknown_method():
    with pytest.raises(ValidationError):
        solve_relaxation(RelaxParams(1.0), UNIFORM, method="euler")


def test_small_order_sum_stays_monotone():
    # y ~ 1 - c t^(1/8) near 0: the case that needs the leading window
    u = solve_relaxation(RelaxParams(0.375, -0.25, 1.0), GridPolicy.uniform(1e-2, 5.0))
    assert np.all(np.diff(u.values) <= 0.0)


def test_classical_relaxation():
    u = solve_relaxation(RelaxParams(1.0, 0.0, 1.0), UNIFORM)
    assert np.max(np.abs(u.values - np.exp(-u.times))) <= 1e-5
    np.testing.assert_allclose(u.derivs, -u.values, rtol=1e-15)


def test_time_dependent_coefficient():
    u = solve_relaxation(RelaxParams(1.0, 0.5, 1.0), UNIFORM)
    assert u.times[-1] == 5.0
    assert np.max(np.abs(u.values - closed_form_alpha1(0.5, 1.0, u.times))) <= 1e-4


@pytest.mark.parametrize(("alpha", "beta"), [(0.9, 0.05), (0.8, 0.1), (0.95, -0.2)])
def test_against_series(alpha, beta):
    u = solve_relaxation(RelaxParams(alpha, beta, 1.0), UNIFORM)
    assert np.max(np.abs(u.values - saigo_kilbas_ml(alpha, beta, 1.0, u.times))) <= 1e-3


def test_order_sanity():
    errs = []
    for h in (2e-3, 1e-3):
        u = solve_relaxation(RelaxParams(1.0, 0.5, 1.0), GridPolicy.uniform(h, 5.0))
        errs.append(np.max(np.abs(u.values - closed_form_alpha1(0.5, 1.0, u.times))))
    assert errs[0] / errs[1] >= 2.0


def test_grid_end_is_hit_exactly():
    u = solve_relaxation(RelaxParams(0.9, 0.0, 1.0), GridPolicy.uniform(0.3, 1.0))
    assert u.times[-1] == 1.0
    assert np.all(np.diff(u.times) > 0)


H_PROPERTY = 1e-2


@st.composite
def monotone_params(draw):
    alpha = draw(st.floats(0.1, 1.0))
    beta = draw(st.floats(-alpha, 1.0 - alpha, exclude_min=True))
    lam = draw(st.floats(0.05, 5.0))
    return RelaxParams(alpha, beta, lam)


@given(monotone_params())
def test_initial_condition_positivity_monotonicity(p):
    # grids that resolve the initial layer; the unresolved case warns instead
    assume(p.initial_layer_number(H_PROPERTY) <= 1.0)
    u = solve_relaxation(p, GridPolicy.uniform(H_PROPERTY, 5.0))
    assert u.values[0] == 1.0
    assert np.all(u.values > 0.0)
    assert np.all(np.diff(u.values) <= 1e-8)


@pytest.mark.parametrize(
    ("alpha", "beta", "lam", "expected"),
    [
        (1.0, 0.0, 2.0, 2.0e-2),
        (1.0, -0.5, 1.0, 0.2),
        (0.5, 0.0, 1.0, 0.1 / math.gamma(1.5)),
    ],
)
def test_initial_layer_number_examples(alpha, beta, lam, expected):
    assert RelaxParams(alpha, beta, lam).initial_layer_number(1e-2) == pytest.approx(expected)


def test_unresolved_initial_layer_warns():
    p = RelaxParams(1.0, -0.95, 3.0)
    assert p.initial_layer_number(1e-2) > 1.0
    with pytest.warns(RuntimeWarning, match="initial layer"):
        solve_relaxation(p, GridPolicy.uniform(1e-2, 0.1))


def test_resolved_initial_layer_is_silent():
    with warnings.catch_warnings():
        warnings.simplefilter("error", RuntimeWarning)
        solve_relaxation(RelaxParams(0.9, 0.5, 1.0), GridPolicy.uniform(1e-2, 0.1))


def test_beta_ordering():
    # solutions decrease pointwise in beta at t = 3
    betas = (-0.3, 0.0, 0.05, 0.1)
    vals = []
    for beta in betas:
        u = solve_relaxation(RelaxParams(0.9, beta, 1.0), GridPolicy.uniform(1e-2, 3.0))
        vals.append(u.values[-1])
    assert all(a > b for a, b in itertools.pairwise(vals))


def test_fractional_decays_faster_at_short_times():
    grid = GridPolicy.uniform(1e-3, 0.02)
    frac = solve_relaxation(RelaxParams(0.9, 0.5, 1.0), grid)
    classical = solve_relaxation(RelaxParams(1.0, 0.5, 1.0), grid)
    assert np.all(frac.values[1:6] < classical.values[1:6])


def test_adaptive_agrees_with_fine_uniform():
    p = RelaxParams(0.9, 0.5, 1.0)
    fine = solve_relaxation(p, GridPolicy.uniform(1e-4, 5.0))
    adapt = solve_relaxation(p, GridPolicy.adaptive(1e-3, 5.0, 1e-4, 1e-1))
    assert adapt.times[-1] == 5.0
    assert len(adapt) < len(fine)
    ref = np.interp(adapt.times, fine.times, fine.values)
    assert np.max(np.abs(adapt.values - ref)) <= 5e-3


def test_persistent_step_underflow_raises():
    grid = GridPolicy.adaptive(1e-3, 100.0, 1e-3, 1e-2)
    ctl = StepController(grid)
    size = UNDERFLOW_PATIENCE + 20
    times = np.zeros(size)
    # huge jumps in u make the rule ask for ever tinier steps
    values = np.array([(-1.0) ** i * 1e6 for i in range(size)])
    derivs = np.arange(size, dtype=float) ** 2
    with pytest.raises(StepUnderflowError):
        for n in range(size - 1):
            times[n + 1] = ctl.next_time(n, times, values, derivs)


def test_uniform_controller_hits_multiples_of_h():
    ctl = StepController(GridPolicy.uniform(0.1, 1.0))
    assert ctl.is_exact_uniform
    times = np.zeros(12)
    n = 0
    while not ctl.done(times[n]):
        times[n + 1] = ctl.next_time(n, times, times, times)
        n += 1
    assert n == 10
    np.testing.assert_array_equal(times[:10], np.arange(10) * 0.1)
    assert times[10] == 1.0
    assert not StepController(GridPolicy.uniform(0.3, 1.0)).is_exact_uniform


def test_decay_rate_monotone_in_beta():
    # tail average of log|u'/u| on [400, 500] is required to fall as beta
    # increases; u ~ C t^-(alpha+beta) for large t makes it rise instead
    means = []
    for beta in (-0.6, -0.35, -0.1):
        u = solve_relaxation(RelaxParams(0.9, beta, 1.0), GridPolicy.uniform(0.1, 500.0))
        rate = decay_rate(u)
        means.append(np.mean(rate.values[rate.times >= 400.0]))
    assert means[0] > means[1] > means[2]


# }}}


# {{{ erdelyi-kober form


def test_ek_solution_small_alpha_limit():
    assert ek_solution(1e-6, 0.0, 1.0, 1.0) == pytest.approx(math.exp(-1.0), abs=1e-4)


def test_ek_solution_matches_series():
    assert ek_solution(0.25, 0.5, 1.0, 1.0) == pytest.approx(
        saigo_kilbas_ml(0.75, -0.25, 1.0, 1.0), rel=1e-15
    )


@pytest.mark.parametrize("t", [0.5, 1.0, 2.5])
def test_ek_solution_eta_is_a_prefactor(t):
    assert ek_solution(0.25, 1.0, 1.0, t) / ek_solution(0.25, 0.0, 1.0, t) == pytest.approx(
        1 / t, rel=1e-14
    )


@pytest.mark.parametrize(("alpha", "t"), [(0.5, 1.0), (0.0, 1.0), (0.25, 0.0)])
def test_ek_solution_domain(alpha, t):
    with pytest.raises(ValidationError):
        ek_solution(alpha, 0.0, 1.0, t)


def test_coupled_series_reduces_to_exponential():
    t = np.linspace(0.0, 3.0, 7)
    np.testing.assert_allclose(
        coupled_series_solution(0.0, 0.0, 2.0, t), np.exp(-2.0 * t), rtol=0, atol=1e-14
    )


def test_coupled_form_classical_corner():
    u = solve_coupled_form(RelaxParams(1e-9, 0.0, 1.0), UNIFORM)
    assert np.max(np.abs(u.values - np.exp(-u.times))) <= 1e-3


@pytest.mark.parametrize(("alpha", "eta"), [(0.25, 0.5), (0.1, 0.0), (0.4, 1.0)])
def test_coupled_form_against_series(alpha, eta):
    u = solve_coupled_form(RelaxParams(alpha, 0.0, 1.0, eta), UNIFORM)
    ref = coupled_series_solution(alpha, eta, 1.0, u.times)
    mask = u.times >= 0.1
    assert np.max(np.abs(u.values[mask] - ref[mask])) <= 1e-3


@given(st.floats(0.1, 5.0))
@settings(max_examples=5)
def test_coupled_form_is_homogeneous(u0):
    p = RelaxParams(0.25, 0.0, 1.0, 0.5)
    grid = GridPolicy.uniform(1e-2, 2.0)
    base = solve_coupled_form(p, grid).values
    np.testing.assert_allclose(solve_coupled_form(p, grid, u0=u0).values, u0 * base, rtol=1e-12)


def test_coupled_form_rejects_large_alpha():
    with pytest.raises(ValidationError):
        solve_coupled_form(RelaxParams(0.6, 0.0, 1.0), UNIFORM)


# }}}


# {{{ decay rate


def test_decay_rate_of_exponential():
    t = np.arange(0.0, 5.0 + 5e-4, 1e-3)
    rate = decay_rate(Trajectory(t, np.exp(-2.0 * t)))
    assert np.max(np.abs(rate.values - math.log(2.0))) <= 1e-6
    assert rate.times[0] == t[1] and rate.times[-1] == t[-2]


def test_decay_rate_power_law_coefficient():
    t = np.arange(0.0, 5.0 + 5e-4, 1e-3)
    rate = decay_rate(Trajectory(t, closed_form_alpha1(0.5, 1.0, t)))
    i = np.argmin(np.abs(rate.times - 4.0))
    assert rate.values[i] == pytest.approx(math.log(2.0), abs=1e-6)


def test_decay_rate_edge_cases():
    t = np.linspace(0.0, 1.0, 11)
    assert len(decay_rate(Trajectory(t, np.ones_like(t)))) == 0
    with pytest.raises(ValidationError):
        decay_rate(Trajectory(t, np.zeros_like(t)))
    with pytest.raises(ValidationError):
        decay_rate(Trajectory([0.0], [1.0]))
    u = np.exp(-t)
    u[5] = 0.0
    assert 0.5 not in decay_rate(Trajectory(t, u)).times


# }}}

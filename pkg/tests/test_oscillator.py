from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ekrelax.errors import SolverError, ValidationError
from ekrelax.grid import GridPolicy
from ekrelax.operators import Trajectory
from ekrelax.oscillator import (
    Classification,
    OscParams,
    SturmWindow,
    alpha1_general_solution,
    classify_trajectory,
    og_residual,
    oscillation_window,
    sign_changes,
    solve_oscillator,
    sturm_q,
    verify_sturm_bound,
)

UNIFORM = GridPolicy.uniform(1e-3, 5.0)


def reduced_exact(lam, t):
    """``u' = v``, ``v' = -lam v`` with ``u(0) = v(0) = 1``."""
    return 1.0 + (1.0 - np.exp(-lam * t)) / lam


def sampled(func, h=1e-3, t_end=5.0):
    t = np.linspace(0.0, t_end, round(t_end / h) + 1)
    return Trajectory.from_function(func, t)


# {{{ parameters


@pytest.mark.parametrize(
    "kwargs",
    [
        {"alpha": 0.0, "lam": 1.0},
        {"alpha": 1.1, "lam": 1.0},
        {"alpha": 0.5, "lam": 0.0},
        {"alpha": 0.5, "lam": 1.0, "eta": -0.1},
    ],
)
def test_params_validation(kwargs):
    with pytest.raises(ValidationError):
        OscParams(**kwargs)


@given(
    st.floats(0.01, 1.0),
    st.floats(0.01, 20.0),
    st.floats(0.0, 3.0),
)
def test_derived_constants(alpha, lam, eta):
    p = OscParams(alpha, lam, eta)
    assert p.delta == eta + 1.0 - alpha
    assert p.mu == lam * p.delta
    assert p.gamma_exp == eta - alpha


def test_initial_velocity():
    assert OscParams(0.7, 2.0, 0.0).initial_velocity(1.0, 0.3) == 0.3
    # at alpha = 1 the consistent slope is -lam u0 for every eta > 0
    for eta in (0.5, 1.0, 1.5):
        assert OscParams(1.0, 2.0, eta).initial_velocity(1.5, 7.0) == pytest.approx(-3.0)


def test_unknown_method_and_interp():
    p = OscParams(1.0, 1.0)
    grid = GridPolicy.uniform(0.1, 1.0)
    with pytest.raises(ValidationError):
        solve_oscillator(p, grid, method="rk4")
    with pytest.raises(ValidationError):
        solve_oscillator(p, grid, method="gl", interp="cubic")


# }}}


# {{{ solver accuracy


@pytest.mark.parametrize("method", ["pi", "gl"])
@pytest.mark.parametrize("lam", [1.0, 2.0, 5.0])
def test_constant_coefficient_limit(method, lam):
    u, w = solve_oscillator(OscParams(1.0, lam, 0.0), UNIFORM, method=method)
    assert np.max(np.abs(u.values - reduced_exact(lam, u.times))) <= 1e-4
    assert np.max(np.abs(w.values - np.exp(-lam * w.times))) <= 1e-4
    assert u.derivs is not None and w.derivs is not None


@pytest.mark.parametrize(("lam", "eta"), [(1.0, 0.5), (2.0, 0.5), (2.0, 1.0), (1.0, 1.5)])
def test_special_solution_from_consistent_data(lam, eta):
    # u(0) = 1 with the consistent slope selects the special solution exp(-lam t)
    u, _ = solve_oscillator(OscParams(1.0, lam, eta), UNIFORM)
    assert np.max(np.abs(u.values - np.exp(-lam * u.times))) <= 1e-4


def test_special_solution_converges():
    errs = []
    for h in (2e-3, 1e-3, 5e-4):
        u, _ = solve_oscillator(OscParams(1.0, 2.0, 0.5), GridPolicy.uniform(h, 5.0))
        errs.append(np.max(np.abs(u.values - np.exp(-2.0 * u.times))))
    assert errs[0] > errs[1] > errs[2]


@pytest.mark.parametrize("alpha", [0.9, 0.7, 0.5])
def test_fractional_self_convergence(alpha):
    finals = []
    for h in (4e-3, 2e-3, 1e-3):
        u, _ = solve_oscillator(OscParams(alpha, 2.0, 0.5), GridPolicy.uniform(h, 2.0))
        finals.append(u.values[-1])
    d = np.abs(np.diff(finals))
    assert d[0] / d[1] >= 2.0


def test_gl_slow_convergence_with_singular_source():
    # delta = eta + 1 - alpha = 0.7: the GL path converges like h^0.7
    finals = []
    for h in (4e-3, 2e-3, 1e-3):
        u, _ = solve_oscillator(OscParams(0.8, 2.0, 0.5), GridPolicy.uniform(h, 3.0), method="gl")
        finals.append(u.values[-1])
    d = np.abs(np.diff(finals))
    assert math.log2(d[0] / d[1]) == pytest.approx(0.7, abs=0.05)


@pytest.mark.parametrize(
    ("method", "interp"), [("pi", "linear"), ("gl", "linear"), ("gl", "quadratic")]
)
def test_adaptive_grid(method, interp):
    grid = GridPolicy.adaptive(1e-2, 5.0, h_min=1e-4, h_max=5e-2)
    u, _ = solve_oscillator(OscParams(1.0, 1.0, 0.0), grid, method=method, interp=interp)
    assert u.times[-1] == 5.0
    assert np.max(np.abs(u.values - reduced_exact(1.0, u.times))) <= 5e-4


# }}}


# {{{ reduced equation


@pytest.mark.parametrize("lam", [1.0, 2.0, 5.0])
def test_og_residual_of_special_solution(lam):
    u = sampled(lambda t: np.exp(-lam * t), t_end=10.0)
    res = og_residual(u, lam, 0.5)
    keep = res.times >= 0.5
    assert np.max(np.abs(res.values[keep])) <= 1e-3


@pytest.mark.parametrize("lam", [1.0, 2.0, 3.0])
def test_solution_satisfies_reduced_equation(lam):
    u, _ = solve_oscillator(OscParams(1.0, lam, 0.5), GridPolicy.uniform(1e-3, 10.0))
    res = og_residual(u, lam, 0.5)
    keep = res.times >= 0.5
    assert np.max(np.abs(res.values[keep])) <= 1e-2


def test_og_residual_needs_three_nodes():
    with pytest.raises(ValidationError):
        og_residual(Trajectory([0.0, 1.0], [1.0, 0.5]), 1.0, 0.5)


@pytest.mark.parametrize("lam", [1.0, 2.0, 3.0])
def test_w_is_scaled_velocity(lam):
    eta = 0.5
    u, w = solve_oscillator(OscParams(1.0, lam, eta), GridPolicy.uniform(1e-3, 10.0))
    keep = u.times >= 0.5
    v = np.gradient(u.values, u.times)
    diff = w.values[keep] - u.times[keep] ** eta * v[keep]
    assert np.max(np.abs(diff)) <= 1e-2 * np.max(np.abs(w.values[keep]))


def test_underdamped_floor():
    # at most one sign change of u' is possible here, see the next test
    u, _ = solve_oscillator(OscParams(1.0, 5.0, 0.5), GridPolicy.uniform(1e-3, 10.0))
    report = classify_trajectory(u)
    assert report.deriv_sign_changes.size >= 2


@given(st.floats(-5.0, 5.0), st.floats(-5.0, 5.0), st.floats(0.5, 5.0), st.floats(0.1, 1.9))
def test_alpha1_solutions_turn_at_most_once(c1, c2, lam, eta):
    # u' = -lam u + c2 t^-eta, so u'' = -eta c2 t^(-eta-1) where u' = 0
    t = np.linspace(0.05, 10.0, 400)
    u = alpha1_general_solution(lam, eta, c1, c2, t)
    du = np.gradient(u, t)
    assert sign_changes(t, du, rel_tol=1e-9).size <= 1


@pytest.mark.parametrize("lam", [1.0, 2.0])
def test_envelope_decreases_with_lam(lam):
    def envelope(lam_):
        u, _ = solve_oscillator(OscParams(1.0, lam_, 0.5), GridPolicy.uniform(1e-3, 6.0))
        keep = (u.times >= 4.5) & (u.times <= 5.5)
        return np.max(np.abs(u.values[keep]))

    assert envelope(lam + 1.0) <= envelope(lam)


def test_fractional_damping_of_turns():
    counts = []
    for alpha in (1.0, 0.9, 0.7, 0.5):
        u, _ = solve_oscillator(OscParams(alpha, 10.0, 0.5), UNIFORM)
        counts.append(classify_trajectory(u).deriv_sign_changes.size)
    assert all(a >= b for a, b in itertools.pairwise(counts))


# }}}


# {{{ general solution


@pytest.mark.parametrize("t", [0.1, 1.0, 3.0])
def test_general_solution_special_case(t):
    assert alpha1_general_solution(2.0, 0.5, 1.5, 0.0, t) == pytest.approx(1.5 * math.exp(-2.0 * t))


@pytest.mark.parametrize("t", [0.2, 1.0, 2.5, 7.0])
def test_general_solution_eta0(t):
    lam = 1.5
    expected = (1.0 - math.exp(-lam * (t - 1.0))) / lam
    assert alpha1_general_solution(lam, 0.0, 0.0, 1.0, t) == pytest.approx(expected, rel=1e-9)


def test_general_solution_asymptotics():
    val = alpha1_general_solution(1.0, 0.5, 0.0, 1.0, 20.0)
    assert val == pytest.approx(20.0**-0.5, rel=0.1)


def test_general_solution_vectorised():
    t = np.array([0.5, 1.0, 2.0])
    vals = alpha1_general_solution(1.0, 0.5, 1.0, 1.0, t)
    assert vals.shape == (3,)
    for ti, v in zip(t, vals, strict=True):
        assert alpha1_general_solution(1.0, 0.5, 1.0, 1.0, float(ti)) == v


def test_general_solution_large_lam_t():
    # no overflow in exp(lam s)
    val = alpha1_general_solution(50.0, 0.5, 0.0, 1.0, 40.0)
    assert val == pytest.approx(40.0**-0.5 / 50.0, rel=1e-2)


@pytest.mark.parametrize(
    "args", [(0.0, 0.5, 1.0, 1.0, 1.0), (1.0, -0.5, 1.0, 1.0, 1.0), (1.0, 0.5, 1.0, 1.0, 0.0)]
)
def test_general_solution_validation(args):
    with pytest.raises(ValidationError):
        alpha1_general_solution(*args)


def test_general_solution_quadrature_failure():
    # the integrand s^-eta is not integrable at 0 for eta >= 1
    with pytest.raises(SolverError):
        alpha1_general_solution(1.0, 1.5, 0.0, 1.0, 0.5, t0=0.0)


# }}}


# {{{ sturm diagnostics


def test_sturm_q_examples():
    t = np.linspace(0.1, 10.0, 7)
    assert np.allclose(sturm_q(3.0, 0.0, t), -2.25, rtol=0.0, atol=1e-15)
    assert sturm_q(2.0, 0.5, 1.0) == pytest.approx(-0.3125, rel=1e-15)
    for eta in (0.3, 1.0, 1.7):
        assert sturm_q(2.0, eta, 1e8) == pytest.approx(-1.0, rel=1e-7)
    with pytest.raises(ValidationError):
        sturm_q(1.0, 0.5, 0.0)


def test_window_small_k_limit():
    win = oscillation_window(2.0, 0.5, 1e-6)
    assert win.width == pytest.approx(1.0, rel=1e-9)
    assert win.small_k_width == pytest.approx(1.0, rel=1e-9)
    assert win.zero_spacing_bound == pytest.approx(math.pi * 1e6)


def test_window_small_k_expansion():
    win = oscillation_window(2.0, 0.5, 0.05)
    assert win.small_k_width == pytest.approx(win.width, rel=1e-3)


@given(st.floats(0.1, 20.0), st.floats(0.01, 1.99), st.floats(0.01, 20.0))
def test_window_endpoints_are_roots(lam, eta, k):
    win = oscillation_window(lam, eta, k)
    for t in (win.t_minus, win.t_plus):
        if t > 0.0:
            assert sturm_q(lam, eta, t) == pytest.approx(k**2, rel=1e-10, abs=1e-10 * lam**2)
    assert win.t_minus < 0.0 < win.t_plus


@given(st.floats(0.1, 20.0), st.floats(0.01, 1.99), st.floats(0.001, 100.0))
def test_window_shorter_than_spacing_bound(lam, eta, k):
    win = oscillation_window(lam, eta, k)
    a, b = win.interval
    assert (b - a) * k < 1.0


def test_window_vanishes_as_eta_goes_to_zero():
    widths = [oscillation_window(2.0, eta, 0.1).width for eta in (1e-2, 1e-4, 1e-8)]
    assert widths[0] > widths[1] > widths[2]
    assert widths[2] < 1e-3


def test_window_correctness():
    lam, eta, k = 2.0, 0.5, 0.1
    win = oscillation_window(lam, eta, k)
    t = np.linspace(1e-3, 5.0, 10_000)
    q = sturm_q(lam, eta, t)
    inside = (t > win.t_minus) & (t < win.t_plus)
    outside = (t < win.t_minus) | (t > win.t_plus)
    assert np.all(q[inside] > k**2)
    assert np.all(q[outside] < k**2)


@pytest.mark.parametrize(
    ("lam", "eta", "k"), [(1.0, 0.0, 0.5), (1.0, 2.0, 0.5), (0.0, 1.0, 0.5), (1.0, 1.0, 0.0)]
)
def test_window_validation(lam, eta, k):
    with pytest.raises(ValidationError):
        oscillation_window(lam, eta, k)


def _window(k, a, b, lam=1.0, eta=1.0):
    return SturmWindow(
        k=k,
        t_minus=a,
        t_plus=b,
        width=b - a,
        lam=lam,
        eta=eta,
        zero_spacing_bound=math.pi / k,
        small_k_width=b - a,
    )


def test_sturm_bound_on_solver_output():
    win = oscillation_window(5.0, 1.5, 0.5)
    u, _ = solve_oscillator(OscParams(1.0, 5.0, 1.5), GridPolicy.uniform(1e-3, 10.0))
    assert verify_sturm_bound(u, win)


def test_sturm_bound_zero_width_is_vacuous():
    u = sampled(np.cos)
    assert verify_sturm_bound(u, _window(1.0, -1.0, -0.5))


def test_sturm_bound_flags_missing_zeros():
    # v = u / p = 1 has no zeros on a window longer than pi / k
    lam, eta = 1.0, 1.0
    t = np.linspace(0.0, 12.0, 12_001)
    u = Trajectory(t, np.exp(-0.5 * lam * t) / np.sqrt(np.maximum(t, 1e-3) ** eta))
    assert not verify_sturm_bound(u, _window(1.0, 0.5, 10.0, lam, eta))


def test_sturm_bound_checks_spacing():
    lam, eta = 0.0, 0.0
    t = np.linspace(0.0, 20.0, 20_001)
    # zeros of sin(t) are pi apart: allowed for k = 0.9, not for k = 1.1
    u = Trajectory(t, np.sin(t + 0.5))
    assert verify_sturm_bound(u, _window(0.9, 0.0, 20.0, lam, eta))
    assert not verify_sturm_bound(u, _window(1.1, 0.0, 20.0, lam, eta))


def test_sturm_bound_needs_resolution():
    u = sampled(np.cos, h=0.5, t_end=20.0)
    with pytest.raises(ValidationError):
        verify_sturm_bound(u, _window(1.0, 0.0, 20.0))


# }}}


# {{{ classification


def test_classify_monotone():
    report = classify_trajectory(sampled(lambda t: np.exp(-t)))
    assert report.classification is Classification.OVERDAMPED
    assert report.zero_crossings.size == 0
    assert report.deriv_sign_changes.size == 0
    assert report.decay_rate.values == pytest.approx(np.ones(len(report.decay_rate)), rel=1e-5)


def test_classify_damped_cosine():
    report = classify_trajectory(sampled(lambda t: np.exp(-t) * np.cos(5.0 * t)))
    expected = math.pi / 10.0 + math.pi / 5.0 * np.arange(8)
    assert report.classification is Classification.UNDERDAMPED
    assert report.zero_crossings.size == 8
    assert np.allclose(report.zero_crossings, expected, atol=1e-6)
    assert np.all(np.diff(report.zero_crossings) > 0.0)


def test_classify_constant():
    report = classify_trajectory(sampled(lambda t: np.full_like(t, 2.0)))
    assert report.classification is Classification.OVERDAMPED
    assert len(report.decay_rate) == 0
    assert report.metadata["n_nodes"] == 5001


def test_classify_needs_three_nodes():
    with pytest.raises(ValidationError):
        classify_trajectory(Trajectory([0.0, 1.0], [1.0, 0.0]))


@given(st.floats(0.1, 3.0), st.floats(0.0, 6.0), st.floats(0.0, 2.0))
def test_classification_matches_turns(omega, phase, decay):
    u = sampled(lambda t: np.exp(-decay * t) * np.cos(omega * t + phase), h=1e-2)
    report = classify_trajectory(u)
    underdamped = report.classification is Classification.UNDERDAMPED
    assert underdamped == (report.deriv_sign_changes.size > 0)
    assert np.all(np.diff(report.zero_crossings) > 0.0)


def test_sign_changes_ignores_round_off():
    t = np.linspace(0.0, 1.0, 5)
    x = np.array([1.0, 1e-12, -1e-12, 1e-12, 0.5])
    assert sign_changes(t, x).size == 2
    assert sign_changes(t, x, rel_tol=1e-9).size == 0
    assert sign_changes(t, np.zeros(5)).size == 0
    assert sign_changes(np.empty(0), np.empty(0)).size == 0


# }}}

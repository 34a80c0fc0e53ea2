r"""Fractional relaxation with power-law time-varying coefficients.

The main problem is

.. math::

    D^\alpha y(t) = -\lambda t^\beta y(t), \qquad y(0) = 1,

solved by a fractional Adams-Bashforth-Moulton scheme in Volterra form,
:math:`y = 1 + J^\alpha[-\lambda s^\beta y]`. The module also provides the
closed forms used as oracles and the Erdelyi-Kober relaxation model

.. math::

    u(t) - u_0 = -\lambda t^{-\eta-\alpha} J^{1-\alpha}(s^\eta u)(t).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._history import HistorySums
from ._quadrature import (
    SINGULAR_WINDOW,
    first_interval_rect,
    first_interval_weights,
    interval_weights,
)
from .errors import SolverError, ValidationError
from .grid import GridMode, GridPolicy, GrowableState, StepController, adaptive_step
from .operators import Trajectory, estimate_derivative
from .specfun import BETA_SLACK, SeriesConfig, gamma_ratio, saigo_kilbas_ml

__all__ = [
    "GridMode",
    "GridPolicy",
    "RelaxParams",
    "adaptive_step",
    "closed_form_alpha1",
    "coupled_series_solution",
    "decay_rate",
    "ek_solution",
    "solve_coupled_form",
    "solve_relaxation",
]


@dataclass(frozen=True)
class RelaxParams:
    """Parameters of the relaxation problems.

    ``beta`` only has to exceed ``-alpha`` for the solver; the range in which
    the series solution is known to be completely monotone,
    ``beta <= 1 - alpha``, is reported by :attr:`in_monotone_range`.
    """

    alpha: float
    beta: float = 0.0
    lam: float = 1.0
    eta: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValidationError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.beta > -self.alpha:
            raise ValidationError(f"beta must exceed -alpha = {-self.alpha}, got {self.beta}")
        if not self.lam > 0.0:
            raise ValidationError(f"lam must be positive, got {self.lam}")
        if not self.eta >= 0.0:
            raise ValidationError(f"eta must be non-negative, got {self.eta}")

    @property
    def in_monotone_range(self) -> bool:
        return -self.alpha < self.beta <= 1.0 - self.alpha + BETA_SLACK

    def initial_layer_number(self, h: float) -> float:
        r"""Leading term of :math:`1 - y(h)` for the ``eta = 0`` problem,

        .. math::

            z = \lambda h^{\alpha+\beta}
                \frac{\Gamma(1+\beta)}{\Gamma(1+\alpha+\beta)}.

        When ``z > 1`` the solution loses most of its value inside the first
        step, an initial layer that no interpolant on the grid represents;
        shrink ``h`` until ``z <= 1`` for a positive, monotone result.
        """
        a, b = self.alpha, self.beta
        return self.lam * h ** (a + b) * gamma_ratio(1.0 + b, 1.0 + a + b)


def _check_state(value: float, t: float) -> None:
    if not math.isfinite(value) or abs(value) > 1.0e300:
        raise SolverError(f"state became non-finite or overflowed at t={t:.6g}")


def solve_relaxation(p: RelaxParams, grid: GridPolicy, *, method: str = "implicit") -> Trajectory:
    """Solve ``D^alpha y = -lam t^beta y``, ``y(0) = 1``.

    Near the origin ``y`` behaves like ``1 - c t^(alpha+beta)``, which
    piecewise-linear interpolation resolves poorly when ``alpha + beta < 1``.
    On the first :data:`~ekrelax._quadrature.SINGULAR_WINDOW` intervals the
    factor ``s^beta`` therefore stays inside the product weights, ``y`` is
    interpolated linearly in ``s^(alpha+beta)``. Later intervals use
    product-trapezoid weights, exact for the kernel ``(t - s)^(alpha - 1)``.

    :arg method: ``"implicit"`` (default) solves the trapezoid corrector
        equation exactly, which is cheap because the problem is linear; this
        is the limit of iterating the corrector. ``"pece"`` takes one
        product-rectangle predictor and one corrector pass per step after
        the leading window; its predictor error can make the solution rise
        briefly when ``alpha + beta`` is small.

    ``derivs`` of the result hold ``-lam t^beta y`` when ``alpha = 1`` and
    finite-difference estimates otherwise.
    """
    if method not in ("implicit", "pece"):
        raise ValidationError(f"unknown method {method!r}; expected 'implicit' or 'pece'")
    alpha, beta, lam = p.alpha, p.beta, p.lam
    r = min(1.0, alpha + beta)
    ctl = StepController(grid)
    sums = HistorySums(grid, ctl, alpha)
    st = GrowableState(1, grid.capacity_hint())
    t, y = st.t, st.y

    # rhs at nodes (node 0 is never read: leading intervals use moments)
    f = np.zeros((1, t.size))
    # classical derivative estimates and fractional rhs, for the step rule
    dy = np.zeros(t.size)
    y[0, 0] = 1.0
    dy[0] = 0.0

    n = 0
    while not ctl.done(t[n]):
        t_next = ctl.next_time(n, t, y[0], dy, frac_deriv=f[0, n - 1] if n >= 1 else None)
        if n + 1 >= t.size:
            st.ensure(n + 1)
            t, y = st.t, st.y
            f2 = np.zeros((1, t.size))
            f2[:, : f.shape[1]] = f
            f = f2
            d2 = np.zeros(t.size)
            d2[: dy.size] = dy
            dy = d2
        t[n + 1] = t_next
        k = n + 1
        if k == 1 and p.initial_layer_number(t_next) > 1.0:
            warnings.warn(
                f"first step h={t_next:.3g} does not resolve the initial layer "
                f"(layer number {p.initial_layer_number(t_next):.3g} > 1); "
                "expect overshoot or negative values",
                RuntimeWarning,
                stacklevel=2,
            )

        j_end = min(k, SINGULAR_WINDOW)
        wl, wr = interval_weights(t[: j_end + 1], t_next, alpha, beta, r)
        c = np.zeros(j_end + 1)
        c[:-1] += wl
        c[1:] += wr
        lead = 1.0 - lam * (c[:j_end] @ y[0, :j_end])
        if k == j_end:
            y_new = lead / (1.0 + lam * c[k])
        else:
            hist, a_kk = sums.trapezoid(t, f, k, j_end)
            known = lead - lam * c[j_end] * y[0, j_end] + hist[0]
            coef = lam * a_kk * t_next**beta
            if method == "implicit":
                y_new = known / (1.0 + coef)
            else:
                rect0 = first_interval_rect(t[1], t_next, alpha, beta)
                y_pred = 1.0 - lam * rect0 * y[0, 0] + sums.rectangle(t, f, k, 1)[0]
                y_new = known - coef * y_pred

        _check_state(y_new, t_next)
        y[0, k] = y_new
        f[0, k] = -lam * t_next**beta * y_new
        dy[k] = (y_new - y[0, n]) / (t_next - t[n]) if alpha < 1.0 else f[0, k]
        n = k

    times = t[: n + 1].copy()
    values = y[0, : n + 1].copy()
    if alpha == 1.0:
        with np.errstate(divide="ignore"):
            derivs = -lam * times**beta * values
    else:
        derivs = estimate_derivative(Trajectory(times, values)) if times.size >= 3 else None
    return Trajectory(times, values, derivs)


def closed_form_alpha1(beta: float, lam: float, t: float | np.ndarray) -> float | np.ndarray:
    """Exact solution ``exp(-lam t^(beta+1) / (beta+1))`` of the ``alpha = 1`` problem."""
    if not beta > -1.0:
        raise ValidationError(f"beta must exceed -1, got {beta}")
    t = np.asarray(t, dtype=np.float64)
    out = np.exp(-lam * t ** (beta + 1.0) / (beta + 1.0))
    return float(out) if out.ndim == 0 else out


def ek_solution(
    alpha: float,
    eta: float,
    lam: float,
    t: float | np.ndarray,
    cfg: SeriesConfig | None = None,
) -> float | np.ndarray:
    r"""Saigo-Kilbas form of the Erdelyi-Kober relaxation solution.

    :math:`u(t) = r(t) / t^{\alpha + \eta}` where :math:`r` solves
    :math:`D^{1-\alpha} r = -\lambda t^{-\alpha} r`, :math:`r(0) = 1`,
    i.e. :math:`r` is :func:`~ekrelax.specfun.saigo_kilbas_ml` with order
    ``1 - alpha`` and power ``-alpha``. Valid for ``0 < alpha < 1/2``, ``t > 0``.
    """
    if not 0.0 < alpha < 0.5:
        raise ValidationError(f"alpha must lie in (0, 1/2), got {alpha}")
    if not eta >= 0.0:
        raise ValidationError(f"eta must be non-negative, got {eta}")
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr <= 0.0):
        raise ValidationError("ek_solution is singular at t = 0; need t > 0")

    r = saigo_kilbas_ml(1.0 - alpha, -alpha, lam, t_arr, cfg)
    out = np.asarray(r) / t_arr ** (alpha + eta)
    return float(out) if out.ndim == 0 else out


def coupled_series_solution(
    alpha: float,
    eta: float,
    lam: float,
    t: float | np.ndarray,
    u0: float = 1.0,
    cfg: SeriesConfig | None = None,
) -> float | np.ndarray:
    r"""Bounded solution of the Erdelyi-Kober relaxation model with ``u(0) = u0``.

    Substituting :math:`u = \sum_n a_n t^{n s}`, :math:`s = 1 - 2\alpha`, into
    :math:`u - u_0 = -\lambda t^{-\eta-\alpha} J^{1-\alpha}(s^\eta u)` gives

    .. math::

        a_0 = u_0, \qquad a_{n+1} = -\lambda a_n
            \frac{\Gamma(\eta + n s + 1)}{\Gamma(\eta + n s + 2 - \alpha)}.

    For ``alpha = eta = 0`` this is ``u0 exp(-lam t)``.
    """
    cfg = SeriesConfig() if cfg is None else cfg
    if not 0.0 <= alpha < 0.5:
        raise ValidationError(f"alpha must lie in [0, 1/2), got {alpha}")
    s = 1.0 - 2.0 * alpha
    scalar = np.ndim(t) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=np.longdouble))
    x = -np.longdouble(lam) * tt ** np.longdouble(s)

    term = np.ones_like(tt)
    total = np.ones_like(tt)
    for k in range(cfg.max_terms):
        ratio = gamma_ratio(eta + k * s + 1.0, eta + k * s + 2.0 - alpha)
        term = term * x * np.longdouble(ratio)
        total += term
        if np.all(np.abs(term) < cfg.abs_tol):
            break
    out = u0 * total.astype(np.float64)
    return float(out[0]) if scalar else out


def solve_coupled_form(
    p: RelaxParams,
    grid: GridPolicy,
    u0: float = 1.0,
    *,
    full_output: bool = False,
) -> Trajectory | tuple[Trajectory, Trajectory]:
    r"""March the coupled pair :math:`(u, g)` of the Erdelyi-Kober model.

    .. math::

        u(t) - u_0 = -\lambda t^{-\eta-\alpha} D^\alpha g(t), \qquad
        g' = t^\eta u, \quad g(0) = 0.

    Because :math:`D^\alpha g = J^{1-\alpha} g'` and :math:`g'` is known
    exactly at the nodes, each step is a product-trapezoid quadrature of
    :math:`s^\eta u` followed by a scalar linear solve for :math:`u_n`. The
    first interval keeps :math:`s^\eta` in the weight. Node 0 is pinned to
    ``u0``. Requires ``0 < alpha < 1/2``; ``p.beta`` is ignored.

    With ``full_output=True`` the trajectory of ``g`` is returned as well.
    """
    alpha, eta, lam = p.alpha, p.eta, p.lam
    if not alpha < 0.5:
        raise ValidationError(f"the coupled form needs alpha < 1/2, got {alpha}")
    q = 1.0 - alpha

    ctl = StepController(grid)
    sums = HistorySums(grid, ctl, q)
    st = GrowableState(2, grid.capacity_hint())
    t, y = st.t, st.y
    y[0, 0] = u0  # u
    y[1, 0] = 0.0  # g
    G = np.zeros((1, t.size))
    du = np.zeros(t.size)

    n = 0
    while not ctl.done(t[n]):
        t_next = ctl.next_time(n, t, y[0], du)
        if n + 1 >= t.size:
            st.ensure(n + 1)
            t, y = st.t, st.y
            G2 = np.zeros((1, t.size))
            G2[:, : G.shape[1]] = G
            G = G2
            d2 = np.zeros(t.size)
            d2[: du.size] = du
            du = d2
        k = n + 1
        t[k] = t_next
        t1 = t[1]
        pref = lam * t_next ** (-eta - alpha)

        c0, c1 = first_interval_weights(t1, t_next, q, eta)
        if k == 1:
            u_new = (u0 - pref * c0 * u0) / (1.0 + pref * c1)
        else:
            hist, a_kk = sums.trapezoid(t, G, k, 1)
            rhs = u0 - pref * (c0 * u0 + c1 * y[0, 1] + hist[0])
            u_new = rhs / (1.0 + pref * a_kk * t_next**eta)
        _check_state(u_new, t_next)

        y[0, k] = u_new
        G[0, k] = t_next**eta * u_new
        # g(t) = int_0^t s^eta u ds
        if k == 1:
            g0, g1 = first_interval_weights(t1, t1, 1.0, eta)
            y[1, 1] = g0 * u0 + g1 * u_new
        else:
            y[1, k] = y[1, n] + 0.5 * (t_next - t[n]) * (G[0, n] + G[0, k])
        du[k] = (u_new - y[0, n]) / (t_next - t[n])
        n = k

    times = t[: n + 1].copy()
    u = Trajectory(times, y[0, : n + 1].copy())
    if times.size >= 3:
        u = u.with_derivs()
    if full_output:
        g = Trajectory(times, y[1, : n + 1].copy(), G[0, : n + 1].copy())
        return u, g
    return u


#: magnitudes below this are treated as zero by :func:`decay_rate`
TINY = 1.0e-300


def decay_rate(f: Trajectory) -> Trajectory:
    r"""Decay-rate diagnostic :math:`\log|u'/u|` at interior nodes.

    ``u'`` comes from central differences. Nodes where ``|u| < 1e-300`` or
    where ``u'`` is zero to rounding (the logarithm would be :math:`-\infty`)
    are omitted, so a constant input yields an empty trajectory.
    """
    if len(f) < 2:
        raise ValidationError("decay_rate needs at least 2 nodes")
    u = f.values
    if np.all(np.abs(u) < TINY):
        raise ValidationError("all values are below the reporting threshold")

    du = np.gradient(u, f.times)
    # a difference of u values cannot resolve less than a few ulps of u
    resolution = 4.0 * np.finfo(float).eps * np.abs(u) / np.gradient(f.times)
    keep = np.zeros(u.size, dtype=bool)
    keep[1:-1] = True
    keep &= (np.abs(u) >= TINY) & (np.abs(du) > resolution)
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = np.log(np.abs(du[keep] / u[keep]))
    return Trajectory(f.times[keep], rate)

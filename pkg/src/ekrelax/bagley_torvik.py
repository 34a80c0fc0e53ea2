r"""Bagley-Torvik equation through a half-order system.

.. math::

    A y''(t) + B D^{3/2} y(t) + C y(t) = f(t), \qquad y(0) = y_0,\ y'(0) = y_0',

is rewritten for :math:`Y = (y_1, y_2, y_3, y_4)` as

.. math::

    D^{1/2} y_1 = y_2, \quad D^{1/2} y_2 = y_3, \quad D^{1/2} y_3 = y_4, \quad
    D^{1/2} y_4 = A^{-1}\,[-C y_1 - B y_4 + f(t)],

with :math:`Y(0) = (y_0, 0, y_0', 0)` and :math:`y = y_1`. All derivatives are
of Caputo type, so the components with nonzero initial values are
discretized as deviations from those values.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from ._history import HistorySums
from ._quadrature import interval_weights
from .errors import SolverError, ValidationError
from .grid import GridPolicy, GrowableState, StepController
from .operators import Trajectory, gl_weights, resample_linear

__all__ = [
    "AffineForcing",
    "BTParams",
    "ZeroForcing",
    "affine_forcing",
    "solve_bt",
    "zero_forcing",
]


@dataclass(frozen=True)
class ZeroForcing:
    def __call__(self, t: float) -> float:
        return 0.0


@dataclass(frozen=True)
class AffineForcing:
    """``f(t) = a + b t``."""

    a: float
    b: float = 0.0

    def __call__(self, t: float) -> float:
        return self.a + self.b * t


def zero_forcing() -> ZeroForcing:
    return ZeroForcing()


def affine_forcing(a: float, b: float = 0.0) -> AffineForcing:
    return AffineForcing(a, b)


@dataclass(frozen=True)
class BTParams:
    """Coefficients, initial data and forcing of the Bagley-Torvik problem.

    ``forcing`` is any picklable callable of one real argument; the built-in
    :class:`ZeroForcing` and :class:`AffineForcing` qualify.
    """

    A: float
    B: float
    C: float
    y0: float = 0.0
    y0_prime: float = 0.0
    forcing: Callable[[float], float] = ZeroForcing()

    def __post_init__(self) -> None:
        if self.A == 0.0 or not math.isfinite(self.A):
            raise ValidationError(f"A must be finite and nonzero, got {self.A}")
        if not callable(self.forcing):
            raise ValidationError("forcing must be callable")

    @property
    def system_matrix(self) -> np.ndarray:
        """Matrix ``M`` of the linear part ``D^{1/2} Y = M Y + e_4 f / A``."""
        M = np.zeros((4, 4))
        M[0, 1] = M[1, 2] = M[2, 3] = 1.0
        M[3, 0] = -self.C / self.A
        M[3, 3] = -self.B / self.A
        return M

    @property
    def initial_state(self) -> np.ndarray:
        return np.array([self.y0, 0.0, self.y0_prime, 0.0])


_HALF = 0.5

#: the "pi" scheme interpolates in sqrt(s) on the leading intervals: at least
#: SQRT_WINDOW_NODES of them and all that end before SQRT_WINDOW_TIME
SQRT_WINDOW_NODES = 64
SQRT_WINDOW_TIME = 0.25


def solve_bt(
    p: BTParams,
    grid: GridPolicy,
    *,
    method: str = "pi",
    full_output: bool = False,
) -> Trajectory | tuple[Trajectory, np.ndarray]:
    r"""March the half-order system and return :math:`y = y_1`.

    :arg method: ``"pi"`` (default) solves the Volterra form
        :math:`Y = Y(0) + J^{1/2}[M Y + e_4 f/A]` with product-trapezoid
        weights. ``"gl"`` applies Grunwald-Letnikov weights to
        :math:`Y - Y(0)` with the right-hand side taken at
        :math:`t_n - h/4`; on adaptive grids the history is resampled
        linearly onto a uniform stencil. Both are implicit, with one 4x4
        linear solve per step. The components behave like powers of
        :math:`\sqrt{t}`, which the shift does not capture, so ``"gl"`` is
        first order while ``"pi"`` reaches second order.
    :arg full_output: also return the ``(4, n_nodes)`` array of all
        components.

    The returned trajectory carries finite-difference derivatives.
    """
    if method not in ("pi", "gl"):
        raise ValidationError(f"unknown method {method!r}; expected 'pi' or 'gl'")

    M = p.system_matrix
    Y0 = p.initial_state
    e4 = np.array([0.0, 0.0, 0.0, 1.0 / p.A])
    eye = np.eye(4)

    ctl = StepController(grid)
    sums = HistorySums(grid, ctl, _HALF)
    st = GrowableState(4, grid.capacity_hint())
    st.y[:, 0] = Y0
    # right-hand side values for "pi", deviations Y - Y0 for "gl"
    store = np.zeros((4, st.t.size))
    if method == "pi":
        store[:, 0] = M @ Y0 + e4 * p.forcing(0.0)
    omega = gl_weights(_HALF, max(grid.capacity_hint(), 2)).weights
    du = np.zeros(st.t.size)

    window = 0
    n = 0
    while not ctl.done(st.t[n]):
        t_next = ctl.next_time(n, st.t, st.y[0], du)
        k = n + 1
        if k >= st.t.size:
            st.ensure(k)
            grown = np.zeros((4, st.t.size))
            grown[:, : store.shape[1]] = store
            store = grown
            d2 = np.zeros(st.t.size)
            d2[: du.size] = du
            du = d2
        t, Y = st.t, st.y
        t[k] = t_next
        f_k = p.forcing(t_next)

        if method == "pi":
            # components expand in powers of sqrt(t); interpolate in sqrt(s)
            # on the leading intervals and linearly afterwards
            while t[window] < SQRT_WINDOW_TIME and window < k:
                window += 1
            j_end = min(k, max(window, SQRT_WINDOW_NODES))
            wl, wr = interval_weights(t[: j_end + 1], t_next, _HALF, 0.0, _HALF)
            c = np.zeros(j_end + 1)
            c[:-1] += wl
            c[1:] += wr
            hist = store[:, :j_end] @ c[:j_end]
            if k == j_end:
                a_kk = c[k]
            else:
                tail, a_kk = sums.trapezoid(t, store, k, j_end)
                hist = hist + c[j_end] * store[:, j_end] + tail
            lhs = eye - a_kk * M
            rhs = Y0 + hist + a_kk * e4 * f_k
            Y[:, k] = np.linalg.solve(lhs, rhs)
            store[:, k] = M @ Y[:, k] + e4 * f_k
        else:
            h = t_next - t[n]
            if grid.is_regular_step(h):
                if k >= omega.size:
                    omega = gl_weights(_HALF, 2 * k).weights
                hist = kernels.gl_history(omega, store, k)
            else:
                hist = _shadow_history(t[:k], store[:, :k], t_next, h)
            theta = 0.25
            r_prev = M @ Y[:, n] + e4 * p.forcing(t[n])
            ha = h ** (-_HALF)
            lhs = ha * eye - (1.0 - theta) * M
            rhs = -ha * hist + (1.0 - theta) * (M @ Y0 + e4 * f_k) + theta * r_prev
            Z = np.linalg.solve(lhs, rhs)
            Y[:, k] = Y0 + Z
            store[:, k] = Z

        if not np.all(np.isfinite(Y[:, k])) or np.max(np.abs(Y[:, k])) > 1.0e300:
            raise SolverError(f"state became non-finite or overflowed at t={t_next:.6g}")
        du[k] = (Y[0, k] - Y[0, n]) / (t_next - t[n])
        n = k

    times = st.t[: n + 1].copy()
    comps = st.y[:, : n + 1].copy()
    y = Trajectory(times, comps[0])
    if times.size >= 3:
        y = y.with_derivs()
    if full_output:
        return y, comps
    return y


def _shadow_history(t: np.ndarray, z: np.ndarray, t_next: float, h: float) -> np.ndarray:
    m = int(math.floor(t_next / h + 1.0e-9))
    if m == 0:
        return np.zeros(z.shape[0])
    stencil = np.clip(t_next - h * np.arange(m, 0, -1), t[0], t[-1])
    omega = gl_weights(_HALF, m).weights[1:]
    out = np.empty(z.shape[0])
    for i in range(z.shape[0]):
        zs = resample_linear(Trajectory(t, z[i]), stencil).values[::-1]
        out[i] = zs @ omega
    return out

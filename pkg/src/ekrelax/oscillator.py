r"""Fractional damped oscillator with power-law coefficients.

The oscillator is marched as the hybrid first-order/fractional system

.. math::

    u'(t) = t^{-\eta} w(t), \qquad
    D^\alpha w(t) = -\lambda t^{1-\alpha} w(t) - \mu t^{\eta - \alpha} u(t),

with :math:`\mu = \lambda(\eta + 1 - \alpha)` and :math:`w = t^\eta u'`. At
:math:`\alpha = 1` it collapses to

.. math::

    u'' + \Big(\frac{\eta}{t} + \lambda\Big) u' + \frac{\lambda\eta}{t} u = 0,

whose solutions are :math:`u = e^{-\lambda t}\{c_1 + c_2 \int_{t_0}^t
s^{-\eta} e^{\lambda s} \mathrm{d}s\}`. The substitution
:math:`u = t^{-\eta/2} e^{-\lambda t/2} v` removes the first-order term and
gives :math:`v'' + q(t) v = 0`, which is the basis of the Sturm diagnostics.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from ._backend import kernels
from ._history import HistorySums
from ._quadrature import SINGULAR_WINDOW, interval_weights
from .errors import SolverError, ValidationError
from .grid import GridPolicy, GrowableState, StepController
from .operators import Trajectory, gl_weights, resample_linear, resample_quadratic
from .relax import decay_rate
from .specfun import gamma_ratio

__all__ = [
    "Classification",
    "DiagnosticsReport",
    "OscParams",
    "SturmWindow",
    "alpha1_general_solution",
    "classify_trajectory",
    "og_residual",
    "oscillation_window",
    "sign_changes",
    "solve_oscillator",
    "sturm_q",
    "verify_sturm_bound",
]


@dataclass(frozen=True)
class OscParams:
    """Oscillator parameters; the derived constants are always recomputed."""

    alpha: float
    lam: float
    eta: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValidationError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.lam > 0.0:
            raise ValidationError(f"lam must be positive, got {self.lam}")
        if not self.eta >= 0.0:
            raise ValidationError(f"eta must be non-negative, got {self.eta}")

    @property
    def delta(self) -> float:
        return self.eta + 1.0 - self.alpha

    @property
    def mu(self) -> float:
        return self.lam * self.delta

    @property
    def gamma_exp(self) -> float:
        return self.eta - self.alpha

    def initial_velocity(self, u0: float, v0: float) -> float:
        r"""Limit of :math:`u'(t)` as :math:`t \to 0^+` for the given data.

        For ``eta = 0`` this is ``v0``. For ``eta > 0`` the factor
        :math:`t^\eta` forces :math:`w(0) = 0`, and the bounded solution has
        :math:`w \sim -\mu u_0 \Gamma(\eta+1-\alpha)/\Gamma(\eta+1)\, t^\eta`,
        so ``v0`` cannot be prescribed and the consistent limit is returned.
        """
        if self.eta == 0.0:
            return float(v0)
        return -self.mu * u0 * gamma_ratio(self.eta + 1.0 - self.alpha, self.eta + 1.0)


def _check(value: float, t: float) -> None:
    if not math.isfinite(value) or abs(value) > 1.0e300:
        raise SolverError(f"oscillator state became non-finite or overflowed at t={t:.6g}")


class _Buffers:
    """Growable node storage shared by both marching schemes."""

    def __init__(self, capacity: int) -> None:
        self.state = GrowableState(2, capacity)
        self.F = np.zeros((1, self.state.t.size))
        self.du = np.zeros(self.state.t.size)

    def ensure(self, index: int) -> None:
        if index < self.state.t.size:
            return
        self.state.ensure(index)
        cap = self.state.t.size
        F = np.zeros((1, cap))
        F[:, : self.F.shape[1]] = self.F
        du = np.zeros(cap)
        du[: self.du.size] = self.du
        self.F, self.du = F, du


def solve_oscillator(
    p: OscParams,
    grid: GridPolicy,
    init: tuple[float, float] = (1.0, 1.0),
    *,
    method: str = "pi",
    interp: str = "linear",
) -> tuple[Trajectory, Trajectory]:
    r"""Solve the hybrid oscillator system; returns ``(u, w)``.

    :arg init: ``(u0, v0)`` with ``v0 = u'(0)``. For ``eta > 0`` the value
        ``v0`` is replaced by the consistent limit from
        :meth:`OscParams.initial_velocity` (see there).
    :arg method: ``"pi"`` (default) advances :math:`w` in Volterra form with
        product-trapezoid weights. On the leading intervals the power
        coefficients stay inside exact moment weights and, for
        ``0 < eta < 1``, :math:`w` is interpolated linearly in
        :math:`s^\eta`, matching its behaviour at the origin. ``"gl"`` uses
        Grunwald-Letnikov weights on :math:`w - w(0)` with the right-hand
        side evaluated at the shifted point :math:`t_n - \theta h`,
        :math:`\theta = \alpha/2` (second order for smooth data;
        Crank-Nicolson at :math:`\alpha = 1`). The GL path
        only converges like :math:`h^\delta`, :math:`\delta = \eta + 1 - \alpha`,
        when :math:`\delta < 1`, because the source
        :math:`t^{\eta - \alpha} u` is then singular at 0.
    :arg interp: ``"linear"`` or ``"quadratic"``; how the GL path brings the
        history onto its uniform stencil on adaptive grids.

    In both schemes :math:`u` is advanced by the trapezoid rule on
    :math:`u' = t^{-\eta} w`, and each step is one 2x2 linear solve.
    """
    if method not in ("pi", "gl"):
        raise ValidationError(f"unknown method {method!r}; expected 'pi' or 'gl'")
    if interp not in ("linear", "quadratic"):
        raise ValidationError(f"unknown interp {interp!r}")

    u0, v0 = (float(x) for x in init)
    v_start = p.initial_velocity(u0, v0)
    w0 = v_start if p.eta == 0.0 else 0.0

    if method == "pi":
        return _solve_pi(p, grid, u0, v_start, w0)
    return _solve_gl(p, grid, u0, v_start, w0, interp)


def _finish(buf: _Buffers, n: int, v_start: float) -> tuple[Trajectory, Trajectory]:
    t = buf.state.t[: n + 1].copy()
    u = buf.state.y[0, : n + 1].copy()
    w = buf.state.y[1, : n + 1].copy()
    du = buf.du[: n + 1].copy()
    du[0] = v_start
    u_traj = Trajectory(t, u, du)
    w_traj = Trajectory(t, w)
    if t.size >= 3:
        w_traj = w_traj.with_derivs()
    return u_traj, w_traj


def _solve_pi(
    p: OscParams, grid: GridPolicy, u0: float, v_start: float, w0: float
) -> tuple[Trajectory, Trajectory]:
    alpha, lam, eta, mu, gam = p.alpha, p.lam, p.eta, p.mu, p.gamma_exp
    ctl = StepController(grid)
    sums = HistorySums(grid, ctl, alpha)
    buf = _Buffers(grid.capacity_hint())
    buf.state.y[0, 0] = u0
    buf.state.y[1, 0] = w0
    buf.du[0] = v_start
    # w behaves like t^eta near the origin, so interpolate it in s^eta there
    r_w = eta if 0.0 < eta < 1.0 else 1.0

    n = 0
    while not ctl.done(buf.state.t[n]):
        st = buf.state
        t_next = ctl.next_time(n, st.t, st.y[0], buf.du)
        k = n + 1
        buf.ensure(k)
        st = buf.state
        t, u, w = st.t, st.y[0], st.y[1]
        t[k] = t_next

        # w-equation: w_k = w0 + J^alpha F with F = -lam s^(1-alpha) w - mu s^gam u.
        # On the first SINGULAR_WINDOW intervals the powers stay in the weights.
        j_end = min(k, SINGULAR_WINDOW)
        wl, wr = interval_weights(t[: j_end + 1], t_next, alpha, 1.0 - alpha, r_w)
        cw = np.zeros(j_end + 1)
        cw[:-1] += wl
        cw[1:] += wr
        cu = np.zeros(j_end + 1)
        if mu != 0.0:
            wl, wr = interval_weights(t[: j_end + 1], t_next, alpha, gam)
            cu[:-1] += wl
            cu[1:] += wr
        r2 = w0 - lam * (cw[:j_end] @ w[:j_end]) - mu * (cu[:j_end] @ u[:j_end])
        if k == j_end:
            aw, au = lam * cw[k], mu * cu[k]
        else:
            r2 -= lam * cw[j_end] * w[j_end] + mu * cu[j_end] * u[j_end]
            hist, a_kk = sums.trapezoid(t, buf.F, k, j_end)
            r2 += hist[0]
            aw = a_kk * lam * t_next ** (1.0 - alpha)
            au = a_kk * mu * t_next**gam

        # u-equation: trapezoid on u' = s^(-eta) w
        dt = t_next - t[n]
        r1 = u[n] + 0.5 * dt * buf.du[n]
        b = 0.5 * dt * t_next ** (-eta)

        # [1, -b; au, 1 + aw] [u_k; w_k] = [r1; r2]
        det = (1.0 + aw) + b * au
        u_k = (r1 * (1.0 + aw) + b * r2) / det
        w_k = (r2 - au * r1) / det
        _check(u_k, t_next)
        _check(w_k, t_next)

        u[k], w[k] = u_k, w_k
        buf.F[0, k] = -lam * t_next ** (1.0 - alpha) * w_k - mu * t_next**gam * u_k
        buf.du[k] = t_next ** (-eta) * w_k
        n = k

    return _finish(buf, n, v_start)


def _solve_gl(
    p: OscParams,
    grid: GridPolicy,
    u0: float,
    v_start: float,
    w0: float,
    interp: str,
) -> tuple[Trajectory, Trajectory]:
    alpha, lam, eta, mu, gam = p.alpha, p.lam, p.eta, p.mu, p.gamma_exp
    theta = 0.5 * alpha
    ctl = StepController(grid)
    buf = _Buffers(grid.capacity_hint())
    buf.state.y[0, 0] = u0
    buf.state.y[1, 0] = w0
    buf.du[0] = v_start

    def cw(s: float) -> float:
        return lam * s ** (1.0 - alpha)

    def cu(s: float) -> float:
        return 0.0 if mu == 0.0 else mu * s**gam

    omega = gl_weights(alpha, max(grid.capacity_hint(), 2)).weights
    # GL acts on w - w(0) so that the scheme approximates the Caputo derivative
    x = np.zeros((1, buf.state.t.size))

    n = 0
    while not ctl.done(buf.state.t[n]):
        st = buf.state
        t_next = ctl.next_time(n, st.t, st.y[0], buf.du)
        k = n + 1
        buf.ensure(k)
        st = buf.state
        t, u, w = st.t, st.y[0], st.y[1]
        t[k] = t_next
        h = t_next - t[n]

        if x.shape[1] < t.size:
            x2 = np.zeros((1, t.size))
            x2[:, : x.shape[1]] = x
            x = x2
        if grid.is_regular_step(h):
            if k >= omega.size:
                omega = gl_weights(alpha, 2 * k).weights
            hist = kernels.gl_history(omega, x, k)[0]
        else:
            hist = _shadow_history(t[:k], x[0, :k], t_next, h, alpha, interp)

        # the singular coefficient at t = 0 is not evaluated on the first step
        th = 0.0 if (k == 1 and gam < 0.0) else theta
        f_prev = 0.0 if th == 0.0 else -(cw(t[n]) * w[n] + cu(t[n]) * u[n])
        ha = h ** (-alpha)

        # unknowns u_k and z_k = w_k - w0:
        #   u_k - b z_k = u_n + h/2 u'_n + b w0
        #   (1-th) cu u_k + (ha + (1-th) cw) z_k = -ha hist + th f_prev - (1-th) cw w0
        b = 0.5 * h * t_next ** (-eta)
        r1 = u[n] + 0.5 * h * buf.du[n] + b * w0
        a21 = (1.0 - th) * cu(t_next)
        a22 = ha + (1.0 - th) * cw(t_next)
        r2 = -ha * hist + th * f_prev - (1.0 - th) * cw(t_next) * w0

        det = a22 + b * a21
        u_k = (r1 * a22 + b * r2) / det
        w_k = w0 + (r2 - a21 * r1) / det
        _check(u_k, t_next)
        _check(w_k, t_next)

        u[k], w[k] = u_k, w_k
        x[0, k] = w_k - w0
        buf.du[k] = t_next ** (-eta) * w_k
        n = k

    return _finish(buf, n, v_start)


def _shadow_history(
    t: np.ndarray, z: np.ndarray, t_next: float, h: float, alpha: float, interp: str
) -> float:
    """GL history sum on the uniform stencil ``t_next - j h``, ``j >= 1``.

    The accepted samples of ``z`` are resampled onto the stencil; ``z`` is
    taken as zero before the first node.
    """
    m = int(math.floor(t_next / h + 1.0e-9))
    if m == 0:
        return 0.0
    stencil = np.clip(t_next - h * np.arange(m, 0, -1), t[0], t[-1])
    resample = resample_linear if interp == "linear" else resample_quadratic
    zs = resample(Trajectory(t, z), stencil).values[::-1]
    omega = gl_weights(alpha, m).weights
    return float(zs @ omega[1:])


def og_residual(u: Trajectory, lam: float, eta: float) -> Trajectory:
    r"""Residual of :math:`u'' + (\eta/t + \lambda) u' + \lambda\eta u/t` at interior nodes.

    Derivatives are second-order differences on the (possibly non-uniform)
    grid; nodes at ``t = 0`` are dropped.
    """
    if len(u) < 3:
        raise ValidationError("og_residual needs at least 3 nodes")
    t, y = u.times, u.values
    d1 = np.gradient(y, t, edge_order=2)
    d2 = np.gradient(d1, t, edge_order=2)
    # second derivative from a three-point stencil is more accurate than
    # differentiating twice on interior nodes
    h0 = t[1:-1] - t[:-2]
    h1 = t[2:] - t[1:-1]
    d2_int = 2.0 * (h0 * y[2:] - (h0 + h1) * y[1:-1] + h1 * y[:-2]) / (h0 * h1 * (h0 + h1))
    d2[1:-1] = d2_int
    tt, sl = t[1:-1], slice(1, -1)
    keep = tt > 0.0
    res = d2[sl] + (eta / tt + lam) * d1[sl] + lam * eta / tt * y[sl]
    return Trajectory(tt[keep], res[keep])


def alpha1_general_solution(
    lam: float,
    eta: float,
    c1: float,
    c2: float,
    t: float | np.ndarray,
    t0: float = 1.0,
) -> float | np.ndarray:
    r"""General solution of the ``alpha = 1`` oscillator equation.

    .. math::

        u(t) = c_1 e^{-\lambda t}
            + c_2 \int_{t_0}^t s^{-\eta} e^{-\lambda (t - s)} \mathrm{d}s.

    The integrand is written with the decaying exponential so that large
    ``lam * t`` does not overflow; the integral is computed by adaptive
    quadrature with relative tolerance ``1e-10``.

    :raises SolverError: if the quadrature reports a failure.
    """
    if not lam > 0.0:
        raise ValidationError(f"lam must be positive, got {lam}")
    if not eta >= 0.0:
        raise ValidationError(f"eta must be non-negative, got {eta}")
    tt = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if np.any(tt <= 0.0):
        raise ValidationError("alpha1_general_solution needs t > 0")

    out = c1 * np.exp(-lam * tt)
    if c2 != 0.0:
        out = out + c2 * np.array([_decayed_integral(lam, eta, ti, t0) for ti in tt])
    return float(out[0]) if np.ndim(t) == 0 else out


def _decayed_integral(lam: float, eta: float, t: float, t0: float) -> float:
    # contributions from s < t - 60/lam are below exp(-60) relative
    lo = max(t0, t - 60.0 / lam) if t > t0 else t0
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, _ = quad(
                lambda s: s ** (-eta) * math.exp(-lam * (t - s)),
                lo,
                t,
                epsabs=0.0,
                epsrel=1.0e-10,
                limit=200,
            )
        except IntegrationWarning as exc:
            raise SolverError(f"quadrature failed at t={t}: {exc}") from exc
    return val


def sturm_q(lam: float, eta: float, t: float | np.ndarray) -> float | np.ndarray:
    r""":math:`q(t) = \eta(2-\eta)/(4t^2) + \lambda\eta/(2t) - \lambda^2/4`."""
    tt = np.asarray(t, dtype=np.float64)
    if np.any(tt <= 0.0):
        raise ValidationError("sturm_q needs t > 0")
    q = eta * (2.0 - eta) / (4.0 * tt**2) + lam * eta / (2.0 * tt) - 0.25 * lam**2
    return float(q) if q.ndim == 0 else q


@dataclass(frozen=True)
class SturmWindow:
    r"""Interval on which :math:`q(t) > k^2`.

    ``t_minus`` and ``t_plus`` are the two roots of :math:`q(t) = k^2`
    (after clearing :math:`t^2`). For ``0 < eta < 2`` the smaller root is
    negative, so on ``t > 0`` the window is ``(max(t_minus, 0), t_plus)``,
    exposed as :attr:`interval`.

    The product ``k * width`` depends only on ``eta`` and ``k / lam`` and
    stays below 1, so the window is always shorter than the zero-spacing
    bound ``pi / k``.
    """

    k: float
    t_minus: float
    t_plus: float
    width: float
    lam: float
    eta: float
    #: zeros of ``v`` inside the window are closer than this
    zero_spacing_bound: float
    #: small-``k`` expansion of ``width``
    small_k_width: float

    @property
    def interval(self) -> tuple[float, float]:
        return max(self.t_minus, 0.0), max(self.t_plus, 0.0)


def oscillation_window(lam: float, eta: float, k: float) -> SturmWindow:
    if not lam > 0.0:
        raise ValidationError(f"lam must be positive, got {lam}")
    if not k > 0.0:
        raise ValidationError(f"k must be positive, got {k}")
    if not 0.0 < eta < 2.0:
        raise ValidationError(f"eta must lie in (0, 2), got {eta}")
    disc = 2.0 * eta * lam**2 + 4.0 * k**2 * eta * (2.0 - eta)
    if disc < 0.0:
        raise ValidationError(f"negative discriminant {disc}")
    root = math.sqrt(disc)
    den = lam**2 + 4.0 * k**2
    t_minus = (lam * eta - root) / den
    t_plus = (lam * eta + root) / den
    return SturmWindow(
        k=k,
        t_minus=t_minus,
        t_plus=t_plus,
        width=t_plus - t_minus,
        lam=lam,
        eta=eta,
        zero_spacing_bound=math.pi / k,
        small_k_width=2.0 * math.sqrt(2.0 * eta) / lam * (1.0 - k**2 * (2.0 + eta) / lam**2),
    )


class Classification(enum.Enum):
    OVERDAMPED = "overdamped"
    UNDERDAMPED = "underdamped"


@dataclass(frozen=True)
class DiagnosticsReport:
    classification: Classification
    #: interpolated times at which ``u`` changes sign
    zero_crossings: np.ndarray
    #: interpolated times at which ``u'`` changes sign
    deriv_sign_changes: np.ndarray
    #: ``log|u'/u|`` on interior nodes
    decay_rate: Trajectory
    metadata: dict = field(default_factory=dict)


def sign_changes(t: np.ndarray, x: np.ndarray, rel_tol: float = 0.0) -> np.ndarray:
    """Times where ``x`` changes sign, located by linear interpolation.

    Samples with ``|x| <= rel_tol * max|x|`` are treated as zero and skipped,
    which suppresses spurious crossings from round-off in decayed tails.
    Exact zeros between samples of opposite sign count once.
    """
    t = np.asarray(t, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return np.empty(0)
    scale = float(np.max(np.abs(x)))
    keep = np.abs(x) > rel_tol * scale if scale > 0.0 else np.zeros(x.size, dtype=bool)
    tk, xk = t[keep], x[keep]
    if xk.size < 2:
        return np.empty(0)
    idx = np.nonzero(np.sign(xk[:-1]) != np.sign(xk[1:]))[0]
    t0, t1, x0, x1 = tk[idx], tk[idx + 1], xk[idx], xk[idx + 1]
    return t0 - x0 * (t1 - t0) / (x1 - x0)


def classify_trajectory(u: Trajectory, rel_tol: float = 1.0e-6) -> DiagnosticsReport:
    """Zero crossings, derivative sign changes and damping class of ``u``.

    ``u'`` comes from central differences (not from ``u.derivs``), so the
    classification depends only on the samples; differences at the rounding
    level of ``u`` count as zero. Sign changes at amplitudes
    below ``rel_tol`` times the peak are ignored (see :func:`sign_changes`).
    """
    if len(u) < 3:
        raise ValidationError("classify_trajectory needs at least 3 nodes")
    du = np.gradient(u.values, u.times)
    # differences below a few ulps of u are rounding, not turning points
    resolution = 4.0 * np.finfo(float).eps * np.abs(u.values) / np.gradient(u.times)
    du = np.where(np.abs(du) > resolution, du, 0.0)
    zeros = sign_changes(u.times, u.values, rel_tol)
    dzeros = sign_changes(u.times, du, rel_tol)
    try:
        rate = decay_rate(u)
    except ValidationError:
        rate = Trajectory(np.empty(0), np.empty(0))
    # report |u'/u| itself
    rate = Trajectory(rate.times, np.exp(rate.values))
    cls = Classification.UNDERDAMPED if dzeros.size else Classification.OVERDAMPED
    return DiagnosticsReport(
        classification=cls,
        zero_crossings=zeros,
        deriv_sign_changes=dzeros,
        decay_rate=rate,
        metadata={"n_nodes": len(u), "t_start": float(u.times[0]), "t_end": float(u.times[-1])},
    )


#: nodes required per zero-spacing bound for :func:`verify_sturm_bound`
NODES_PER_BOUND = 20


def verify_sturm_bound(u: Trajectory, window: SturmWindow) -> bool:
    r"""Check the Sturm zero-spacing bound on the transformed solution.

    With :math:`v = u / p`, :math:`p(t) = t^{-\eta/2} e^{-\lambda t/2}`, every
    closed subinterval of the window of length :math:`\pi/k` must contain a
    zero of :math:`v`. This is checked as: all gaps between consecutive zeros
    inside the window, and the gaps from the window ends to the nearest zero,
    are at most :math:`\pi/k`. A window narrower than :math:`\pi/k` passes
    vacuously.

    :raises ValidationError: if the grid has fewer than 20 nodes per
        :math:`\pi/k` on the window.
    """
    bound = window.zero_spacing_bound
    a, b = window.interval
    if b - a <= 0.0:
        return True

    t = u.times
    inside = (t > a) & (t < b) & (t > 0.0)
    steps = np.diff(t[(t >= a) & (t <= b)])
    if steps.size and steps.max() > bound / NODES_PER_BOUND:
        raise ValidationError(
            f"grid does not resolve pi/k = {bound:.4g} with {NODES_PER_BOUND} nodes"
        )

    ti = t[inside]
    lam, eta = window.lam, window.eta
    v = u.values[inside] * ti ** (0.5 * eta) * np.exp(0.5 * lam * ti)
    zeros = sign_changes(ti, v)
    if zeros.size == 0:
        return b - a <= bound
    inner_ok = bool(np.all(np.diff(zeros) < bound))
    return inner_ok and zeros[0] - a <= bound and b - zeros[-1] <= bound

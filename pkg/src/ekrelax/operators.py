r"""Discrete fractional operators on sampled functions.

Every operator takes a :class:`Trajectory` (samples on a strictly increasing,
possibly non-uniform grid) and returns a new one on the same grid. Integrals
use product integration: the piecewise-linear interpolant of the integrand is
integrated exactly against the weakly singular kernel
:math:`(t - s)^{\beta - 1} / \Gamma(\beta)`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from ._quadrature import SINGULAR_WINDOW, interval_weights
from .errors import ValidationError
from .specfun import gamma, gamma_ratio

__all__ = [
    "GLWeights",
    "Trajectory",
    "caputo_derivative",
    "ek_integral",
    "estimate_derivative",
    "gl_derivative",
    "gl_weights",
    "resample_linear",
    "resample_quadratic",
    "rl_integral",
]


@dataclass(frozen=True)
class Trajectory:
    """Samples ``values[i] = u(times[i])`` with optional first derivatives."""

    times: np.ndarray
    values: np.ndarray
    derivs: np.ndarray | None = None

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if times.ndim != 1 or values.shape != times.shape:
            raise ValidationError("times and values must be 1d arrays of equal length")
        if times.size and times[0] < 0.0:
            raise ValidationError("times must be non-negative")
        if times.size > 1 and not np.all(np.diff(times) > 0.0):
            raise ValidationError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

        if self.derivs is not None:
            derivs = np.asarray(self.derivs, dtype=np.float64)
            if derivs.shape != times.shape:
                raise ValidationError("derivs must have the same length as times")
            object.__setattr__(self, "derivs", derivs)

    def __len__(self) -> int:
        return self.times.size

    @classmethod
    def from_function(cls, func, times, with_derivs=None) -> Trajectory:
        """Sample ``func`` (and optionally its derivative) on ``times``."""
        times = np.asarray(times, dtype=np.float64)
        derivs = None if with_derivs is None else with_derivs(times)
        return cls(times, func(times), derivs)

    def with_derivs(self, derivs: np.ndarray | None = None) -> Trajectory:
        """Return a copy with ``derivs`` set (estimated if not given)."""
        if derivs is None:
            derivs = estimate_derivative(self)
        return Trajectory(self.times, self.values, derivs)


def _require_nonempty(f: Trajectory) -> None:
    if len(f) == 0:
        raise ValidationError("trajectory is empty")


def estimate_derivative(f: Trajectory) -> np.ndarray:
    """Second-order finite differences, one-sided at both ends."""
    if len(f) < 3:
        raise ValidationError("derivative estimation needs at least 3 nodes")
    return np.gradient(f.values, f.times, edge_order=2)


def rl_integral(f: Trajectory, beta: float) -> Trajectory:
    r"""Riemann-Liouville integral :math:`J^\beta f` at every node.

    The lower limit is ``f.times[0]``, so the first node maps to 0.
    """
    _require_nonempty(f)
    if not 0.0 < beta <= 1.0:
        raise ValidationError(f"beta must lie in (0, 1], got {beta}")

    out = kernels.rl_integral_all(f.times, np.ascontiguousarray(f.values), float(beta))
    return Trajectory(f.times, np.asarray(out))


def caputo_derivative(f: Trajectory, alpha: float) -> Trajectory:
    r"""Caputo derivative :math:`D^\alpha f = J^{1-\alpha} f'` for :math:`0 < \alpha < 1`.

    With ``f.derivs`` present, :func:`rl_integral` is applied to them.
    Otherwise the derivative of the piecewise-linear interpolant of ``f`` is
    integrated exactly, i.e. the slope of each interval is weighted by
    :math:`[(t_n - t_j)^{1-\alpha} - (t_n - t_{j+1})^{1-\alpha}] / \Gamma(2-\alpha)`.
    This is exact for affine ``f`` and needs no pointwise derivative, so it
    also copes with the :math:`t^{\alpha - 1}` growth of derivatives of
    fractional integrals. Sampled smoothness of ``f`` stands in for absolute
    continuity, which cannot be checked from samples.
    """
    _require_nonempty(f)
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    if f.derivs is not None:
        return rl_integral(Trajectory(f.times, f.derivs), 1.0 - alpha)
    if len(f) < 3:
        raise ValidationError("caputo_derivative needs derivs or at least 3 nodes")

    t = f.times
    slopes = np.zeros((1, t.size))
    slopes[0, :-1] = np.diff(f.values) / np.diff(t)
    out = np.zeros(t.size)
    for n in range(1, t.size):
        out[n] = kernels.rectangle_history(t, slopes, n, 1.0 - alpha)[0]
    return Trajectory(t, out)


def _weighted_rl_integral(tau: np.ndarray, y: np.ndarray, alpha: float, eta: float) -> np.ndarray:
    r"""Nodal values of :math:`J^\alpha[s^\eta y](\tau)`.

    On the first :data:`SINGULAR_WINDOW` intervals the factor :math:`s^\eta`
    stays inside the product-integration weights and only ``y`` is
    interpolated, so the result is accurate down to the first node even
    when :math:`s^\eta` is not smooth at 0.
    """
    g = (tau**eta * y).reshape(1, -1)
    out = np.zeros(tau.size)
    for n in range(1, tau.size):
        j_end = min(n, SINGULAR_WINDOW)
        wl, wr = interval_weights(tau[: j_end + 1], tau[n], alpha, eta)
        c = np.zeros(j_end + 1)
        c[:-1] += wl
        c[1:] += wr
        out[n] = c @ y[: j_end + 1]
        if n > j_end:
            tail, a_nn = kernels.trapezoid_history(tau, g, n, alpha, j_end)
            out[n] += tail[0] + a_nn * g[0, n]
    return out


def ek_integral(f: Trajectory, eta: float, alpha: float, m: float = 1.0) -> Trajectory:
    r"""Erdelyi-Kober type integral :math:`I_m^{\eta,\alpha} f`.

    .. math::

        I_m^{\eta,\alpha} f(t) = \frac{t^{-m\eta - m\alpha}}{\Gamma(\alpha)}
            \int_0^t (t^m - s^m)^{\alpha - 1} s^{m\eta} f(s) \,\mathrm{d}(s^m).

    With :math:`\sigma = s^m` this is :math:`\tau^{-\eta-\alpha}
    J^\alpha_\sigma[\sigma^\eta f](\tau)` at :math:`\tau = t^m`, which is how it
    is computed; for :math:`\eta > 0` the power :math:`\sigma^\eta` is
    integrated exactly near the origin. At ``t = 0`` the limit
    ``f(0) Gamma(eta+1) / Gamma(eta+alpha+1)`` is returned (this assumes ``f``
    is continuous there).
    """
    _require_nonempty(f)
    if eta < 0.0:
        raise ValidationError(f"eta must be non-negative, got {eta}")
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    if not m > 0.0:
        raise ValidationError(f"m must be positive, got {m}")
    if f.times[0] != 0.0:
        raise ValidationError("ek_integral needs samples starting at t = 0")

    tau = f.times if m == 1.0 else f.times**m
    if eta == 0.0:
        j = rl_integral(Trajectory(tau, f.values), alpha).values
    else:
        j = _weighted_rl_integral(tau, f.values, alpha, eta)

    out = np.empty_like(j)
    out[1:] = tau[1:] ** (-eta - alpha) * j[1:]
    out[0] = f.values[0] * gamma_ratio(eta + 1.0, eta + alpha + 1.0)
    return Trajectory(f.times, out)


@dataclass(frozen=True)
class GLWeights:
    """Grunwald-Letnikov coefficients ``omega_k = (-1)^k binom(order, k)``."""

    order: float
    weights: np.ndarray

    def __len__(self) -> int:
        return self.weights.size


def gl_weights(order: float, n: int) -> GLWeights:
    """Return ``omega_0, ..., omega_n`` from ``omega_k = omega_{k-1} (1 - (order+1)/k)``."""
    if not 0.0 < order < 2.0:
        raise ValidationError(f"order must lie in (0, 2), got {order}")
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")

    k = np.arange(1, n + 1, dtype=np.float64)
    w = np.empty(n + 1)
    w[0] = 1.0
    w[1:] = np.cumprod(1.0 - (order + 1.0) / k)
    return GLWeights(float(order), w)


def gl_derivative(values: np.ndarray, h: float, order: float) -> np.ndarray:
    """Grunwald-Letnikov derivative of uniform samples, zero history before ``t_0``."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    n = values.size - 1
    omega = gl_weights(order, max(n, 1)).weights
    x = values.reshape(1, -1)
    out = np.empty_like(values)
    for i in range(n + 1):
        out[i] = values[i] + kernels.gl_history(omega, x, i)[0]
    return out * h ** (-order)


def _check_inside(f: Trajectory, new_times: np.ndarray) -> np.ndarray:
    new_times = np.asarray(new_times, dtype=np.float64)
    _require_nonempty(f)
    if new_times.size and (new_times.min() < f.times[0] or new_times.max() > f.times[-1]):
        raise ValidationError("resampling outside the sampled interval (extrapolation)")
    return new_times


def resample_linear(f: Trajectory, new_times: np.ndarray) -> Trajectory:
    """Piecewise-linear interpolation; exact at the original nodes."""
    new_times = _check_inside(f, new_times)
    return Trajectory(new_times, np.interp(new_times, f.times, f.values))


def resample_quadratic(f: Trajectory, new_times: np.ndarray) -> Trajectory:
    """Piecewise-quadratic (three-node Lagrange) interpolation.

    Each target uses the interval that contains it plus the next node to the
    right (the left one at the last interval).
    """
    new_times = _check_inside(f, new_times)
    t, y = f.times, f.values
    if t.size < 3:
        return resample_linear(f, new_times)

    i = np.clip(np.searchsorted(t, new_times, side="right") - 1, 0, t.size - 3)
    t0, t1, t2 = t[i], t[i + 1], t[i + 2]
    x = new_times
    l0 = (x - t1) * (x - t2) / ((t0 - t1) * (t0 - t2))
    l1 = (x - t0) * (x - t2) / ((t1 - t0) * (t1 - t2))
    l2 = (x - t0) * (x - t1) / ((t2 - t0) * (t2 - t1))
    return Trajectory(new_times, l0 * y[i] + l1 * y[i + 1] + l2 * y[i + 2])


def power_rule(mu: float, beta: float, t: np.ndarray) -> np.ndarray:
    r"""Exact :math:`J^\beta t^\mu = \Gamma(\mu+1)/\Gamma(\mu+\beta+1) t^{\mu+\beta}`."""
    return gamma(mu + 1.0) / gamma(mu + beta + 1.0) * np.asarray(t) ** (mu + beta)

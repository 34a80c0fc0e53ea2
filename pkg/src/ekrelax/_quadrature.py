"""Exact first-interval moments for power-law coefficients.

Coefficients such as ``t**beta`` with ``beta < 0`` are singular at ``t = 0``,
so the first grid interval cannot use nodal values. There the power is kept
inside the weight and only the state is interpolated (linearly, or held
constant for the predictor); the resulting integrals are incomplete Beta
functions.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import betainc

from .errors import ValidationError

#: leading intervals on which power-law coefficients are integrated exactly
SINGULAR_WINDOW = 64


def _moment(t1: float, tn: float, order: float, q: float) -> float:
    # int_0^t1 (tn - s)^(order-1) s^q ds
    x = min(t1 / tn, 1.0)
    return tn ** (order + q) * float(betainc(q + 1.0, order, x)) * float(beta_fn(q + 1.0, order))


def first_interval_weights(t1: float, tn: float, order: float, p: float) -> tuple[float, float]:
    r"""Weights ``(c0, c1)`` with

    .. math::

        \frac{1}{\Gamma(\beta)} \int_0^{t_1} (t_n - s)^{\beta-1} s^p
            \Big[y_0 \frac{t_1 - s}{t_1} + y_1 \frac{s}{t_1}\Big] \mathrm{d}s
            = c_0 y_0 + c_1 y_1.
    """
    if p <= -1.0:
        raise ValidationError(f"power {p} is not integrable at t = 0")
    g = math.gamma(order)
    m0 = _moment(t1, tn, order, p) / g
    c1 = _moment(t1, tn, order, p + 1.0) / (t1 * g)
    return m0 - c1, c1


def first_interval_rect(t1: float, tn: float, order: float, p: float) -> float:
    """Weight of ``y_0`` when the state is held constant on ``[0, t1]``."""
    if p <= -1.0:
        raise ValidationError(f"power {p} is not integrable at t = 0")
    return _moment(t1, tn, order, p) / math.gamma(order)


def interval_weights(
    t: np.ndarray, tn: float, order: float, p: float, r: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    r"""Exact product weights with the factor ``s**p`` kept in the kernel.

    For the intervals ``[t[j], t[j+1]]``, ``j = 0, ..., len(t) - 2``, returns
    arrays ``wl`` and ``wr`` with

    .. math::

        \frac{1}{\Gamma(\beta)} \int_{t_j}^{t_{j+1}} (t_n - s)^{\beta-1} s^p
            \ell(s) \,\mathrm{d}s = w^l_j y_j + w^r_j y_{j+1},

    where :math:`\ell` interpolates :math:`y` linearly in the variable
    :math:`s^r` (``r = 1`` is ordinary linear interpolation; ``r = 1/2``
    reproduces :math:`a + b\sqrt{s}` exactly). Meant for the first few
    intervals, where ``s**p`` or the solution is far from linear; the
    differences of incomplete Beta moments lose accuracy once
    ``t[j] / t[j+1]`` is close to 1.
    """
    if p <= -1.0:
        raise ValidationError(f"power {p} is not integrable at t = 0")
    if not r > 0.0:
        raise ValidationError(f"interpolation power must be positive, got {r}")
    t = np.asarray(t, dtype=np.float64)
    x = np.minimum(t / tn, 1.0)
    a0, a1 = p + 1.0, p + r + 1.0
    m0 = tn ** (order + p) * beta_fn(a0, order) * betainc(a0, order, x)
    m1 = tn ** (order + p + r) * beta_fn(a1, order) * betainc(a1, order, x)
    d0 = np.diff(m0)
    d1 = np.diff(m1)
    ta, tb = t[:-1] ** r, t[1:] ** r
    scale = (tb - ta) * math.gamma(order)
    wl = (tb * d0 - d1) / scale
    wr = (d1 - ta * d0) / scale
    return wl, wr

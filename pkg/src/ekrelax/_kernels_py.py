"""NumPy implementation of the convolution-history kernels.

This module mirrors :mod:`ekrelax._kernels` (the compiled Cython build) one
function at a time; :mod:`ekrelax._backend` picks whichever is importable.
All history arrays are two-dimensional, ``(n_series, n_nodes)``, so that one
set of quadrature weights can be applied to several state components.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"


def trapezoid_history(
    t: np.ndarray, f: np.ndarray, n: int, order: float, start: int = 0
) -> tuple[np.ndarray, float]:
    r"""Product-trapezoid quadrature of the Riemann-Liouville kernel at ``t[n]``.

    Integrates the piecewise-linear interpolant of ``f`` against
    :math:`(t_n - s)^{\beta - 1} / \Gamma(\beta)` over the intervals
    ``[t[j], t[j+1]]`` for ``j = start, ..., n - 1``.

    Returns the contribution of the nodes ``start, ..., n - 1`` (one value per
    row of ``f``) and the weight of node ``n``, which callers need for
    implicit updates.
    """
    m = f.shape[0]
    if n <= start:
        return np.zeros(m), 0.0

    tn = t[n]
    left = tn - t[start:n]
    right = tn - t[start + 1 : n + 1]
    width = t[start + 1 : n + 1] - t[start:n]

    pl = left**order
    pr = right**order
    i0 = (pl - pr) / order
    i1 = (pl * left - pr * right) / (order + 1.0)

    scale = width * math.gamma(order)
    wl = (i1 - right * i0) / scale
    wr = (left * i0 - i1) / scale

    hist = f[:, start:n] @ wl
    if n - start > 1:
        hist = hist + f[:, start + 1 : n] @ wr[:-1]
    return hist, float(wr[-1])


def rectangle_history(
    t: np.ndarray, f: np.ndarray, n: int, order: float, start: int = 0
) -> np.ndarray:
    """Product-rectangle (left endpoint) quadrature of the same kernel."""
    m = f.shape[0]
    if n <= start:
        return np.zeros(m)

    tn = t[n]
    left = tn - t[start:n]
    right = tn - t[start + 1 : n + 1]
    b = (left**order - right**order) / math.gamma(order + 1.0)
    return f[:, start:n] @ b


def gl_history(omega: np.ndarray, x: np.ndarray, n: int) -> np.ndarray:
    """Grunwald-Letnikov tail ``sum_{k=1}^{n} omega[k] * x[:, n - k]``."""
    if n <= 0:
        return np.zeros(x.shape[0])
    return x[:, n - 1 :: -1][:, :n] @ omega[1 : n + 1]


def rl_integral_all(t: np.ndarray, f: np.ndarray, order: float) -> np.ndarray:
    """Product-trapezoid Riemann-Liouville integral at every node of ``t``."""
    out = np.zeros(t.shape[0])
    f2 = f.reshape(1, -1)
    for n in range(1, t.shape[0]):
        hist, a_nn = trapezoid_history(t, f2, n, order)
        out[n] = hist[0] + a_nn * f[n]
    return out


def trapezoid_history_uniform(
    kp: np.ndarray,
    kp1: np.ndarray,
    scale: float,
    f: np.ndarray,
    n: int,
    order: float,
    start: int = 0,
) -> tuple[np.ndarray, float]:
    """:func:`trapezoid_history` for nodes ``t_j = j h``.

    ``kp[k] = k**order`` and ``kp1[k] = k**(order + 1)`` are precomputed, and
    ``scale = h**order / Gamma(order)``; no powers are evaluated here.
    """
    m = f.shape[0]
    if n <= start:
        return np.zeros(m), 0.0

    left = np.arange(n - start, 0, -1, dtype=np.float64)
    k = left.astype(np.intp)
    right = left - 1.0
    i0 = (kp[k] - kp[k - 1]) / order
    i1 = (kp1[k] - kp1[k - 1]) / (order + 1.0)
    wl = (i1 - right * i0) * scale
    wr = (left * i0 - i1) * scale

    hist = f[:, start:n] @ wl
    if n - start > 1:
        hist = hist + f[:, start + 1 : n] @ wr[:-1]
    return hist, float(wr[-1])


def rectangle_history_uniform(
    kp: np.ndarray, scale: float, f: np.ndarray, n: int, order: float, start: int = 0
) -> np.ndarray:
    """:func:`rectangle_history` for nodes ``t_j = j h``.

    ``scale = h**order / Gamma(order + 1)``.
    """
    m = f.shape[0]
    if n <= start:
        return np.zeros(m)
    k = np.arange(n - start, 0, -1)
    return f[:, start:n] @ ((kp[k] - kp[k - 1]) * scale)

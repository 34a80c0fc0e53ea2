r"""Gamma function and the three-parameter Saigo-Kilbas Mittag-Leffler function.

The Saigo-Kilbas function used here is

.. math::

    E_{\alpha, 1 + \beta/\alpha, \beta/\alpha}(-\lambda t^{\alpha + \beta})
        = 1 + \sum_{k=1}^\infty (-\lambda)^k t^{k(\alpha + \beta)}
          \prod_{j=0}^{k-1}
          \frac{\Gamma(\alpha(j + j\beta/\alpha + \beta/\alpha) + 1)}
               {\Gamma(\alpha(j + j\beta/\alpha + \beta/\alpha + 1) + 1)},

which solves :math:`D^\alpha y = -\lambda t^\beta y`, :math:`y(0) = 1`, for
:math:`0 < \alpha \le 1` and :math:`-\alpha < \beta \le 1 - \alpha`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import PoleError, SeriesDivergenceError, ValidationError

__all__ = [
    "SaigoKilbasArgs",
    "SeriesConfig",
    "SeriesInfo",
    "gamma",
    "gamma_ratio",
    "lgamma",
    "saigo_kilbas_ml",
]


def _check_pole(x: float) -> None:
    if x <= 0.0 and x == math.floor(x):
        raise PoleError(f"Gamma has a pole at x = {x}")


def gamma(x: float) -> float:
    """Gamma function of a real argument.

    Raises :class:`~ekrelax.errors.PoleError` at non-positive integers and
    :class:`OverflowError` once the result exceeds the double range.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValidationError(f"gamma requires a finite argument, got {x}")
    _check_pole(x)
    try:
        return math.gamma(x)
    except OverflowError:
        raise OverflowError(f"Gamma({x}) exceeds the double range") from None


def lgamma(x: float) -> float:
    """Logarithm of ``|Gamma(x)|``; defined for all non-pole arguments."""
    x = float(x)
    _check_pole(x)
    return math.lgamma(x)


def gamma_ratio(a: float, b: float) -> float:
    """Return ``Gamma(a) / Gamma(b)`` for positive ``a`` and ``b``.

    When ``b - a`` is a small non-negative integer the ratio is the exact
    reciprocal rising factorial; large arguments go through :func:`lgamma`.
    """
    d = b - a
    if d >= 0.0 and d == math.floor(d) and d <= 64:
        r = 1.0
        for i in range(int(d)):
            r *= a + i
        return 1.0 / r
    if max(a, b) < 150.0:
        return gamma(a) / gamma(b)
    return math.exp(lgamma(a) - lgamma(b))


@dataclass(frozen=True)
class SeriesConfig:
    """Truncation policy for infinite series.

    Summation stops once a term falls below ``abs_tol`` in magnitude or after
    ``max_terms`` terms.
    """

    abs_tol: float = 1.0e-14
    max_terms: int = 10_000

    def __post_init__(self) -> None:
        if not self.abs_tol > 0.0:
            raise ValidationError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_terms < 1:
            raise ValidationError(f"max_terms must be >= 1, got {self.max_terms}")


#: the upper end ``beta = 1 - alpha`` is admitted up to rounding of ``1 - alpha``
BETA_SLACK = 1.0e-12


@dataclass(frozen=True)
class SaigoKilbasArgs:
    alpha: float
    beta: float
    lam: float
    t: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValidationError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not -self.alpha < self.beta <= 1.0 - self.alpha + BETA_SLACK:
            raise ValidationError(
                f"beta must lie in (-alpha, 1 - alpha] = ({-self.alpha}, "
                f"{1.0 - self.alpha}], got {self.beta}"
            )
        if not self.lam > 0.0:
            raise ValidationError(f"lam must be positive, got {self.lam}")
        if np.any(np.asarray(self.t) < 0.0):
            raise ValidationError("t must be non-negative")


@dataclass(frozen=True)
class SeriesInfo:
    """Diagnostics returned alongside a series value."""

    #: number of terms summed after the leading 1
    n_terms: int
    #: ``"tolerance"`` or ``"max_terms"``
    stop_reason: str
    #: largest term magnitude divided by the result magnitude
    condition: float
    #: True when ``condition`` exceeds :data:`ILL_CONDITIONED`
    ill_conditioned: bool


#: conditioning threshold above which results are flagged
ILL_CONDITIONED = 1.0e12


def _ratio_factor(alpha: float, beta: float, j: int) -> float:
    m = beta / alpha
    num = alpha * (j + j * m + m) + 1.0
    den = alpha * (j + j * m + m + 1.0) + 1.0
    return gamma_ratio(num, den)


def saigo_kilbas_ml(
    alpha: float,
    beta: float,
    lam: float,
    t: float | np.ndarray,
    cfg: SeriesConfig | None = None,
    *,
    full_output: bool = False,
) -> float | np.ndarray | tuple[float | np.ndarray, SeriesInfo]:
    """Evaluate the Saigo-Kilbas Mittag-Leffler solution at time(s) ``t``.

    The series is summed in extended precision: terms alternate in sign and
    grow to ``O(exp(lam * t**(alpha + beta)))`` before decaying, so double
    precision would lose the leading digits of small results. Each new
    Gamma-ratio factor multiplies the running product from the previous term.

    :arg t: scalar or array of non-negative times.
    :arg full_output: if True, also return a :class:`SeriesInfo`.
    :raises SeriesDivergenceError: if ``cfg.max_terms`` is reached while the
        latest term is above ``cfg.abs_tol`` and not decreasing.
    """
    cfg = SeriesConfig() if cfg is None else cfg
    SaigoKilbasArgs(alpha, beta, lam, t)

    scalar = np.ndim(t) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=np.longdouble))
    x = -np.longdouble(lam) * tt ** np.longdouble(alpha + beta)

    term = np.ones_like(tt)
    total = np.ones_like(tt)
    biggest = np.ones_like(tt)
    prev_mag = np.abs(term)

    stop_reason = "max_terms"
    k = 0
    for k in range(1, cfg.max_terms + 1):
        term = term * x * np.longdouble(_ratio_factor(alpha, beta, k - 1))
        total += term
        mag = np.abs(term)
        biggest = np.maximum(biggest, mag)
        if np.all(mag < cfg.abs_tol):
            stop_reason = "tolerance"
            break
        if k < cfg.max_terms:
            prev_mag = mag
    else:
        if np.any((mag >= cfg.abs_tol) & (mag >= prev_mag)):
            raise SeriesDivergenceError(
                f"series did not converge in {cfg.max_terms} terms "
                f"(last |term| = {float(np.max(mag)):.3e})"
            )
        warnings.warn(
            f"series truncated at max_terms={cfg.max_terms} above abs_tol",
            RuntimeWarning,
            stacklevel=2,
        )

    with np.errstate(divide="ignore"):
        cond = np.where(total != 0, biggest / np.abs(total), np.inf)
    value = total.astype(np.float64)
    condition = float(np.max(cond))
    info = SeriesInfo(
        n_terms=k,
        stop_reason=stop_reason,
        condition=condition,
        ill_conditioned=condition > ILL_CONDITIONED,
    )

    out = float(value[0]) if scalar else value
    if full_output:
        return out, info
    return out

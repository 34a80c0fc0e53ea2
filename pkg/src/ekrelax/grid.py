"""Time grids: uniform stepping and the derivative-driven adaptive rule."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import StepUnderflowError, ValidationError
from .operators import Trajectory

__all__ = ["GridMode", "GridPolicy", "StepController", "adaptive_step"]

#: consecutive raw proposals below ``h_min`` tolerated before giving up
UNDERFLOW_PATIENCE = 1000

_DENOM_FLOOR = 1.0e-14


class GridMode(enum.Enum):
    UNIFORM = "uniform"
    ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class GridPolicy:
    """Step-size configuration for all time-marching solvers.

    In uniform mode ``h_min`` and ``h_max`` default to ``h`` and are unused.
    """

    h: float
    t_end: float
    mode: GridMode = GridMode.UNIFORM
    h_min: float | None = None
    h_max: float | None = None
    n_warmup: int = 4

    def __post_init__(self) -> None:
        mode = GridMode(self.mode)
        object.__setattr__(self, "mode", mode)
        if self.h_min is None:
            object.__setattr__(self, "h_min", self.h)
        if self.h_max is None:
            object.__setattr__(self, "h_max", self.h)

        if not (self.h > 0.0 and math.isfinite(self.h)):
            raise ValidationError(f"h must be positive, got {self.h}")
        if not self.t_end > 0.0:
            raise ValidationError(f"t_end must be positive, got {self.t_end}")
        if not 0.0 < self.h_min <= self.h <= self.h_max:
            raise ValidationError(
                f"need 0 < h_min <= h <= h_max, got {self.h_min}, {self.h}, {self.h_max}"
            )
        if self.n_warmup < 4:
            raise ValidationError(f"n_warmup must be >= 4, got {self.n_warmup}")

    @classmethod
    def uniform(cls, h: float, t_end: float) -> GridPolicy:
        return cls(h=h, t_end=t_end)

    @classmethod
    def adaptive(
        cls, h: float, t_end: float, h_min: float, h_max: float, n_warmup: int = 4
    ) -> GridPolicy:
        return cls(h, t_end, GridMode.ADAPTIVE, h_min, h_max, n_warmup)

    @property
    def is_adaptive(self) -> bool:
        return self.mode is GridMode.ADAPTIVE

    def is_regular_step(self, step: float) -> bool:
        """True for a uniform-mode step of the nominal length ``h``.

        The last step of a uniform grid is shorter when ``t_end`` is not a
        multiple of ``h``; stencil-based schemes must treat it separately.
        """
        return not self.is_adaptive and abs(step - self.h) <= 1.0e-9 * self.h

    def capacity_hint(self) -> int:
        """Upper bound on the node count (exact for uniform grids)."""
        hmin = self.h if self.mode is GridMode.UNIFORM else self.h_min
        return min(int(math.ceil(self.t_end / hmin)) + 2, 4_000_000)


def _raw_adaptive_step(history: Trajectory, h: float, frac_deriv: float | None) -> float | None:
    if len(history) < 4 or history.derivs is None:
        raise ValidationError("adaptive_step needs at least 4 nodes with derivs")

    u = history.values
    du = history.derivs
    jump = abs(u[-1] - u[-2])
    num = du[-3] - du[-4]
    lead = du[-2] if frac_deriv is None else frac_deriv
    den = lead - du[-3]
    if abs(den) < _DENOM_FLOOR or jump < _DENOM_FLOOR:
        return None
    return abs(num / den) * h / jump


def adaptive_step(
    history: Trajectory,
    h: float,
    clamps: tuple[float, float],
    frac_deriv: float | None = None,
) -> float:
    r"""Next step from the derivative-ratio rule.

    With the last four nodes :math:`t_{i-3}, \dots, t_i` of ``history``,

    .. math::

        h_i = \frac{c_i h}{|u(t_i) - u(t_{i-1})|}, \qquad
        c_i = \frac{u'(t_{i-2}) - u'(t_{i-3})}{u'_\alpha(t_{i-1}) - u'(t_{i-2})},

    clamped to ``clamps = (h_min, h_max)``. ``u'`` is read from
    ``history.derivs``; ``frac_deriv`` supplies :math:`u'_\alpha(t_{i-1})`
    and defaults to ``history.derivs[-2]``. Only :math:`|c_i|` is used, since a
    step cannot be negative. If either denominator is below ``1e-14`` in
    magnitude the previous step ``t_i - t_{i-1}`` is returned unchanged.
    """
    h_min, h_max = clamps
    raw = _raw_adaptive_step(history, h, frac_deriv)
    if raw is None:
        return float(history.times[-1] - history.times[-2])
    return float(min(max(raw, h_min), h_max))


class StepController:
    """Produces successive grid nodes for a time-marching solver."""

    def __init__(self, grid: GridPolicy) -> None:
        self.grid = grid
        self._underflows = 0
        if grid.mode is GridMode.UNIFORM:
            n = grid.t_end / grid.h
            nearest = round(n)
            self._n_uniform = nearest if abs(n - nearest) < 1.0e-9 * max(1.0, n) else None
        else:
            self._n_uniform = None

    @property
    def is_exact_uniform(self) -> bool:
        """True when every node is exactly ``j * h``."""
        return self._n_uniform is not None

    def done(self, t_n: float) -> bool:
        return t_n >= self.grid.t_end

    def next_time(
        self,
        n: int,
        times: np.ndarray,
        values: np.ndarray,
        derivs: np.ndarray,
        frac_deriv: float | None = None,
    ) -> float:
        """Return ``t_{n+1}`` given the accepted nodes ``0..n``."""
        g = self.grid
        t_n = float(times[n])
        if g.mode is GridMode.UNIFORM:
            if self._n_uniform is not None:
                return g.t_end if n + 1 >= self._n_uniform else (n + 1) * g.h
            step = g.h
        elif n < g.n_warmup:
            step = g.h
        else:
            history = Trajectory(times[n - 3 : n + 1], values[n - 3 : n + 1], derivs[n - 3 : n + 1])
            raw = _raw_adaptive_step(history, g.h, frac_deriv)
            if raw is None:
                step = float(times[n] - times[n - 1])
            else:
                if raw < g.h_min:
                    self._underflows += 1
                    if self._underflows > UNDERFLOW_PATIENCE:
                        raise StepUnderflowError(
                            f"adaptive rule requested steps below h_min={g.h_min} "
                            f"for {UNDERFLOW_PATIENCE} consecutive steps (t={t_n:.6g})"
                        )
                else:
                    self._underflows = 0
                step = min(max(raw, g.h_min), g.h_max)

        remaining = g.t_end - t_n
        if step >= remaining or remaining - step < 0.1 * step:
            return g.t_end
        return t_n + step


class GrowableState:
    """Node times plus ``m`` state rows, grown by doubling when full."""

    def __init__(self, m: int, capacity: int) -> None:
        capacity = max(capacity, 8)
        self.t = np.zeros(capacity)
        self.y = np.zeros((m, capacity))
        self.n = 0

    def ensure(self, index: int) -> None:
        cap = self.t.size
        if index < cap:
            return
        new_cap = max(2 * cap, index + 1)
        t = np.zeros(new_cap)
        t[:cap] = self.t
        y = np.zeros((self.y.shape[0], new_cap))
        y[:, :cap] = self.y
        self.t, self.y = t, y

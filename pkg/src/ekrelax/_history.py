"""Dispatch of product-integration history sums to the fastest kernel.

On an exactly uniform grid (``t_j = j h`` for every node) the kernel
distances are integer multiples of ``h``, so the powers ``k**order`` are
tabulated once per solve instead of once per node and step.
"""

from __future__ import annotations

import math

import numpy as np

from ._backend import kernels
from .grid import GridPolicy, StepController


class HistorySums:
    """Trapezoid and rectangle history sums of one order on one grid."""

    def __init__(self, grid: GridPolicy, ctl: StepController, order: float) -> None:
        self.order = float(order)
        self.h = grid.h
        self.uniform = ctl.is_exact_uniform
        if self.uniform:
            k = np.arange(grid.capacity_hint() + 2, dtype=np.float64)
            self.kp = k**self.order
            self.kp1 = k * self.kp
            hp = self.h**self.order
            self.trap_scale = hp / math.gamma(self.order)
            self.rect_scale = hp / math.gamma(self.order + 1.0)

    def _tabulated(self, n: int) -> bool:
        return self.uniform and n < self.kp.size

    def trapezoid(self, t: np.ndarray, f: np.ndarray, n: int, start: int = 0):
        if self._tabulated(n):
            return kernels.trapezoid_history_uniform(
                self.kp, self.kp1, self.trap_scale, f, n, self.order, start
            )
        return kernels.trapezoid_history(t, f, n, self.order, start)

    def rectangle(self, t: np.ndarray, f: np.ndarray, n: int, start: int = 0):
        if self._tabulated(n):
            return kernels.rectangle_history_uniform(
                self.kp, self.rect_scale, f, n, self.order, start
            )
        return kernels.rectangle_history(t, f, n, self.order, start)

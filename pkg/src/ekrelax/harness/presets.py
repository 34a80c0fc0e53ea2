"""Named experiments, one per reference configuration (`fig1` to `fig9`) plus `bt`."""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from ..grid import GridPolicy
from .experiment import ExperimentSpec, Model, Output

__all__ = ["PRESETS", "get_preset"]


def _fig3_betas() -> tuple[float, ...]:
    # -0.6, -0.55, ..., -0.1 without accumulated round-off
    return tuple(float(b) for b in np.round(np.linspace(-0.6, -0.1, 11), 12))


def _build() -> dict[str, ExperimentSpec]:
    REL, OSC, BT = Model.RELAXATION, Model.OSCILLATOR, Model.BAGLEY_TORVIK
    T, D, G = Output.TRAJECTORY, Output.DECAY_RATE, Output.DIAGNOSTICS
    specs = [
        ExperimentSpec(
            "fig1",
            REL,
            {"alpha": (1.0, 0.9), "beta": (0.5,), "lam": (1.0,)},
            GridPolicy.uniform(1.0e-3, 5.0),
            description="relaxation, alpha in {1, 0.9}, beta = 0.5, lam = 1",
        ),
        ExperimentSpec(
            "fig2",
            REL,
            {"alpha": (0.9,), "beta": (-0.3, 0.0, 0.1, 0.5), "lam": (1.0,)},
            GridPolicy.uniform(1.0e-3, 5.0),
            description="relaxation, alpha = 0.9, lam = 1, several beta",
        ),
        ExperimentSpec(
            "fig3",
            REL,
            {"alpha": (0.9,), "beta": _fig3_betas(), "lam": (1.0,)},
            GridPolicy.uniform(0.1, 500.0),
            outputs=(D, Output.TAIL_SUMMARY),
            description="tail mean of log|u'/u| against beta, alpha = 0.9, lam = 1",
        ),
        ExperimentSpec(
            "fig4",
            OSC,
            {"alpha": (1.0,), "eta": (0.5,), "lam": (1.0, 2.0, 5.0, 10.0)},
            GridPolicy.uniform(0.1, 40.0),
            outputs=(T, G),
            description="oscillator, alpha = 1, eta = 0.5, several lam, t in [0, 40]",
        ),
        ExperimentSpec(
            "fig5",
            OSC,
            {"alpha": (1.0,), "eta": (0.5,), "lam": (1.0, 2.0, 5.0, 10.0)},
            GridPolicy.uniform(0.1, 10.0),
            outputs=(T, G),
            description="oscillator, alpha = 1, eta = 0.5, several lam, t in [0, 10]",
        ),
        ExperimentSpec(
            "fig6",
            OSC,
            {"alpha": (1.0,), "eta": (0.5,), "lam": (1.0, 2.0, 3.0)},
            GridPolicy.uniform(0.1, 10.0),
            outputs=(D,),
            t_report_min=2.0,
            description="|u'/u| for lam in {1, 2, 3}, reported on [2, 10]",
        ),
        ExperimentSpec(
            "fig7",
            OSC,
            {"alpha": (0.9,), "eta": (0.5,), "lam": (5.0,)},
            GridPolicy.uniform(0.1, 150.0),
            outputs=(T, D),
            description="|u'/u| for alpha = 0.9, lam = 5 up to t = 150",
        ),
        ExperimentSpec(
            "fig8",
            OSC,
            {"alpha": (1.0, 0.9, 0.7, 0.5), "eta": (0.5,), "lam": (1.0, 2.0, 5.0, 10.0)},
            GridPolicy.uniform(1.0e-3, 5.0),
            outputs=(T, G),
            description="oscillator, eta = 0.5, sweep over alpha and lam",
        ),
        ExperimentSpec(
            "fig9",
            OSC,
            {"alpha": (1.0, 0.9, 0.7, 0.5), "eta": (0.0, 0.5, 1.0, 1.5), "lam": (10.0,)},
            GridPolicy.uniform(1.0e-3, 5.0),
            outputs=(T, G),
            description="oscillator, lam = 10, sweep over alpha and eta",
        ),
        ExperimentSpec(
            "bt",
            BT,
            {
                "A": (1.0,),
                "B": (1.0,),
                "C": (1.0,),
                "y0": (1.0,),
                "y0_prime": (1.0,),
                "f_a": (1.0,),
                "f_b": (1.0,),
            },
            GridPolicy.uniform(1.0e-3, 5.0),
            description="Bagley-Torvik with manufactured solution y = t + 1",
        ),
    ]
    return {s.name: s for s in specs}


PRESETS: dict[str, ExperimentSpec] = _build()


def get_preset(name: str) -> ExperimentSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; see list-presets") from None

"""Experiment runner: presets, spec files, CSV output and oracle checks."""

from __future__ import annotations

from .csvio import read_csv, read_trajectory, write_csv, write_trajectory
from .experiment import (
    ExperimentSpec,
    Model,
    OracleReport,
    Output,
    compare_csv,
    compare_to_oracle,
    load_spec_file,
    parse_spec_text,
    run_experiment,
)
from .presets import PRESETS, get_preset

__all__ = [
    "PRESETS",
    "ExperimentSpec",
    "Model",
    "OracleReport",
    "Output",
    "compare_csv",
    "compare_to_oracle",
    "get_preset",
    "load_spec_file",
    "parse_spec_text",
    "read_csv",
    "read_trajectory",
    "run_experiment",
    "write_csv",
    "write_trajectory",
]

"""Experiment specifications, sweep execution and oracle comparison."""

from __future__ import annotations

import enum
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..bagley_torvik import BTParams, affine_forcing, solve_bt
from ..errors import ValidationError
from ..grid import GridMode, GridPolicy
from ..operators import Trajectory
from ..oscillator import OscParams, classify_trajectory, solve_oscillator
from ..relax import RelaxParams, closed_form_alpha1, decay_rate, solve_relaxation
from ..specfun import saigo_kilbas_ml
from .csvio import read_trajectory, write_csv, write_trajectory

__all__ = [
    "ExperimentSpec",
    "Model",
    "OracleReport",
    "Output",
    "compare_to_oracle",
    "load_spec_file",
    "parse_spec_text",
    "run_experiment",
]


class Model(enum.Enum):
    RELAXATION = "relaxation"
    OSCILLATOR = "oscillator"
    BAGLEY_TORVIK = "bagley_torvik"


class Output(enum.Enum):
    #: ``t,value,deriv`` of the solution
    TRAJECTORY = "trajectory"
    #: ``log|u'/u|`` (relaxation) or ``|u'/u|`` (oscillator) per point
    DECAY_RATE = "decay_rate"
    #: damping classification and sign changes, as JSON
    DIAGNOSTICS = "diagnostics"
    #: one summary CSV: mean ``log|u'/u|`` over the final 20% of the window
    TAIL_SUMMARY = "tail_summary"


#: sweepable keys and their defaults, per model
MODEL_KEYS: dict[Model, dict[str, object]] = {
    Model.RELAXATION: {"alpha": 1.0, "beta": 0.0, "lam": 1.0},
    Model.OSCILLATOR: {"alpha": 1.0, "lam": 1.0, "eta": 0.0, "u0": 1.0, "v0": 1.0},
    Model.BAGLEY_TORVIK: {
        "A": 1.0,
        "B": 1.0,
        "C": 1.0,
        "y0": 0.0,
        "y0_prime": 0.0,
        "f_a": 0.0,
        "f_b": 0.0,
    },
}

#: share of the time window averaged by the tail summary
TAIL_FRACTION = 0.2


@dataclass(frozen=True)
class ExperimentSpec:
    """A named sweep over model parameters on one grid.

    ``params`` maps each parameter name to a non-empty tuple of values; the
    sweep is their Cartesian product, in key order. Unlisted parameters take
    the defaults in :data:`MODEL_KEYS`.
    """

    name: str
    model: Model
    params: dict[str, tuple]
    grid: GridPolicy
    outputs: tuple[Output, ...] = (Output.TRAJECTORY,)
    output_path: Path | None = None
    #: ``"pi"`` or ``"gl"`` for the oscillator and Bagley-Torvik solvers
    method: str = "pi"
    #: drop nodes before this time from the written decay-rate series
    t_report_min: float = 0.0
    description: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "outputs", tuple(Output(o) for o in self.outputs))
        if not self.name or any(c in self.name for c in "/\\ "):
            raise ValidationError(f"invalid experiment name {self.name!r}")
        allowed = MODEL_KEYS[self.model]
        params = {}
        for key, values in self.params.items():
            if key not in allowed:
                raise ValidationError(f"unknown parameter {key!r} for model {self.model.value}")
            values = tuple(values)
            if not values:
                raise ValidationError(f"empty sweep list for {key!r}")
            params[key] = values
        object.__setattr__(self, "params", params)
        if not self.outputs:
            raise ValidationError("at least one output is required")
        if self.method not in ("pi", "gl"):
            raise ValidationError(f"unknown method {self.method!r}")
        if Output.TAIL_SUMMARY in self.outputs and self.model is not Model.RELAXATION:
            raise ValidationError("tail_summary is only defined for the relaxation model")
        for point in self.points():
            _build_params(self.model, point)

    def points(self) -> list[dict[str, object]]:
        defaults = MODEL_KEYS[self.model]
        keys = list(self.params)
        out = []
        for combo in itertools.product(*(self.params[k] for k in keys)):
            point = dict(defaults)
            point.update(zip(keys, combo, strict=True))
            out.append(point)
        return out

    def with_grid(self, **changes) -> ExperimentSpec:
        return replace(self, grid=replace(self.grid, **changes))


def _build_params(model: Model, point: dict):
    try:
        if model is Model.RELAXATION:
            return RelaxParams(float(point["alpha"]), float(point["beta"]), float(point["lam"]))
        if model is Model.OSCILLATOR:
            return OscParams(float(point["alpha"]), float(point["lam"]), float(point["eta"]))
        return BTParams(
            float(point["A"]),
            float(point["B"]),
            float(point["C"]),
            float(point["y0"]),
            float(point["y0_prime"]),
            affine_forcing(float(point["f_a"]), float(point["f_b"])),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad parameter value in {point}: {exc}") from None


def _grid_echo(grid: GridPolicy) -> dict:
    return {
        "mode": grid.mode.value,
        "h": grid.h,
        "t_end": grid.t_end,
        "h_min": grid.h_min,
        "h_max": grid.h_max,
        "n_warmup": grid.n_warmup,
    }


def _echo(spec: ExperimentSpec, point: dict, quantity: str) -> dict:
    echo = {"experiment": spec.name, "model": spec.model.value, "quantity": quantity}
    echo.update(point)
    if spec.model is not Model.RELAXATION:
        echo["method"] = spec.method
    echo.update(_grid_echo(spec.grid))
    return echo


def _solve(spec: ExperimentSpec, point: dict) -> Trajectory:
    p = _build_params(spec.model, point)
    if spec.model is Model.RELAXATION:
        return solve_relaxation(p, spec.grid)
    if spec.model is Model.OSCILLATOR:
        init = (float(point["u0"]), float(point["v0"]))
        return solve_oscillator(p, spec.grid, init, method=spec.method)[0]
    return solve_bt(p, spec.grid, method=spec.method)


def _tail_mean(rate: Trajectory, t0: float, t_end: float) -> float:
    start = t_end - TAIL_FRACTION * (t_end - t0)
    sel = rate.times >= start
    return float(np.mean(rate.values[sel])) if np.any(sel) else math.nan


def _run_point(spec: ExperimentSpec, index: int, point: dict, out_dir: Path) -> dict:
    stem = f"{spec.name}_{index:03d}"
    files: list[dict] = []
    u = _solve(spec, point)

    def record(path: Path, kind: str) -> None:
        files.append({"path": path.name, "kind": kind})

    if Output.TRAJECTORY in spec.outputs:
        quantity = "y" if spec.model is Model.BAGLEY_TORVIK else "u"
        path = write_trajectory(out_dir / f"{stem}.csv", u, _echo(spec, point, quantity))
        record(path, "trajectory")
        record(_write_gnuplot(path, quantity), "plot")

    rate = None
    if Output.DECAY_RATE in spec.outputs or Output.TAIL_SUMMARY in spec.outputs:
        rate = decay_rate(u)
    if Output.DECAY_RATE in spec.outputs:
        if spec.model is Model.RELAXATION:
            series, quantity = rate, "log|u'/u|"
        else:
            series, quantity = classify_trajectory(u).decay_rate, "|u'/u|"
        keep = series.times >= spec.t_report_min
        series = Trajectory(series.times[keep], series.values[keep])
        path = write_trajectory(out_dir / f"{stem}_rate.csv", series, _echo(spec, point, quantity))
        record(path, "decay_rate")
        record(_write_gnuplot(path, quantity), "plot")

    if Output.DIAGNOSTICS in spec.outputs:
        report = classify_trajectory(u)
        doc = {
            "classification": report.classification.value,
            "zero_crossings": [float(x) for x in report.zero_crossings],
            "deriv_sign_changes": [float(x) for x in report.deriv_sign_changes],
            "metadata": {**report.metadata, **_echo(spec, point, "diagnostics")},
        }
        path = out_dir / f"{stem}_diagnostics.json"
        _write_json(path, doc)
        record(path, "diagnostics")

    tail = None
    if Output.TAIL_SUMMARY in spec.outputs:
        tail = _tail_mean(rate, float(u.times[0]), float(u.times[-1]))
    return {"index": index, "params": point, "files": files, "tail": tail}


def _write_json(path: Path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_gnuplot(csv_path: Path, ylabel: str) -> Path:
    gp = csv_path.with_suffix(".gp")
    text = (
        "set datafile separator ','\n"
        "set datafile commentschars '#'\n"
        "set key autotitle columnhead\n"
        "set xlabel 't'\n"
        f'set ylabel "{ylabel}"\n'
        f"plot '{csv_path.name}' using 1:2 with lines\n"
    )
    with open(gp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return gp


def _call(args: tuple) -> dict:
    return _run_point(*args)


def run_experiment(
    spec: ExperimentSpec, out_dir: str | Path | None = None, workers: int = 1
) -> Path:
    """Run every sweep point and write the files plus ``<name>_manifest.json``.

    Points run in worker processes when ``workers > 1``; each point writes
    only its own files and the manifest is written last, so the output does
    not depend on the worker count. Returns the manifest path.
    """
    if workers < 1:
        raise ValidationError(f"workers must be >= 1, got {workers}")
    target = out_dir if out_dir is not None else spec.output_path
    if target is None:
        raise ValidationError("no output directory given")
    out = Path(target)
    out.mkdir(parents=True, exist_ok=True)

    jobs = [(spec, i, point, out) for i, point in enumerate(spec.points())]
    if workers == 1 or len(jobs) == 1:
        results = [_call(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_call, jobs))
    results.sort(key=lambda r: r["index"])

    entries = []
    for r in results:
        for f in r["files"]:
            entries.append({**f, "params": r["params"]})

    if Output.TAIL_SUMMARY in spec.outputs:
        swept = [k for k, v in spec.params.items() if len(v) > 1] or ["beta"]
        key = swept[0]
        rows = [[float(r["params"][key]), r["tail"]] for r in results]
        path = out / f"{spec.name}_summary.csv"
        echo = {
            "experiment": spec.name,
            "model": spec.model.value,
            "quantity": f"mean log|u'/u| over the final {TAIL_FRACTION:g} of the window",
        }
        echo.update(_grid_echo(spec.grid))
        write_csv(path, [key, "mean_log_rate"], np.array(rows), echo)
        entries.append(
            {"path": path.name, "kind": "tail_summary", "params": {key: list(spec.params[key])}}
        )

    manifest = {
        "experiment": spec.name,
        "model": spec.model.value,
        "description": spec.description,
        "method": spec.method,
        "grid": _grid_echo(spec.grid),
        "outputs": [o.value for o in spec.outputs],
        "files": entries,
    }
    path = out / f"{spec.name}_manifest.json"
    _write_json(path, manifest)
    return path


# {{{ spec files

_GRID_KEYS = {"h", "t_end", "adaptive", "h_min", "h_max", "n_warmup"}
_META_KEYS = {"name", "model", "outputs", "method", "t_report_min", "description", "out"}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"not a boolean: {text!r}")


def _parse_float(key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ValidationError(f"{key}: not a number: {text!r}") from None


def parse_spec_text(text: str, source: str = "<spec>") -> ExperimentSpec:
    """Parse the ``key = value`` format; comma-separated values form a sweep."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValidationError(f"{source}:{lineno}: expected 'key = value'")
        key = key.strip()
        if key in raw:
            raise ValidationError(f"{source}:{lineno}: duplicate key {key!r}")
        raw[key] = value.strip()

    for key in ("name", "model", "h", "t_end"):
        if key not in raw:
            raise ValidationError(f"{source}: missing required key {key!r}")
    try:
        model = Model(raw["model"])
    except ValueError:
        raise ValidationError(f"{source}: unknown model {raw['model']!r}") from None

    params: dict[str, tuple] = {}
    for key, value in raw.items():
        if key in _GRID_KEYS or key in _META_KEYS:
            continue
        if key not in MODEL_KEYS[model]:
            raise ValidationError(f"{source}: unknown key {key!r}")
        items = [v.strip() for v in value.split(",")]
        if not value or any(not v for v in items):
            raise ValidationError(f"{source}: empty sweep list for {key!r}")
        params[key] = tuple(_parse_float(key, v) for v in items)

    h = _parse_float("h", raw["h"])
    adaptive = _parse_bool(raw.get("adaptive", "false"))
    grid = GridPolicy(
        h=h,
        t_end=_parse_float("t_end", raw["t_end"]),
        mode=GridMode.ADAPTIVE if adaptive else GridMode.UNIFORM,
        h_min=_parse_float("h_min", raw["h_min"]) if "h_min" in raw else None,
        h_max=_parse_float("h_max", raw["h_max"]) if "h_max" in raw else None,
        n_warmup=int(raw.get("n_warmup", "4")),
    )
    try:
        outputs = tuple(Output(o.strip()) for o in raw.get("outputs", "trajectory").split(","))
    except ValueError as exc:
        raise ValidationError(f"{source}: {exc}") from None
    return ExperimentSpec(
        name=raw["name"],
        model=model,
        params=params,
        grid=grid,
        outputs=outputs,
        output_path=Path(raw["out"]) if "out" in raw else None,
        method=raw.get("method", "pi"),
        t_report_min=_parse_float("t_report_min", raw.get("t_report_min", "0")),
        description=raw.get("description", ""),
    )


def load_spec_file(path: str | Path) -> ExperimentSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec_text(fh.read(), str(path))


# }}}


# {{{ oracles


@dataclass(frozen=True)
class OracleReport:
    oracle: str
    max_abs: float
    rms: float
    tol: float
    passed: bool
    residual: Trajectory = field(repr=False)


def _get(params: dict, key: str) -> float:
    if key not in params:
        raise ValidationError(f"oracle needs parameter {key!r} in the parameter echo")
    return float(params[key])


def _oracle_values(name: str, t: np.ndarray, params: dict) -> np.ndarray:
    if name == "closed_form_alpha1":
        return np.asarray(closed_form_alpha1(_get(params, "beta"), _get(params, "lam"), t))
    if name == "saigo_kilbas":
        return np.asarray(
            saigo_kilbas_ml(_get(params, "alpha"), _get(params, "beta"), _get(params, "lam"), t)
        )
    if name == "manufactured":
        return _get(params, "y0") + _get(params, "y0_prime") * t
    raise ValidationError(f"unknown oracle {name!r}; choose from {sorted(ORACLES)}")


#: accepted oracle names (CamelCase aliases map to the same oracles)
ORACLES = {
    "closed_form_alpha1": "closed_form_alpha1",
    "closedformalpha1": "closed_form_alpha1",
    "saigo_kilbas": "saigo_kilbas",
    "saigokilbas": "saigo_kilbas",
    "manufactured": "manufactured",
}


def compare_to_oracle(
    numeric: Trajectory, oracle: str, tol: float, params: dict | None = None
) -> OracleReport:
    """Max-abs and RMS error of ``numeric`` against an analytic oracle.

    ``closed_form_alpha1`` reads ``beta, lam``; ``saigo_kilbas`` reads
    ``alpha, beta, lam``; ``manufactured`` is the affine solution
    ``y0 + y0_prime t`` of the Bagley-Torvik check.
    """
    if len(numeric) == 0:
        raise ValidationError("cannot compare an empty trajectory")
    if not tol > 0.0:
        raise ValidationError(f"tol must be positive, got {tol}")
    key = oracle.lower()
    if key not in ORACLES:
        raise ValidationError(
            f"unknown oracle {oracle!r}; choose from {sorted(set(ORACLES.values()))}"
        )
    name = ORACLES[key]
    exact = _oracle_values(name, numeric.times, params or {})
    res = numeric.values - exact
    max_abs = float(np.max(np.abs(res)))
    rms = float(np.sqrt(np.mean(res**2)))
    return OracleReport(
        name, max_abs, rms, tol, bool(max_abs <= tol), Trajectory(numeric.times, res)
    )


def compare_csv(path: str | Path, oracle: str, tol: float) -> tuple[OracleReport, Path]:
    """Compare a harness CSV with an oracle and write ``<stem>_residual.csv``."""
    path = Path(path)
    traj, params = read_trajectory(path)
    report = compare_to_oracle(traj, oracle, tol, params)
    echo = {
        "source": path.name,
        "oracle": report.oracle,
        "tol": tol,
        "max_abs": report.max_abs,
        "rms": report.rms,
        "passed": report.passed,
    }
    out = path.with_name(f"{path.stem}_residual.csv")
    write_trajectory(out, report.residual, echo)
    return report, out


# }}}

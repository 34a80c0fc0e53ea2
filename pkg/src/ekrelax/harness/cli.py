"""Command-line entry point ``ekrelax``.

Exit codes: 0 success, 1 comparison outside tolerance, 2 invalid input,
3 solver failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from ..errors import EkRelaxError, SeriesDivergenceError, SolverError, ValidationError
from ..grid import GridMode
from .experiment import ExperimentSpec, compare_csv, load_spec_file, run_experiment
from .presets import PRESETS, get_preset

log = logging.getLogger("ekrelax")

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_IO = 4


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ekrelax",
        description="Fractional relaxation and oscillator experiments.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a preset or a spec file")
    run.add_argument("target", help="preset name or path to a key = value spec file")
    run.add_argument("--out", type=Path, default=None, help="output directory")
    run.add_argument("--workers", type=_positive_int, default=1)
    run.add_argument("--h", type=float, default=None, help="base step")
    run.add_argument("--t-end", type=float, default=None)
    run.add_argument("--adaptive", action="store_true", help="use the adaptive step rule")
    run.add_argument("--h-min", type=float, default=None)
    run.add_argument("--h-max", type=float, default=None)

    sub.add_parser("list-presets", help="list the built-in experiments")

    cmp_ = sub.add_parser("compare", help="compare a trajectory CSV with an oracle")
    cmp_.add_argument("--csv", type=Path, required=True)
    cmp_.add_argument(
        "--oracle", required=True, help="closed_form_alpha1, saigo_kilbas or manufactured"
    )
    cmp_.add_argument("--tol", type=float, required=True)
    return parser


def _resolve(args: argparse.Namespace) -> ExperimentSpec:
    target = args.target
    if target in PRESETS:
        spec = get_preset(target)
    elif Path(target).is_file():
        spec = load_spec_file(target)
    else:
        raise ValidationError(f"{target!r} is neither a preset nor a spec file")

    changes: dict = {}
    if args.h is not None:
        changes["h"] = args.h
    if args.t_end is not None:
        changes["t_end"] = args.t_end
    if args.adaptive:
        changes["mode"] = GridMode.ADAPTIVE
    if args.h_min is not None:
        changes["h_min"] = args.h_min
    if args.h_max is not None:
        changes["h_max"] = args.h_max
    if changes:
        grid = spec.grid
        # clamps follow a changed base step unless given explicitly; a uniform
        # grid has no room between them
        if "h" in changes:
            h = changes["h"]
            if changes.get("mode", grid.mode) is GridMode.ADAPTIVE:
                changes.setdefault("h_min", min(grid.h_min, h))
                changes.setdefault("h_max", max(grid.h_max, h))
            else:
                changes.setdefault("h_min", h)
                changes.setdefault("h_max", h)
        spec = replace(spec, grid=replace(grid, **changes))
    return spec


def _cmd_run(args: argparse.Namespace) -> int:
    spec = _resolve(args)
    out = args.out if args.out is not None else spec.output_path
    if out is None:
        out = Path("out") / spec.name
    manifest = run_experiment(spec, out, workers=args.workers)
    print(manifest)
    return EXIT_OK


def _cmd_list(_: argparse.Namespace) -> int:
    width = max(len(n) for n in PRESETS)
    for name, spec in PRESETS.items():
        print(f"{name:<{width}}  {spec.model.value:<13}  {spec.description}")
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    report, residual = compare_csv(args.csv, args.oracle, args.tol)
    status = "PASS" if report.passed else "FAIL"
    print(
        f"{status} oracle={report.oracle} max_abs={report.max_abs:.6e} "
        f"rms={report.rms:.6e} tol={report.tol:g} residual={residual}"
    )
    return EXIT_OK if report.passed else EXIT_MISMATCH


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    handlers = {"run": _cmd_run, "list-presets": _cmd_list, "compare": _cmd_compare}
    try:
        return handlers[args.command](args)
    except ValidationError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_VALIDATION
    except (SolverError, SeriesDivergenceError) as exc:
        log.error("solver failure: %s", exc)
        return EXIT_SOLVER
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO
    except EkRelaxError as exc:
        log.error("%s", exc)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

"""Compare the compiled and NumPy kernel backends.

Run with ``python3 benchmarks/bench_kernels.py``. Times one full march of
each history kernel (every step ``n = 1..N``) and an end-to-end relaxation
solve per backend. The end-to-end runs use subprocesses because the backend
is fixed at import time.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from ekrelax import _kernels_py
from ekrelax._backend import compiled_kernels

KERNELS = (
    "trapezoid_history",
    "trapezoid_history_uniform",
    "rectangle_history",
    "rectangle_history_uniform",
    "gl_history",
)


def _march(mod, name: str, t: np.ndarray, f: np.ndarray, order: float) -> float:
    fn = getattr(mod, name)
    # power tables used by the uniform-grid kernels
    kp = np.arange(t.size + 1, dtype=np.float64) ** order
    kp1 = np.arange(t.size + 1, dtype=np.float64) * kp
    start = time.perf_counter()
    for n in range(1, t.size):
        if name == "gl_history":
            fn(f[0], f, n)
        elif name == "trapezoid_history_uniform":
            fn(kp, kp1, 1.0, f, n, order)
        elif name == "rectangle_history_uniform":
            fn(kp, 1.0, f, n, order)
        else:
            fn(t, f, n, order)
    return time.perf_counter() - start


_SOLVE = """
import time
from ekrelax import BACKEND, GridPolicy, RelaxParams, solve_relaxation
start = time.perf_counter()
solve_relaxation(RelaxParams(0.9, 0.05, 1.0), GridPolicy.uniform({h}, 5.0))
print(BACKEND, time.perf_counter() - start)
"""


def _solve(h: float, pure: bool) -> tuple[str, float]:
    env = dict(os.environ, EKRELAX_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run(
        [sys.executable, "-c", _SOLVE.format(h=h)],
        env=env,
        check=True,
        capture_output=True,
        text=True,
    ).stdout.split()
    return out[0], float(out[1])


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[1000, 4000])
    parser.add_argument("--h", type=float, nargs="+", default=[4e-3, 1e-3])
    args = parser.parse_args()

    compiled = compiled_kernels()
    if compiled is None:
        print("compiled extension not built; only the NumPy backend is available")
    backends = [("python", _kernels_py)] + ([("compiled", compiled)] if compiled else [])

    print(f"{'kernel':<28}{'N':>7}" + "".join(f"{b:>12}" for b, _ in backends) + f"{'speedup':>10}")
    rng = np.random.default_rng(0)
    for size in args.sizes:
        t = np.linspace(0.0, 5.0, size + 1)
        f = np.ascontiguousarray(rng.normal(size=(1, size + 1)))
        for name in KERNELS:
            times = [_march(mod, name, t, f, 0.7) for _, mod in backends]
            ratio = f"{times[0] / times[-1]:>9.1f}x" if len(times) > 1 else ""
            print(f"{name:<28}{size:>7}" + "".join(f"{x:>11.3f}s" for x in times) + ratio)

    print()
    print(f"{'solve_relaxation':<28}{'h':>7}" + "".join(f"{b:>12}" for b, _ in backends))
    for h in args.h:
        times = [_solve(h, pure=(b == "python"))[1] for b, _ in backends]
        print(f"{'':<28}{h:>7g}" + "".join(f"{x:>11.3f}s" for x in times))


if __name__ == "__main__":
    main()

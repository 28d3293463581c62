"""Compiled vs pure Python kernels.

Times each hot kernel on both backends at a few sizes, then one full
branch trace per backend in a fresh interpreter (the backend is fixed at
import, so the fallback run sets EXTREMAL_BRANCH_KERNELS=python).

    python3 benchmarks/bench_kernels.py [--sizes 256 1024 4096] [--repeat 5]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from extremal_branch._kernels import _pykernels

try:
    from extremal_branch._kernels import _ckernels
except ImportError:
    _ckernels = None

TRACE = (
    "import time\n"
    "from extremal_branch import _kernels\n"
    "from extremal_branch.model import make_spec\n"
    "from extremal_branch.odecore import make_grid\n"
    "from extremal_branch.continuation import trace_branch\n"
    "t = time.perf_counter()\n"
    "br = trace_branch(make_spec('euclidean', 2, 1.0, 'gelfand'), make_grid(1.0, {M}))\n"
    "print(_kernels.BACKEND, time.perf_counter() - t, br.lambda_star)\n"
)


def _problem(n, rng):
    lo = -rng.uniform(0.5, 1.0, n)
    up = -rng.uniform(0.5, 1.0, n)
    d = 2.5 + rng.uniform(0, 1, n)
    b = rng.standard_normal(n)
    offsq = (up[:-1] * lo[1:]).copy()
    col = rng.standard_normal(n)
    return lo, d, up, b, offsq, col


def _calls(mod, lo, d, up, b, offsq, col):
    return {
        "tridiag_solve": lambda: mod.tridiag_solve(lo, d, up, b),
        "tridiag_matvec": lambda: mod.tridiag_matvec(lo, d, up, b),
        "sturm_count": lambda: mod.sturm_count(d, offsq, 1.0),
        "bordered_solve": lambda: mod.bordered_solve(lo, d, up, col, 1.0, 0.5, col, 1.0),
    }


def bench_kernels(sizes, repeat):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16}{'n':>7}{'python [us]':>14}{'cython [us]':>14}{'speedup':>10}")
    for n in sizes:
        args = _problem(n, rng)
        py = _calls(_pykernels, *args)
        cy = _calls(_ckernels, *args) if _ckernels else {}
        for name, fn in py.items():
            t_py = min(timeit.repeat(fn, number=3, repeat=repeat)) / 3 * 1e6
            if name in cy:
                t_cy = min(timeit.repeat(cy[name], number=50, repeat=repeat)) / 50 * 1e6
                print(f"{name:<16}{n:>7}{t_py:>14.1f}{t_cy:>14.2f}{t_py / t_cy:>10.1f}")
            else:
                print(f"{name:<16}{n:>7}{t_py:>14.1f}{'n/a':>14}{'':>10}")


def bench_trace(M):
    for backend in ("cython", "python"):
        env = dict(os.environ)
        if backend == "python":
            env["EXTREMAL_BRANCH_KERNELS"] = "python"
        out = subprocess.run([sys.executable, "-c", TRACE.format(M=M)], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        print(f"trace_branch M={M}: backend {out[0]:<7} {float(out[1]):8.2f} s  "
              f"lambda* {float(out[2]):.10f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[256, 1024, 4096])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--trace-points", type=int, default=256)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled kernels not built; timing the fallback only")
    bench_kernels(args.sizes, args.repeat)
    bench_trace(args.trace_points)


if __name__ == "__main__":
    main()

"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both kernel modules are imported directly, so one process compares them.
The end-to-end rows (a full Aarset fit, a 10,000-draw sample) run in a
subprocess per backend with ``BLFR_PURE_PYTHON`` set accordingly.
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from blfr import _pykernels
from blfr.data import AARSET

try:
    from blfr import _kernels
except ImportError:
    _kernels = None

SEED_STATE = 0x853C49E6748FEA9B
GRID = np.linspace(0.001, 0.999, 2000)

KERNELS = {
    "uniforms(100k)": lambda k: k.uniforms(100_000, SEED_STATE),
    "sample_gamma(0.5, 20k)": lambda k: k.sample_gamma(0.5, 20_000, SEED_STATE),
    "sample_blfr(10k)": lambda k: k.sample_blfr(10_000, 0.2, 0.1, 2.0, 0.3, SEED_STATE),
    "loglik+hessian(aarset)": lambda k: k.loglik_derivs(np.array(AARSET, dtype=float), 0.017, 0.0035, 0.33, 0.12, 2),
    "betainc(2k points)": lambda k: k.betainc_arrays(GRID, 1.0 - GRID, 0.33, 0.12),
}

END_TO_END = {
    "fit BLFR to aarset": "from blfr import fit, aarset; fit('blfr', aarset())",
    "sample 10k BLFR": "from blfr import sample_blfr, BlfrParams, RngState; sample_blfr(10000, BlfrParams(0.2, 0.1, 2.0, 0.3), RngState(7))",
}


def best_of(func, repeat):
    number = 1
    while timeit.timeit(func, number=number) < 0.05 and number < 10_000:
        number *= 4
    return min(timeit.repeat(func, number=number, repeat=repeat)) / number


def end_to_end(stmt, pure, repeat):
    env = dict(os.environ, BLFR_PURE_PYTHON="1" if pure else "0")
    code = (
        "import timeit, json\n"
        f"setup = {stmt!r}\n"
        "exec(setup)\n"
        f"print(json.dumps(min(timeit.repeat(setup, number=1, repeat={repeat}))))"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env, check=True, capture_output=True, text=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; only the Python timings are shown", file=sys.stderr)
    print(f"{'workload':<26}{'cython (s)':>14}{'python (s)':>14}{'speed-up':>10}")
    rows = [(name, lambda f=f: f(_kernels), lambda f=f: f(_pykernels)) for name, f in KERNELS.items()]
    for name, fast, slow in rows:
        t_py = best_of(slow, args.repeat)
        t_c = best_of(fast, args.repeat) if _kernels is not None else float("nan")
        print(f"{name:<26}{t_c:>14.3e}{t_py:>14.3e}{t_py / t_c:>9.1f}x")
    for name, stmt in END_TO_END.items():
        t_py = end_to_end(stmt, True, args.repeat)
        t_c = end_to_end(stmt, False, args.repeat) if _kernels is not None else float("nan")
        print(f"{name:<26}{t_c:>14.3e}{t_py:>14.3e}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()

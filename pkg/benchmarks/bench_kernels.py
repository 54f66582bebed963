"""Time the hot kernels with numba and with the uncompiled fallback.

Each mode runs in its own interpreter because the switch is read at import:

    python benchmarks/bench_kernels.py            # both modes, side by side
    python benchmarks/bench_kernels.py --worker   # one mode, JSON on stdout
"""

import argparse
import json
import os
import subprocess
import sys
import time

CASES = {
    # name: (callable factory, repeats for numba, repeats for fallback)
    "ground_state N=200 (QL)": ("ground_small", 20, 2),
    "ground_state N=2000 (bisection)": ("ground_large", 20, 1),
    "CN 2000 steps N=100": ("cn", 10, 1),
}


def _make(kind):
    import numpy as np

    from twomode.dynamics import Schedule, Segment, propagate
    from twomode.hamiltonian import TwoModeParams, ground_state

    if kind == "ground_small":
        p = TwoModeParams.from_g_param(200, 3.0)
        return lambda: ground_state(p, warn=False)
    if kind == "ground_large":
        p = TwoModeParams.from_g_param(2000, 3.0)
        return lambda: ground_state(p, warn=False)
    s = ground_state(TwoModeParams.from_g_param(100, -0.5), warn=False).state
    sched = Schedule((Segment(0.0, 2.0, -0.002, 1.0, 0.5),))
    return lambda: propagate(s, sched, 0.0, 2.0, 1e-3, stride=1000, exact_free=False)


def worker():
    from twomode import _jit

    out = {"numba": _jit.USE_NUMBA, "times": {}}
    for name, (kind, rep_jit, rep_py) in CASES.items():
        fn = _make(kind)
        fn()  # compile or load from cache
        reps = rep_jit if _jit.USE_NUMBA else rep_py
        t0 = time.perf_counter()
        for _ in range(reps):
            fn()
        out["times"][name] = (time.perf_counter() - t0) / reps
    print(json.dumps(out))


def run_mode(disable):
    env = dict(os.environ, TWOMODE_DISABLE_NUMBA="1" if disable else "0")
    res = subprocess.run([sys.executable, __file__, "--worker"], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()
    if args.worker:
        worker()
        return
    fast, slow = run_mode(False), run_mode(True)
    print(f"{'case':36s} {'numba [ms]':>12s} {'fallback [ms]':>14s} {'speed-up':>9s}")
    for name in CASES:
        a, b = fast["times"][name], slow["times"][name]
        print(f"{name:36s} {1e3 * a:12.3f} {1e3 * b:14.1f} {b / a:8.0f}x")


if __name__ == "__main__":
    main()

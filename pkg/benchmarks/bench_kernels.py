"""Benchmark the promise-automaton Monte Carlo kernel on both backends.

The hot loop lives in npdshare._kernels and is compiled with numba when it
is importable, with a vectorized numpy fallback selected by setting
NPDSHARE_NO_NUMBA=1 before import.  Both paths must produce bitwise
identical results; this script times them on the same workload.

Run a single backend (whichever the current environment selects):

    python3 benchmarks/bench_kernels.py

Compare both by re-running itself in a subprocess with the flag toggled:

    python3 benchmarks/bench_kernels.py --both
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np


def run_workload(replicas: int, horizon: int, repeats: int):
    from npdshare import GameSpec, LinearGain, monte_carlo_promise
    from npdshare._kernels import backend_name

    spec = GameSpec(2, LinearGain(3.0), 1.0, 0.9, 0.1, 0.99)
    # Warm up once so numba compilation does not count against the timing.
    monte_carlo_promise(spec, (2.0, 2.0), (1.0, 1.0), replicas=64,
                        horizon=128, base_seed=1)
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = monte_carlo_promise(
            spec, (2.0, 2.0), (1.0, 1.0), replicas=replicas,
            horizon=horizon, base_seed=123,
        )
        best = min(best, time.perf_counter() - t0)
    return backend_name(), best, result


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--replicas", type=int, default=10_000)
    ap.add_argument("--horizon", type=int, default=2000)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--both", action="store_true",
                    help="run numba and numpy backends and compare")
    args = ap.parse_args(argv)

    if not args.both:
        backend, best, result = run_workload(args.replicas, args.horizon,
                                             args.repeats)
        print(f"backend={backend} replicas={args.replicas} "
              f"horizon={args.horizon} best={best:.4f}s "
              f"mean={result.mean[0]!r} halted={result.n_halted}")
        return 0

    times = {}
    means = {}
    for flag in ("0", "1"):
        env = dict(os.environ)
        env["NPDSHARE_NO_NUMBA"] = flag
        cmd = [sys.executable, os.path.abspath(__file__),
               "--replicas", str(args.replicas),
               "--horizon", str(args.horizon),
               "--repeats", str(args.repeats)]
        out = subprocess.run(cmd, env=env, capture_output=True, text=True,
                             check=True).stdout.strip()
        print(out)
        fields = dict(kv.split("=", 1) for kv in out.split())
        times[fields["backend"]] = float(fields["best"].rstrip("s"))
        means[fields["backend"]] = fields["mean"]
    backends = sorted(times)
    if len(backends) == 2:
        fast, slow = sorted(backends, key=times.get)
        print(f"speedup: {fast} is {times[slow] / times[fast]:.1f}x faster "
              f"than {slow}")
        if means[backends[0]] != means[backends[1]]:
            print("WARNING: backends disagree on the mean payoff")
            return 1
        print("backends agree bitwise on the mean payoff")
    else:
        print("note: numba unavailable, both runs used the numpy backend")
    return 0


if __name__ == "__main__":
    sys.exit(main())

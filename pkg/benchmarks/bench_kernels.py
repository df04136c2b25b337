"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs on the shapes it sees when scoring a 20k-record reservoir;
the last section times a whole GGscore pass under each backend.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from drift_replay import kernels


def _time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_table(repeat=5, n=20000, d=64, rows=800, fan_in=16, seed=0):
    rng = np.random.default_rng(seed)
    table = rng.normal(size=(rows, d))
    idx = rng.integers(0, rows, n)
    vals = rng.normal(size=(n, d))
    a = rng.normal(size=(n, fan_in))
    delta = rng.normal(size=(n, 1))
    V = rng.normal(size=(fan_in, 1))
    impls = kernels.implementations()
    cases = {
        "scatter_add_rows": lambda m: (lambda: kernels.scatter_add_rows(np.zeros_like(table), idx, vals, impl=m)),
        "gather_rowdot": lambda m: (lambda: kernels.gather_rowdot(table, idx, vals, impl=m)),
        "outer_dot": lambda m: (lambda: kernels.outer_dot(a, delta, V, impl=m)),
    }
    out = []
    for name, make in cases.items():
        times = {b: _time(make(m), repeat) for b, m in impls.items()}
        out.append((name, times))
    return out


_SCORE_SNIPPET = """
import time, numpy as np
from drift_replay import kernels
from drift_replay.data import synth_drift, SynthConfig
from drift_replay.models import ArchDescriptor, build_model
from drift_replay.influence import ggscore_batch, reference_vector
D = synth_drift(SynthConfig(num_records=20000), 0)
model, params = build_model(ArchDescriptor("wdl", 300, 500, 64, (32, 16)), 0)
V = reference_vector(model, D, params)
best = min(
    (lambda t: (ggscore_batch(model, D, params, V), time.perf_counter() - t)[1])(time.perf_counter())
    for _ in range({repeat})
)
print(kernels.BACKEND, best)
"""


def scoring_times(repeat=3):
    """GGscore pass timed in a fresh interpreter per backend (the backend is fixed at import)."""
    out = {}
    for pure in ("0", "1"):
        env = dict(os.environ, DRIFT_REPLAY_PURE=pure)
        res = subprocess.run([sys.executable, "-c", _SCORE_SNIPPET.format(repeat=repeat)],
                             env=env, capture_output=True, text=True, check=True)
        backend, t = res.stdout.split()
        out[backend] = float(t)
    return out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    rows = kernel_table(args.repeat)
    backends = sorted({b for _, t in rows for b in t})
    print(f"{'kernel':<18}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, t in rows:
        speed = t["python"] / t["compiled"] if "compiled" in t else float("nan")
        print(f"{name:<18}" + "".join(f"{t[b] * 1e3:>10.3f}ms" for b in backends) + f"{speed:>9.1f}x")
    st = scoring_times(max(1, args.repeat // 2))
    print("ggscore pass (20k records): " + ", ".join(f"{b} {t:.3f}s" for b, t in sorted(st.items())))


if __name__ == "__main__":
    main()

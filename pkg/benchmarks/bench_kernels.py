"""Compare the compiled and numpy error kernels on exhaustive workloads.

    python benchmarks/bench_kernels.py [--repeat 3] [--workers 1]

Each row times one full error_stats run and checks that both backends
return identical statistics.  The scalar reference path is timed on a
small sample for scale.
"""

import argparse
import time

from dsppack import kernels, presets
from dsppack.analysis import EnumerationSpec, error_stats

CASES = [
    ("int4", "none"),
    ("int4", "approx"),
    ("fig8-overpack-delta-2", "mr"),
    ("overpack-6lane", "none"),
    ("int8", "full"),
]


def best_of(fn, repeat):
    best, result = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    backends = [b for b in ("cython", "numpy") if b in kernels.BACKENDS]
    print(f"backends: {', '.join(backends)}; workers={args.workers}; best of {args.repeat}")
    header = f"{'config':<24}{'scheme':<8}{'tuples':>10}" + "".join(f"{b + ' s':>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for name, scheme in CASES:
        cfg = presets.preset(name)
        times, results = [], []
        for backend in backends:
            t, stats = best_of(lambda: error_stats(cfg, scheme, EnumerationSpec.exhaustive(),
                                                   workers=args.workers, backend=backend), args.repeat)
            times.append(t)
            results.append(stats.lanes)
        if any(r != results[0] for r in results):
            raise SystemExit(f"backends disagree on {name}/{scheme}")
        line = f"{name:<24}{scheme:<8}{cfg.domain_size():>10}" + "".join(f"{t:>12.3f}" for t in times)
        if len(times) == 2:
            line += f"{times[1] / times[0]:>9.1f}x"
        print(line)

    cfg = presets.preset("int4")
    n = 2000
    t, _ = best_of(lambda: error_stats(cfg, "none", EnumerationSpec.sample(n, seed=0), backend="reference"), 1)
    print(f"reference path: {n / t:,.0f} tuples/s (int4, scalar Python ints)")


if __name__ == "__main__":
    main()

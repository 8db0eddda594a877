"""Time the compiled kernel against the numpy fallback.

    python benchmarks/bench_backends.py [--reps 20000] [--repeat 3] [--workers 1]

Both backends evaluate MLE, the family competitor and the shrinkage estimator
on the same draws; the script also reports the largest absolute difference
between their losses divided by the mean loss.
"""
import argparse
import time

import numpy as np

from expshrink import _backend
from expshrink.distributions import CovarianceSpec
from expshrink.engine import simulate
from expshrink.estimators import HUDSON_SPEC, JAMES_STEIN_SPEC, MLE_SPEC, EstimatorSpec
from expshrink.families import FamilyTag

CASES = [
    ("normal d=10", FamilyTag.NORMAL_IID, np.zeros(10), None, JAMES_STEIN_SPEC),
    ("normal d=500", FamilyTag.NORMAL_IID, np.zeros(500), None, JAMES_STEIN_SPEC),
    ("normal corr d=50", FamilyTag.NORMAL_CORRELATED, np.zeros(50), CovarianceSpec.ar1(50, 0.5),
     JAMES_STEIN_SPEC),
    ("gamma d=10", FamilyTag.GAMMA, np.arange(2, 12) / 10, None, HUDSON_SPEC),
    ("gamma d=500", FamilyTag.GAMMA, (np.arange(1, 501) + 1) / 500, None, HUDSON_SPEC),
    ("exponential d=100", FamilyTag.EXPONENTIAL, (np.arange(1, 101) + 1) / 100, None, None),
]


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=20_000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args(argv)

    backends = _backend.available()
    if "compiled" not in backends:
        print("compiled kernel not built; timing the numpy fallback only")
    header = f"{'case':<20}" + "".join(f"{b + ' s':>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}{'max diff':>14}"
    print(f"replications={args.reps} workers={args.workers} (best of {args.repeat})")
    print(header)
    for label, tag, theta, cov, comp in CASES:
        specs = [MLE_SPEC] + ([comp] if comp else []) + [EstimatorSpec.shrink(1.0)]
        results, times = {}, {}
        for name in backends:
            def run(name=name):
                results[name] = simulate(tag, theta, specs, args.reps, 42, cov=cov,
                                         workers=args.workers, backend=name)
            times[name] = best_time(run, args.repeat)
        line = f"{label:<20}" + "".join(f"{times[b]:>12.4f}" for b in backends)
        if len(backends) == 2:
            a, b = results["compiled"].losses, results["python"].losses
            diff = float(np.max(np.abs(a - b)) / np.mean(np.abs(b)))
            line += f"{times['python'] / times['compiled']:>9.1f}x{diff:>14.1e}"
        print(line)


if __name__ == "__main__":
    main()

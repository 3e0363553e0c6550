"""Throughput comparison of the compiled kernel against the numpy fallback.

Runs the online-update sweep on representative workloads (the joint
threshold classifier and the quality regressors at the built-in systems'
feature widths) and prints updates/second for each implementation.

    python benchmarks/bench_kernels.py [--repeats N] [--samples N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from adaspace._kernels import pykernels

try:
    from adaspace._kernels import _ckernels
except ImportError:
    _ckernels = None

C = pykernels

WORKLOADS = [
    ("classifier sgd/log/l1   k=4  d=17", C.TASK_CLASSIFIER, C.FAMILY_SGD, C.LOSS_LOG, C.PENALTY_L1, 4),
    ("classifier pa/hinge     k=4  d=17", C.TASK_CLASSIFIER, C.FAMILY_PA, C.LOSS_HINGE, C.PENALTY_NONE, 4),
    ("classifier perceptron   k=8  d=17", C.TASK_CLASSIFIER, C.FAMILY_PERCEPTRON, C.LOSS_HINGE, C.PENALTY_NONE, 8),
    ("regressor  pa/sq-eps    k=1  d=17", C.TASK_REGRESSOR, C.FAMILY_PA, C.LOSS_SQUARED_EPSILON_INSENSITIVE, C.PENALTY_NONE, 1),
    ("regressor  sgd/squared  k=1  d=17", C.TASK_REGRESSOR, C.FAMILY_SGD, C.LOSS_SQUARED, C.PENALTY_L2, 1),
]


def bench_one(impl, task, family, loss, penalty, k, n, d, repeats):
    rng = np.random.default_rng(42)
    X = np.ascontiguousarray(rng.normal(size=(n, d)))
    if task == C.TASK_CLASSIFIER:
        targets = rng.integers(0, k, size=n).astype(np.float64)
        rows = k
    else:
        targets = rng.normal(size=n)
        rows = 1
    best = float("inf")
    for _ in range(repeats):
        w = np.zeros((rows, d))
        b = np.zeros(rows)
        t0 = time.perf_counter()
        impl.train_pass(
            w, b, X, targets, family, task, loss, penalty,
            0.01, 1e-4, 0.15, 1.0, 0.1,
        )
        best = min(best, time.perf_counter() - t0)
    return n / best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=50_000)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--features", type=int, default=17)
    args = parser.parse_args()

    impls = [("python", pykernels)]
    if _ckernels is not None:
        impls.append(("cython", _ckernels))
    else:
        print("compiled extension not built; benchmarking the fallback only")

    header = f"{'workload':38s}" + "".join(f"{name:>14s}" for name, _ in impls)
    if len(impls) == 2:
        header += f"{'speedup':>10s}"
    print(header)
    for label, task, family, loss, penalty, k in WORKLOADS:
        rates = [
            bench_one(impl, task, family, loss, penalty, k,
                      args.samples, args.features, args.repeats)
            for _, impl in impls
        ]
        line = f"{label:38s}" + "".join(f"{r / 1e6:11.2f} M/s" for r in rates)
        if len(rates) == 2:
            line += f"{rates[1] / rates[0]:9.1f}x"
        print(line)


if __name__ == "__main__":
    main()

"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--iters N] [--repeat R]
"""
import argparse
import math
import time

import numpy as np

from nsbfault import LinearMachine, kernels, lemonade, sample_examples
from nsbfault.bayes import _joint_half_tables, _score_half_tables
from nsbfault.experiment import random_problem


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def pocket_case(iters):
    p = lemonade()
    X, y = sample_examples(p, iters, np.random.default_rng(0))
    RX, Ry = sample_examples(p, 2000, np.random.default_rng(1))

    def make(mod, ratchet):
        def run():
            W = np.zeros((9, 9))
            P = np.zeros((9, 9))
            acc0 = mod.accuracy(P, RX, Ry) if ratchet else math.nan
            mod.pocket_chunk(W, P, X, y, 1.0, 0, 0, 0, True, acc0, acc0, ratchet, RX, Ry, [], 0)
        return run
    return make


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iters", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the fallback will be timed")

    q = random_problem(20, 20, seed=0)
    jlo, jhi = _joint_half_tables(q, 10)
    M = LinearMachine(np.random.default_rng(2).normal(size=(20, 21)))
    slo, shi = _score_half_tables(M, 10)
    pocket = pocket_case(args.iters)

    cases = [
        (f"pocket, lemonade, {args.iters} iters", lambda mod: pocket(mod, False)),
        (f"pocket+ratchet, lemonade, {args.iters} iters", lambda mod: pocket(mod, True)),
        ("exact Bayes utility, n=20 m=20", lambda mod: lambda: mod.enum_max_sum(jlo, jhi)),
        ("exact machine utility, n=20 m=20", lambda mod: lambda: mod.enum_decided_sum(jlo, jhi, slo, shi)),
    ]
    print(f"{'case':<42}" + "".join(f"{name:>12}" for name in backends) + f"{'speedup':>10}")
    for label, build in cases:
        t = {name: best_time(build(mod), args.repeat) for name, mod in backends.items()}
        speed = f"{t['python'] / t['cython']:.1f}x" if "cython" in t else "-"
        print(f"{label:<42}" + "".join(f"{t[name]:>11.3f}s" for name in backends) + f"{speed:>10}")


if __name__ == "__main__":
    main()

"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the moment evaluation and the full flow loop on representative
sizes.  Run from a checkout with the package installed:

    python benchmarks/benchmark_backends.py [--repeat N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from nilsoliton import kernels


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = {name: kernels.get_backend(name)
                for name in kernels.available_backends()}
    print(f"available backends: {', '.join(backends)}")
    rng = np.random.default_rng(args.seed)

    print(f"\n{'case':<28}" + "".join(f"{n:>14}" for n in backends))
    for p, q, iters in [(2, 6, 2000), (3, 9, 1000), (6, 20, 300)]:
        mats = rng.standard_normal((p, q, q))
        mats = mats - np.swapaxes(mats, 1, 2)

        row = [f"moment p={p} q={q} x{iters}"]
        for impl in backends.values():
            row.append(_time(lambda impl=impl: [impl.moment_parts(mats)
                                                for _ in range(iters)],
                             args.repeat))
        print(f"{row[0]:<28}" + "".join(f"{t * 1e3:>12.2f}ms" for t in row[1:]))

        row = [f"flow   p={p} q={q}"]
        for impl in backends.values():
            row.append(_time(lambda impl=impl: impl.flow_run(
                mats, 1e-9, 1e-7, 3000, 0.01, 0.5, 40), args.repeat))
        print(f"{row[0]:<28}" + "".join(f"{t * 1e3:>12.2f}ms" for t in row[1:]))

    if len(backends) > 1:
        ref = backends["python"].moment_parts
        acc = backends["compiled"].moment_parts
        mats = rng.standard_normal((4, 12, 12))
        mats = mats - np.swapaxes(mats, 1, 2)
        (a1, a2), (b1, b2) = ref(mats), acc(mats)
        dev = max(np.max(np.abs(a1 - b1)), np.max(np.abs(a2 - b2)))
        print(f"\nbackend agreement (max abs dev): {dev:.3e}")


if __name__ == "__main__":
    main()

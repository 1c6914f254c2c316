"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from scdopt.kernels import backends


def cases(rng):
    m, n = 10, 20
    supply = rng.uniform(50, 150, m)
    demand = rng.uniform(20, 60, n)
    demand *= supply.sum() / demand.sum() * 0.8
    cost = rng.uniform(100, 1000, (m, n))
    lam = rng.uniform(100, 1000, (m, n))
    alpha = np.where(rng.random((m, 64)) < 0.3, 0.9, 1.0)
    p = rng.uniform(0, 10, (m, n))
    return {
        "transport_ssp 10x20": lambda k: k.transport_ssp(supply, demand, cost),
        "vns_scenario 10x20 kmax=200": lambda k: k.vns_scenario(p, cost, 200, 7),
        "greedy_alloc 10x20x64": lambda k: k.greedy_alloc(lam, supply, alpha, demand),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = backends()
    if impls.get("cython") is None:
        print("compiled backend not built; only the Python timings are shown")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<30}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for name, fn in cases(rng).items():
        t = {}
        for label, mod in impls.items():
            if mod is None:
                continue
            n = 3 if label == "python" else 30
            t[label] = min(timeit.repeat(lambda: fn(mod), number=n, repeat=args.repeat)) / n * 1e3
        py, cy = t.get("python"), t.get("cython")
        sp = f"{py / cy:.1f}x" if cy else "-"
        print(f"{name:<30}{py:>12.3f}{(cy or float('nan')):>12.3f}{sp:>10}")


if __name__ == "__main__":
    main()

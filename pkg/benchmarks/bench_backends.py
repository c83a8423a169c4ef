"""Benchmark the subset-enumeration kernels: numba JIT vs pure-numpy fallback.

Usage:
    python benchmarks/bench_backends.py [--rules 14 16 18] [--repeats 3]

The numba kernels are warmed up before timing so JIT compilation is not
billed to the measurement; results are checked for agreement across backends.
"""
import argparse
import time

import numpy as np

from ruleselect import EvalCache, rule_size
from ruleselect._bitset import PackedUniverse
from ruleselect._kernels import HAS_NUMBA, size_profile_masks, solve_exact_masks
from ruleselect.generators import GenSeed, gen_random_ruleselect


def build_masks(n_rules, seed):
    rules, example = gen_random_ruleselect(GenSeed(
        seed=seed, n_universe=40, n_sets=n_rules, density=0.25,
        fp_noise=0.4, fn_noise=0.1, join_rules=2))
    cache = EvalCache(rules, example.premise)
    universe = PackedUniverse(cache.union | example.truth.facts)
    masks = universe.pack_rows([cache.per_rule[r.name] for r in rules.rules])
    j_mask = universe.pack(example.truth.facts)
    sizes = np.array([rule_size(r) for r in rules.rules], dtype=np.int64)
    return masks, sizes, j_mask


def timed(fn, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rules", type=int, nargs="+", default=[14, 16, 18])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    if not HAS_NUMBA:
        print("numba unavailable; nothing to compare")
        return

    # Warm up the JIT on a tiny instance before any timing.
    masks, sizes, j = build_masks(4, seed=0)
    solve_exact_masks(masks, j, backend="numba")
    size_profile_masks(masks, sizes, j, backend="numba")

    header = f"{'rules':>6} {'kernel':>12} {'numba':>10} {'numpy':>10} {'speedup':>8}  agree"
    print(header)
    print("-" * len(header))
    for n in args.rules:
        masks, sizes, j = build_masks(n, seed=n)
        for name, call in (
            ("exact", lambda b: solve_exact_masks(masks, j, backend=b)),
            ("profile", lambda b: size_profile_masks(masks, sizes, j, backend=b)),
        ):
            t_nb, r_nb = timed(lambda: call("numba"), args.repeats)
            t_np, r_np = timed(lambda: call("numpy"), args.repeats)
            if name == "exact":
                agree = r_nb == r_np
            else:
                agree = (np.array_equal(r_nb[0], r_np[0])
                         and np.array_equal(r_nb[1], r_np[1]))
            print(f"{n:>6} {name:>12} {t_nb * 1e3:>8.2f}ms {t_np * 1e3:>8.2f}ms "
                  f"{t_np / t_nb:>7.1f}x  {agree}")


if __name__ == "__main__":
    main()

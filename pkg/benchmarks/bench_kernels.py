#!/usr/bin/env python3
"""Benchmark the numba kernel against the pure-numpy fallback.

Both paths evaluate batches of placement genomes (fitness + validity).  Run
with TIERSLICER_JIT=0 to confirm the fallback is what the package would use
without numba.  Typical shapes: the genetic search evaluates 30-row batches
three hundred times per run, the exhaustive oracle evaluates 3^n rows at
once, and the 100-run stats harness multiplies both.
"""

from __future__ import annotations

import time

import numpy as np

from tierslicer.kernels import (
    JIT_ENABLED,
    compile_problem,
    eval_population,
    eval_population_numpy,
)
from tierslicer.model import SHARED, CallRecord, PlacementProblem, Tier


def synthetic_problem(n_slices: int, n_calls: int, seed: int = 0) -> PlacementProblem:
    rng = np.random.default_rng(seed)
    names = tuple(f"s{i}" for i in range(n_slices))
    fixed = {names[0]: Tier.CLIENT, names[1]: Tier.SERVER}
    calls = []
    for i in range(n_calls):
        caller = names[int(rng.integers(n_slices))]
        callee = SHARED if rng.random() < 0.1 else names[int(rng.integers(n_slices))]
        calls.append(CallRecord(i, caller, callee, f"fn{i}", bool(rng.random() < 0.6)))
    return PlacementProblem(names, fixed, tuple(calls))


def bench(fn, compiled, genomes, repeats: int = 5) -> float:
    fn(compiled, genomes)  # warm-up (and numba compilation)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(compiled, genomes)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    print(f"numba JIT enabled: {JIT_ENABLED}")
    rng = np.random.default_rng(42)
    shapes = [
        ("search generation", 10, 30, 30),
        ("stats harness", 10, 30, 30 * 300),
        ("oracle n=8", 10, 40, 3**8),
        ("oracle n=12", 14, 60, 3**12),
    ]
    header = f"{'scenario':<18} {'genes':>5} {'calls':>5} {'rows':>8} {'jit':>10} {'numpy':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label, n_slices, n_calls, rows in shapes:
        problem = synthetic_problem(n_slices, n_calls)
        compiled = compile_problem(problem)
        genomes = rng.integers(1, 4, size=(rows, compiled.n_genes), dtype=np.int8)
        t_main = bench(eval_population, compiled, genomes)
        t_numpy = bench(eval_population_numpy, compiled, genomes)
        fit_a, val_a = eval_population(compiled, genomes)
        fit_b, val_b = eval_population_numpy(compiled, genomes)
        assert np.array_equal(fit_a, fit_b) and np.array_equal(val_a, val_b), "paths diverge"
        speedup = t_numpy / t_main if t_main > 0 else float("inf")
        print(f"{label:<18} {compiled.n_genes:>5} {compiled.n_calls:>5} {rows:>8} "
              f"{t_main * 1e3:>8.2f}ms {t_numpy * 1e3:>8.2f}ms {speedup:>7.2f}x")


if __name__ == "__main__":
    main()

"""Hot kernels: batch fitness + validity evaluation over placement genomes.

The genetic search and the exhaustive oracle both evaluate thousands to
millions of candidate placements; this module compiles a placement problem's
call table into flat arrays and evaluates whole genome batches at once.

Genomes are int8 vectors of tier masks (client=1, server=2, both=3), one
gene per unplaced slice in problem order.  Two interchangeable paths exist:
a numba ``@njit`` kernel and a pure-numpy fallback.  Set ``TIERSLICER_JIT=0``
to force the fallback; both produce bit-identical results.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .model import SHARED, PlacementProblem

JIT_ENABLED = os.environ.get("TIERSLICER_JIT", "1").lower() not in ("0", "false", "no")

if JIT_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        JIT_ENABLED = False

if not JIT_ENABLED:

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


@dataclass
class CompiledProblem:
    unplaced: tuple  # slice names, genome order
    caller_gene: np.ndarray  # int32, -1 when the caller is fixed
    caller_mask: np.ndarray  # int8, used when caller_gene < 0
    callee_gene: np.ndarray
    callee_mask: np.ndarray  # shared callees carry mask 3 (always local)
    annotated: np.ndarray  # bool, @reply/@broadcast on the call site

    @property
    def n_genes(self) -> int:
        return len(self.unplaced)

    @property
    def n_calls(self) -> int:
        return len(self.caller_gene)


def compile_problem(problem: PlacementProblem) -> CompiledProblem:
    unplaced = problem.unplaced
    gene_of = {name: i for i, name in enumerate(unplaced)}
    cg, cm, eg, em, ann = [], [], [], [], []
    for rec in problem.calls:
        cg.append(gene_of.get(rec.caller, -1))
        cm.append(0 if rec.caller in gene_of else problem.fixed[rec.caller].mask)
        if rec.callee == SHARED:
            eg.append(-1)
            em.append(3)
        else:
            eg.append(gene_of.get(rec.callee, -1))
            em.append(0 if rec.callee in gene_of else problem.fixed[rec.callee].mask)
        ann.append(rec.annotated)
    return CompiledProblem(
        unplaced=unplaced,
        caller_gene=np.asarray(cg, dtype=np.int32),
        caller_mask=np.asarray(cm, dtype=np.int8),
        callee_gene=np.asarray(eg, dtype=np.int32),
        callee_mask=np.asarray(em, dtype=np.int8),
        annotated=np.asarray(ann, dtype=np.bool_),
    )


@njit(cache=True)
def _eval_jit(genomes, cg, cm, eg, em, ann):  # pragma: no cover - timed separately
    pop = genomes.shape[0]
    ncalls = cg.shape[0]
    fitness = np.ones(pop, dtype=np.float64)
    valid = np.ones(pop, dtype=np.bool_)
    for p in range(pop):
        local = 0
        ok = True
        for i in range(ncalls):
            a = genomes[p, cg[i]] if cg[i] >= 0 else cm[i]
            b = genomes[p, eg[i]] if eg[i] >= 0 else em[i]
            if (a & (3 ^ b)) == 0:
                local += 1
            elif (a & 2) != 0 and (b & 2) == 0 and not ann[i]:
                ok = False
        if ncalls > 0:
            fitness[p] = local / ncalls
        valid[p] = ok
    return fitness, valid


def _eval_numpy(genomes, cg, cm, eg, em, ann):
    pop = genomes.shape[0]
    ncalls = cg.shape[0]
    if ncalls == 0:
        return np.ones(pop, dtype=np.float64), np.ones(pop, dtype=np.bool_)
    a = np.where(cg >= 0, genomes[:, np.maximum(cg, 0)], cm)
    b = np.where(eg >= 0, genomes[:, np.maximum(eg, 0)], em)
    local = (a & (3 ^ b)) == 0
    fitness = local.sum(axis=1) / ncalls
    bad = ~local & ((a & 2) != 0) & ((b & 2) == 0) & ~ann
    return fitness.astype(np.float64), ~bad.any(axis=1)


def eval_population(compiled: CompiledProblem, genomes: np.ndarray):
    """Fitness and validity for each genome row.  Empty call tables score 1.0."""
    genomes = np.ascontiguousarray(genomes, dtype=np.int8)
    if genomes.ndim != 2 or genomes.shape[1] != compiled.n_genes:
        raise ValueError("genome matrix shape does not match the problem")
    impl = _eval_jit if JIT_ENABLED else _eval_numpy
    return impl(
        genomes,
        compiled.caller_gene,
        compiled.caller_mask,
        compiled.callee_gene,
        compiled.callee_mask,
        compiled.annotated,
    )


def eval_population_numpy(compiled: CompiledProblem, genomes: np.ndarray):
    """Fallback path, exposed for benchmarks and equivalence tests."""
    genomes = np.ascontiguousarray(genomes, dtype=np.int8)
    return _eval_numpy(
        genomes,
        compiled.caller_gene,
        compiled.caller_mask,
        compiled.callee_gene,
        compiled.callee_mask,
        compiled.annotated,
    )

"""Refinement advice after placement: replicate data, extract functions.

Two advice kinds, both driven by incoming call counts under the computed
placement: a declaration whose readers sit in functions that are called
remotely more than locally should be replicated; a function in a fixed slice
that is called remotely much more than locally should move to a fresh
unplaced slice so the search can relocate (or duplicate) it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from . import frontend
from .depgraph import DATA, DECLARATION, DependenceGraph, build_pdg, placement_problem
from .errors import TargetNotFoundError
from .fitness import offline_percent
from .model import SHARED, Tier
from .placement import Placement, classify_calls
from .search import GaConfig, SearchResult, run
from .syntax import Annotation, AnnotationKind, FunctionDecl, SliceDecl, SourceProgram, VarDecl


class AdviceKind(Enum):
    REPLICATE_DECLARATION = "replicate-declaration"
    MOVE_FUNCTION = "move-function-to-new-slice"


@dataclass
class Advice:
    kind: AdviceKind
    target: str  # declaration or function name
    owner: str  # owning slice
    local_incoming: int = 0  # move advice evidence
    remote_incoming: int = 0
    dependent_functions: list = field(default_factory=list)  # replication evidence


@dataclass(frozen=True)
class AdvisorConfig:
    move_threshold: float = 0.2  # relative difference (R - L) / (R + L)

    def __post_init__(self):
        if not 0.0 <= self.move_threshold < 1.0:
            raise ValueError("move threshold must lie in [0, 1)")


def _incoming_counts(problem, classified):
    """(local, remote) incoming call counts per (callee slice, function name)."""
    counts: dict[tuple, list] = {}
    for c in classified:
        key = (c.record.callee, c.record.callee_name)
        entry = counts.setdefault(key, [0, 0])
        entry[0 if c.local else 1] += 1
    return counts


def _tier_mask(placement: Placement, slice_name: str) -> int:
    if slice_name == SHARED:
        return 3  # shared code replicates into every tier that uses it
    return placement.mask(slice_name)


def advise_replication(graph: DependenceGraph, placement: Placement,
                       program: SourceProgram) -> list:
    problem = placement_problem(graph)
    classified = classify_calls(problem, placement)
    incoming = _incoming_counts(problem, classified)

    by_start = {}
    for n in graph.nodes:
        if n.kind == DECLARATION:
            by_start[(n.slice, n.span[0])] = n
    readers: dict[int, list] = {}
    for e in graph.edges:
        if e.kind == DATA:
            readers.setdefault(e.src, []).append(graph.nodes[e.dst])

    out = []
    for decl in program.declarations:
        if decl.kind != "var" or decl.owner == SHARED:
            continue
        if any(a.kind is AnnotationKind.REPLICATED for a in decl.node.annotations):
            continue
        node = by_start.get((decl.owner, decl.node.span.start))
        if node is None:
            continue
        decl_mask = _tier_mask(placement, decl.owner)
        evidence = []
        for reader in readers.get(node.id, []):
            if reader.function is None:
                continue
            if not (_tier_mask(placement, reader.slice) & decl_mask):
                continue  # reader lives on a disjoint tier
            local, remote = incoming.get((reader.slice, reader.function), (0, 0))
            if remote > local and reader.function not in evidence:
                evidence.append(reader.function)
        if evidence:
            out.append(Advice(AdviceKind.REPLICATE_DECLARATION, decl.name, decl.owner,
                              dependent_functions=evidence))
    return out


def advise_function_moves(graph: DependenceGraph, placement: Placement,
                          program: SourceProgram,
                          config: AdvisorConfig = AdvisorConfig()) -> list:
    problem = placement_problem(graph)
    classified = classify_calls(problem, placement)
    incoming = _incoming_counts(problem, classified)

    fixed_slices = set(problem.fixed)
    out = []
    for decl in program.declarations:
        if decl.kind != "function" or decl.owner not in fixed_slices:
            continue
        local, remote = incoming.get((decl.owner, decl.name), (0, 0))
        if remote > local and (remote - local) / (remote + local) > config.move_threshold:
            out.append(Advice(AdviceKind.MOVE_FUNCTION, decl.name, decl.owner,
                              local_incoming=local, remote_incoming=remote))
    return out


def advise(graph: DependenceGraph, placement: Placement, program: SourceProgram,
           config: AdvisorConfig = AdvisorConfig()) -> list:
    return (advise_replication(graph, placement, program)
            + advise_function_moves(graph, placement, program, config))


# --- Applying advice ------------------------------------------------------


def _fresh_slice_name(base: str, taken: set) -> str:
    name = base
    counter = 2
    while name in taken:
        name = f"{base}_{counter}"
        counter += 1
    return name


def apply_advice(program: SourceProgram, advices: list) -> SourceProgram:
    """Pure transformation: returns a renormalized (re-parsed) program."""
    # Work on a private copy so the caller's AST stays untouched.
    work = frontend.parse(frontend.emit(program), program.filename)

    for advice in advices:
        slice_decl = _find_slice(work, advice.owner)
        if advice.kind is AdviceKind.REPLICATE_DECLARATION:
            target = _find_stmt(slice_decl.body, VarDecl, advice.target)
            if target is None:
                raise TargetNotFoundError(f"var {advice.target!r} not in slice {advice.owner!r}")
            if not any(a.kind is AnnotationKind.REPLICATED for a in target.annotations):
                target.annotations.append(Annotation(AnnotationKind.REPLICATED))
        else:
            target = _find_stmt(slice_decl.body, FunctionDecl, advice.target)
            if target is None:
                raise TargetNotFoundError(f"function {advice.target!r} not in slice {advice.owner!r}")
            slice_decl.body.remove(target)
            taken = set(s.name for s in work.slices)
            name = _fresh_slice_name(f"auto_{advice.target}", taken)
            work.slices.append(SliceDecl(
                name=name,
                body=[target],
                annotations=[Annotation(AnnotationKind.SLICE, [name])],
            ))

    return frontend.resolve_calls(frontend.parse(frontend.emit(work), program.filename))


# --- Refinement loop ------------------------------------------------------


@dataclass
class RefineResult:
    program: SourceProgram
    placement: Placement
    fitness: float
    valid: bool
    iterations: int
    fitness_history: list = field(default_factory=list)  # fitness before each apply + final


def refine_loop(program: SourceProgram, ga_config: GaConfig = GaConfig(),
                advisor_config: AdvisorConfig = AdvisorConfig(),
                max_iterations: int = 10) -> RefineResult:
    """Alternate search and advice integration until a fixpoint."""
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    iterations = 0
    history = []
    while True:
        graph = build_pdg(program)
        problem = placement_problem(graph)
        result = run(problem, ga_config)
        history.append(result.best_fitness)
        if result.best_fitness == 1.0 and result.best_valid:
            break
        advices = advise(graph, result.best_placement, program, advisor_config)
        if not advices or iterations >= max_iterations:
            break
        program = apply_advice(program, advices)
        iterations += 1
    return RefineResult(program, result.best_placement, result.best_fitness,
                        result.best_valid, iterations, history)


def _find_slice(program: SourceProgram, name: str) -> SliceDecl:
    for s in program.slices:
        if s.name == name:
            return s
    raise TargetNotFoundError(f"slice {name!r} not found")


def _find_stmt(body, cls, name):
    for st in body:
        if isinstance(st, cls) and st.name == name:
            return st
    return None


# --- Report rendering -----------------------------------------------------


def render_report(fitness_value: float, advices: list) -> str:
    """Plain-text advice report; sections are omitted when empty."""
    lines = [f"Application level of offline availability: {offline_percent(fitness_value)} %"]
    replicate = [a for a in advices if a.kind is AdviceKind.REPLICATE_DECLARATION]
    move = [a for a in advices if a.kind is AdviceKind.MOVE_FUNCTION]
    if replicate:
        lines.append("Consider making following declarations replicated")
        lines.extend(f"      - var {a.target}" for a in replicate)
    if move:
        lines.append("Consider moving following functions to new slice:")
        lines.extend(f"      - {a.target}" for a in move)
    return "\n".join(lines) + "\n"


def report_json(fitness_value: float, advices: list) -> dict:
    return {
        "offlinePercent": offline_percent(fitness_value),
        "offlineFraction": fitness_value,
        "replicate": [
            {"name": a.target, "slice": a.owner, "functions": list(a.dependent_functions)}
            for a in advices if a.kind is AdviceKind.REPLICATE_DECLARATION
        ],
        "move": [
            {
                "name": a.target,
                "slice": a.owner,
                "localIncoming": a.local_incoming,
                "remoteIncoming": a.remote_incoming,
            }
            for a in advices if a.kind is AdviceKind.MOVE_FUNCTION
        ],
    }

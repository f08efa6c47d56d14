"""Program dependence graph over TierJS programs.

Nodes are statements, declarations, function entries and call sites, each
owned by a slice (or shared).  Control edges follow block nesting, data edges
follow def-use over lexically scoped variable names, call edges connect call
sites to the entry of their resolved callee.

The collapsed slice graph aggregates cross-slice edges in *dependence*
orientation: call edges already point caller -> callee; data edges are
reversed at collapse time (reader -> declarer) so a purely supportive slice
shows only incoming dependencies.  @ui blocks are excluded entirely.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .frontend import (
    _child_statements,
    _iter_calls_in_expr,
    _iter_func_exprs,
    _stmt_expressions,
)
from .model import SHARED, CallRecord, PlacementProblem, Tier
from .syntax import (
    Annotation,
    AnnotationKind,
    ArrayLit,
    Assign,
    Binary,
    BlockStmt,
    Call,
    ExprStmt,
    ForStmt,
    FuncExpr,
    FunctionDecl,
    Ident,
    IfStmt,
    Index,
    Member,
    ObjectLit,
    ReturnStmt,
    SourceProgram,
    Unary,
    UiBlock,
    VarDecl,
    WhileStmt,
)

ENTRY = "entry"
STATEMENT = "statement"
DECLARATION = "declaration"
FUNCTION_ENTRY = "function-entry"
CALL_SITE = "call-site"

CONTROL = "control"
DATA = "data"
CALL = "call"


@dataclass
class PdgNode:
    id: int
    kind: str
    slice: str  # slice name or SHARED
    span: tuple = (0, 0, 1, 1)  # (start, end, line, col)
    name: str | None = None  # declared name / callee name
    function: str | None = None  # enclosing function declaration, if any
    annotations: list = field(default_factory=list)  # annotation kind strings
    unresolved: str | None = None  # call sites only


@dataclass(frozen=True)
class PdgEdge:
    src: int
    dst: int
    kind: str


@dataclass
class DependenceGraph:
    nodes: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    slice_order: list = field(default_factory=list)
    fixed: dict = field(default_factory=dict)  # name -> "client"/"server"

    def node(self, node_id: int) -> PdgNode:
        return self.nodes[node_id]

    def call_site_nodes(self):
        return [n for n in self.nodes if n.kind == CALL_SITE]

    def out_edges(self, node_id: int, kind: str | None = None):
        return [e for e in self.edges if e.src == node_id and (kind is None or e.kind == kind)]


@dataclass
class SliceGraph:
    vertices: tuple = ()
    # (from_slice, to_slice, edge_kind) -> count, cross-slice only
    edges: dict = field(default_factory=dict)

    def __eq__(self, other):
        return isinstance(other, SliceGraph) and set(self.vertices) == set(other.vertices) and self.edges == other.edges


def _span_tuple(span) -> tuple:
    return (span.start, span.end, span.line, span.col)


def _annotation_kinds(stmt) -> list:
    return [a.kind.value for a in getattr(stmt, "annotations", [])]


class _Builder:
    def __init__(self, program: SourceProgram):
        self.program = program
        self.graph = DependenceGraph(
            slice_order=list(program.slice_names()),
            fixed={s.name: s.fixed_tier for s in program.slices if s.fixed_tier},
        )
        self.stmt_node: dict[int, int] = {}  # id(stmt) -> node id
        self.func_entry: dict[int, int] = {}  # id(FunctionDecl) -> entry node id
        self.call_node: dict[int, int] = {}  # id(Call expr) -> node id
        self.site_by_call = {id(s.node): s for s in program.call_sites}

    def new_node(self, kind, owner, span, **kw) -> int:
        node = PdgNode(id=len(self.graph.nodes), kind=kind, slice=owner, span=_span_tuple(span), **kw)
        self.graph.nodes.append(node)
        return node.id

    def edge(self, src, dst, kind):
        self.graph.edges.append(PdgEdge(src, dst, kind))

    # -- structure pass ----------------------------------------------------

    def build(self) -> DependenceGraph:
        from .syntax import Span

        entry = self.new_node(ENTRY, SHARED, Span.zero())
        for s in self.program.slices:
            for st in s.body:
                self.visit_stmt(st, entry, s.name, None)
        for st in self.program.shared_top_level:
            self.visit_stmt(st, entry, SHARED, None)
        self.add_call_edges()
        self.add_data_edges()
        return self.graph

    def visit_stmt(self, st, parent: int, owner: str, func: str | None):
        if isinstance(st, UiBlock):
            return
        kind = DECLARATION if isinstance(st, (VarDecl, FunctionDecl)) else STATEMENT
        name = st.name if isinstance(st, (VarDecl, FunctionDecl)) else None
        nid = self.new_node(kind, owner, st.span, name=name, function=func,
                            annotations=_annotation_kinds(st))
        self.stmt_node[id(st)] = nid
        self.edge(parent, nid, CONTROL)

        if isinstance(st, FunctionDecl):
            fid = self.new_node(FUNCTION_ENTRY, owner, st.span, name=st.name, function=func)
            self.func_entry[id(st)] = fid
            self.edge(nid, fid, CONTROL)
            for child in st.body:
                self.visit_stmt(child, fid, owner, st.name)
            return

        for expr in _stmt_expressions(st):
            self.visit_expr_calls(expr, nid, owner, func)
            for fx in _iter_func_exprs(expr):
                for child in fx.body:
                    self.visit_stmt(child, nid, owner, func)
        for child in _child_statements(st):
            self.visit_stmt(child, nid, owner, func)

    def visit_expr_calls(self, expr, stmt_node: int, owner: str, func: str | None):
        for call in _iter_calls_in_expr(expr):
            site = self.site_by_call.get(id(call))
            callee = site.callee_name if site else None
            cid = self.new_node(
                CALL_SITE, owner, call.span, name=callee, function=func,
                annotations=_annotation_kinds(site.stmt) if site else [],
                unresolved=site.unresolved_reason if site else "non-identifier",
            )
            self.call_node[id(call)] = cid
            self.edge(stmt_node, cid, CONTROL)

    def add_call_edges(self):
        for site in self.program.call_sites:
            if site.resolved is None:
                continue
            cid = self.call_node.get(id(site.node))
            fid = self.func_entry.get(id(site.resolved))
            if cid is not None and fid is not None:
                self.edge(cid, fid, CALL)

    # -- def-use pass ------------------------------------------------------

    def add_data_edges(self):
        # Hoisted global scope: every var declared outside a function body,
        # across all slices and shared code (slice blocks do not scope vars).
        global_env: dict[str, VarDecl] = {}

        def hoist(stmts, env, in_function):
            for st in stmts:
                if isinstance(st, UiBlock):
                    continue
                if isinstance(st, VarDecl):
                    env.setdefault(st.name, st)
                if isinstance(st, FunctionDecl):
                    continue  # its body is a fresh scope
                hoist(_child_statements(st), env, in_function)

        for s in self.program.slices:
            hoist(s.body, global_env, False)
        hoist(self.program.shared_top_level, global_env, False)

        defs: dict[int, list[int]] = {}  # id(VarDecl) -> def node ids
        uses: dict[int, set[int]] = {}  # id(VarDecl) -> use node ids

        def record_def(decl, node_id):
            defs.setdefault(id(decl), []).append(node_id)

        def record_use(decl, node_id):
            uses.setdefault(id(decl), set()).add(node_id)

        def reads_of(expr, out):
            """Identifier reads in expr; skips callee idents and pure write targets."""
            if expr is None:
                return
            if isinstance(expr, Ident):
                out.append(expr.name)
            elif isinstance(expr, Member):
                reads_of(expr.obj, out)
            elif isinstance(expr, Index):
                reads_of(expr.obj, out)
                reads_of(expr.index, out)
            elif isinstance(expr, Call):
                if not isinstance(expr.callee, Ident):
                    reads_of(expr.callee, out)
                for a in expr.args:
                    reads_of(a, out)
            elif isinstance(expr, Unary):
                reads_of(expr.operand, out)
            elif isinstance(expr, Binary):
                reads_of(expr.left, out)
                reads_of(expr.right, out)
            elif isinstance(expr, Assign):
                if not isinstance(expr.target, Ident):
                    reads_of(expr.target, out)
                reads_of(expr.value, out)
            elif isinstance(expr, ObjectLit):
                for _, v in expr.entries:
                    reads_of(v, out)
            elif isinstance(expr, ArrayLit):
                for e in expr.elements:
                    reads_of(e, out)
            # FuncExpr bodies handled statement-wise below

        def lookup(name, env_chain):
            for env in reversed(env_chain):
                if name in env:
                    return env[name]
            return None

        def write_targets(expr, out):
            if isinstance(expr, Assign):
                if isinstance(expr.target, Ident):
                    out.append(expr.target.name)
                write_targets(expr.value, out)

        def walk(stmts, env_chain):
            for st in stmts:
                if isinstance(st, UiBlock):
                    continue
                nid = self.stmt_node.get(id(st))
                if isinstance(st, FunctionDecl):
                    local: dict[str, object] = {}
                    for p in st.params:
                        local.setdefault(p, ("param", id(st), p))
                    hoist(st.body, local, True)
                    walk(st.body, env_chain + [local])
                    continue
                if isinstance(st, VarDecl):
                    decl = lookup(st.name, env_chain)
                    if isinstance(decl, VarDecl) and nid is not None:
                        record_def(decl, nid)
                reads: list[str] = []
                writes: list[str] = []
                for expr in _stmt_expressions(st):
                    reads_of(expr, reads)
                    write_targets(expr, writes)
                    for fx in _iter_func_exprs(expr):
                        local = {}
                        for p in fx.params:
                            local.setdefault(p, ("param", id(fx), p))
                        hoist(fx.body, local, True)
                        walk(fx.body, env_chain + [local])
                if nid is not None:
                    for name in writes:
                        decl = lookup(name, env_chain)
                        if isinstance(decl, VarDecl):
                            record_def(decl, nid)
                    for name in reads:
                        decl = lookup(name, env_chain)
                        if isinstance(decl, VarDecl):
                            record_use(decl, nid)
                walk(_child_statements(st), env_chain)

        for s in self.program.slices:
            walk(s.body, [global_env])
        walk(self.program.shared_top_level, [global_env])

        seen = set()
        for decl_key, def_nodes in defs.items():
            for d in def_nodes:
                for u in uses.get(decl_key, ()):
                    if d != u and (d, u) not in seen:
                        seen.add((d, u))
                        self.edge(d, u, DATA)


def build_pdg(program: SourceProgram) -> DependenceGraph:
    """Build the dependence graph; requires resolve_calls to have run."""
    return _Builder(program).build()


def collapse_to_slice_graph(graph: DependenceGraph) -> SliceGraph:
    vertices = list(graph.slice_order)
    if any(n.slice == SHARED and n.kind != ENTRY for n in graph.nodes):
        vertices.append(SHARED)
    counts: dict[tuple, int] = {}
    for e in graph.edges:
        a, b = graph.nodes[e.src], graph.nodes[e.dst]
        if a.kind == ENTRY or b.kind == ENTRY:
            continue
        if e.kind == DATA:
            # dependence orientation: the reader depends on the declarer
            src, dst = b.slice, a.slice
        else:
            src, dst = a.slice, b.slice
        if src != dst:
            key = (src, dst, e.kind)
            counts[key] = counts.get(key, 0) + 1
    return SliceGraph(tuple(vertices), counts)


def call_inventory(graph: DependenceGraph):
    """Per-slice call table: the sole input to fitness classification.

    Returns (table, diagnostics) where table maps slice name -> list of
    CallRecord and diagnostics counts unresolved in-slice call sites.
    Shared-owned callees are recorded as SHARED (always local); call sites in
    shared code and unresolved/external calls are excluded from the table.
    """
    entry_owner = {}
    for n in graph.nodes:
        if n.kind == FUNCTION_ENTRY:
            entry_owner[n.id] = n.slice

    table = {name: [] for name in graph.slice_order}
    unresolved = 0
    site_id = 0
    for n in graph.nodes:
        if n.kind != CALL_SITE:
            continue
        if n.slice == SHARED:
            continue
        call_edges = graph.out_edges(n.id, CALL)
        if not call_edges:
            if n.unresolved in ("undeclared", "ambiguous"):
                unresolved += 1
            continue
        callee_slice = entry_owner[call_edges[0].dst]
        annotated = bool({"reply", "broadcast"} & set(n.annotations))
        label = f"{n.span[2]}:{n.span[3]}"
        table[n.slice].append(
            CallRecord(site_id, n.slice, callee_slice, n.name or "", annotated, label)
        )
        site_id += 1
    return table, unresolved


def placement_problem(graph: DependenceGraph) -> PlacementProblem:
    table, unresolved = call_inventory(graph)
    calls = [rec for name in graph.slice_order for rec in table[name]]
    calls = [CallRecord(i, c.caller, c.callee, c.callee_name, c.annotated, c.label)
             for i, c in enumerate(sorted(calls, key=lambda c: c.site_id))]
    fixed = {name: Tier(tier) for name, tier in graph.fixed.items()}
    return PlacementProblem(tuple(graph.slice_order), fixed, tuple(calls), unresolved)


# --- Serialization --------------------------------------------------------


def to_json(graph: DependenceGraph) -> str:
    payload = {
        "slices": [
            {"name": name, "fixedTier": graph.fixed.get(name)}
            for name in graph.slice_order
        ],
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind,
                "slice": n.slice,
                "span": list(n.span),
                "name": n.name,
                "function": n.function,
                "annotations": list(n.annotations),
                "unresolved": n.unresolved,
            }
            for n in graph.nodes
        ],
        "edges": [{"from": e.src, "to": e.dst, "kind": e.kind} for e in graph.edges],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def from_json(text: str) -> DependenceGraph:
    payload = json.loads(text)
    graph = DependenceGraph(
        slice_order=[s["name"] for s in payload["slices"]],
        fixed={s["name"]: s["fixedTier"] for s in payload["slices"] if s.get("fixedTier")},
    )
    for n in sorted(payload["nodes"], key=lambda n: n["id"]):
        graph.nodes.append(
            PdgNode(
                id=n["id"],
                kind=n["kind"],
                slice=n["slice"],
                span=tuple(n.get("span", (0, 0, 1, 1))),
                name=n.get("name"),
                function=n.get("function"),
                annotations=list(n.get("annotations", [])),
                unresolved=n.get("unresolved"),
            )
        )
    for e in payload["edges"]:
        graph.edges.append(PdgEdge(e["from"], e["to"], e["kind"]))
    return graph


def to_dot(slice_graph: SliceGraph) -> str:
    """Collapsed slice graph as a DOT digraph; edge labels carry kind counts."""
    lines = ["digraph slices {"]
    for v in slice_graph.vertices:
        label = "shared" if v == SHARED else v
        lines.append(f'  "{label}";')
    merged: dict[tuple, list] = {}
    for (src, dst, kind), count in sorted(slice_graph.edges.items()):
        merged.setdefault((src, dst), []).append(f"{kind}:{count}")
    for (src, dst), labels in sorted(merged.items()):
        s = "shared" if src == SHARED else src
        d = "shared" if dst == SHARED else dst
        lines.append(f'  "{s}" -> "{d}" [label="{", ".join(labels)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

"""AST node definitions for TierJS.

TierJS is a statement-level subset of a C-like dynamic language.  Programs
are divided into named slices (annotated blocks); everything outside a slice
is shared top-level code.  Annotations live in block comments and attach to
the syntactically next block, declaration or statement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    line: int
    col: int

    @staticmethod
    def zero() -> "Span":
        return Span(0, 0, 1, 1)


class AnnotationKind(Enum):
    SLICE = "slice"
    CONFIG = "config"
    CLIENT = "client"
    SERVER = "server"
    UI = "ui"
    REMOTE_CALL = "remoteCall"
    LOCAL_CALL = "localCall"
    BLOCKING = "blocking"
    REPLY = "reply"
    BROADCAST = "broadcast"
    REMOTE_PROCEDURE = "remoteProcedure"
    LOCAL = "local"
    COPY = "copy"
    REPLICATED = "replicated"
    OBSERVABLE = "observable"
    DEFINE_HANDLER = "defineHandler"
    USE_HANDLER = "useHandler"


ANNOTATION_NAMES = {k.value: k for k in AnnotationKind}

# Category split used by `tierslicer parse` summaries.
PLACEMENT_KINDS = {
    AnnotationKind.SLICE,
    AnnotationKind.CONFIG,
    AnnotationKind.CLIENT,
    AnnotationKind.SERVER,
    AnnotationKind.UI,
}
COMMUNICATION_KINDS = {
    AnnotationKind.REMOTE_CALL,
    AnnotationKind.LOCAL_CALL,
    AnnotationKind.BLOCKING,
    AnnotationKind.REPLY,
    AnnotationKind.BROADCAST,
    AnnotationKind.REMOTE_PROCEDURE,
}
SHARING_KINDS = {
    AnnotationKind.LOCAL,
    AnnotationKind.COPY,
    AnnotationKind.REPLICATED,
    AnnotationKind.OBSERVABLE,
}
FAILURE_KINDS = {AnnotationKind.DEFINE_HANDLER, AnnotationKind.USE_HANDLER}


@dataclass
class Annotation:
    kind: AnnotationKind
    # Identifier arguments; @config args are (name, tier) pairs.
    args: list = field(default_factory=list)
    span: Span = field(default_factory=Span.zero)


# --- Expressions ----------------------------------------------------------


@dataclass
class Expr:
    pass


@dataclass
class NumberLit(Expr):
    value: float
    span: Span = field(default_factory=Span.zero)


@dataclass
class StringLit(Expr):
    value: str
    span: Span = field(default_factory=Span.zero)


@dataclass
class BoolLit(Expr):
    value: bool
    span: Span = field(default_factory=Span.zero)


@dataclass
class NullLit(Expr):
    span: Span = field(default_factory=Span.zero)


@dataclass
class ThisExpr(Expr):
    span: Span = field(default_factory=Span.zero)


@dataclass
class Ident(Expr):
    name: str
    span: Span = field(default_factory=Span.zero)


@dataclass
class Member(Expr):
    obj: Expr
    attr: str
    span: Span = field(default_factory=Span.zero)


@dataclass
class Index(Expr):
    obj: Expr
    index: Expr
    span: Span = field(default_factory=Span.zero)


@dataclass
class Call(Expr):
    callee: Expr
    args: list = field(default_factory=list)
    span: Span = field(default_factory=Span.zero)


@dataclass
class Unary(Expr):
    op: str
    operand: Expr = None
    span: Span = field(default_factory=Span.zero)


@dataclass
class Binary(Expr):
    op: str
    left: Expr = None
    right: Expr = None
    span: Span = field(default_factory=Span.zero)


@dataclass
class Assign(Expr):
    target: Expr = None
    value: Expr = None
    span: Span = field(default_factory=Span.zero)


@dataclass
class ObjectLit(Expr):
    # list of (key, Expr)
    entries: list = field(default_factory=list)
    span: Span = field(default_factory=Span.zero)


@dataclass
class ArrayLit(Expr):
    elements: list = field(default_factory=list)
    span: Span = field(default_factory=Span.zero)


@dataclass
class FuncExpr(Expr):
    params: list = field(default_factory=list)
    body: list = field(default_factory=list)  # statements
    span: Span = field(default_factory=Span.zero)


# --- Statements -----------------------------------------------------------


@dataclass
class Stmt:
    pass


@dataclass
class VarDecl(Stmt):
    name: str
    init: Expr | None = None
    annotations: list = field(default_factory=list)
    span: Span = field(default_factory=Span.zero)


@dataclass
class FunctionDecl(Stmt):
    name: str
    params: list = field(default_factory=list)
    body: list = field(default_factory=list)
    annotations: list = field(default_factory=list)
    span: Span = field(default_factory=Span.zero)


@dataclass
class ExprStmt(Stmt):
    expr: Expr = None
    annotations: list = field(default_factory=list)
    span: Span = field(default_factory=Span.zero)


@dataclass
class IfStmt(Stmt):
    cond: Expr = None
    then: list = field(default_factory=list)
    orelse: list = field(default_factory=list)
    annotations: list = field(default_factory=list)
    span: Span = field(default_factory=Span.zero)


@dataclass
class WhileStmt(Stmt):
    cond: Expr = None
    body: list = field(default_factory=list)
    annotations: list = field(default_factory=list)
    span: Span = field(default_factory=Span.zero)


@dataclass
class ForStmt(Stmt):
    init: Stmt | None = None  # VarDecl or ExprStmt, semicolon-less
    cond: Expr | None = None
    update: Expr | None = None
    body: list = field(default_factory=list)
    annotations: list = field(default_factory=list)
    span: Span = field(default_factory=Span.zero)


@dataclass
class ReturnStmt(Stmt):
    value: Expr | None = None
    annotations: list = field(default_factory=list)
    span: Span = field(default_factory=Span.zero)


@dataclass
class BlockStmt(Stmt):
    body: list = field(default_factory=list)
    annotations: list = field(default_factory=list)
    span: Span = field(default_factory=Span.zero)


@dataclass
class UiBlock(Stmt):
    """A @ui block: stored verbatim, excluded from dependence analysis."""

    text: str = ""
    annotations: list = field(default_factory=list)
    span: Span = field(default_factory=Span.zero)


# --- Program structure ----------------------------------------------------


@dataclass
class SliceDecl:
    name: str
    body: list = field(default_factory=list)
    fixed_tier: str | None = None  # "client" | "server" | None
    annotations: list = field(default_factory=list)
    span: Span = field(default_factory=Span.zero)


@dataclass
class Declaration:
    """A variable or function declaration together with its owner."""

    name: str
    kind: str  # "var" | "function"
    owner: str  # slice name or model.SHARED
    node: Stmt = None


@dataclass
class CallSiteInfo:
    """A call expression with its resolution result."""

    site_id: int
    node: Call = None
    stmt: Stmt = None  # enclosing statement (annotation carrier)
    owner: str = ""  # slice name or model.SHARED
    enclosing_function: str | None = None
    callee_name: str | None = None  # plain-identifier callee, if any
    resolved: FunctionDecl | None = None
    resolved_owner: str | None = None
    unresolved_reason: str | None = None  # None | "undeclared" | "ambiguous" | "non-identifier"
    span: Span = field(default_factory=Span.zero)


@dataclass
class SourceProgram:
    slices: list = field(default_factory=list)  # SliceDecl, source order
    shared_top_level: list = field(default_factory=list)  # Stmt
    declarations: list = field(default_factory=list)  # Declaration
    call_sites: list = field(default_factory=list)  # CallSiteInfo
    warnings: list = field(default_factory=list)  # resolution diagnostics (str)
    filename: str = "<input>"

    def slice_names(self):
        return [s.name for s in self.slices]

    def slice(self, name: str) -> SliceDecl:
        for s in self.slices:
            if s.name == name:
                return s
        raise KeyError(name)

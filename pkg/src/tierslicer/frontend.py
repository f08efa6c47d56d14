"""TierJS frontend: lexer, recursive-descent parser, emitter, call resolution.

Annotations are written inside ``/* ... */`` comments whose stripped text
starts with ``@``; one comment may carry several annotations (e.g. a
``@config`` line followed by ``@slice``).  An annotation comment attaches to
the syntactically next block, declaration or statement.  Plain block comments
and ``//`` line comments are ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import (
    DuplicateSliceNameError,
    MalformedConfigError,
    ParseError,
    UnknownAnnotationKindError,
)
from .model import SHARED
from .syntax import (
    ANNOTATION_NAMES,
    Annotation,
    AnnotationKind,
    ArrayLit,
    Assign,
    Binary,
    BlockStmt,
    BoolLit,
    Call,
    CallSiteInfo,
    Declaration,
    ExprStmt,
    ForStmt,
    FuncExpr,
    FunctionDecl,
    Ident,
    IfStmt,
    Index,
    Member,
    NullLit,
    NumberLit,
    ObjectLit,
    ReturnStmt,
    SliceDecl,
    SourceProgram,
    Span,
    Stmt,
    StringLit,
    ThisExpr,
    UiBlock,
    Unary,
    VarDecl,
    WhileStmt,
)

KEYWORDS = {"var", "function", "if", "else", "while", "for", "return", "true", "false", "null", "this"}

_PUNCT = [
    "==", "!=", "<=", ">=", "&&", "||",
    "{", "}", "(", ")", "[", "]", ";", ",", ".", ":",
    "=", "<", ">", "+", "-", "*", "/", "%", "!",
]


@dataclass
class Token:
    kind: str  # IDENT NUMBER STRING PUNCT ANNOT UI_BLOCK EOF
    value: str
    span: Span


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    last_nl = text.rfind("\n", 0, pos)
    return line, pos - last_nl


class Lexer:
    def __init__(self, text: str, filename: str = "<input>"):
        self.text = text
        self.filename = filename

    def error(self, msg: str, pos: int):
        line, col = _line_col(self.text, pos)
        raise ParseError(msg, line, col, self.filename)

    def _span(self, start: int, end: int) -> Span:
        line, col = _line_col(self.text, start)
        return Span(start, end, line, col)

    def tokens(self) -> list[Token]:
        text, out, i, n = self.text, [], 0, len(self.text)
        while i < n:
            c = text[i]
            if c.isspace():
                i += 1
                continue
            if text.startswith("//", i):
                j = text.find("\n", i)
                i = n if j < 0 else j + 1
                continue
            if text.startswith("/*", i):
                j = text.find("*/", i + 2)
                if j < 0:
                    self.error("unterminated comment", i)
                inner = text[i + 2 : j]
                end = j + 2
                if inner.strip().startswith("@"):
                    tok = Token("ANNOT", inner, self._span(i, end))
                    out.append(tok)
                    if self._is_ui_comment(inner):
                        end = self._capture_ui_block(out, end)
                i = end
                continue
            if c.isdigit():
                j = i
                while j < n and (text[j].isdigit() or text[j] == "."):
                    j += 1
                out.append(Token("NUMBER", text[i:j], self._span(i, j)))
                i = j
                continue
            if c.isalpha() or c == "_" or c == "$":
                j = i
                while j < n and (text[j].isalnum() or text[j] in "_$"):
                    j += 1
                out.append(Token("IDENT", text[i:j], self._span(i, j)))
                i = j
                continue
            if c in "'\"":
                j = i + 1
                while j < n and text[j] != c:
                    j += 2 if text[j] == "\\" else 1
                if j >= n:
                    self.error("unterminated string", i)
                out.append(Token("STRING", text[i + 1 : j], self._span(i, j + 1)))
                i = j + 1
                continue
            for p in _PUNCT:
                if text.startswith(p, i):
                    out.append(Token("PUNCT", p, self._span(i, i + len(p))))
                    i += len(p)
                    break
            else:
                self.error(f"unexpected character {c!r}", i)
        out.append(Token("EOF", "", self._span(n, n)))
        return out

    @staticmethod
    def _is_ui_comment(inner: str) -> bool:
        return any(m.group(1) == "ui" for m in re.finditer(r"@(\w+)", inner))

    def _capture_ui_block(self, out: list[Token], pos: int) -> int:
        """Capture the block after a @ui comment verbatim (HTML-ish content)."""
        text, n = self.text, len(self.text)
        i = pos
        while i < n and text[i].isspace():
            i += 1
        if i >= n or text[i] != "{":
            self.error("expected '{' after @ui annotation", i)
        depth, j = 0, i
        while j < n:
            if text[j] == "{":
                depth += 1
            elif text[j] == "}":
                depth -= 1
                if depth == 0:
                    break
            j += 1
        if depth != 0:
            self.error("unterminated @ui block", i)
        out.append(Token("UI_BLOCK", text[i + 1 : j], self._span(i, j + 1)))
        return j + 1


# --- Annotation comment parsing ------------------------------------------

_TIERS = {"client", "server"}


def parse_annotation_comment(inner: str, span: Span, filename: str = "<input>") -> list[Annotation]:
    """Split one annotation comment into its individual annotations."""
    out = []
    matches = list(re.finditer(r"@(\w+)", inner))
    for idx, m in enumerate(matches):
        name = m.group(1)
        kind = ANNOTATION_NAMES.get(name)
        if kind is None:
            raise UnknownAnnotationKindError(f"unknown annotation @{name}")
        arg_text = inner[m.end() : matches[idx + 1].start() if idx + 1 < len(matches) else len(inner)]
        if kind is AnnotationKind.CONFIG:
            args = _parse_config_args(arg_text)
        elif kind is AnnotationKind.SLICE:
            idents = re.findall(r"[\w$]+", arg_text)
            if len(idents) != 1:
                raise ParseError("@slice takes exactly one name", span.line, span.col, filename)
            args = idents
        else:
            args = re.findall(r"[\w$]+", arg_text)
        out.append(Annotation(kind, args, span))
    return out


def _parse_config_args(arg_text: str) -> list:
    pairs = []
    for chunk in arg_text.split(","):
        if not chunk.strip():
            continue
        parts = chunk.split(":")
        if len(parts) != 2:
            raise MalformedConfigError(f"malformed @config entry {chunk.strip()!r}")
        name, tier = parts[0].strip(), parts[1].strip()
        if not re.fullmatch(r"[\w$]+", name or "") or tier not in _TIERS:
            raise MalformedConfigError(f"malformed @config entry {chunk.strip()!r}")
        pairs.append((name, tier))
    if not pairs:
        raise MalformedConfigError("@config carries no name : tier pairs")
    return pairs


# --- Parser ---------------------------------------------------------------


class Parser:
    def __init__(self, tokens: list[Token], filename: str = "<input>"):
        self.toks = tokens
        self.pos = 0
        self.filename = filename

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self) -> Token:
        tok = self.toks[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.span.line, tok.span.col, self.filename)

    def at_punct(self, value: str) -> bool:
        t = self.peek()
        return t.kind == "PUNCT" and t.value == value

    def at_keyword(self, word: str) -> bool:
        t = self.peek()
        return t.kind == "IDENT" and t.value == word

    def expect(self, value: str) -> Token:
        t = self.peek()
        if t.kind == "PUNCT" and t.value == value:
            return self.next()
        if t.kind == "IDENT" and t.value == value:
            return self.next()
        self.error(f"expected {value!r}, found {t.value or t.kind!r}")

    # -- program -----------------------------------------------------------

    def parse_program(self) -> tuple[list, list]:
        """Returns (slices, shared statements); @config resolution happens later."""
        slices, shared = [], []
        while self.peek().kind != "EOF":
            annotations = self._pending_annotations()
            kinds = {a.kind for a in annotations}
            if AnnotationKind.SLICE in kinds:
                slices.append(self._parse_slice(annotations))
            else:
                shared.append(self._parse_statement(annotations))
        return slices, shared

    def _pending_annotations(self) -> list:
        annotations = []
        while self.peek().kind == "ANNOT":
            tok = self.next()
            annotations.extend(parse_annotation_comment(tok.value, tok.span, self.filename))
        return annotations

    def _parse_slice(self, annotations: list) -> SliceDecl:
        name = next(a.args[0] for a in annotations if a.kind is AnnotationKind.SLICE)
        start = self.peek().span
        if self.peek().kind == "UI_BLOCK":
            tok = self.next()
            body = [UiBlock(text=tok.value, span=tok.span)]
            return SliceDecl(name, body, None, annotations, start)
        self.expect("{")
        body = self._statements_until_brace()
        return SliceDecl(name, body, None, annotations, start)

    def _statements_until_brace(self) -> list:
        body = []
        while not self.at_punct("}"):
            if self.peek().kind == "EOF":
                self.error("expected '}'")
            annotations = self._pending_annotations()
            body.append(self._parse_statement(annotations))
        self.expect("}")
        return body

    # -- statements --------------------------------------------------------

    def _parse_statement(self, annotations: list | None = None) -> Stmt:
        if annotations is None:
            annotations = self._pending_annotations()
        tok = self.peek()
        if tok.kind == "UI_BLOCK":
            self.next()
            return UiBlock(text=tok.value, annotations=annotations, span=tok.span)
        if {a.kind for a in annotations} & {AnnotationKind.UI}:
            self.error("@ui annotation must precede a block")
        if self.at_keyword("var"):
            return self._parse_var_decl(annotations)
        if self.at_keyword("function"):
            return self._parse_function_decl(annotations)
        if self.at_keyword("if"):
            return self._parse_if(annotations)
        if self.at_keyword("while"):
            return self._parse_while(annotations)
        if self.at_keyword("for"):
            return self._parse_for(annotations)
        if self.at_keyword("return"):
            return self._parse_return(annotations)
        if self.at_punct("{"):
            span = self.next().span
            return BlockStmt(self._statements_until_brace(), annotations, span)
        span = tok.span
        expr = self.parse_expr()
        self.expect(";")
        return ExprStmt(expr, annotations, span)

    def _parse_var_decl(self, annotations: list) -> VarDecl:
        span = self.expect("var").span
        name = self._ident_name()
        init = None
        if self.at_punct("="):
            self.next()
            init = self.parse_expr()
        self.expect(";")
        return VarDecl(name, init, annotations, span)

    def _parse_function_decl(self, annotations: list) -> FunctionDecl:
        span = self.expect("function").span
        name = self._ident_name()
        params = self._parse_params()
        self.expect("{")
        body = self._statements_until_brace()
        return FunctionDecl(name, params, body, annotations, span)

    def _parse_params(self) -> list:
        self.expect("(")
        params = []
        while not self.at_punct(")"):
            params.append(self._ident_name())
            if not self.at_punct(")"):
                self.expect(",")
        self.expect(")")
        return params

    def _ident_name(self) -> str:
        tok = self.peek()
        if tok.kind != "IDENT" or tok.value in KEYWORDS:
            self.error("expected identifier")
        return self.next().value

    def _parse_if(self, annotations: list) -> IfStmt:
        span = self.expect("if").span
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        then = self._branch_body()
        orelse = []
        if self.at_keyword("else"):
            self.next()
            if self.at_keyword("if"):
                orelse = [self._parse_if([])]
            else:
                orelse = self._branch_body()
        return IfStmt(cond, then, orelse, annotations, span)

    def _branch_body(self) -> list:
        if self.at_punct("{"):
            self.next()
            return self._statements_until_brace()
        return [self._parse_statement()]

    def _parse_while(self, annotations: list) -> WhileStmt:
        span = self.expect("while").span
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        return WhileStmt(cond, self._branch_body(), annotations, span)

    def _parse_for(self, annotations: list) -> ForStmt:
        span = self.expect("for").span
        self.expect("(")
        init = None
        if not self.at_punct(";"):
            if self.at_keyword("var"):
                # reuse var parsing; it consumes the ';'
                init = self._parse_var_decl([])
            else:
                init = ExprStmt(self.parse_expr(), [], self.peek().span)
                self.expect(";")
        else:
            self.next()
        cond = None if self.at_punct(";") else self.parse_expr()
        self.expect(";")
        update = None if self.at_punct(")") else self.parse_expr()
        self.expect(")")
        return ForStmt(init, cond, update, self._branch_body(), annotations, span)

    def _parse_return(self, annotations: list) -> ReturnStmt:
        span = self.expect("return").span
        value = None
        if not self.at_punct(";"):
            value = self.parse_expr()
        self.expect(";")
        return ReturnStmt(value, annotations, span)

    # -- expressions -------------------------------------------------------

    _BIN_LEVELS = [
        ["||"],
        ["&&"],
        ["==", "!="],
        ["<", ">", "<=", ">="],
        ["+", "-"],
        ["*", "/", "%"],
    ]

    def parse_expr(self):
        return self._parse_assign()

    def _parse_assign(self):
        left = self._parse_binary(0)
        if self.at_punct("="):
            span = self.next().span
            if not isinstance(left, (Ident, Member, Index)):
                self.error("invalid assignment target")
            return Assign(left, self._parse_assign(), span)
        return left

    def _parse_binary(self, level: int):
        if level >= len(self._BIN_LEVELS):
            return self._parse_unary()
        left = self._parse_binary(level + 1)
        while self.peek().kind == "PUNCT" and self.peek().value in self._BIN_LEVELS[level]:
            op = self.next()
            right = self._parse_binary(level + 1)
            left = Binary(op.value, left, right, op.span)
        return left

    def _parse_unary(self):
        tok = self.peek()
        if tok.kind == "PUNCT" and tok.value in ("!", "-"):
            self.next()
            return Unary(tok.value, self._parse_unary(), tok.span)
        return self._parse_postfix()

    def _parse_postfix(self):
        expr = self._parse_primary()
        while True:
            if self.at_punct("."):
                span = self.next().span
                expr = Member(expr, self._ident_name(), span)
            elif self.at_punct("["):
                span = self.next().span
                index = self.parse_expr()
                self.expect("]")
                expr = Index(expr, index, span)
            elif self.at_punct("("):
                span = self.next().span
                args = []
                while not self.at_punct(")"):
                    args.append(self.parse_expr())
                    if not self.at_punct(")"):
                        self.expect(",")
                self.expect(")")
                expr = Call(expr, args, span)
            else:
                return expr

    def _parse_primary(self):
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.next()
            return NumberLit(float(tok.value), tok.span)
        if tok.kind == "STRING":
            self.next()
            return StringLit(tok.value, tok.span)
        if tok.kind == "IDENT":
            if tok.value in ("true", "false"):
                self.next()
                return BoolLit(tok.value == "true", tok.span)
            if tok.value == "null":
                self.next()
                return NullLit(tok.span)
            if tok.value == "this":
                self.next()
                return ThisExpr(tok.span)
            if tok.value == "function":
                return self._parse_func_expr()
            if tok.value in KEYWORDS:
                self.error(f"unexpected keyword {tok.value!r}")
            self.next()
            return Ident(tok.value, tok.span)
        if self.at_punct("("):
            self.next()
            expr = self.parse_expr()
            self.expect(")")
            return expr
        if self.at_punct("["):
            span = self.next().span
            elements = []
            while not self.at_punct("]"):
                elements.append(self.parse_expr())
                if not self.at_punct("]"):
                    self.expect(",")
            self.expect("]")
            return ArrayLit(elements, span)
        if self.at_punct("{"):
            return self._parse_object()
        self.error(f"unexpected token {tok.value or tok.kind!r}")

    def _parse_func_expr(self) -> FuncExpr:
        span = self.expect("function").span
        params = self._parse_params()
        self.expect("{")
        body = self._statements_until_brace()
        return FuncExpr(params, body, span)

    def _parse_object(self) -> ObjectLit:
        span = self.expect("{").span
        entries = []
        while not self.at_punct("}"):
            tok = self.peek()
            if tok.kind not in ("IDENT", "STRING"):
                self.error("expected object key")
            self.next()
            self.expect(":")
            entries.append((tok.value, self.parse_expr()))
            if not self.at_punct("}"):
                self.expect(",")
        self.expect("}")
        return ObjectLit(entries, span)


def parse(source_text: str, filename: str = "<input>") -> SourceProgram:
    """Parse TierJS text into a SourceProgram (calls not yet resolved)."""
    tokens = Lexer(source_text, filename).tokens()
    parser = Parser(tokens, filename)
    slices, shared = parser.parse_program()
    if parser.peek().kind != "EOF":
        parser.error("unexpected trailing input")

    program = SourceProgram(slices=slices, shared_top_level=shared, filename=filename)
    _apply_configs(program)
    _collect_declarations(program)
    return program


def _apply_configs(program: SourceProgram) -> None:
    names = set()
    for s in program.slices:
        if s.name in names:
            raise DuplicateSliceNameError(f"duplicate slice name {s.name!r}")
        names.add(s.name)
    assigned: dict[str, str] = {}
    for node, anns in iter_annotated_nodes(program):
        for a in anns:
            if a.kind is not AnnotationKind.CONFIG:
                continue
            for name, tier in a.args:
                if name not in names:
                    raise MalformedConfigError(f"@config names undeclared slice {name!r}")
                if assigned.get(name, tier) != tier:
                    raise MalformedConfigError(f"conflicting tiers for slice {name!r}")
                assigned[name] = tier
    for s in program.slices:
        s.fixed_tier = assigned.get(s.name)


def iter_annotated_nodes(program: SourceProgram):
    """Yields (node, annotations) pairs over slices and all statements."""
    for s in program.slices:
        yield s, s.annotations
        yield from _iter_stmt_annotations(s.body)
    yield from _iter_stmt_annotations(program.shared_top_level)


def _iter_stmt_annotations(stmts):
    for st in stmts:
        yield st, getattr(st, "annotations", [])
        for child in _child_statements(st):
            yield from _iter_stmt_annotations([child])


def _child_statements(st: Stmt):
    if isinstance(st, FunctionDecl):
        return list(st.body)
    if isinstance(st, BlockStmt):
        return list(st.body)
    if isinstance(st, IfStmt):
        return list(st.then) + list(st.orelse)
    if isinstance(st, WhileStmt):
        return list(st.body)
    if isinstance(st, ForStmt):
        out = [st.init] if st.init is not None else []
        return out + list(st.body)
    return []


def _collect_declarations(program: SourceProgram) -> None:
    decls = []

    def walk(stmts, owner):
        for st in stmts:
            if isinstance(st, VarDecl):
                decls.append(Declaration(st.name, "var", owner, st))
            elif isinstance(st, FunctionDecl):
                decls.append(Declaration(st.name, "function", owner, st))
            walk(_child_statements(st), owner)

    for s in program.slices:
        walk(s.body, s.name)
    walk(program.shared_top_level, SHARED)
    program.declarations = decls


# --- Call resolution ------------------------------------------------------


def _iter_calls_in_expr(expr):
    """Yields every Call node in an expression tree, outermost first."""
    if expr is None:
        return
    if isinstance(expr, Call):
        yield expr
        yield from _iter_calls_in_expr(expr.callee)
        for a in expr.args:
            yield from _iter_calls_in_expr(a)
    elif isinstance(expr, (Member,)):
        yield from _iter_calls_in_expr(expr.obj)
    elif isinstance(expr, Index):
        yield from _iter_calls_in_expr(expr.obj)
        yield from _iter_calls_in_expr(expr.index)
    elif isinstance(expr, (Unary,)):
        yield from _iter_calls_in_expr(expr.operand)
    elif isinstance(expr, Binary):
        yield from _iter_calls_in_expr(expr.left)
        yield from _iter_calls_in_expr(expr.right)
    elif isinstance(expr, Assign):
        yield from _iter_calls_in_expr(expr.target)
        yield from _iter_calls_in_expr(expr.value)
    elif isinstance(expr, ObjectLit):
        for _, v in expr.entries:
            yield from _iter_calls_in_expr(v)
    elif isinstance(expr, ArrayLit):
        for e in expr.elements:
            yield from _iter_calls_in_expr(e)
    # FuncExpr bodies are handled at the statement level so the enclosing
    # function attribution stays correct.


def _stmt_expressions(st: Stmt):
    if isinstance(st, VarDecl):
        return [st.init]
    if isinstance(st, ExprStmt):
        return [st.expr]
    if isinstance(st, IfStmt):
        return [st.cond]
    if isinstance(st, WhileStmt):
        return [st.cond]
    if isinstance(st, ForStmt):
        return [st.cond, st.update]
    if isinstance(st, ReturnStmt):
        return [st.value]
    return []


def _iter_func_exprs(expr):
    if expr is None:
        return
    if isinstance(expr, FuncExpr):
        yield expr
    elif isinstance(expr, Call):
        yield from _iter_func_exprs(expr.callee)
        for a in expr.args:
            yield from _iter_func_exprs(a)
    elif isinstance(expr, Member):
        yield from _iter_func_exprs(expr.obj)
    elif isinstance(expr, Index):
        yield from _iter_func_exprs(expr.obj)
        yield from _iter_func_exprs(expr.index)
    elif isinstance(expr, Unary):
        yield from _iter_func_exprs(expr.operand)
    elif isinstance(expr, Binary):
        yield from _iter_func_exprs(expr.left)
        yield from _iter_func_exprs(expr.right)
    elif isinstance(expr, Assign):
        yield from _iter_func_exprs(expr.target)
        yield from _iter_func_exprs(expr.value)
    elif isinstance(expr, ObjectLit):
        for _, v in expr.entries:
            yield from _iter_func_exprs(v)
    elif isinstance(expr, ArrayLit):
        for e in expr.elements:
            yield from _iter_func_exprs(e)


def resolve_calls(program: SourceProgram) -> SourceProgram:
    """Resolve plain-identifier calls against function declarations.

    A call resolves when its callee identifier names exactly one function
    declaration program-wide.  Ambiguous and undeclared callees stay
    unresolved and produce warnings; member/index callees are treated as
    external library calls and excluded silently.
    """
    table: dict[str, list[Declaration]] = {}
    for d in program.declarations:
        if d.kind == "function":
            table.setdefault(d.name, []).append(d)

    sites: list[CallSiteInfo] = []
    warnings: list[str] = []

    def visit_stmts(stmts, owner, func_name):
        for st in stmts:
            if isinstance(st, UiBlock):
                continue
            inner = func_name
            if isinstance(st, FunctionDecl):
                inner = st.name
            for expr in _stmt_expressions(st):
                for call in _iter_calls_in_expr(expr):
                    sites.append(_make_site(call, st, owner, inner if not isinstance(st, FunctionDecl) else func_name))
                for fx in _iter_func_exprs(expr):
                    visit_stmts(fx.body, owner, inner)
            visit_stmts(_child_statements(st), owner, inner)

    def _make_site(call, st, owner, func_name):
        info = CallSiteInfo(
            site_id=len(sites),
            node=call,
            stmt=st,
            owner=owner,
            enclosing_function=func_name,
            span=call.span,
        )
        if isinstance(call.callee, Ident):
            name = call.callee.name
            info.callee_name = name
            decls = table.get(name, [])
            if len(decls) == 1:
                info.resolved = decls[0].node
                info.resolved_owner = decls[0].owner
            elif not decls:
                info.unresolved_reason = "undeclared"
                warnings.append(_warn(program, call.span, f"unresolved call to '{name}' (no declaration)"))
            else:
                info.unresolved_reason = "ambiguous"
                warnings.append(_warn(program, call.span, f"unresolved call to '{name}' (ambiguous: {len(decls)} declarations)"))
        else:
            info.unresolved_reason = "non-identifier"
        return info

    for s in program.slices:
        visit_stmts(s.body, s.name, None)
    visit_stmts(program.shared_top_level, SHARED, None)

    program.call_sites = sites
    program.warnings = warnings
    return program


def _warn(program: SourceProgram, span: Span, msg: str) -> str:
    return f"{program.filename}:{span.line}:{span.col}: {msg}"


# --- Emitter --------------------------------------------------------------

_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, ">": 4, "<=": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}


def _fmt_annotation(a: Annotation) -> str:
    if a.kind is AnnotationKind.CONFIG:
        args = ", ".join(f"{n} : {t}" for n, t in a.args)
        return f"@config {args}"
    if a.args:
        return f"@{a.kind.value} " + " ".join(a.args)
    return f"@{a.kind.value}"


def _emit_annotations(anns: list, indent: str) -> str:
    if not anns:
        return ""
    inner = ("\n" + indent + "   ").join(_fmt_annotation(a) for a in anns)
    return f"{indent}/* {inner} */\n"


def emit_expr(e, prec: int = 0) -> str:
    if isinstance(e, NumberLit):
        v = e.value
        return str(int(v)) if v == int(v) else repr(v)
    if isinstance(e, StringLit):
        return '"' + e.value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, NullLit):
        return "null"
    if isinstance(e, ThisExpr):
        return "this"
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, Member):
        return f"{emit_expr(e.obj, 8)}.{e.attr}"
    if isinstance(e, Index):
        return f"{emit_expr(e.obj, 8)}[{emit_expr(e.index)}]"
    if isinstance(e, Call):
        args = ", ".join(emit_expr(a) for a in e.args)
        return f"{emit_expr(e.callee, 8)}({args})"
    if isinstance(e, Unary):
        return f"{e.op}{emit_expr(e.operand, 7)}"
    if isinstance(e, Binary):
        p = _PREC[e.op]
        text = f"{emit_expr(e.left, p)} {e.op} {emit_expr(e.right, p + 1)}"
        return f"({text})" if p < prec else text
    if isinstance(e, Assign):
        text = f"{emit_expr(e.target, 8)} = {emit_expr(e.value)}"
        return f"({text})" if prec > 0 else text
    if isinstance(e, ObjectLit):
        entries = ", ".join(f"{k}: {emit_expr(v)}" for k, v in e.entries)
        return "{" + entries + "}"
    if isinstance(e, ArrayLit):
        return "[" + ", ".join(emit_expr(x) for x in e.elements) + "]"
    if isinstance(e, FuncExpr):
        body = emit_block(e.body, "  ")
        return f"function ({', '.join(e.params)}) {{\n{body}}}"
    raise TypeError(f"cannot emit {type(e).__name__}")


def emit_stmt(st: Stmt, indent: str) -> str:
    out = _emit_annotations(getattr(st, "annotations", []), indent)
    if isinstance(st, VarDecl):
        init = f" = {emit_expr(st.init)}" if st.init is not None else ""
        return out + f"{indent}var {st.name}{init};\n"
    if isinstance(st, FunctionDecl):
        body = emit_block(st.body, indent + "  ")
        return out + f"{indent}function {st.name}({', '.join(st.params)}) {{\n{body}{indent}}}\n"
    if isinstance(st, ExprStmt):
        return out + f"{indent}{emit_expr(st.expr)};\n"
    if isinstance(st, IfStmt):
        text = out + f"{indent}if ({emit_expr(st.cond)}) {{\n{emit_block(st.then, indent + '  ')}{indent}}}"
        if st.orelse:
            text += f" else {{\n{emit_block(st.orelse, indent + '  ')}{indent}}}"
        return text + "\n"
    if isinstance(st, WhileStmt):
        return out + f"{indent}while ({emit_expr(st.cond)}) {{\n{emit_block(st.body, indent + '  ')}{indent}}}\n"
    if isinstance(st, ForStmt):
        if isinstance(st.init, VarDecl):
            init = f"var {st.init.name} = {emit_expr(st.init.init)}" if st.init.init is not None else f"var {st.init.name}"
        elif isinstance(st.init, ExprStmt):
            init = emit_expr(st.init.expr)
        else:
            init = ""
        cond = emit_expr(st.cond) if st.cond is not None else ""
        update = emit_expr(st.update) if st.update is not None else ""
        return out + f"{indent}for ({init}; {cond}; {update}) {{\n{emit_block(st.body, indent + '  ')}{indent}}}\n"
    if isinstance(st, ReturnStmt):
        value = f" {emit_expr(st.value)}" if st.value is not None else ""
        return out + f"{indent}return{value};\n"
    if isinstance(st, BlockStmt):
        return out + f"{indent}{{\n{emit_block(st.body, indent + '  ')}{indent}}}\n"
    if isinstance(st, UiBlock):
        return out + f"{indent}{{{st.text}}}\n"
    raise TypeError(f"cannot emit {type(st).__name__}")


def emit_block(stmts, indent: str) -> str:
    return "".join(emit_stmt(s, indent) for s in stmts)


def emit(program: SourceProgram) -> str:
    parts = []
    for s in program.slices:
        parts.append(_emit_annotations(s.annotations, ""))
        if len(s.body) == 1 and isinstance(s.body[0], UiBlock):
            parts.append("{" + s.body[0].text + "}\n")
        else:
            parts.append("{\n" + emit_block(s.body, "  ") + "}\n")
    for st in program.shared_top_level:
        parts.append(emit_stmt(st, ""))
    return "".join(parts)


# --- Structural comparison (round-trip testing, advice targeting) ---------


def structure(program: SourceProgram):
    """Span-free structural summary: annotation kinds, slice names, shapes."""

    def ann(anns):
        out = []
        for a in anns:
            args = tuple(tuple(x) if isinstance(x, tuple) else x for x in a.args)
            out.append((a.kind.value, args))
        return tuple(out)

    def expr(e):
        if e is None:
            return None
        if isinstance(e, NumberLit):
            return ("num", e.value)
        if isinstance(e, StringLit):
            return ("str", e.value)
        if isinstance(e, BoolLit):
            return ("bool", e.value)
        if isinstance(e, NullLit):
            return ("null",)
        if isinstance(e, ThisExpr):
            return ("this",)
        if isinstance(e, Ident):
            return ("id", e.name)
        if isinstance(e, Member):
            return ("member", expr(e.obj), e.attr)
        if isinstance(e, Index):
            return ("index", expr(e.obj), expr(e.index))
        if isinstance(e, Call):
            return ("call", expr(e.callee), tuple(expr(a) for a in e.args))
        if isinstance(e, Unary):
            return ("unary", e.op, expr(e.operand))
        if isinstance(e, Binary):
            return ("binary", e.op, expr(e.left), expr(e.right))
        if isinstance(e, Assign):
            return ("assign", expr(e.target), expr(e.value))
        if isinstance(e, ObjectLit):
            return ("object", tuple((k, expr(v)) for k, v in e.entries))
        if isinstance(e, ArrayLit):
            return ("array", tuple(expr(x) for x in e.elements))
        if isinstance(e, FuncExpr):
            return ("funcexpr", tuple(e.params), block(e.body))
        raise TypeError(type(e).__name__)

    def stmt(st):
        a = ann(getattr(st, "annotations", []))
        if isinstance(st, VarDecl):
            return ("var", st.name, expr(st.init), a)
        if isinstance(st, FunctionDecl):
            return ("function", st.name, tuple(st.params), block(st.body), a)
        if isinstance(st, ExprStmt):
            return ("expr", expr(st.expr), a)
        if isinstance(st, IfStmt):
            return ("if", expr(st.cond), block(st.then), block(st.orelse), a)
        if isinstance(st, WhileStmt):
            return ("while", expr(st.cond), block(st.body), a)
        if isinstance(st, ForStmt):
            init = stmt(st.init) if st.init is not None else None
            return ("for", init, expr(st.cond), expr(st.update), block(st.body), a)
        if isinstance(st, ReturnStmt):
            return ("return", expr(st.value), a)
        if isinstance(st, BlockStmt):
            return ("block", block(st.body), a)
        if isinstance(st, UiBlock):
            return ("ui", st.text.strip(), a)
        raise TypeError(type(st).__name__)

    def block(stmts):
        return tuple(stmt(s) for s in stmts)

    return (
        tuple((s.name, s.fixed_tier, block(s.body), ann(s.annotations)) for s in program.slices),
        block(program.shared_top_level),
    )


def count_statements(program: SourceProgram) -> tuple[dict, int]:
    """Per-slice statement counts plus the shared count (all nesting levels)."""

    def count(stmts) -> int:
        total = 0
        for st in stmts:
            total += 1
            total += count(_child_statements(st))
        return total

    per_slice = {s.name: count(s.body) for s in program.slices}
    return per_slice, count(program.shared_top_level)

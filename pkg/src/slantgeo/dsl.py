"""Immersion description language: parser, AST and jet evaluation.

A description names the ambient dimension, the parameters of the map, real
constants, per-coordinate expressions and optional tangent distributions::

    ambient 5
    params u v z
    const theta = pi/6
    domain u in [-1, 1]
    map { x1 = u; y1 = v*cos(theta); z = z }
    distribution D { (1, 0, 0), (0, 1, 0) }

Statements are separated by newlines or semicolons, ``#`` starts a comment.
Ambient coordinates follow the interleaved ordering (x1, y1, ..., xn, yn, z);
coordinates that are never assigned are identically zero.  Each parameter
defaults to the domain [-1, 1].

Expressions use ``+ - * / ^`` (``^`` binds tightest and is right
associative), unary minus, parentheses, and the unary functions sin, cos,
tan, exp, log, sqrt.  Constants are folded at parse time, so ``pi/4`` is a
legal constant initialiser but constants may not depend on parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .jets import FUNCTION_TABLE, Jet2, JetDomainError


class SpecError(ValueError):
    """Parse or validation failure, with position and expectation info."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None,
                 expected: tuple[str, ...] = ()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = expected
        where = f"line {line}, col {col}: " if line is not None else ""
        hint = f" (expected {' or '.join(expected)})" if expected else ""
        super().__init__(f"{where}{message}{hint}")


# ---------------------------------------------------------------------------
# Expression AST


@dataclass(frozen=True)
class ExprAst:
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Num(ExprAst):
    value: float = 0.0


@dataclass(frozen=True)
class Param(ExprAst):
    name: str = ""
    index: int = -1


@dataclass(frozen=True)
class Const(ExprAst):
    name: str = ""


@dataclass(frozen=True)
class Unary(ExprAst):
    op: str = "-"
    operand: ExprAst = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Binary(ExprAst):
    op: str = "+"
    left: ExprAst = None  # type: ignore[assignment]
    right: ExprAst = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Call(ExprAst):
    func: str = "sin"
    arg: ExprAst = None  # type: ignore[assignment]


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def format_expr(ast: ExprAst, parent_prec: int = 0) -> str:
    """Render an expression with minimal parentheses; reparsing the result
    yields a structurally identical tree."""
    if isinstance(ast, Num):
        text, prec = repr(ast.value), 5
        if ast.value < 0:
            prec = _PREC["neg"]
    elif isinstance(ast, (Param, Const)):
        text, prec = ast.name, 5
    elif isinstance(ast, Call):
        text, prec = f"{ast.func}({format_expr(ast.arg)})", 5
    elif isinstance(ast, Unary):
        text, prec = f"-{format_expr(ast.operand, _PREC['neg'])}", _PREC["neg"]
    elif isinstance(ast, Binary):
        prec = _PREC[ast.op]
        # left-assoc for + - * /, right-assoc for ^
        lp = prec if ast.op != "^" else prec + 1
        rp = prec + 1 if ast.op != "^" else prec
        text = f"{format_expr(ast.left, lp)}{ast.op}{format_expr(ast.right, rp)}"
    else:
        raise TypeError(f"unknown AST node {ast!r}")
    if prec < parent_prec:
        return f"({text})"
    return text


def _expr_text(ast: ExprAst, source: str | None) -> str:
    if source is not None and ast.span is not None:
        return source[ast.span[0]:ast.span[1]]
    return format_expr(ast)


def eval_jet2(ast: ExprAst, point: np.ndarray, constants: dict[str, float],
              _source: str | None = None) -> Jet2:
    """Evaluate an expression to second order at a parameter point.

    Domain failures raise :class:`JetDomainError` annotated with the
    offending subexpression.
    """
    point = np.asarray(point, dtype=float)
    m = point.shape[0]

    def rec(node: ExprAst) -> Jet2:
        try:
            if isinstance(node, Num):
                return Jet2.constant(node.value, m)
            if isinstance(node, Param):
                return Jet2.variable(point[node.index], node.index, m)
            if isinstance(node, Const):
                return Jet2.constant(constants[node.name], m)
            if isinstance(node, Unary):
                return -rec(node.operand)
            if isinstance(node, Binary):
                a, b = rec(node.left), rec(node.right)
                if node.op == "+":
                    return a + b
                if node.op == "-":
                    return a - b
                if node.op == "*":
                    return a * b
                if node.op == "/":
                    return a / b
                if node.op == "^":
                    return a**b
                raise TypeError(f"unknown operator {node.op!r}")
            if isinstance(node, Call):
                return FUNCTION_TABLE[node.func][0](rec(node.arg))
        except JetDomainError as err:
            if err.culprit is None:
                err.culprit = _expr_text(node, _source)
            raise
        raise TypeError(f"unknown AST node {node!r}")

    return rec(ast)


def eval_value(ast: ExprAst, point: np.ndarray, constants: dict[str, float]) -> float:
    """Plain recursive evaluation; equals the jet value slot exactly."""
    if isinstance(ast, Num):
        return ast.value
    if isinstance(ast, Param):
        return float(point[ast.index])
    if isinstance(ast, Const):
        return constants[ast.name]
    if isinstance(ast, Unary):
        return -eval_value(ast.operand, point, constants)
    if isinstance(ast, Binary):
        a = eval_value(ast.left, point, constants)
        b = eval_value(ast.right, point, constants)
        if ast.op == "+":
            return a + b
        if ast.op == "-":
            return a - b
        if ast.op == "*":
            return a * b
        if ast.op == "/":
            if b == 0.0:
                raise JetDomainError("division by zero")
            return a / b
        if ast.op == "^":
            if a == 0.0 and b <= 0.0:
                raise JetDomainError("zero base with non-positive exponent")
            if a < 0.0 and b != round(b):
                raise JetDomainError("negative base with non-integer exponent")
            return a**b
    if isinstance(ast, Call):
        return FUNCTION_TABLE[ast.func][1](eval_value(ast.arg, point, constants))
    raise TypeError(f"unknown AST node {ast!r}")


# ---------------------------------------------------------------------------
# Immersion specification


BUILTIN_CONSTANTS = {"pi": math.pi, "e": math.e}
DEFAULT_DOMAIN = (-1.0, 1.0)


@dataclass(frozen=True)
class ImmersionSpec:
    """A parsed map from an m-dimensional parameter box into R^(2n+1)."""

    n: int
    params: tuple[str, ...]
    constants: dict[str, float]
    coords: tuple[ExprAst | None, ...]     # length 2n+1, interleaved order, None == 0
    domain: tuple[tuple[float, float], ...]
    distributions: dict[str, tuple[tuple[ExprAst, ...], ...]]

    @property
    def m(self) -> int:
        return len(self.params)

    @property
    def ambient_dim(self) -> int:
        return 2 * self.n + 1

    def coordinate_name(self, slot: int) -> str:
        if slot == 2 * self.n:
            return "z"
        i, rem = divmod(slot, 2)
        return f"{'x' if rem == 0 else 'y'}{i + 1}"

    def with_distributions(self, dists: dict[str, tuple[tuple[ExprAst, ...], ...]]) -> "ImmersionSpec":
        return replace(self, distributions=dists)


def coordinate_slot(name: str, n: int) -> int:
    """Map a coordinate name (x3, y1, z) to its interleaved index."""
    if name == "z":
        return 2 * n
    kind, digits = name[0], name[1:]
    if kind in ("x", "y") and digits.isdigit():
        i = int(digits)
        if 1 <= i <= n:
            return 2 * (i - 1) + (0 if kind == "x" else 1)
    raise KeyError(name)


# ---------------------------------------------------------------------------
# Tokenizer


_SYMBOLS = "+-*/^(){}[],=;"


@dataclass(frozen=True)
class _Token:
    kind: str      # NUMBER IDENT SYMBOL NEWLINE EOF
    text: str
    pos: int
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    toks: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == "\n":
            toks.append(_Token("NEWLINE", "\n", i, line, col))
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c in _SYMBOLS:
            toks.append(_Token("SYMBOL", c, i, line, col))
            i += 1
            col += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    seen_dot = True
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    while k < n and text[k].isdigit():
                        k += 1
                    j = k
            toks.append(_Token("NUMBER", text[i:j], i, line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(_Token("IDENT", text[i:j], i, line, col))
            col += j - i
            i = j
            continue
        raise SpecError(f"unexpected character {c!r}", line, col)
    toks.append(_Token("EOF", "", n, line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    # token plumbing

    def peek(self, skip_newlines: bool = False) -> _Token:
        j = self.i
        if skip_newlines:
            while self.toks[j].kind == "NEWLINE":
                j += 1
        return self.toks[j]

    def next(self, skip_newlines: bool = False) -> _Token:
        if skip_newlines:
            while self.toks[self.i].kind == "NEWLINE":
                self.i += 1
        tok = self.toks[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def fail(self, tok: _Token, message: str, expected: tuple[str, ...] = ()) -> SpecError:
        return SpecError(message, tok.line, tok.col, expected)

    def expect_symbol(self, sym: str, skip_newlines: bool = False) -> _Token:
        tok = self.next(skip_newlines)
        if tok.kind != "SYMBOL" or tok.text != sym:
            raise self.fail(tok, f"found {tok.text!r}", expected=(repr(sym),))
        return tok

    def expect_ident(self, skip_newlines: bool = False) -> _Token:
        tok = self.next(skip_newlines)
        if tok.kind != "IDENT":
            raise self.fail(tok, f"found {tok.text or 'end of input'!r}", expected=("identifier",))
        return tok

    def skip_separators(self) -> None:
        while True:
            tok = self.peek()
            if tok.kind == "NEWLINE" or (tok.kind == "SYMBOL" and tok.text == ";"):
                self.i += 1
            else:
                return

    # expressions (precedence: ^ above unary minus above * / above + -)

    def parse_expr(self) -> ExprAst:
        start = self.peek(skip_newlines=True).pos
        node = self.parse_term()
        while True:
            tok = self.peek()
            if tok.kind == "SYMBOL" and tok.text in "+-":
                self.i += 1
                rhs = self.parse_term()
                node = Binary(span=(start, self._end()), op=tok.text, left=node, right=rhs)
            else:
                return node

    def parse_term(self) -> ExprAst:
        start = self.peek(skip_newlines=True).pos
        node = self.parse_unary()
        while True:
            tok = self.peek()
            if tok.kind == "SYMBOL" and tok.text in "*/":
                self.i += 1
                rhs = self.parse_unary()
                node = Binary(span=(start, self._end()), op=tok.text, left=node, right=rhs)
            else:
                return node

    def parse_unary(self) -> ExprAst:
        tok = self.peek(skip_newlines=True)
        if tok.kind == "SYMBOL" and tok.text == "-":
            self.next(skip_newlines=True)
            operand = self.parse_unary()
            return Unary(span=(tok.pos, self._end()), op="-", operand=operand)
        return self.parse_power()

    def parse_power(self) -> ExprAst:
        start = self.peek(skip_newlines=True).pos
        base = self.parse_atom()
        tok = self.peek()
        if tok.kind == "SYMBOL" and tok.text == "^":
            self.i += 1
            expo = self.parse_unary()  # right associative, admits -k exponents
            return Binary(span=(start, self._end()), op="^", left=base, right=expo)
        return base

    def parse_atom(self) -> ExprAst:
        tok = self.next(skip_newlines=True)
        if tok.kind == "NUMBER":
            return Num(span=(tok.pos, tok.pos + len(tok.text)), value=float(tok.text))
        if tok.kind == "IDENT":
            if tok.text in FUNCTION_TABLE:
                self.expect_symbol("(")
                arg = self.parse_expr()
                close = self.expect_symbol(")", skip_newlines=True)
                return Call(span=(tok.pos, close.pos + 1), func=tok.text, arg=arg)
            # unresolved name; becomes Param or Const after declarations are known
            return Const(span=(tok.pos, tok.pos + len(tok.text)), name=tok.text)
        if tok.kind == "SYMBOL" and tok.text == "(":
            inner = self.parse_expr()
            self.expect_symbol(")", skip_newlines=True)
            return inner
        raise self.fail(tok, f"found {tok.text or 'end of input'!r}",
                        expected=("number", "identifier", "'('"))

    def _end(self) -> int:
        return self.toks[self.i - 1].pos + len(self.toks[self.i - 1].text)


def _resolve(ast: ExprAst, params: dict[str, int], constants: dict[str, float],
             where: str) -> ExprAst:
    """Rewrite bare names into Param/Const nodes, rejecting unknown ones."""
    if isinstance(ast, Num):
        return ast
    if isinstance(ast, Const):
        if ast.name in params:
            return Param(span=ast.span, name=ast.name, index=params[ast.name])
        if ast.name in constants:
            return ast
        raise SpecError(f"unknown identifier {ast.name!r} in {where}")
    if isinstance(ast, Unary):
        return Unary(span=ast.span, op=ast.op,
                     operand=_resolve(ast.operand, params, constants, where))
    if isinstance(ast, Binary):
        return Binary(span=ast.span, op=ast.op,
                      left=_resolve(ast.left, params, constants, where),
                      right=_resolve(ast.right, params, constants, where))
    if isinstance(ast, Call):
        return Call(span=ast.span, func=ast.func,
                    arg=_resolve(ast.arg, params, constants, where))
    raise TypeError(f"unknown AST node {ast!r}")


def eval_constant_expr(text: str, constants: dict[str, float] | None = None) -> float:
    """Fold a closed-form constant expression such as ``pi/6`` or ``1/sqrt(2)``.

    Used for ``const`` statements and for CLI parameter overrides.
    """
    parser = _Parser(text)
    ast = parser.parse_expr()
    tail = parser.peek(skip_newlines=True)
    if tail.kind != "EOF":
        raise parser.fail(tail, f"trailing input {tail.text!r} after constant expression")
    table = dict(BUILTIN_CONSTANTS)
    if constants:
        table.update(constants)
    resolved = _resolve(ast, {}, table, "constant expression")
    try:
        return eval_value(resolved, np.zeros(0), table)
    except JetDomainError as err:
        raise SpecError(f"constant expression is not evaluable: {err}") from err


def parse_spec(text: str) -> ImmersionSpec:
    """Parse an immersion description into a fully resolved ImmersionSpec."""
    p = _Parser(text)

    head = p.next(skip_newlines=True)
    if head.kind != "IDENT" or head.text != "ambient":
        raise p.fail(head, f"found {head.text or 'end of input'!r}", expected=("'ambient'",))
    dim_tok = p.next()
    if dim_tok.kind != "NUMBER" or not dim_tok.text.isdigit():
        raise p.fail(dim_tok, f"found {dim_tok.text!r}", expected=("integer ambient dimension",))
    dim = int(dim_tok.text)
    if dim % 2 == 0:
        raise p.fail(dim_tok, "ambient dimension must be odd")
    if dim < 3:
        raise p.fail(dim_tok, "ambient dimension must be at least 3")
    n = (dim - 1) // 2

    params: list[str] = []
    constants: dict[str, float] = dict(BUILTIN_CONSTANTS)
    user_constants: dict[str, float] = {}
    raw_coords: dict[int, tuple[ExprAst, _Token]] = {}
    raw_domain: dict[str, tuple[float, float]] = {}
    raw_dists: dict[str, list[list[ExprAst]]] = {}

    def check_fresh(tok: _Token) -> None:
        if tok.text in FUNCTION_TABLE or tok.text in BUILTIN_CONSTANTS:
            raise p.fail(tok, f"{tok.text!r} is a reserved name")
        if tok.text in params or tok.text in user_constants:
            raise p.fail(tok, f"{tok.text!r} is already declared")

    while True:
        p.skip_separators()
        tok = p.peek()
        if tok.kind == "EOF":
            break
        if tok.kind != "IDENT":
            raise p.fail(tok, f"found {tok.text!r}",
                         expected=("'params'", "'const'", "'domain'", "'map'", "'distribution'"))
        p.next()
        if tok.text == "params":
            while p.peek().kind == "IDENT":
                name = p.next()
                check_fresh(name)
                params.append(name.text)
            if not params:
                raise p.fail(p.peek(), "empty params statement")
        elif tok.text == "const":
            name = p.expect_ident()
            check_fresh(name)
            p.expect_symbol("=")
            ast = p.parse_expr()
            resolved = _resolve(ast, {}, constants, f"const {name.text}")
            try:
                value = eval_value(resolved, np.zeros(0), constants)
            except JetDomainError as err:
                raise SpecError(f"const {name.text} is not evaluable: {err}",
                                name.line, name.col) from err
            constants[name.text] = value
            user_constants[name.text] = value
        elif tok.text == "domain":
            name = p.expect_ident()
            kw = p.expect_ident()
            if kw.text != "in":
                raise p.fail(kw, f"found {kw.text!r}", expected=("'in'",))
            p.expect_symbol("[")
            lo = _fold_bound(p, constants)
            p.expect_symbol(",", skip_newlines=True)
            hi = _fold_bound(p, constants)
            p.expect_symbol("]", skip_newlines=True)
            if not lo < hi:
                raise p.fail(name, f"empty domain [{lo}, {hi}] for {name.text!r}")
            raw_domain[name.text] = (lo, hi)
        elif tok.text == "map":
            p.expect_symbol("{", skip_newlines=True)
            while True:
                p.skip_separators()
                inner = p.peek()
                if inner.kind == "SYMBOL" and inner.text == "}":
                    p.next()
                    break
                if inner.kind != "IDENT":
                    raise p.fail(inner, f"found {inner.text!r}",
                                 expected=("coordinate name", "'}'"))
                p.next()
                try:
                    slot = coordinate_slot(inner.text, n)
                except KeyError:
                    raise p.fail(inner, f"{inner.text!r} is not a coordinate of R^{dim}") from None
                if slot in raw_coords:
                    raise p.fail(inner, f"coordinate {inner.text} assigned twice")
                p.expect_symbol("=")
                raw_coords[slot] = (p.parse_expr(), inner)
        elif tok.text == "distribution":
            name = p.expect_ident()
            if name.text in raw_dists:
                raise p.fail(name, f"distribution {name.text!r} declared twice")
            p.expect_symbol("{", skip_newlines=True)
            vectors: list[list[ExprAst]] = []
            while True:
                opener = p.next(skip_newlines=True)
                if opener.kind != "SYMBOL" or opener.text != "(":
                    raise p.fail(opener, f"found {opener.text!r}", expected=("'('",))
                comps = [p.parse_expr()]
                while True:
                    sep = p.next(skip_newlines=True)
                    if sep.kind == "SYMBOL" and sep.text == ",":
                        comps.append(p.parse_expr())
                    elif sep.kind == "SYMBOL" and sep.text == ")":
                        break
                    else:
                        raise p.fail(sep, f"found {sep.text!r}", expected=("','", "')'"))
                vectors.append(comps)
                nxt = p.next(skip_newlines=True)
                if nxt.kind == "SYMBOL" and nxt.text == ",":
                    continue
                if nxt.kind == "SYMBOL" and nxt.text == "}":
                    break
                raise p.fail(nxt, f"found {nxt.text!r}", expected=("','", "'}'"))
            raw_dists[name.text] = vectors
        else:
            raise p.fail(tok, f"unknown statement {tok.text!r}",
                         expected=("'params'", "'const'", "'domain'", "'map'", "'distribution'"))

    # completion checks and resolution
    if not params:
        raise SpecError("no parameters declared")
    m = len(params)
    if m > dim:
        raise SpecError(f"{m} parameters exceed the ambient dimension {dim}")
    param_index = {name: i for i, name in enumerate(params)}

    for name in raw_domain:
        if name not in param_index:
            raise SpecError(f"domain given for unknown parameter {name!r}")
    domain = tuple(raw_domain.get(name, DEFAULT_DOMAIN) for name in params)

    coords: list[ExprAst | None] = [None] * dim
    for slot, (ast, where) in raw_coords.items():
        coords[slot] = _resolve(ast, param_index, constants,
                                f"coordinate {where.text}")

    dists: dict[str, tuple[tuple[ExprAst, ...], ...]] = {}
    for name, vectors in raw_dists.items():
        out = []
        for k, comps in enumerate(vectors):
            if len(comps) != m:
                raise SpecError(
                    f"distribution {name!r} vector {k + 1} has {len(comps)} components, "
                    f"expected {m}")
            out.append(tuple(_resolve(c, param_index, constants,
                                      f"distribution {name}") for c in comps))
        dists[name] = tuple(out)

    return ImmersionSpec(n=n, params=tuple(params), constants=dict(constants),
                         coords=tuple(coords), domain=domain, distributions=dists)


def _fold_bound(p: _Parser, constants: dict[str, float]) -> float:
    ast = p.parse_expr()
    resolved = _resolve(ast, {}, constants, "domain bound")
    try:
        return eval_value(resolved, np.zeros(0), constants)
    except JetDomainError as err:
        raise SpecError(f"domain bound is not evaluable: {err}") from err


def format_spec(spec: ImmersionSpec) -> str:
    """Pretty-print in canonical form; parse_spec(format_spec(s)) == s."""
    lines = [f"ambient {spec.ambient_dim}"]
    lines.append("params " + " ".join(spec.params))
    for name, value in spec.constants.items():
        if name in BUILTIN_CONSTANTS:
            continue
        lines.append(f"const {name} = {value!r}")
    for name, (lo, hi) in zip(spec.params, spec.domain):
        if (lo, hi) != DEFAULT_DOMAIN:
            lines.append(f"domain {name} in [{lo!r}, {hi!r}]")
    lines.append("map {")
    for slot, ast in enumerate(spec.coords):
        if ast is not None:
            lines.append(f"  {spec.coordinate_name(slot)} = {format_expr(ast)}")
    lines.append("}")
    for name, vectors in spec.distributions.items():
        lines.append(f"distribution {name} {{")
        for k, comps in enumerate(vectors):
            sep = "," if k + 1 < len(vectors) else ""
            lines.append("  (" + ", ".join(format_expr(c) for c in comps) + ")" + sep)
        lines.append("}")
    return "\n".join(lines) + "\n"

"""Lexer, parser, and desugaring for the concrete program syntax.

The surface syntax follows the language's listings: `:=` assignments,
`;` sequencing, `x1' = e1, ..., xn' = en for e` differential blocks,
`if b then p else q`, `while b do { p }` (`do` optional), `//` line
comments.  Sugar forms are expanded here so the rest of the package only
ever sees core constructs:

  wait e                      all-zero-derivative block
  x++ / x--                   x := x + 1 / x := x - 1
  x := unif(a,b)              x := unif(0,1) ; x := (b - a) * x + a
  x := exp(l)                 x := unif(0,1) ; x := -ln(x) / l
  x := normal(m,s)            Box-Muller with helper draws x1, x2
  bernoulli(r, p, q)          x_f := unif(0,1) ; if x_f <= r then p else q

In an assignment right-hand side, `unif(a,b)`, `exp(l)` and `normal(m,s)`
are sampler references (so `x := exp(2) + sqrt(3)` draws from the shifted
exponential); everywhere else `exp` is the scalar exponential primitive.

Variables are declared implicitly: the variable table collects every
name the program mentions, in first-occurrence order.  Names that are
only ever read keep whatever value the initial store gives them.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .syntax import (
    And,
    Assign,
    BoolLit,
    Call,
    DiffBlock,
    If,
    Leq,
    Lit,
    Or,
    Program,
    Sample,
    Seq,
    Var,
    VarTable,
    While,
)

KEYWORDS = {"if", "then", "else", "while", "do", "for", "wait", "tt", "ff", "bernoulli"}
SAMPLERS = {"unif": 2, "exp": 1, "normal": 2}
FUNCTIONS = {"ln": 1, "sqrt": 1, "sin": 1, "cos": 1, "exp": 1}
RESERVED = KEYWORDS | set(SAMPLERS) | set(FUNCTIONS) | {"pi"}


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.message = message


# --- lexer ------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""(?P<ws>[ \t\r\n]+)
      | (?P<comment>//[^\n]*)
      | (?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
      | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<op>:=|<=|&&|\|\||\+\+|--|[;,(){}'=+\-*/])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "number", "ident", "eof", or the operator text itself
    text: str
    line: int
    col: int
    value: float = 0.0


def tokenize(source: str):
    tokens = []
    line, col, pos = 1, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, col)
        text = m.group()
        kind = m.lastgroup
        if kind in ("ws", "comment"):
            pass
        elif kind == "number":
            value = float(text)
            if not math.isfinite(value):
                raise ParseError(f"number literal {text!r} overflows", line, col)
            tokens.append(Token("number", text, line, col, value))
        elif kind == "ident":
            tokens.append(Token("ident", text, line, col))
        else:
            tokens.append(Token(text, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


# --- raw (pre-resolution) trees ----------------------------------------------

@dataclass(frozen=True)
class RLit:
    value: float


@dataclass(frozen=True)
class RVar:
    name: str
    line: int
    col: int


@dataclass(frozen=True)
class RCall:
    op: str
    args: tuple


@dataclass(frozen=True)
class RSampler:
    kind: str
    args: tuple
    line: int
    col: int


@dataclass(frozen=True)
class RAssign:
    name: str
    rhs: object
    line: int
    col: int


@dataclass(frozen=True)
class RSample:
    name: str
    line: int
    col: int


@dataclass(frozen=True)
class RDiff:
    pairs: tuple  # ((name, expr, line, col), ...)
    duration: object
    line: int
    col: int


@dataclass(frozen=True)
class RIf:
    cond: object
    then_branch: tuple
    else_branch: tuple


@dataclass(frozen=True)
class RWhile:
    cond: object
    body: tuple


@dataclass(frozen=True)
class RBernoulli:
    ratio: object
    then_branch: tuple
    else_branch: tuple
    line: int
    col: int


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self, k=0) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at(self, kind: str, k=0) -> bool:
        return self.peek(k).kind == kind

    def at_ident(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and tok.text == text

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            self.error(f"expected {kind!r}, found {tok.text or 'end of input'!r}")
        return self.advance()

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise ParseError(message, tok.line, tok.col)

    # -- programs -------------------------------------------------------------

    def parse_program(self) -> tuple:
        stmts = [self.parse_statement()]
        while self.at(";"):
            self.advance()
            if self.at("}") or self.at("eof"):
                break  # trailing separator
            stmts.append(self.parse_statement())
        return tuple(stmts)

    def parse_block(self) -> tuple:
        self.expect("{")
        body = self.parse_program()
        self.expect("}")
        return body

    def parse_statement(self, in_bernoulli: bool = False):
        tok = self.peek()
        if tok.kind == "{":
            return self.parse_block()
        if tok.kind != "ident":
            self.error(f"expected a statement, found {tok.text or 'end of input'!r}")
        word = tok.text
        if word == "if":
            self.advance()
            cond = self.parse_bool()
            if not self.at_ident("then"):
                self.error("expected 'then'")
            self.advance()
            then_branch = self._branch(self.parse_statement(in_bernoulli))
            if not self.at_ident("else"):
                self.error("expected 'else'")
            self.advance()
            else_branch = self._branch(self.parse_statement(in_bernoulli))
            return RIf(cond, then_branch, else_branch)
        if word == "while":
            self.advance()
            cond = self.parse_bool()
            if self.at_ident("do"):
                self.advance()
            return RWhile(cond, self.parse_block())
        if word == "wait":
            self.advance()
            return RDiff((), self.parse_expr(), tok.line, tok.col)
        if word == "bernoulli":
            self.advance()
            self.expect("(")
            ratio = self.parse_expr()
            self.expect(",")
            left = self._branch(self._bernoulli_branch())
            self.expect(",")
            right = self._branch(self._bernoulli_branch())
            self.expect(")")
            return RBernoulli(ratio, left, right, tok.line, tok.col)
        if word in RESERVED:
            self.error(f"{word!r} is reserved and cannot start a statement")
        # ident-led: diff list, assignment, or increment sugar
        if self.at("'", 1):
            return self.parse_diff()
        self.advance()
        nxt = self.peek()
        if nxt.kind == "++" or nxt.kind == "--":
            self.advance()
            op = "+" if nxt.kind == "++" else "-"
            return RAssign(word, RCall(op, (RVar(word, tok.line, tok.col), RLit(1.0))), tok.line, tok.col)
        if nxt.kind == ":=":
            self.advance()
            rhs = self.parse_expr(allow_samplers=True)
            return RAssign(word, rhs, tok.line, tok.col)
        self.error(f"expected ':=', '++', '--', or \"'\" after {word!r}", nxt)

    def _bernoulli_branch(self):
        tok = self.peek()
        if tok.kind == "ident" and tok.text not in RESERVED and self.at("'", 1):
            self.error("wrap differential blocks in braces inside bernoulli(...)")
        return self.parse_statement(in_bernoulli=True)

    @staticmethod
    def _branch(stmt) -> tuple:
        return stmt if isinstance(stmt, tuple) else (stmt,)

    def parse_diff(self) -> RDiff:
        first = self.peek()
        pairs = []
        seen = set()
        while True:
            name_tok = self.expect("ident")
            if name_tok.text in RESERVED:
                self.error(f"{name_tok.text!r} is reserved", name_tok)
            if name_tok.text in seen:
                self.error(f"duplicate derivative for {name_tok.text!r}", name_tok)
            seen.add(name_tok.text)
            self.expect("'")
            self.expect("=")
            pairs.append((name_tok.text, self.parse_expr(), name_tok.line, name_tok.col))
            if self.at(","):
                self.advance()
                continue
            break
        if not self.at_ident("for"):
            self.error("expected 'for' after derivative list")
        self.advance()
        return RDiff(tuple(pairs), self.parse_expr(), first.line, first.col)

    # -- boolean conditions -----------------------------------------------------

    def parse_bool(self):
        b = self.parse_band()
        while self.at("||"):
            self.advance()
            b = ("or", b, self.parse_band())
        return b

    def parse_band(self):
        b = self.parse_bprim()
        while self.at("&&"):
            self.advance()
            b = ("and", b, self.parse_bprim())
        return b

    def parse_bprim(self):
        tok = self.peek()
        if tok.kind == "ident" and tok.text in ("tt", "ff"):
            self.advance()
            return ("lit", tok.text == "tt")
        save = self.i
        try:
            lhs = self.parse_expr()
            if self.at("<="):
                self.advance()
                return ("leq", lhs, self.parse_expr())
        except ParseError:
            pass
        self.i = save
        if self.at("("):
            self.advance()
            b = self.parse_bool()
            self.expect(")")
            return b
        self.error("expected a boolean condition")

    # -- expressions --------------------------------------------------------------

    def parse_expr(self, allow_samplers: bool = False):
        e = self.parse_term(allow_samplers)
        while self.at("+") or self.at("-"):
            op = self.advance().kind
            e = RCall(op, (e, self.parse_term(allow_samplers)))
        return e

    def parse_term(self, allow_samplers: bool):
        e = self.parse_factor(allow_samplers)
        while self.at("*") or self.at("/"):
            op = self.advance().kind
            e = RCall(op, (e, self.parse_factor(allow_samplers)))
        return e

    def parse_factor(self, allow_samplers: bool):
        if self.at("-"):
            self.advance()
            inner = self.parse_factor(allow_samplers)
            if isinstance(inner, RLit):
                return RLit(-inner.value)
            return RCall("neg", (inner,))
        return self.parse_primary(allow_samplers)

    def parse_primary(self, allow_samplers: bool):
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return RLit(tok.value)
        if tok.kind == "(":
            self.advance()
            e = self.parse_expr(allow_samplers)
            self.expect(")")
            return e
        if tok.kind != "ident":
            self.error(f"expected an expression, found {tok.text or 'end of input'!r}")
        name = tok.text
        if name == "pi":
            self.advance()
            return RLit(math.pi)
        if name in SAMPLERS and self.at("(", 1):
            if not allow_samplers:
                if name in FUNCTIONS:  # plain exp(e) outside an assignment RHS
                    return self.parse_call(name)
                self.error(
                    f"sampler {name!r} is only allowed in an assignment right-hand side"
                )
            self.advance()
            self.expect("(")
            args = [self.parse_expr()]
            while self.at(","):
                self.advance()
                args.append(self.parse_expr())
            self.expect(")")
            if len(args) != SAMPLERS[name]:
                self.error(f"{name!r} expects {SAMPLERS[name]} arguments", tok)
            return RSampler(name, tuple(args), tok.line, tok.col)
        if name in FUNCTIONS:
            return self.parse_call(name)
        if name in RESERVED:
            self.error(f"{name!r} is reserved and not a variable")
        if self.at("(", 1):
            self.error(f"unknown function {name!r}")
        self.advance()
        return RVar(name, tok.line, tok.col)

    def parse_call(self, name: str):
        tok = self.advance()
        self.expect("(")
        args = [self.parse_expr()]
        while self.at(","):
            self.advance()
            args.append(self.parse_expr())
        self.expect(")")
        if len(args) != FUNCTIONS[name]:
            self.error(f"{name!r} expects {FUNCTIONS[name]} argument(s)", tok)
        return RCall(name, tuple(args))


# --- desugaring ---------------------------------------------------------------


def _collect_samplers(e, out):
    if isinstance(e, RSampler):
        for a in e.args:
            _collect_samplers(a, out)  # nested samplers are rejected below
        out.append(e)
    elif isinstance(e, RCall):
        for a in e.args:
            _collect_samplers(a, out)


def _mentions(e, name: str) -> bool:
    if isinstance(e, RVar):
        return e.name == name
    if isinstance(e, (RCall, RSampler)):
        return any(_mentions(a, name) for a in e.args)
    return False


def _substitute(e, target: RSampler, replacement):
    if e is target:
        return replacement
    if isinstance(e, RCall):
        return RCall(e.op, tuple(_substitute(a, target, replacement) for a in e.args))
    return e


def _neg(e):
    return RLit(-e.value) if isinstance(e, RLit) else RCall("neg", (e,))


class _Desugarer:
    def __init__(self, used_names):
        self.used = set(used_names)

    def fresh(self, base: str) -> str:
        name = base
        k = 2
        while name in self.used or name in RESERVED:
            name = f"{base}_{k}"
            k += 1
        self.used.add(name)
        return name

    def block(self, stmts) -> tuple:
        out = []
        for stmt in stmts:
            self.statement(stmt, out)
        return tuple(out)

    def statement(self, stmt, out: list):
        if isinstance(stmt, tuple):  # braced block: inline its statements
            out.extend(self.block(stmt))
        elif isinstance(stmt, RAssign):
            self.assign(stmt, out)
        elif isinstance(stmt, RBernoulli):
            guard = self.fresh("x_f")
            out.append(RSample(guard, stmt.line, stmt.col))
            out.append(
                RIf(
                    ("leq", RVar(guard, stmt.line, stmt.col), stmt.ratio),
                    self.block(stmt.then_branch),
                    self.block(stmt.else_branch),
                )
            )
        elif isinstance(stmt, RIf):
            out.append(RIf(stmt.cond, self.block(stmt.then_branch), self.block(stmt.else_branch)))
        elif isinstance(stmt, RWhile):
            out.append(RWhile(stmt.cond, self.block(stmt.body)))
        else:
            out.append(stmt)

    def assign(self, stmt: RAssign, out: list):
        samplers: list[RSampler] = []
        _collect_samplers(stmt.rhs, samplers)
        if not samplers:
            out.append(stmt)
            return
        for s in samplers:
            for a in s.args:
                if any(isinstance(x, RSampler) for x in _flatten(a)):
                    raise ParseError("sampler arguments must be sampler-free", s.line, s.col)
        rhs = stmt.rhs
        if isinstance(rhs, RSampler) and not any(_mentions(a, stmt.name) for a in rhs.args):
            self.expand_sampler(rhs, stmt.name, stmt.line, stmt.col, out)
            return
        if len(samplers) == 1 and not _mentions(rhs, stmt.name):
            # one draw, target unused elsewhere: reuse the target as scratch
            s = samplers[0]
            self.expand_sampler(s, stmt.name, stmt.line, stmt.col, out)
            new_rhs = _substitute(rhs, s, RVar(stmt.name, stmt.line, stmt.col))
            out.append(RAssign(stmt.name, new_rhs, stmt.line, stmt.col))
            return
        new_rhs = rhs
        for s in samplers:
            helper = self.fresh(f"{stmt.name}_s")
            self.expand_sampler(s, helper, s.line, s.col, out)
            new_rhs = _substitute(new_rhs, s, RVar(helper, s.line, s.col))
        out.append(RAssign(stmt.name, new_rhs, stmt.line, stmt.col))

    def expand_sampler(self, s: RSampler, target: str, line: int, col: int, out: list):
        var = RVar(target, line, col)
        if s.kind == "unif":
            a, b = s.args
            if isinstance(a, RLit) and isinstance(b, RLit):
                if a.value > b.value:
                    raise ParseError("unif(a,b) needs a <= b", s.line, s.col)
                if a.value == 0.0 and b.value == 1.0:
                    out.append(RSample(target, line, col))
                    return
            out.append(RSample(target, line, col))
            out.append(
                RAssign(target, RCall("+", (RCall("*", (RCall("-", (b, a)), var)), a)), line, col)
            )
        elif s.kind == "exp":
            (lam,) = s.args
            out.append(RSample(target, line, col))
            out.append(
                RAssign(target, RCall("/", (_neg(RCall("ln", (var,))), lam)), line, col)
            )
        elif s.kind == "normal":
            m, sd = s.args
            h1 = self.fresh("x1")
            h2 = self.fresh("x2")
            out.append(RSample(h1, line, col))
            out.append(RSample(h2, line, col))
            box_muller = RCall(
                "*",
                (
                    RCall("sqrt", (RCall("*", (RLit(-2.0), RCall("ln", (RVar(h1, line, col),)))),)),
                    RCall("cos", (RCall("*", (RCall("*", (RLit(2.0), RLit(math.pi))), RVar(h2, line, col))),)),
                ),
            )
            out.append(RAssign(target, box_muller, line, col))
            if not (isinstance(m, RLit) and m.value == 0.0 and isinstance(sd, RLit) and sd.value == 1.0):
                out.append(RAssign(target, RCall("+", (m, RCall("*", (sd, var)))), line, col))
        else:  # pragma: no cover - parser only produces the three kinds
            raise AssertionError(s.kind)


def _flatten(e):
    yield e
    if isinstance(e, (RCall, RSampler)):
        for a in e.args:
            yield from _flatten(a)


# --- variable-table inference and resolution -----------------------------------


def _collect_variables(stmts, order: list, seen: set):
    """Every name occurring as a target or a read, in first-occurrence order."""

    def add(name):
        if name not in seen:
            seen.add(name)
            order.append(name)

    def expr(e):
        for node in _flatten(e):
            if isinstance(node, RVar):
                add(node.name)

    def boolean(b):
        tag = b[0]
        if tag == "leq":
            expr(b[1])
            expr(b[2])
        elif tag in ("and", "or"):
            boolean(b[1])
            boolean(b[2])

    for stmt in stmts:
        if isinstance(stmt, RAssign):
            add(stmt.name)
            expr(stmt.rhs)
        elif isinstance(stmt, RSample):
            add(stmt.name)
        elif isinstance(stmt, RDiff):
            for name, e, _, _ in stmt.pairs:
                add(name)
                expr(e)
            expr(stmt.duration)
        elif isinstance(stmt, RIf):
            boolean(stmt.cond)
            _collect_variables(stmt.then_branch, order, seen)
            _collect_variables(stmt.else_branch, order, seen)
        elif isinstance(stmt, RWhile):
            boolean(stmt.cond)
            _collect_variables(stmt.body, order, seen)


def _collect_names(stmts, out: set):
    def expr_names(e):
        for node in _flatten(e):
            if isinstance(node, RVar):
                out.add(node.name)

    for stmt in stmts:
        if isinstance(stmt, tuple):
            _collect_names(stmt, out)
        elif isinstance(stmt, RAssign):
            out.add(stmt.name)
            expr_names(stmt.rhs)
        elif isinstance(stmt, RSample):
            out.add(stmt.name)
        elif isinstance(stmt, RDiff):
            for name, e, _, _ in stmt.pairs:
                out.add(name)
                expr_names(e)
            expr_names(stmt.duration)
        elif isinstance(stmt, RBernoulli):
            expr_names(stmt.ratio)
            _collect_names(stmt.then_branch, out)
            _collect_names(stmt.else_branch, out)
        elif isinstance(stmt, RIf):
            _bool_names(stmt.cond, expr_names)
            _collect_names(stmt.then_branch, out)
            _collect_names(stmt.else_branch, out)
        elif isinstance(stmt, RWhile):
            _bool_names(stmt.cond, expr_names)
            _collect_names(stmt.body, out)


def _bool_names(b, expr_names):
    tag = b[0]
    if tag == "leq":
        expr_names(b[1])
        expr_names(b[2])
    elif tag in ("and", "or"):
        _bool_names(b[1], expr_names)
        _bool_names(b[2], expr_names)


class _Resolver:
    def __init__(self, table: VarTable):
        self.table = table

    def expr(self, e):
        if isinstance(e, RLit):
            return Lit(e.value)
        if isinstance(e, RVar):
            if e.name not in self.table:
                raise ParseError(f"unknown variable {e.name!r}", e.line, e.col)
            return Var(self.table.index(e.name), e.name)
        return Call(e.op, tuple(self.expr(a) for a in e.args))

    def boolean(self, b):
        tag = b[0]
        if tag == "lit":
            return BoolLit(b[1])
        if tag == "leq":
            return Leq(self.expr(b[1]), self.expr(b[2]))
        cls = And if tag == "and" else Or
        return cls(self.boolean(b[1]), self.boolean(b[2]))

    def var(self, name: str, line: int, col: int) -> Var:
        return Var(self.table.index(name), name)

    def block(self, stmts) -> Program:
        resolved = [self.statement(s) for s in stmts]
        program = resolved[-1]
        for stmt in reversed(resolved[:-1]):
            program = Seq(stmt, program)
        return program

    def statement(self, stmt) -> Program:
        if isinstance(stmt, RAssign):
            return Assign(self.var(stmt.name, stmt.line, stmt.col), self.expr(stmt.rhs))
        if isinstance(stmt, RSample):
            return Sample(self.var(stmt.name, stmt.line, stmt.col))
        if isinstance(stmt, RDiff):
            derivs = [Lit(0.0)] * len(self.table)
            for name, e, _, _ in stmt.pairs:
                derivs[self.table.index(name)] = self.expr(e)
            return DiffBlock(tuple(derivs), self.expr(stmt.duration))
        if isinstance(stmt, RIf):
            return If(self.boolean(stmt.cond), self.block(stmt.then_branch), self.block(stmt.else_branch))
        if isinstance(stmt, RWhile):
            return While(self.boolean(stmt.cond), self.block(stmt.body))
        raise AssertionError(stmt)


def parse_program(source: str) -> tuple[Program, VarTable]:
    """Parse source text into a desugared, right-associated program.

    Returns the AST and the inferred variable table.  Raises ParseError
    with a line:col position on any lexical, syntactic, arity, or unknown
    variable problem.
    """
    tokens = tokenize(source)
    raw = _Parser(tokens).parse_program()
    names: set = set()
    _collect_names(raw, names)
    core = _Desugarer(names).block(raw)
    order: list = []
    _collect_variables(core, order, set())
    if not order:
        tok = tokens[0]
        raise ParseError("program mentions no variables", tok.line, tok.col)
    table = VarTable(order)
    return _Resolver(table).block(core), table


def parse_bool_expr(source: str, table: VarTable):
    """Parse a standalone boolean condition against an existing table."""
    parser = _Parser(tokenize(source))
    raw = parser.parse_bool()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected trailing input {tok.text!r}", tok.line, tok.col)
    return _Resolver(table).boolean(raw)


def parse_file(path) -> tuple[Program, VarTable]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_program(fh.read())

"""Program representation for quantum programs with classical control.

Grammar of the concrete syntax (qubits are written 1-based as ``q1``,
``q_1`` or ``q[1]``; the AST stores 0-based indices)::

    program  := "qubits" INT ";"? ("input" ID ("," ID)* ";")* stmt*
    stmt     := ID ":=" expr ";"
              | ID ("," ID)* ":=" ID "(" [ID ("," ID)*] ")" ";"
              | GATE qubit ("," qubit)* ";"
              | PAULI "[" expr "]" qubit ";"
              | "measure" qubit "->" ID ";"
              | "if" "(" expr ")" block ["else" block]
              | "for" ID "in" INT ".." INT block
    block    := "{" stmt* "}" | stmt
    expr     := Boolean expression over ``| ^ & * == != !`` and 0/1

``for`` loops are unrolled while parsing (upper bound exclusive); inside the
body an identifier segment equal to the loop variable is replaced by its
value, so ``e_i`` becomes ``e_1`` and ``q[i+1]`` becomes ``q[2]``.  An
``if`` without ``else`` whose body is a single Pauli gate becomes a
:class:`SymPauli` unless ``sym_pauli=False``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .pauli import GATES, PAULI_GATES, gate_arity
from .symexpr import (
    FALSE,
    TRUE,
    BoolExpr,
    Var,
    band,
    bnot,
    bor,
    bxor,
    const,
    iff,
    render,
    variables,
)


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


class ParseError(ValueError):
    def __init__(self, msg: str, pos: Pos | None = None):
        self.msg = msg
        self.pos = pos
        super().__init__(f"{pos}: {msg}" if pos else msg)


class Stmt:
    pass


@dataclass(frozen=True)
class Assign(Stmt):
    target: str
    expr: BoolExpr
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ExtCall(Stmt):
    outs: tuple[str, ...]
    fname: str
    args: tuple[str, ...]
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Unitary(Stmt):
    gate: str
    qubits: tuple[int, ...]
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SymPauli(Stmt):
    pauli: str
    guard: BoolExpr
    qubit: int
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Measure(Stmt):
    qubit: int
    target: str
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Seq(Stmt):
    stmts: tuple[Stmt, ...] = ()
    pos: Pos | None = field(default=None, compare=False)

    def __iter__(self) -> Iterator[Stmt]:
        return iter(self.stmts)

    def __len__(self) -> int:
        return len(self.stmts)


@dataclass(frozen=True)
class If(Stmt):
    cond: BoolExpr
    then: Seq
    orelse: Seq = Seq()
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Program:
    n_qubits: int
    body: Seq
    inputs: tuple[str, ...] = ()

    def __add__(self, other: "Program") -> "Program":
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot concatenate programs on different qubit counts")
        inputs = tuple(dict.fromkeys(self.inputs + other.inputs))
        return Program(self.n_qubits, Seq(self.body.stmts + other.body.stmts), inputs)

    def prepend(self, stmts: Sequence[Stmt], inputs: Iterable[str] = ()) -> "Program":
        new_inputs = tuple(dict.fromkeys(tuple(inputs) + self.inputs))
        return Program(self.n_qubits, Seq(tuple(stmts) + self.body.stmts), new_inputs)


# --------------------------------------------------------------------------
# builders


def seq(*stmts: Stmt | Iterable[Stmt]) -> Seq:
    """Flatten statements and iterables of statements into a :class:`Seq`."""
    out: list[Stmt] = []
    for s in stmts:
        if isinstance(s, Seq):
            out.extend(s.stmts)
        elif isinstance(s, Stmt):
            out.append(s)
        else:
            out.extend(seq(*s).stmts)
    return Seq(tuple(out))


def gate(name: str, *qubits: int) -> Unitary:
    return Unitary(name, tuple(qubits))


def cnot(c: int, t: int) -> Unitary:
    return Unitary("CNOT", (c, t))


def measure(q: int, target: str) -> Measure:
    return Measure(q, target)


def assign(target: str, expr: BoolExpr) -> Assign:
    return Assign(target, expr)


def ext_call(outs: Sequence[str], fname: str, args: Sequence[str]) -> ExtCall:
    return ExtCall(tuple(outs), fname, tuple(args))


def sym_pauli(pauli: str, guard: BoolExpr, q: int) -> SymPauli:
    return SymPauli(pauli, guard, q)


def if_(cond: BoolExpr, then: Stmt | Iterable[Stmt], orelse: Stmt | Iterable[Stmt] = ()) -> If:
    return If(cond, seq(then), seq(orelse))


def program(n_qubits: int, *stmts: Stmt | Iterable[Stmt], inputs: Iterable[str] = ()) -> Program:
    return Program(n_qubits, seq(*stmts), tuple(inputs))


# --------------------------------------------------------------------------
# traversal helpers


def walk(stmts: Iterable[Stmt]) -> Iterator[Stmt]:
    for s in stmts:
        yield s
        if isinstance(s, Seq):
            yield from walk(s.stmts)
        elif isinstance(s, If):
            yield from walk(s.then.stmts)
            yield from walk(s.orelse.stmts)


def desugar_sym_pauli(p: Program) -> Program:
    """Turn every guarded Pauli into an ``if`` around an ordinary gate."""

    def go(stmts: Iterable[Stmt]) -> tuple[Stmt, ...]:
        out: list[Stmt] = []
        for s in stmts:
            if isinstance(s, SymPauli):
                out.append(If(s.guard, Seq((Unitary(s.pauli, (s.qubit,), s.pos),)), Seq(), s.pos))
            elif isinstance(s, If):
                out.append(If(s.cond, Seq(go(s.then)), Seq(go(s.orelse)), s.pos))
            elif isinstance(s, Seq):
                out.extend(go(s.stmts))
            else:
                out.append(s)
        return tuple(out)

    return Program(p.n_qubits, Seq(go(p.body.stmts)), p.inputs)


# --------------------------------------------------------------------------
# lexer / parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>(?:\#|//)[^\n]*)
  | (?P<op>:=|->|==|!=|&&|\|\||\.\.|[;,(){}\[\]!~&|^*+\-=])
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: Pos


def tokenize(src: str) -> list[Token]:
    out: list[Token] = []
    line, line_start, i = 1, 0, 0
    while i < len(src):
        m = _TOKEN_RE.match(src, i)
        if not m:
            raise ParseError(f"unexpected character {src[i]!r}", Pos(line, i - line_start + 1))
        kind = m.lastgroup
        pos = Pos(line, i - line_start + 1)
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), pos))
        i = m.end()
    out.append(Token("eof", "", Pos(line, i - line_start + 1)))
    return out


_QUBIT_NAME = re.compile(r"^q_?(\d+)$")
_GATE_ALIASES = {"CX": "CNOT"}
_KEYWORDS = {"qubits", "input", "measure", "if", "else", "for", "in"}


class _Parser:
    def __init__(self, tokens: list[Token], sym_pauli: bool):
        self.toks = tokens
        self.i = 0
        self.sym_pauli = sym_pauli
        self.env: dict[str, int] = {}
        self.n = 0

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def accept(self, text: str) -> Token | None:
        if self.tok.text == text and self.tok.kind in ("op", "id"):
            return self.advance()
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            raise ParseError(f"expected {text!r}, found {self.tok.text or 'end of input'!r}", self.tok.pos)
        return t

    def ident(self) -> str:
        t = self.tok
        if t.kind != "id" or t.text in _KEYWORDS:
            raise ParseError(f"expected identifier, found {t.text or 'end of input'!r}", t.pos)
        self.advance()
        return self.subst_name(t.text)

    def subst_name(self, name: str) -> str:
        if not self.env:
            return name
        parts = name.split("_")
        return "_".join(str(self.env[p]) if p in self.env else p for p in parts)

    # top level
    def program(self) -> Program:
        self.expect("qubits")
        t = self.tok
        if t.kind != "int":
            raise ParseError("expected qubit count", t.pos)
        self.advance()
        self.n = int(t.text)
        if self.n < 1:
            raise ParseError("need at least one qubit", t.pos)
        self.accept(";")
        inputs: list[str] = []
        while self.accept("input"):
            inputs.append(self.ident())
            while self.accept(","):
                inputs.append(self.ident())
            self.expect(";")
        body = self.stmts(until="eof")
        return Program(self.n, Seq(tuple(body)), tuple(inputs))

    def stmts(self, until: str) -> list[Stmt]:
        out: list[Stmt] = []
        while not (self.tok.kind == "eof" if until == "eof" else self.tok.text == until):
            if self.tok.kind == "eof":
                raise ParseError(f"expected {until!r} before end of input", self.tok.pos)
            out.extend(self.stmt())
        return out

    def block(self) -> list[Stmt]:
        if self.accept("{"):
            body = self.stmts(until="}")
            self.expect("}")
            return body
        return self.stmt()

    def stmt(self) -> list[Stmt]:
        t = self.tok
        if t.kind != "id":
            raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.pos)
        word = t.text
        if word == "measure":
            self.advance()
            q = self.qubit()
            self.expect("->")
            target = self.ident()
            self.expect(";")
            return [Measure(q, target, t.pos)]
        if word == "if":
            return [self.if_stmt()]
        if word == "for":
            return self.for_stmt()
        g = _GATE_ALIASES.get(word, word)
        if g in GATES and self.peek().text != ":=" and self.peek().text != ",":
            self.advance()
            if self.accept("["):
                if g not in PAULI_GATES:
                    raise ParseError(f"only Pauli gates take a guard, not {g}", t.pos)
                guard = self.expr()
                self.expect("]")
                q = self.qubit()
                self.expect(";")
                return [SymPauli(g, guard, q, t.pos)]
            qs = [self.qubit()]
            while self.accept(","):
                qs.append(self.qubit())
            self.expect(";")
            if len(qs) != gate_arity(g):
                raise ParseError(f"{g} takes {gate_arity(g)} qubit(s), got {len(qs)}", t.pos)
            if len(set(qs)) != len(qs):
                raise ParseError(f"{g} targets must be distinct", t.pos)
            return [Unitary(g, tuple(qs), t.pos)]
        # assignment or external call
        names = [self.ident()]
        while self.accept(","):
            names.append(self.ident())
        self.expect(":=")
        if self.tok.kind == "id" and self.peek().text == "(" and self.tok.text not in _KEYWORDS:
            fname = self.advance().text
            self.expect("(")
            args: list[str] = []
            if not self.accept(")"):
                args.append(self.ident())
                while self.accept(","):
                    args.append(self.ident())
                self.expect(")")
            self.expect(";")
            return [ExtCall(tuple(names), fname, tuple(args), t.pos)]
        if len(names) != 1:
            raise ParseError("multiple targets need an external call on the right", t.pos)
        e = self.expr()
        self.expect(";")
        return [Assign(names[0], e, t.pos)]

    def if_stmt(self) -> Stmt:
        t = self.expect("if")
        self.expect("(")
        cond = self.expr()
        self.expect(")")
        then = self.block()
        orelse: list[Stmt] = []
        has_else = False
        if self.accept("else"):
            has_else = True
            orelse = self.block()
        if (self.sym_pauli and not has_else and len(then) == 1 and isinstance(then[0], Unitary)
                and then[0].gate in PAULI_GATES):
            return SymPauli(then[0].gate, cond, then[0].qubits[0], t.pos)
        return If(cond, Seq(tuple(then)), Seq(tuple(orelse)), t.pos)

    def for_stmt(self) -> list[Stmt]:
        self.expect("for")
        var = self.ident()
        self.expect("in")
        lo = self.int_expr()
        self.expect("..")
        hi = self.int_expr()
        start = self.i
        out: list[Stmt] = []
        saved = dict(self.env)
        if lo >= hi:
            # still parse the body once to report syntax errors and skip it
            self.env[var] = lo
            self.block()
            self.env = saved
            return out
        for v in range(lo, hi):
            self.i = start
            self.env = dict(saved)
            self.env[var] = v
            out.extend(self.block())
        self.env = saved
        return out

    def int_expr(self) -> int:
        v = self.int_term()
        while self.tok.text in ("+", "-"):
            op = self.advance().text
            r = self.int_term()
            v = v + r if op == "+" else v - r
        return v

    def int_term(self) -> int:
        v = self.int_atom()
        while self.tok.text == "*":
            self.advance()
            v *= self.int_atom()
        return v

    def int_atom(self) -> int:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return int(t.text)
        if t.kind == "id" and t.text in self.env:
            self.advance()
            return self.env[t.text]
        if self.accept("("):
            v = self.int_expr()
            self.expect(")")
            return v
        if self.accept("-"):
            return -self.int_atom()
        raise ParseError(f"expected integer expression, found {t.text!r}", t.pos)

    def qubit(self) -> int:
        t = self.tok
        if t.kind != "id":
            raise ParseError(f"expected qubit, found {t.text or 'end of input'!r}", t.pos)
        self.advance()
        if t.text == "q" and self.accept("["):
            k = self.int_expr()
            self.expect("]")
        else:
            m = _QUBIT_NAME.match(self.subst_name(t.text))
            if not m:
                raise ParseError(f"bad qubit reference {t.text!r}", t.pos)
            k = int(m.group(1))
        if not 1 <= k <= self.n:
            raise ParseError(f"qubit q{k} out of range 1..{self.n}", t.pos)
        return k - 1

    # Boolean expressions
    def expr(self) -> BoolExpr:
        e = self.xor_expr()
        while self.tok.text in ("|", "||"):
            self.advance()
            e = bor(e, self.xor_expr())
        return e

    def xor_expr(self) -> BoolExpr:
        e = self.and_expr()
        while self.tok.text == "^":
            self.advance()
            e = bxor(e, self.and_expr())
        return e

    def and_expr(self) -> BoolExpr:
        e = self.cmp_expr()
        while self.tok.text in ("&", "&&", "*"):
            self.advance()
            e = band(e, self.cmp_expr())
        return e

    def cmp_expr(self) -> BoolExpr:
        e = self.unary()
        while self.tok.text in ("==", "!="):
            op = self.advance().text
            r = self.unary()
            e = iff(e, r) if op == "==" else bxor(e, r)
        return e

    def unary(self) -> BoolExpr:
        if self.tok.text in ("!", "~"):
            self.advance()
            return bnot(self.unary())
        t = self.tok
        if t.kind == "int":
            self.advance()
            if t.text not in ("0", "1"):
                raise ParseError(f"Boolean literal must be 0 or 1, not {t.text}", t.pos)
            return const(t.text == "1")
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "id" and t.text in ("true", "false"):
            self.advance()
            return TRUE if t.text == "true" else FALSE
        return Var(self.ident())


def parse(src: str, sym_pauli: bool = True) -> Program:
    return _Parser(tokenize(src), sym_pauli).program()


# --------------------------------------------------------------------------
# pretty printer


def _q(k: int) -> str:
    return f"q{k + 1}"


def pretty(p: Program) -> str:
    lines = [f"qubits {p.n_qubits};"]
    if p.inputs:
        lines.append("input " + ", ".join(p.inputs) + ";")
    _pretty_stmts(p.body.stmts, 0, lines)
    return "\n".join(lines) + "\n"


def _pretty_stmts(stmts: Iterable[Stmt], depth: int, out: list[str]) -> None:
    pad = "    " * depth
    for s in stmts:
        if isinstance(s, Assign):
            out.append(f"{pad}{s.target} := {render(s.expr)};")
        elif isinstance(s, ExtCall):
            out.append(f"{pad}{', '.join(s.outs)} := {s.fname}({', '.join(s.args)});")
        elif isinstance(s, Unitary):
            out.append(f"{pad}{s.gate} {', '.join(_q(k) for k in s.qubits)};")
        elif isinstance(s, SymPauli):
            out.append(f"{pad}{s.pauli}[{render(s.guard)}] {_q(s.qubit)};")
        elif isinstance(s, Measure):
            out.append(f"{pad}measure {_q(s.qubit)} -> {s.target};")
        elif isinstance(s, If):
            out.append(f"{pad}if ({render(s.cond)}) {{")
            _pretty_stmts(s.then.stmts, depth + 1, out)
            if s.orelse.stmts:
                out.append(f"{pad}}} else {{")
                _pretty_stmts(s.orelse.stmts, depth + 1, out)
            out.append(f"{pad}}}")
        elif isinstance(s, Seq):
            _pretty_stmts(s.stmts, depth, out)
        else:
            raise TypeError(f"unknown statement {s!r}")


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Diagnostic:
    message: str
    pos: Pos | None = None

    def __str__(self) -> str:
        return f"{self.pos}: {self.message}" if self.pos else self.message


def validate(p: Program, externals: dict | None = None) -> list[Diagnostic]:
    """Static checks: qubit ranges, gate arity, definite assignment, calls."""
    diags: list[Diagnostic] = []

    def check_reads(e: BoolExpr, defined: set[str], pos) -> None:
        for name in sorted(variables(e)):
            if name not in defined:
                diags.append(Diagnostic(f"variable {name!r} may be read before assignment", pos))

    def go(stmts: Iterable[Stmt], defined: set[str]) -> set[str]:
        for s in stmts:
            if isinstance(s, Assign):
                check_reads(s.expr, defined, s.pos)
                defined = defined | {s.target}
            elif isinstance(s, ExtCall):
                for a in s.args:
                    if a not in defined:
                        diags.append(Diagnostic(f"variable {a!r} may be read before assignment", s.pos))
                if len(set(s.outs)) != len(s.outs):
                    diags.append(Diagnostic("repeated output variable in call", s.pos))
                if externals is not None:
                    spec = externals.get(s.fname)
                    if spec is None:
                        diags.append(Diagnostic(f"unknown external function {s.fname!r}", s.pos))
                    else:
                        if len(s.args) != spec.n_in or len(s.outs) != spec.n_out:
                            diags.append(Diagnostic(
                                f"{s.fname} expects {spec.n_in} inputs and {spec.n_out} outputs", s.pos))
                defined = defined | set(s.outs)
            elif isinstance(s, Unitary):
                if s.gate not in GATES:
                    diags.append(Diagnostic(f"unknown gate {s.gate!r}", s.pos))
                    continue
                if len(s.qubits) != gate_arity(s.gate):
                    diags.append(Diagnostic(f"{s.gate} takes {gate_arity(s.gate)} qubit(s)", s.pos))
                if len(set(s.qubits)) != len(s.qubits):
                    diags.append(Diagnostic(f"{s.gate} targets must be distinct", s.pos))
                for q in s.qubits:
                    if not 0 <= q < p.n_qubits:
                        diags.append(Diagnostic(f"qubit index {q} out of range", s.pos))
            elif isinstance(s, SymPauli):
                if s.pauli not in PAULI_GATES:
                    diags.append(Diagnostic(f"{s.pauli!r} is not a Pauli gate", s.pos))
                if not 0 <= s.qubit < p.n_qubits:
                    diags.append(Diagnostic(f"qubit index {s.qubit} out of range", s.pos))
                check_reads(s.guard, defined, s.pos)
            elif isinstance(s, Measure):
                if not 0 <= s.qubit < p.n_qubits:
                    diags.append(Diagnostic(f"qubit index {s.qubit} out of range", s.pos))
                defined = defined | {s.target}
            elif isinstance(s, If):
                check_reads(s.cond, defined, s.pos)
                d1 = go(s.then.stmts, defined)
                d2 = go(s.orelse.stmts, defined)
                defined = d1 & d2
            elif isinstance(s, Seq):
                defined = go(s.stmts, defined)
        return defined

    go(p.body.stmts, set(p.inputs))
    return diags

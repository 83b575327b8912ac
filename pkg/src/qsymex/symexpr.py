"""Symbolic Boolean and bit-vector expressions.

Expressions are immutable, hashable trees built through smart constructors
(:func:`bxor`, :func:`band`, :func:`bor`, :func:`bnot`) that keep them in a
light normal form: nested XORs are flattened, constants folded, duplicate
XOR operands cancel and a negated atom inside an XOR becomes a parity flip.
Rendering sorts operands by their text, so output never depends on set
iteration order.

:class:`AtomTable` gives the XOR-affine view used by the tableau: every
expression is ``const ^ XOR(atoms[i] for i in mask)`` with ``mask`` a
Python int.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union


class SymExprError(ValueError):
    pass


class UnboundVariable(SymExprError, KeyError):
    pass


class BoolExpr:
    __slots__ = ()

    def __and__(self, other: "BoolExpr") -> "BoolExpr":
        return band(self, other)

    def __or__(self, other: "BoolExpr") -> "BoolExpr":
        return bor(self, other)

    def __xor__(self, other: "BoolExpr") -> "BoolExpr":
        return bxor(self, other)

    def __invert__(self) -> "BoolExpr":
        return bnot(self)

    def __str__(self) -> str:
        return render(self)


class BVExpr:
    __slots__ = ()

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True, slots=True, repr=False)
class Const(BoolExpr):
    value: bool

    def __repr__(self) -> str:
        return "TRUE" if self.value else "FALSE"


@dataclass(frozen=True, slots=True)
class Var(BoolExpr):
    name: str


@dataclass(frozen=True, slots=True)
class Not(BoolExpr):
    arg: BoolExpr


@dataclass(frozen=True, slots=True)
class And(BoolExpr):
    args: frozenset


@dataclass(frozen=True, slots=True)
class Or(BoolExpr):
    args: frozenset


@dataclass(frozen=True, slots=True)
class Xor(BoolExpr):
    args: frozenset
    neg: bool = False


@dataclass(frozen=True, slots=True)
class Ule(BoolExpr):
    lhs: BVExpr
    rhs: BVExpr


@dataclass(frozen=True, slots=True)
class BVEq(BoolExpr):
    lhs: BVExpr
    rhs: BVExpr


@dataclass(frozen=True, slots=True)
class BVConst(BVExpr):
    width: int
    value: int


@dataclass(frozen=True, slots=True)
class BVVar(BVExpr):
    name: str
    width: int


@dataclass(frozen=True, slots=True)
class ZeroExt(BVExpr):
    arg: BVExpr
    extra: int


@dataclass(frozen=True, slots=True)
class BVAdd(BVExpr):
    args: tuple


@dataclass(frozen=True, slots=True)
class BoolToBV(BVExpr):
    arg: BoolExpr


Expr = Union[BoolExpr, BVExpr]

TRUE = Const(True)
FALSE = Const(False)


def const(v: bool | int) -> Const:
    return TRUE if v else FALSE


def var(name: str) -> Var:
    return Var(name)


# --------------------------------------------------------------------------
# smart constructors


def bnot(a: BoolExpr) -> BoolExpr:
    if isinstance(a, Const):
        return const(not a.value)
    if isinstance(a, Not):
        return a.arg
    if isinstance(a, Xor):
        return Xor(a.args, not a.neg)
    return Not(a)


def bxor(*xs: BoolExpr) -> BoolExpr:
    atoms: set = set()
    parity = False
    for x in xs:
        if isinstance(x, Const):
            parity ^= x.value
        elif isinstance(x, Xor):
            atoms.symmetric_difference_update(x.args)
            parity ^= x.neg
        elif isinstance(x, Not):
            atoms.symmetric_difference_update((x.arg,))
            parity = not parity
        else:
            atoms.symmetric_difference_update((x,))
    return _xor_from(atoms, parity)


def _xor_from(atoms, parity: bool) -> BoolExpr:
    if not atoms:
        return const(parity)
    if len(atoms) == 1:
        (a,) = atoms
        return Not(a) if parity else a
    return Xor(frozenset(atoms), bool(parity))


def iff(a: BoolExpr, b: BoolExpr) -> BoolExpr:
    return bnot(bxor(a, b))


def implies(a: BoolExpr, b: BoolExpr) -> BoolExpr:
    return bor(bnot(a), b)


def _flatten(cls, xs, absorbing: bool):
    out: set = set()
    for x in xs:
        if isinstance(x, Const):
            if x.value == absorbing:
                return None
            continue
        if isinstance(x, cls):
            out.update(x.args)
        else:
            out.add(x)
    for x in out:
        if bnot(x) in out:
            return None
    return out


def band(*xs: BoolExpr) -> BoolExpr:
    out = _flatten(And, xs, absorbing=False)
    if out is None:
        return FALSE
    if not out:
        return TRUE
    if len(out) == 1:
        return next(iter(out))
    return And(frozenset(out))


def bor(*xs: BoolExpr) -> BoolExpr:
    out = _flatten(Or, xs, absorbing=True)
    if out is None:
        return TRUE
    if not out:
        return FALSE
    if len(out) == 1:
        return next(iter(out))
    return Or(frozenset(out))


def bv_width(e: BVExpr) -> int:
    if isinstance(e, (BVConst, BVVar)):
        return e.width
    if isinstance(e, ZeroExt):
        return bv_width(e.arg) + e.extra
    if isinstance(e, BVAdd):
        return bv_width(e.args[0])
    if isinstance(e, BoolToBV):
        return 1
    raise TypeError(f"not a bit-vector expression: {e!r}")


def bool_to_bv(b: BoolExpr) -> BVExpr:
    if isinstance(b, Const):
        return BVConst(1, int(b.value))
    return BoolToBV(b)


def zero_ext(a: BVExpr, extra: int) -> BVExpr:
    if extra == 0:
        return a
    if isinstance(a, BVConst):
        return BVConst(a.width + extra, a.value)
    if isinstance(a, ZeroExt):
        return ZeroExt(a.arg, a.extra + extra)
    return ZeroExt(a, extra)


def bvadd(*xs: BVExpr) -> BVExpr:
    if not xs:
        raise SymExprError("bvadd needs at least one operand")
    w = bv_width(xs[0])
    total = 0
    terms = []
    for x in xs:
        if bv_width(x) != w:
            raise SymExprError("bvadd width mismatch")
        if isinstance(x, BVConst):
            total += x.value
        elif isinstance(x, BVAdd):
            for y in x.args:
                if isinstance(y, BVConst):
                    total += y.value
                else:
                    terms.append(y)
        else:
            terms.append(x)
    total %= 1 << w
    if not terms:
        return BVConst(w, total)
    if total:
        terms.append(BVConst(w, total))
    if len(terms) == 1:
        return terms[0]
    return BVAdd(tuple(terms))


def ule(a: BVExpr, b: BVExpr) -> BoolExpr:
    if bv_width(a) != bv_width(b):
        raise SymExprError("bvule width mismatch")
    if isinstance(a, BVConst) and isinstance(b, BVConst):
        return const(a.value <= b.value)
    if isinstance(b, BVConst) and b.value == (1 << b.width) - 1:
        return TRUE
    if isinstance(a, BVConst) and a.value == 0:
        return TRUE
    return Ule(a, b)


def bveq(a: BVExpr, b: BVExpr) -> BoolExpr:
    if bv_width(a) != bv_width(b):
        raise SymExprError("bv = width mismatch")
    if isinstance(a, BVConst) and isinstance(b, BVConst):
        return const(a.value == b.value)
    if a == b:
        return TRUE
    return BVEq(a, b)


def count_width(n: int) -> int:
    """Bits needed to hold any count in ``0..n``."""
    return max(1, n.bit_length())


def popcount_bv(bits: Iterable[BoolExpr], width: int | None = None) -> BVExpr:
    bits = list(bits)
    w = width if width is not None else count_width(len(bits))
    if not bits:
        return BVConst(w, 0)
    return bvadd(*(zero_ext(bool_to_bv(b), w - 1) for b in bits))


def count_le(bits: Iterable[BoolExpr], bound: int) -> BoolExpr:
    """``sum(bits) <= bound`` as a bit-vector comparison."""
    bits = [b for b in bits if b != FALSE]
    if bound < 0:
        return FALSE
    if bound >= len(bits):
        return TRUE
    w = max(count_width(len(bits)), bound.bit_length())
    return ule(popcount_bv(bits, w), BVConst(w, bound))


# --------------------------------------------------------------------------
# traversal


def children(e: Expr) -> tuple:
    if isinstance(e, (And, Or, Xor)):
        return tuple(e.args)
    if isinstance(e, (Not, BoolToBV)):
        return (e.arg,)
    if isinstance(e, ZeroExt):
        return (e.arg,)
    if isinstance(e, (Ule, BVEq)):
        return (e.lhs, e.rhs)
    if isinstance(e, BVAdd):
        return e.args
    return ()


def _postorder(e: Expr):
    """Iterative post-order over the distinct nodes of ``e``."""
    seen: set = set()
    stack = [(e, False)]
    while stack:
        node, done = stack.pop()
        if done:
            yield node
            continue
        if node in seen:
            continue
        seen.add(node)
        stack.append((node, True))
        for c in children(node):
            if c not in seen:
                stack.append((c, False))


def _rebuild(node: Expr, memo: dict) -> Expr:
    if isinstance(node, Not):
        return bnot(memo[node.arg])
    if isinstance(node, And):
        return band(*(memo[a] for a in node.args))
    if isinstance(node, Or):
        return bor(*(memo[a] for a in node.args))
    if isinstance(node, Xor):
        return bxor(const(node.neg), *(memo[a] for a in node.args))
    if isinstance(node, Ule):
        return ule(memo[node.lhs], memo[node.rhs])
    if isinstance(node, BVEq):
        return bveq(memo[node.lhs], memo[node.rhs])
    if isinstance(node, ZeroExt):
        return zero_ext(memo[node.arg], node.extra)
    if isinstance(node, BVAdd):
        return bvadd(*(memo[a] for a in node.args))
    if isinstance(node, BoolToBV):
        return bool_to_bv(memo[node.arg])
    return node


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace variables by expressions (simultaneously) and re-normalize."""
    memo: dict = {}
    for node in _postorder(e):
        if isinstance(node, Var):
            memo[node] = mapping.get(node.name, node)
        elif isinstance(node, BVVar):
            rep = mapping.get(node.name, node)
            if isinstance(rep, BoolExpr):
                rep = bool_to_bv(rep)
            if node.width and isinstance(rep, BVExpr) and bv_width(rep) < node.width:
                rep = zero_ext(rep, node.width - bv_width(rep))
            memo[node] = rep
        else:
            memo[node] = _rebuild(node, memo)
    return memo[e]


def simplify(e: Expr) -> Expr:
    memo: dict = {}
    for node in _postorder(e):
        memo[node] = _rebuild(node, memo)
    return memo[e]


def variables(e: Expr | Iterable[Expr]) -> dict[str, int]:
    """Free variables mapped to their width (0 for Booleans)."""
    roots = [e] if isinstance(e, (BoolExpr, BVExpr)) else list(e)
    out: dict[str, int] = {}
    for r in roots:
        for node in _postorder(r):
            if isinstance(node, Var):
                out.setdefault(node.name, 0)
            elif isinstance(node, BVVar):
                out.setdefault(node.name, node.width)
    return out


def evaluate(e: Expr, valuation: Mapping[str, int | bool]) -> int:
    """Evaluate to ``0``/``1`` (Booleans) or an unsigned int (bit-vectors)."""
    memo: dict = {}
    for node in _postorder(e):
        memo[node] = _eval_node(node, memo, valuation)
    return memo[e]


def _eval_node(node: Expr, memo: dict, v: Mapping) -> int:
    if isinstance(node, Const):
        return int(node.value)
    if isinstance(node, (Var, BVVar)):
        try:
            val = int(v[node.name])
        except KeyError:
            raise UnboundVariable(node.name) from None
        if isinstance(node, Var):
            return val & 1
        return val % (1 << node.width) if node.width else val
    if isinstance(node, Not):
        return 1 - memo[node.arg]
    if isinstance(node, And):
        return int(all(memo[a] for a in node.args))
    if isinstance(node, Or):
        return int(any(memo[a] for a in node.args))
    if isinstance(node, Xor):
        r = int(node.neg)
        for a in node.args:
            r ^= memo[a]
        return r
    if isinstance(node, Ule):
        return int(memo[node.lhs] <= memo[node.rhs])
    if isinstance(node, BVEq):
        return int(memo[node.lhs] == memo[node.rhs])
    if isinstance(node, BVConst):
        return node.value
    if isinstance(node, ZeroExt):
        return memo[node.arg]
    if isinstance(node, BVAdd):
        return sum(memo[a] for a in node.args) % (1 << bv_width(node))
    if isinstance(node, BoolToBV):
        return memo[node.arg]
    raise TypeError(f"cannot evaluate {node!r}")


def size(e: Expr) -> int:
    return sum(1 for _ in _postorder(e))


# --------------------------------------------------------------------------
# rendering

_SIMPLE_SYMBOL = re.compile(r"^[A-Za-z~!@$%^&*_\-+=<>.?/][A-Za-z0-9~!@$%^&*_\-+=<>.?/]*$")


def smt_symbol(name: str) -> str:
    if _SIMPLE_SYMBOL.match(name):
        return name
    if "|" in name or "\\" in name:
        raise SymExprError(f"name cannot be quoted in SMT-LIB: {name!r}")
    return f"|{name}|"


def _bv_literal(width: int, value: int) -> str:
    return "#b" + format(value, f"0{width}b")


class _Renderer:
    """Renders once per node; records variables in order of first use."""

    def __init__(self, smt: bool):
        self.smt = smt
        self.memo: dict = {}
        self.decls: dict[str, int] = {}

    def __call__(self, e: Expr) -> str:
        for node in _postorder(e):
            if node not in self.memo:
                self.memo[node] = self._node(node)
        return self.memo[e]

    def _sorted(self, args) -> list[str]:
        return sorted(self.memo[a] for a in args)

    def _node(self, n: Expr) -> str:
        m = self.memo
        if self.smt:
            if isinstance(n, Const):
                return "true" if n.value else "false"
            if isinstance(n, Var):
                self.decls.setdefault(n.name, 0)
                return smt_symbol(n.name)
            if isinstance(n, BVVar):
                self.decls.setdefault(n.name, n.width)
                return smt_symbol(n.name)
            if isinstance(n, Not):
                return f"(not {m[n.arg]})"
            if isinstance(n, And):
                return "(and " + " ".join(self._sorted(n.args)) + ")"
            if isinstance(n, Or):
                return "(or " + " ".join(self._sorted(n.args)) + ")"
            if isinstance(n, Xor):
                s = "(xor " + " ".join(self._sorted(n.args)) + ")"
                return f"(not {s})" if n.neg else s
            if isinstance(n, Ule):
                return f"(bvule {m[n.lhs]} {m[n.rhs]})"
            if isinstance(n, BVEq):
                return f"(= {m[n.lhs]} {m[n.rhs]})"
            if isinstance(n, BVConst):
                return _bv_literal(n.width, n.value)
            if isinstance(n, ZeroExt):
                return f"((_ zero_extend {n.extra}) {m[n.arg]})"
            if isinstance(n, BVAdd):
                return "(bvadd " + " ".join(m[a] for a in n.args) + ")"
            if isinstance(n, BoolToBV):
                return f"(ite {m[n.arg]} #b1 #b0)"
        else:
            if isinstance(n, Const):
                return "1" if n.value else "0"
            if isinstance(n, (Var, BVVar)):
                return n.name
            if isinstance(n, Not):
                return f"!{m[n.arg]}"
            if isinstance(n, And):
                return "(" + " & ".join(self._sorted(n.args)) + ")"
            if isinstance(n, Or):
                return "(" + " | ".join(self._sorted(n.args)) + ")"
            if isinstance(n, Xor):
                s = "(" + " ^ ".join(self._sorted(n.args)) + ")"
                return f"!{s}" if n.neg else s
            if isinstance(n, Ule):
                return f"({m[n.lhs]} <= {m[n.rhs]})"
            if isinstance(n, BVEq):
                return f"({m[n.lhs]} == {m[n.rhs]})"
            if isinstance(n, BVConst):
                return str(n.value)
            if isinstance(n, ZeroExt):
                return m[n.arg]
            if isinstance(n, BVAdd):
                return "(" + " + ".join(m[a] for a in n.args) + ")"
            if isinstance(n, BoolToBV):
                return m[n.arg]
        raise TypeError(f"cannot render {n!r}")


def render(e: Expr) -> str:
    """Human-readable infix form (``^ & | !``)."""
    return _Renderer(smt=False)(e)


def to_smt(e: Expr) -> str:
    return _Renderer(smt=True)(e)


def to_smt_with_decls(exprs: Iterable[Expr]) -> tuple[list[str], dict[str, int]]:
    """Render several expressions sharing one declaration table."""
    r = _Renderer(smt=True)
    texts = [r(e) for e in exprs]
    # Node visiting order follows set iteration, so order the declarations by
    # where each symbol first shows up in the (sorted, deterministic) text.
    joined = "\n".join(texts)

    def first_use(name: str) -> int:
        sym = re.escape(smt_symbol(name))
        m = re.search(rf"(?<![^\s()]){sym}(?![^\s()])", joined)
        return m.start() if m else len(joined)

    order = sorted(r.decls, key=lambda k: (first_use(k), k))
    return texts, {k: r.decls[k] for k in order}


# --------------------------------------------------------------------------
# SMT-LIB term parsing (enough to read back what `to_smt` writes)

_TOKEN = re.compile(r"\s*(\(|\)|\|[^|]*\||[^\s()]+)")


def parse_sexpr(text: str):
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise SymExprError(f"bad s-expression near {text[pos:pos + 20]!r}")
        tokens.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    stack: list[list] = [[]]
    for t in tokens:
        if t == "(":
            stack.append([])
        elif t == ")":
            if len(stack) == 1:
                raise SymExprError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(t[1:-1] if t.startswith("|") else t)
    if len(stack) != 1:
        raise SymExprError("unbalanced '('")
    return stack[0]


def _parse_bv_literal(tok: str) -> BVConst | None:
    if tok.startswith("#b"):
        return BVConst(len(tok) - 2, int(tok[2:], 2))
    if tok.startswith("#x"):
        return BVConst(4 * (len(tok) - 2), int(tok[2:], 16))
    return None


def from_smt(text: str | list, sorts: Mapping[str, int] | None = None) -> Expr:
    """Parse a term; ``sorts`` gives bit-vector widths (missing names are Bool)."""
    sorts = sorts or {}
    if isinstance(text, str):
        items = parse_sexpr(text)
        if len(items) != 1:
            raise SymExprError("expected exactly one term")
        text = items[0]
    return _term(text, sorts)


def _term(t, sorts) -> Expr:
    if isinstance(t, str):
        if t == "true":
            return TRUE
        if t == "false":
            return FALSE
        lit = _parse_bv_literal(t)
        if lit is not None:
            return lit
        w = sorts.get(t, 0)
        return BVVar(t, w) if w else Var(t)
    if not t:
        raise SymExprError("empty application")
    head = t[0]
    if isinstance(head, list):
        if len(head) == 3 and head[:2] == ["_", "zero_extend"]:
            return zero_ext(_term(t[1], sorts), int(head[2]))
        raise SymExprError(f"unsupported indexed operator {head!r}")
    if head == "_" and len(t) == 3 and t[1].startswith("bv"):
        return BVConst(int(t[2]), int(t[1][2:]))
    args = [_term(a, sorts) for a in t[1:]]
    if head == "not":
        return bnot(args[0])
    if head == "and":
        return band(*args)
    if head == "or":
        return bor(*args)
    if head == "xor":
        return bxor(*args)
    if head == "=>":
        return implies(args[0], args[1])
    if head == "=":
        if all(isinstance(a, BoolExpr) for a in args):
            return band(*(iff(args[0], a) for a in args[1:]))
        return bveq(args[0], args[1])
    if head == "bvule":
        return ule(args[0], args[1])
    if head == "bvadd":
        return bvadd(*args)
    if head == "ite":
        c, a, b = args
        if a == BVConst(1, 1) and b == BVConst(1, 0):
            return bool_to_bv(c)
        if all(isinstance(x, BoolExpr) for x in args):
            return bor(band(c, a), band(bnot(c), b))
        raise SymExprError("unsupported ite form")
    raise SymExprError(f"unsupported operator {head!r}")


# --------------------------------------------------------------------------
# fresh names and the affine atom table


class FreshGen:
    """Deterministic fresh names ``<prefix>_<k>`` with a per-prefix counter."""

    def __init__(self, reserved: Iterable[str] = ()):
        self._counters: dict[str, int] = {}
        self._reserved = set(reserved)

    def reserve(self, names: Iterable[str]) -> None:
        self._reserved.update(names)

    def name(self, prefix: str) -> str:
        k = self._counters.get(prefix, 0)
        while True:
            cand = f"{prefix}_{k}"
            k += 1
            if cand not in self._reserved:
                break
        self._counters[prefix] = k
        return cand

    def fresh(self, prefix: str) -> Var:
        return Var(self.name(prefix))

    def state(self) -> dict[str, int]:
        return dict(self._counters)


class AtomTable:
    """Interns the non-XOR building blocks of phase expressions.

    An expression is encoded as ``(mask, c)`` meaning
    ``c ^ XOR(atoms[i] for each set bit i of mask)``.
    """

    def __init__(self) -> None:
        self.atoms: list[BoolExpr] = []
        self._index: dict[BoolExpr, int] = {}

    def __len__(self) -> int:
        return len(self.atoms)

    def intern(self, atom: BoolExpr) -> int:
        i = self._index.get(atom)
        if i is None:
            i = len(self.atoms)
            self.atoms.append(atom)
            self._index[atom] = i
        return i

    def encode(self, e: BoolExpr) -> tuple[int, int]:
        if isinstance(e, Const):
            return 0, int(e.value)
        if isinstance(e, Xor):
            mask = 0
            for a in e.args:
                mask ^= 1 << self.intern(a)
            return mask, int(e.neg)
        if isinstance(e, Not):
            return 1 << self.intern(e.arg), 1
        return 1 << self.intern(e), 0

    def decode(self, mask: int, c: int) -> BoolExpr:
        atoms = []
        while mask:
            low = mask & -mask
            atoms.append(self.atoms[low.bit_length() - 1])
            mask ^= low
        return _xor_from(atoms, bool(c))

    def values(self, valuation: Mapping[str, int | bool], mask: int | None = None) -> int:
        """Bitmask of atom truth values under ``valuation``.

        With ``mask`` only those atoms are evaluated (the others read as 0).
        """
        out = 0
        idx = range(len(self.atoms)) if mask is None else iter_bits(mask)
        for i in idx:
            if evaluate(self.atoms[i], valuation):
                out |= 1 << i
        return out


def iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low

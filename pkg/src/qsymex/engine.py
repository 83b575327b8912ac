"""Quantum symbolic execution.

A configuration holds the remaining statements, a symbolic store, a
symbolic tableau, the probability list and the path condition.  :func:`step`
applies one transition rule; :meth:`Engine.explore` runs depth-first until
every path terminates.  :func:`concrete_run` is the matching concrete
interpreter used for replay and co-execution checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .chp import RANDOM, ConcreteTableau
from .qprog import Assign, ExtCall, If, Measure, Program, Seq, Stmt, SymPauli, Unitary
from .symexpr import (
    FALSE,
    BoolExpr,
    BVVar,
    Expr,
    FreshGen,
    Var,
    band,
    bnot,
    evaluate,
    render,
    substitute,
    variables,
)
from .symstab import SymTableau


class EngineError(RuntimeError):
    pass


class ForkBudgetExceeded(EngineError):
    def __init__(self, budget: int, stmt: Stmt | None):
        self.budget = budget
        self.stmt = stmt
        where = f" at {stmt.pos}" if stmt is not None and getattr(stmt, "pos", None) else ""
        super().__init__(f"fork budget of {budget} configurations exceeded{where}")


@dataclass
class ExternalFnSpec:
    """Contract of a classical function called from a program.

    ``condition(ins, outs)`` returns the formula the symbolic outputs must
    satisfy; ``concrete(ins)`` (optional) computes outputs for concrete runs.
    """

    name: str
    n_in: int
    n_out: int
    condition: Callable[[list[Expr], list[Expr]], BoolExpr]
    concrete: Callable[[list[int]], list[int]] | None = None
    out_widths: tuple[int, ...] | None = None

    def width(self, i: int) -> int:
        return self.out_widths[i] if self.out_widths else 1


@dataclass(frozen=True)
class MeasRecord:
    var: str
    qubit: int
    outcome: BoolExpr
    kind: str
    symbol: str | None


@dataclass(frozen=True)
class ExtRecord:
    fname: str
    ins: tuple[Expr, ...]
    outs: tuple[Expr, ...]


@dataclass
class Config:
    cont: list[Stmt]
    store: dict[str, Expr]
    state: SymTableau
    probs: list[tuple[str, Fraction]] = field(default_factory=list)
    pc: list[BoolExpr] = field(default_factory=list)
    meas_log: list[MeasRecord] = field(default_factory=list)
    ext_log: list[ExtRecord] = field(default_factory=list)

    @property
    def done(self) -> bool:
        return not self.cont

    def path_condition(self) -> BoolExpr:
        return band(*self.pc)

    def fork(self) -> "Config":
        return Config(list(self.cont), dict(self.store), self.state.copy(), list(self.probs),
                      list(self.pc), list(self.meas_log), list(self.ext_log))

    def to_json(self) -> dict:
        return {
            "pc": render(self.path_condition()),
            "store": {k: render(v) for k, v in sorted(self.store.items())},
            "stabilizers": self.state.to_json(),
            "probs": [[s, str(p)] for s, p in self.probs],
        }


def _eval_sym(e: BoolExpr, store: Mapping[str, Expr], stmt: Stmt) -> BoolExpr:
    missing = [v for v in variables(e) if v not in store]
    if missing:
        raise EngineError(f"{getattr(stmt, 'pos', None) or '?'}: unassigned variable(s) {sorted(missing)}")
    return substitute(e, store)


class Engine:
    def __init__(self, externals: Mapping[str, ExternalFnSpec] | None = None,
                 gen: FreshGen | None = None, fork_budget: int = 1 << 16,
                 prune: bool = False, solver=None):
        self.externals = dict(externals or {})
        self.gen = gen or FreshGen()
        self.fork_budget = fork_budget
        self.prune = prune
        self.solver = solver
        self.solver_calls = 0
        self.last_stmt: Stmt | None = None

    def initial(self, prog: Program, state: SymTableau, store: Mapping[str, Expr] | None = None) -> Config:
        st = dict(store) if store is not None else {}
        for name in prog.inputs:
            st.setdefault(name, Var(name))
        self.gen.reserve(variables(list(st.values())) if st else ())
        self.gen.reserve(state.phase_vars())
        if state.n != prog.n_qubits:
            raise EngineError(f"program uses {prog.n_qubits} qubits but the state has {state.n}")
        return Config(list(reversed(prog.body.stmts)), st, state)

    def step(self, c: Config) -> list[Config]:
        """One transition.  ``c`` is consumed (it may be mutated and returned)."""
        s = c.cont.pop()
        self.last_stmt = s
        if isinstance(s, Seq):
            c.cont.extend(reversed(s.stmts))
            return [c]
        if isinstance(s, Assign):
            c.store[s.target] = _eval_sym(s.expr, c.store, s)
            return [c]
        if isinstance(s, ExtCall):
            spec = self.externals.get(s.fname)
            if spec is None:
                raise EngineError(f"unknown external function {s.fname!r}")
            if len(s.args) != spec.n_in or len(s.outs) != spec.n_out:
                raise EngineError(f"{s.fname}: arity mismatch")
            missing = [a for a in s.args if a not in c.store]
            if missing:
                raise EngineError(f"{s.pos or '?'}: unassigned variable(s) {missing}")
            ins = [c.store[a] for a in s.args]
            outs: list[Expr] = []
            for i, y in enumerate(s.outs):
                w = spec.width(i)
                outs.append(self.gen.fresh(y) if w == 1 else BVVar(self.gen.name(y), w))
            c.pc.append(spec.condition(ins, outs))
            for y, o in zip(s.outs, outs):
                c.store[y] = o
            c.ext_log.append(ExtRecord(s.fname, tuple(ins), tuple(outs)))
            return [c]
        if isinstance(s, Unitary):
            c.state.apply_clifford(s.gate, s.qubits)
            return [c]
        if isinstance(s, SymPauli):
            c.state.apply_sym_pauli(s.pauli, _eval_sym(s.guard, c.store, s), s.qubit)
            return [c]
        if isinstance(s, Measure):
            res = c.state.measure(s.qubit, self.gen, prefix=s.target)
            c.store[s.target] = res.outcome
            if res.kind == RANDOM:
                c.probs.append((res.symbol, Fraction(1, 2)))
            c.meas_log.append(MeasRecord(s.target, s.qubit, res.outcome, res.kind, res.symbol))
            return [c]
        if isinstance(s, If):
            b = _eval_sym(s.cond, c.store, s)
            other = c.fork()
            c.pc.append(b)
            c.cont.extend(reversed(s.then.stmts))
            other.pc.append(bnot(b))
            other.cont.extend(reversed(s.orelse.stmts))
            return [c, other]
        raise EngineError(f"unknown statement {s!r}")

    def _feasible(self, c: Config) -> bool:
        pc = c.path_condition()
        if pc == FALSE:
            return False
        from .smt import Unsat, check_formula

        self.solver_calls += 1
        return not isinstance(check_formula(pc, config=self.solver), Unsat)

    def iter_terminals(self, init: Config) -> Iterator[Config]:
        """Depth-first exploration; ``then`` branches before ``else``."""
        stack = [init]
        created = 1
        while stack:
            c = stack.pop()
            while c.cont:
                succ = self.step(c)
                if len(succ) == 1:
                    continue
                created += len(succ) - 1
                if created > self.fork_budget:
                    raise ForkBudgetExceeded(self.fork_budget, self.last_stmt)
                if self.prune:
                    succ = [x for x in succ if self._feasible(x)]
                    if not succ:
                        break
                stack.extend(reversed(succ[1:]))
                c = succ[0]
            else:
                yield c

    def explore(self, prog: Program, state: SymTableau | None = None,
                store: Mapping[str, Expr] | None = None) -> list[Config]:
        state = state if state is not None else SymTableau.zero_state(prog.n_qubits)
        return list(self.iter_terminals(self.initial(prog, state, store)))


def explore(prog: Program, state: SymTableau | None = None, store=None, **kw) -> list[Config]:
    return Engine(**kw).explore(prog, state, store)


# --------------------------------------------------------------------------
# concrete interpreter


@dataclass
class ConcreteResult:
    store: dict[str, int]
    state: ConcreteTableau
    prob: Fraction
    trace: list[tuple]


def concrete_run(prog: Program | Sequence[Stmt], store: Mapping[str, int], state: ConcreteTableau,
                 rng: np.random.Generator | None = None,
                 externals: Mapping[str, ExternalFnSpec] | None = None,
                 ext_answers: Iterable[Sequence[int]] | None = None,
                 forced: Iterable[int] | None = None) -> ConcreteResult:
    """Run a program on a concrete state.

    Random measurement outcomes come from ``forced`` (consumed in order) when
    given, else from ``rng``.  External calls take outputs from
    ``ext_answers`` when given, else from the spec's ``concrete`` function.
    ``state`` is modified in place.
    """
    stmts = prog.body.stmts if isinstance(prog, Program) else tuple(prog)
    sigma = {k: int(v) for k, v in store.items()}
    externals = externals or {}
    answers = iter(ext_answers) if ext_answers is not None else None
    forced_it = iter(forced) if forced is not None else None
    trace: list[tuple] = []
    prob = Fraction(1)
    stack: list[Stmt] = list(reversed(stmts))
    while stack:
        s = stack.pop()
        if isinstance(s, Seq):
            stack.extend(reversed(s.stmts))
        elif isinstance(s, Assign):
            sigma[s.target] = evaluate(s.expr, sigma)
        elif isinstance(s, ExtCall):
            ins = [sigma[a] for a in s.args]
            if answers is not None:
                outs = [int(v) for v in next(answers)]
            else:
                spec = externals.get(s.fname)
                if spec is None or spec.concrete is None:
                    raise EngineError(f"no concrete implementation for {s.fname!r}")
                outs = [int(v) for v in spec.concrete(ins)]
            if len(outs) != len(s.outs):
                raise EngineError(f"{s.fname} returned {len(outs)} values, expected {len(s.outs)}")
            sigma.update(zip(s.outs, outs))
            trace.append(("call", s.fname, tuple(ins), tuple(outs)))
        elif isinstance(s, Unitary):
            state.apply(s.gate, s.qubits)
        elif isinstance(s, SymPauli):
            if evaluate(s.guard, sigma):
                state.apply(s.pauli, (s.qubit,))
        elif isinstance(s, Measure):
            if state.is_random(s.qubit):
                f = next(forced_it) if forced_it is not None else None
                kind, bit = state.measure_one(s.qubit, rng, forced=f)
                prob *= Fraction(1, 2)
            else:
                kind, bit = state.measure_one(s.qubit)
            sigma[s.target] = bit
            trace.append(("measure", s.qubit, bit, kind))
        elif isinstance(s, If):
            taken = evaluate(s.cond, sigma)
            trace.append(("branch", taken))
            stack.extend(reversed((s.then if taken else s.orelse).stmts))
        else:
            raise EngineError(f"unknown statement {s!r}")
    return ConcreteResult(sigma, state, prob, trace)

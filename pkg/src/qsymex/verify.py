"""Decoder verification: symbolic run, SMT check per terminal, concrete replay."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .codes import CodeSpec, DecoderInstance, inject_errors
from .engine import Config, Engine, concrete_run
from .qprog import Program
from .smt import Sat, SolverConfig, Unknown, check_formula
from .symexpr import FALSE, BoolExpr, Var, band, bnot, evaluate, render, variables
from .symstab import SymTableau, equality_formula

VERIFIED = "Verified"
BUG = "Bug"
INCONCLUSIVE = "Inconclusive"


@dataclass
class ReplayReport:
    confirmed: bool
    reason: str
    contract_ok: bool
    errors_ok: bool
    initial: list
    final: list

    def to_json(self) -> dict:
        return {
            "confirmed": self.confirmed,
            "reason": self.reason,
            "contract_ok": self.contract_ok,
            "errors_ok": self.errors_ok,
            "initial_tableau": [f"{'-' if ph else '+'}{p}" for p, ph in self.initial],
            "final_tableau": [f"{'-' if ph else '+'}{p}" for p, ph in self.final],
        }


@dataclass
class Verdict:
    status: str
    reason: str = ""
    counterexample: dict | None = None
    timings: dict = field(default_factory=lambda: {"init": 0.0, "qse": 0.0, "smt": 0.0})
    stats: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "verdict": self.status,
            "reason": self.reason,
            "timings_ms": {k: round(1000 * v, 3) for k, v in self.timings.items()},
            "stats": self.stats,
            "counterexample": self.counterexample,
        }


def logical_symbols(code: CodeSpec) -> list[str]:
    return [f"l_{j + 1}" for j in range(code.k)]


def initial_state(code: CodeSpec, basis: str) -> SymTableau:
    """Code state with symbolic logical values.

    ``basis="Z"`` fixes the logical Z operators to ``(-1)^{l_j}``, ``"X"``
    the logical X operators; the checks keep eigenvalue +1 in both.
    """
    logicals = code.logical_z if basis == "Z" else code.logical_x
    gens = [(c, FALSE) for c in code.checks]
    gens += [(L, Var(s)) for L, s in zip(logicals, logical_symbols(code))]
    return SymTableau.from_generators(gens)


@dataclass
class Setup:
    program: Program
    state: SymTableau
    constraint: BoolExpr
    error_vars: list[str]


def build_setup(inst: DecoderInstance, basis: str, nerr_x: int | None = None,
                nerr_z: int | None = None) -> Setup:
    code = inst.code
    nx = inst.nerr_x if nerr_x is None else nerr_x
    nz = inst.nerr_z if nerr_z is None else nerr_z
    prelude, constraints, names = [], [], []
    for kind, budget in (("X", nx), ("Z", nz)):
        if budget <= 0:
            continue
        stmts, cons, vs = inject_errors(code.n, kind, budget)
        prelude += stmts
        constraints.append(cons)
        names += vs
    program = inst.program.prepend(prelude, inputs=names)
    return Setup(program, initial_state(code, basis), band(*constraints), names)


def verify_decoder(inst: DecoderInstance, solver: SolverConfig | None = None,
                   nerr_x: int | None = None, nerr_z: int | None = None,
                   bases: Sequence[str] = ("Z", "X"), replay_bugs: bool = True,
                   deadline: float | None = None, jobs: int = 1,
                   fork_budget: int = 1 << 16) -> Verdict:
    """Check that the decoder restores every encoded state under the error budget.

    For each initial state and each terminal configuration the query
    ``pc & errors_ok & !(final == initial)`` goes to the solver: all unsat
    means Verified, any sat is a Bug (replayed concretely), and a solver
    ``unknown`` or timeout makes the result Inconclusive.
    """
    solver = solver or SolverConfig()
    timings = {"init": 0.0, "qse": 0.0, "smt": 0.0}
    stats = {"terminals": 0, "queries": 0, "trivial_queries": 0, "n": inst.code.n, "solver": solver.name()}
    inconclusive = []
    start = time.perf_counter()
    for basis in bases:
        t0 = time.perf_counter()
        setup = build_setup(inst, basis, nerr_x, nerr_z)
        timings["init"] += time.perf_counter() - t0

        t0 = time.perf_counter()
        engine = Engine(inst.externals, fork_budget=fork_budget)
        terminals = engine.explore(setup.program, setup.state.copy())
        timings["qse"] += time.perf_counter() - t0
        stats["terminals"] += len(terminals)

        goals = []
        for term in terminals:
            t0 = time.perf_counter()
            eq = equality_formula(term.state, setup.state)
            goal = band(term.path_condition(), setup.constraint, bnot(eq))
            timings["smt"] += time.perf_counter() - t0
            if goal == FALSE:
                stats["trivial_queries"] += 1
            else:
                goals.append((term, goal))

        t0 = time.perf_counter()
        if jobs > 1 and len(goals) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(lambda tg: check_formula(tg[1], config=solver), goals))
        else:
            results = None
        for idx, (term, goal) in enumerate(goals):
            if deadline is not None and time.perf_counter() - start > deadline:
                inconclusive.append(f"time budget exhausted on basis {basis}")
                break
            res = results[idx] if results is not None else check_formula(goal, config=solver)
            stats["queries"] += 1
            if isinstance(res, Sat):
                timings["smt"] += time.perf_counter() - t0
                valuation = complete_valuation(res.model, term, setup)
                cex = {
                    "basis": basis,
                    "valuation": dict(sorted(valuation.items())),
                    "path_condition": render(term.path_condition()),
                    "errors": [v for v in setup.error_vars if valuation.get(v)],
                }
                if replay_bugs:
                    rep = replay(inst, setup, term, valuation)
                    cex.update(rep.to_json())
                    cex["replay_confirmed"] = rep.confirmed
                return Verdict(BUG, "decoder fails to restore the encoded state", cex, timings, stats)
            if isinstance(res, Unknown):
                inconclusive.append(f"solver: {res.reason}")
        timings["smt"] += time.perf_counter() - t0
    if inconclusive:
        return Verdict(INCONCLUSIVE, "; ".join(inconclusive), None, timings, stats)
    return Verdict(VERIFIED, "all terminal queries unsat", None, timings, stats)


def complete_valuation(model: Mapping[str, int], term: Config, setup: Setup) -> dict[str, int]:
    """Model values plus 0 for every symbol the solver did not mention."""
    names = set(setup.error_vars) | setup.state.phase_vars() | term.state.phase_vars()
    names |= set(variables([term.path_condition()]))
    for rec in term.ext_log:
        names |= set(variables(list(rec.outs)))
    for rec in term.meas_log:
        if rec.symbol:
            names.add(rec.symbol)
    val = {k: 0 for k in names}
    val.update({k: int(v) for k, v in model.items()})
    return val


def replay(inst: DecoderInstance, setup: Setup, term: Config, valuation: Mapping[str, int]) -> ReplayReport:
    """Re-run the failing path concretely under ``valuation``.

    External calls return the model's outputs and random measurements the
    model's outcomes.  The report says whether the concrete final state
    differs from the initial one and whether the model respects the decoder
    contracts and the error budget; a model violating either is spurious.
    """
    contract_ok = all(evaluate(c, valuation) for c in term.pc)
    errors_ok = bool(evaluate(setup.constraint, valuation))
    init = setup.state.instantiate(valuation)
    answers = [[evaluate(o, valuation) for o in rec.outs] for rec in term.ext_log]
    forced = [valuation[r.symbol] for r in term.meas_log if r.symbol]
    store = {v: valuation.get(v, 0) for v in setup.program.inputs}
    res = concrete_run(setup.program, store, init.copy(), ext_answers=answers, forced=forced)
    before, after = init.canonical(), res.state.canonical()
    differs = before != after
    if not (contract_ok and errors_ok):
        reason = "spurious: model violates the decoder contract or error budget"
    elif differs:
        reason = "confirmed: concrete final state differs from the initial state"
    else:
        reason = "not reproduced: concrete final state equals the initial state"
    return ReplayReport(differs and contract_ok and errors_ok, reason, contract_ok, errors_ok,
                        [tuple(x) for x in before], [tuple(x) for x in after])


def find_bug(inst: DecoderInstance, solver: SolverConfig | None = None, **kw) -> Verdict:
    return verify_decoder(inst, solver, **kw)

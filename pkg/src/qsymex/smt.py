"""SMT-LIB 2 (QF_BV) scripts and an external solver driver.

Each query runs one solver process fed over stdin.  The solver command is
taken, in order, from an explicit :class:`SolverConfig`, the
``QSYMEX_SOLVER`` environment variable, ``bitwuzla`` on ``PATH`` and finally
``z3 -in``.
"""

from __future__ import annotations

import os
import shlex
import shutil
import subprocess
import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .symexpr import BoolExpr, Expr, parse_sexpr, smt_symbol, to_smt_with_decls

ENV_VAR = "QSYMEX_SOLVER"


class SolverNotFound(RuntimeError):
    pass


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class Sat:
    model: dict[str, int]


@dataclass(frozen=True)
class Unsat:
    pass


@dataclass(frozen=True)
class Unknown:
    reason: str


CheckResult = Sat | Unsat | Unknown


@dataclass
class SolverConfig:
    command: list[str] | None = None
    timeout: float | None = None
    stats: dict = field(default_factory=lambda: {"queries": 0, "seconds": 0.0})

    def resolve(self) -> list[str]:
        if self.command:
            cmd = list(self.command)
        elif os.environ.get(ENV_VAR):
            cmd = shlex.split(os.environ[ENV_VAR])
        elif shutil.which("bitwuzla"):
            cmd = ["bitwuzla"]
        elif shutil.which("z3"):
            cmd = ["z3", "-in"]
        else:
            raise SolverNotFound(
                f"no SMT solver found: install bitwuzla or z3, or set {ENV_VAR}")
        if shutil.which(cmd[0]) is None and not os.path.exists(cmd[0]):
            raise SolverNotFound(f"solver executable {cmd[0]!r} not found")
        return cmd

    def name(self) -> str:
        try:
            return os.path.basename(self.resolve()[0])
        except SolverNotFound:
            return "none"


def emit_script(goal: BoolExpr, assumptions: Iterable[BoolExpr] = (), get_values: bool = True) -> str:
    """Script asserting ``assumptions`` and ``goal``; asks for every symbol on sat."""
    exprs = list(assumptions) + [goal]
    texts, decls = to_smt_with_decls(exprs)
    lines = ["(set-logic QF_BV)"]
    if get_values:
        lines.insert(0, "(set-option :produce-models true)")
    for name, w in decls.items():
        sort = "Bool" if w == 0 else f"(_ BitVec {w})"
        lines.append(f"(declare-fun {smt_symbol(name)} () {sort})")
    for t in texts:
        lines.append(f"(assert {t})")
    lines.append("(check-sat)")
    if get_values and decls:
        lines.append("(get-value (" + " ".join(smt_symbol(k) for k in decls) + "))")
    lines.append("(exit)")
    return "\n".join(lines) + "\n"


def _parse_value(v) -> int:
    if v == "true":
        return 1
    if v == "false":
        return 0
    if isinstance(v, str):
        if v.startswith("#b"):
            return int(v[2:], 2)
        if v.startswith("#x"):
            return int(v[2:], 16)
    if isinstance(v, list) and len(v) == 3 and v[0] == "_" and v[1].startswith("bv"):
        return int(v[1][2:])
    raise SolverError(f"cannot read model value {v!r}")


def parse_output(out: str) -> CheckResult:
    items = parse_sexpr(out) if out.strip() else []
    if not items:
        return Unknown("empty solver output")
    head = items[0]
    if head == "unsat":
        return Unsat()
    if head == "unknown":
        return Unknown("solver returned unknown")
    if head != "sat":
        if isinstance(head, list) and head and head[0] == "error":
            raise SolverError(" ".join(map(str, head[1:])))
        raise SolverError(f"unexpected solver output: {out[:200]!r}")
    model: dict[str, int] = {}
    for item in items[1:]:
        if isinstance(item, list):
            for pair in item:
                if isinstance(pair, list) and len(pair) == 2 and isinstance(pair[0], str):
                    model[pair[0]] = _parse_value(pair[1])
    return Sat(model)


def check(script: str, config: SolverConfig | None = None) -> CheckResult:
    config = config or SolverConfig()
    cmd = config.resolve()
    t0 = time.perf_counter()
    try:
        proc = subprocess.run(cmd, input=script, capture_output=True, text=True,
                              timeout=config.timeout)
    except subprocess.TimeoutExpired:
        return Unknown("timeout")
    finally:
        config.stats["queries"] += 1
        config.stats["seconds"] += time.perf_counter() - t0
    if proc.returncode != 0 and not proc.stdout.strip():
        raise SolverError(f"solver exited with {proc.returncode}: {proc.stderr.strip()[:300]}")
    return parse_output(proc.stdout)


def check_formula(goal: BoolExpr, assumptions: Iterable[BoolExpr] = (),
                  config: SolverConfig | None = None) -> CheckResult:
    return check(emit_script(goal, assumptions), config)


def model_value(model: Mapping[str, int], e: Expr) -> int:
    from .symexpr import evaluate

    return evaluate(e, model)

"""Command line interface: ``qsymex verify|findbug|run|sample|bench``.

Exit codes: 0 verified (or success), 1 bug found, 2 inconclusive, 64 bad
command line, 65 malformed program file, 69 no SMT solver available.
"""

from __future__ import annotations

import argparse
import csv
import json
import shlex
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .chp import ConcreteTableau
from .codes import repetition, tanner, toric
from .engine import Engine, EngineError, concrete_run
from .qprog import ParseError, parse, validate
from .smt import SolverConfig, SolverNotFound
from .symstab import SymTableau
from .verify import BUG, INCONCLUSIVE, VERIFIED, verify_decoder

EXIT_OK = 0
EXIT_BUG = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64
EXIT_DATAERR = 65
EXIT_UNAVAILABLE = 69

_VERDICT_EXIT = {VERIFIED: EXIT_OK, BUG: EXIT_BUG, INCONCLUSIVE: EXIT_INCONCLUSIVE}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D401 - argparse hook
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers") from None
    if not vals or min(vals) < 2:
        raise argparse.ArgumentTypeError("qubit counts must be >= 2")
    return vals


def _bindings(text: str) -> dict[str, int]:
    out = {}
    for item in filter(None, (x.strip() for x in text.split(","))):
        if "=" not in item:
            raise argparse.ArgumentTypeError(f"expected name=0|1, got {item!r}")
        k, v = item.split("=", 1)
        if v not in ("0", "1"):
            raise argparse.ArgumentTypeError(f"value of {k} must be 0 or 1")
        out[k.strip()] = int(v)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qsymex", description="Symbolic execution of quantum error-correction programs.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, default_decoder, help_text in (
        ("verify", "correct", "verify a decoder against an error budget"),
        ("findbug", "buggy", "search for a counterexample (buggy decoder by default)"),
    ):
        v = sub.add_parser(name, help=help_text)
        v.add_argument("--code", required=True, choices=["repetition", "toric", "tanner"])
        v.add_argument("--n", type=_positive, help="repetition code length")
        v.add_argument("--d", type=_positive, help="toric code size")
        v.add_argument("--k", type=_positive, default=1, help="Tanner group factor")
        v.add_argument("--m", type=_positive, default=1, help="Tanner group exponent")
        v.add_argument("--dmax", type=_nonneg, help="error budget for each error type")
        v.add_argument("--nerr-x", type=_nonneg)
        v.add_argument("--nerr-z", type=_nonneg)
        v.add_argument("--decoder", choices=["correct", "buggy"], default=default_decoder)
        v.add_argument("--buggy", dest="decoder", action="store_const", const="buggy",
                       help="shorthand for --decoder buggy")
        v.add_argument("--basis", choices=["Z", "X", "both"], default="both")
        v.add_argument("--solver", help="solver command line, e.g. 'z3 -in'")
        v.add_argument("--timeout", type=float, help="per-query solver timeout in seconds")
        v.add_argument("--deadline", type=float, help="overall time budget in seconds")
        v.add_argument("--jobs", type=_positive, default=1, help="parallel solver processes")
        v.add_argument("--no-replay", action="store_true")
        v.add_argument("--fork-budget", type=_positive, default=1 << 16)
        v.add_argument("--out", help="write the full JSON report here instead of stdout")
        v.add_argument("--figure", help="write a stage-timing figure (PNG) here")

    r = sub.add_parser("run", help="symbolically execute a program file")
    r.add_argument("--program", required=True)
    r.add_argument("--no-sym-pauli", action="store_true", help="keep guarded Paulis as if statements")
    r.add_argument("--concrete", action="store_true", help="run concretely instead")
    r.add_argument("--inputs", type=_bindings, default={}, help="name=0|1,... for concrete runs")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--fork-budget", type=_positive, default=1 << 16)
    r.add_argument("--prune", action="store_true", help="drop paths whose condition the solver refutes")
    r.add_argument("--solver", help="solver command line used by --prune")
    r.add_argument("--out")

    s = sub.add_parser("sample", help="sample measurement records")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--program")
    src.add_argument("--random-circuit", "--random", dest="random", type=_positive, metavar="N",
                     help="layered random circuit on N qubits")
    s.add_argument("--shots", type=_positive, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--inputs", type=_bindings, default={})
    s.add_argument("--format", choices=["bits", "csv", "json"], default="bits",
                   help="bits: one 0/1 row per shot; csv: with a header; json: names plus rows")
    s.add_argument("--out", help="output file (default stdout)")

    b = sub.add_parser("bench", help="sampling benchmark on layered random circuits")
    b.add_argument("--ns", type=_int_list, default=[40, 100, 200])
    b.add_argument("--shots", type=_positive, default=10000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--baseline-shots", type=_nonneg, default=2,
                   help="shots for the concrete re-simulation baseline (0 to skip)")
    b.add_argument("--jobs", type=_positive, default=1)
    b.add_argument("--out", default="bench.csv")
    b.add_argument("--figure", help="PNG path (default: next to the CSV)")
    return p


def _decoder_instance(a):
    if a.code == "repetition":
        if a.n is None:
            raise _UsageError("--code repetition needs --n")
        if a.n < 3:
            raise _UsageError("--n must be at least 3")
        inst = repetition(a.n, buggy=a.decoder == "buggy")
    elif a.code == "toric":
        if a.d is None:
            raise _UsageError("--code toric needs --d")
        if a.d < 2:
            raise _UsageError("--d must be at least 2")
        inst = toric(a.d, buggy=a.decoder == "buggy", nerr=a.dmax)
    else:
        inst = tanner(a.k, a.m, nerr=1 if a.dmax is None else a.dmax, buggy=a.decoder == "buggy")
    nx = a.nerr_x if a.nerr_x is not None else a.dmax
    nz = a.nerr_z if a.nerr_z is not None else (a.dmax if a.code != "repetition" else None)
    return inst, nx, nz


class _UsageError(Exception):
    pass


def _write_json(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=False)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_verify(a) -> int:
    inst, nx, nz = _decoder_instance(a)
    solver = SolverConfig(command=shlex.split(a.solver) if a.solver else None, timeout=a.timeout)
    solver.resolve()
    bases = ("Z", "X") if a.basis == "both" else (a.basis,)
    verdict = verify_decoder(inst, solver, nerr_x=nx, nerr_z=nz, bases=bases,
                             replay_bugs=not a.no_replay, deadline=a.deadline, jobs=a.jobs,
                             fork_budget=a.fork_budget)
    report = {
        "tool": "qsymex",
        "command": a.command,
        "code": {"name": inst.code.name, "n": inst.code.n, "k": inst.code.k},
        "decoder": {
            "variant": a.decoder,
            "nerr_x": inst.nerr_x if nx is None else nx,
            "nerr_z": inst.nerr_z if nz is None else nz,
        },
    }
    report.update(verdict.to_json())
    if a.command == "findbug" and not a.out:
        # findbug prints only the counterexample (null when there is none)
        _write_json(report["counterexample"], None)
    else:
        _write_json(report, a.out)
    if a.figure:
        from .plotting import plot_stage_times

        plot_stage_times(f"{inst.code.name}: {verdict.status}", report["timings_ms"], a.figure)
    return _VERDICT_EXIT[verdict.status]


def _load_program(path: str, sym_pauli: bool = True):
    text = Path(path).read_text()
    prog = parse(text, sym_pauli=sym_pauli)
    diags = validate(prog)
    if diags:
        raise ParseError("; ".join(str(d) for d in diags))
    return prog


def cmd_run(a) -> int:
    prog = _load_program(a.program, sym_pauli=not a.no_sym_pauli)
    if a.concrete:
        missing = [x for x in prog.inputs if x not in a.inputs]
        if missing:
            raise _UsageError(f"missing --inputs for {missing}")
        res = concrete_run(prog, a.inputs, ConcreteTableau(prog.n_qubits),
                           rng=np.random.Generator(np.random.Philox(a.seed)))
        out = {
            "store": res.store,
            "probability": str(res.prob),
            "stabilizers": [f"{'-' if ph else '+'}{p.label()}" for p, ph in res.state.stabilizers()],
            "trace": [list(step) for step in res.trace],
        }
    else:
        solver = None
        if a.prune:
            solver = SolverConfig(command=shlex.split(a.solver) if a.solver else None)
            solver.resolve()
        engine = Engine(fork_budget=a.fork_budget, prune=a.prune, solver=solver)
        terms = engine.explore(prog, SymTableau.zero_state(prog.n_qubits))
        out = {"terminals": [t.to_json() for t in terms]}
    _write_json(out, a.out)
    return EXIT_OK


def cmd_sample(a) -> int:
    from .sampler import compile_sampler, gen_layered_random_circuit

    prog = gen_layered_random_circuit(a.random, a.seed) if a.random else _load_program(a.program)
    cs = compile_sampler(prog)
    bits = cs.sample(a.shots, seed=a.seed, fixed=a.inputs)
    fh = open(a.out, "w", newline="") if a.out else sys.stdout
    try:
        if a.format == "csv":
            w = csv.writer(fh)
            w.writerow(cs.names)
            w.writerows(bits.tolist())
        elif a.format == "json":
            rows = ["".join(map(str, r)) for r in bits.tolist()]
            json.dump({"names": cs.names, "shots": rows}, fh)
            fh.write("\n")
        else:
            for r in bits:
                fh.write("".join("1" if b else "0" for b in r) + "\n")
    finally:
        if a.out:
            fh.close()
    return EXIT_OK


def bench_one(n: int, shots: int, seed: int, baseline_shots: int) -> dict:
    from .sampler import compile_sampler, concrete_shots_per_second, gen_layered_random_circuit

    prog = gen_layered_random_circuit(n, seed)
    cs = compile_sampler(prog)
    t0 = time.perf_counter()
    cs.sample(shots, seed=seed)
    dt = time.perf_counter() - t0
    row = {"n": n, "init_ms": round(cs.compile_seconds * 1000, 3), "samples_per_sec": round(shots / dt, 1)}
    if baseline_shots:
        row["baseline_per_sec"] = round(concrete_shots_per_second(prog, baseline_shots, seed), 4)
    return row


def cmd_bench(a) -> int:
    args = [(n, a.shots, a.seed, a.baseline_shots) for n in a.ns]
    if a.jobs > 1:
        with ProcessPoolExecutor(max_workers=a.jobs) as pool:
            rows = list(pool.map(bench_one, *zip(*args)))
    else:
        rows = [bench_one(*x) for x in args]
    out = Path(a.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "init_ms", "samples_per_sec"])
        for r in rows:
            w.writerow([r["n"], r["init_ms"], r["samples_per_sec"]])
    from .plotting import plot_bench

    fig = Path(a.figure) if a.figure else out.with_suffix(".png")
    plot_bench(rows, fig)
    print(out.read_text(), end="")
    print(f"figure: {fig}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "findbug": cmd_verify, "run": cmd_run, "sample": cmd_sample,
            "bench": cmd_bench}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    try:
        return COMMANDS[a.command](a)
    except _UsageError as e:
        print(f"qsymex: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SolverNotFound as e:
        print(f"qsymex: {e}", file=sys.stderr)
        return EXIT_UNAVAILABLE
    except (ParseError, EngineError, OSError) as e:
        print(f"qsymex: {e}", file=sys.stderr)
        return EXIT_DATAERR


if __name__ == "__main__":
    sys.exit(main())

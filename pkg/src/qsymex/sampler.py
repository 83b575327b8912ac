"""Fast measurement sampling for straight-line Clifford programs.

The program is executed symbolically once.  Its single terminal gives
every measurement outcome as an XOR of atoms over the random measurement
symbols and the caller's fixed inputs.  Sampling then only draws the random
symbols and evaluates those XORs, 64 shots per machine word.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .chp import ConcreteTableau
from .engine import Engine, concrete_run
from .qprog import If, Measure, Program, Seq, Stmt, SymPauli, Unitary, walk
from .symexpr import And, AtomTable, BoolExpr, Const, Not, Or, Var, Xor, _postorder, iter_bits
from .symstab import SymTableau

ALL_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)


class SamplerError(ValueError):
    pass


def make_rng(seed: int | None) -> np.random.Generator:
    """Counter-based generator (Philox) so streams are reproducible per seed."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass
class CompiledSampler:
    names: list[str]
    random_symbols: list[str]
    fixed_symbols: list[str]
    atoms: list[BoolExpr]
    rows: list[np.ndarray]
    consts: np.ndarray
    compile_seconds: float

    @property
    def n_measurements(self) -> int:
        return len(self.names)

    def _atom_values(self, env: dict[str, np.ndarray], w: int) -> np.ndarray:
        memo: dict = {}
        out = np.zeros((max(1, len(self.atoms)), w), dtype=np.uint64)
        for i, atom in enumerate(self.atoms):
            for node in _postorder(atom):
                if node in memo:
                    continue
                if isinstance(node, Var):
                    memo[node] = env[node.name]
                elif isinstance(node, Const):
                    memo[node] = np.full(w, ALL_ONES if node.value else 0, dtype=np.uint64)
                elif isinstance(node, Not):
                    memo[node] = ~memo[node.arg]
                elif isinstance(node, And):
                    memo[node] = np.bitwise_and.reduce([memo[a] for a in node.args])
                elif isinstance(node, Or):
                    memo[node] = np.bitwise_or.reduce([memo[a] for a in node.args])
                elif isinstance(node, Xor):
                    v = np.bitwise_xor.reduce([memo[a] for a in node.args])
                    memo[node] = ~v if node.neg else v
                else:
                    raise SamplerError(f"unsupported atom {node!r}")
            out[i] = memo[atom]
        return out

    def sample_words(self, shots: int, rng: np.random.Generator,
                     fixed: Mapping[str, int] | None = None) -> np.ndarray:
        """Packed outcomes: ``(n_measurements, ceil(shots/64))`` uint64."""
        fixed = fixed or {}
        missing = [s for s in self.fixed_symbols if s not in fixed]
        if missing:
            raise SamplerError(f"unbound inputs: {missing}")
        w = (shots + 63) // 64
        env: dict[str, np.ndarray] = {}
        for s in self.random_symbols:
            env[s] = rng.integers(0, ALL_ONES, size=w, dtype=np.uint64, endpoint=True)
        for s in self.fixed_symbols:
            env[s] = np.full(w, ALL_ONES if fixed[s] else 0, dtype=np.uint64)
        vals = self._atom_values(env, w)
        out = np.empty((len(self.names), w), dtype=np.uint64)
        for m, idx in enumerate(self.rows):
            if idx.size:
                out[m] = np.bitwise_xor.reduce(vals[idx], axis=0)
            else:
                out[m] = 0
            if self.consts[m]:
                out[m] ^= ALL_ONES
        return out

    def sample(self, shots: int, seed: int | None = None, fixed: Mapping[str, int] | None = None,
               batch: int = 1 << 16) -> np.ndarray:
        """``(shots, n_measurements)`` array of 0/1 outcomes.

        Reproducible for a fixed ``(seed, batch)`` pair; the batch size
        changes the order in which random words are drawn.
        """
        rng = make_rng(seed)
        out = np.empty((shots, len(self.names)), dtype=np.uint8)
        done = 0
        while done < shots:
            b = min(batch, shots - done)
            words = self.sample_words(b, rng, fixed)
            bits = np.unpackbits(words.astype("<u8").view(np.uint8), axis=1, bitorder="little")[:, :b]
            out[done:done + b] = bits.T
            done += b
        return out


def compile_sampler(prog: Program) -> CompiledSampler:
    """Symbolically execute ``prog`` from ``|0...0>`` and keep the outcome formulas.

    The program must not branch: ``if`` statements are rejected since they
    would give several terminals.  Guarded Paulis and program inputs are fine;
    inputs are bound at sampling time.
    """
    t0 = time.perf_counter()
    for s in walk(prog.body.stmts):
        if isinstance(s, If):
            raise SamplerError("sampler needs a program without if statements")
    engine = Engine()
    terms = engine.explore(prog, SymTableau.zero_state(prog.n_qubits))
    if len(terms) != 1:
        raise SamplerError(f"expected one terminal, got {len(terms)}")
    term = terms[0]
    table = AtomTable()
    rows, consts = [], []
    for rec in term.meas_log:
        mask, c = table.encode(rec.outcome)
        rows.append(np.fromiter(iter_bits(mask), dtype=np.int64))
        consts.append(c)
    random_symbols = [s for s, _ in term.probs]
    rnd = set(random_symbols)
    fixed: list[str] = []
    for a in table.atoms:
        for node in _postorder(a):
            if isinstance(node, Var) and node.name not in rnd and node.name not in fixed:
                fixed.append(node.name)
    return CompiledSampler([r.var for r in term.meas_log], random_symbols, fixed, table.atoms,
                           rows, np.array(consts, dtype=np.uint8), time.perf_counter() - t0)


# --------------------------------------------------------------------------
# random circuits and the concrete baseline


def gen_layered_random_circuit(n: int, seed: int, layers: int | None = None) -> Program:
    """``n`` layers (by default) of random ``H/S/I`` on every qubit, then
    ``min(10, n//2)`` disjoint CNOTs and ``ceil(n/20)`` mid-circuit
    measurements; every qubit is measured at the end."""
    rng = make_rng(seed)
    layers = n if layers is None else layers
    n_cnot = min(10, n // 2)
    n_meas = math.ceil(n / 20)
    stmts: list[Stmt] = []
    k = 0
    for _ in range(layers):
        for q in range(n):
            stmts.append(Unitary(("H", "S", "I")[int(rng.integers(3))], (q,)))
        perm = rng.permutation(n)
        for j in range(n_cnot):
            stmts.append(Unitary("CNOT", (int(perm[2 * j]), int(perm[2 * j + 1]))))
        for q in rng.choice(n, size=n_meas, replace=False):
            stmts.append(Measure(int(q), f"m_{k}"))
            k += 1
    for q in range(n):
        stmts.append(Measure(q, f"m_{k}"))
        k += 1
    return Program(n, Seq(tuple(stmts)))


def reference_sample(prog: Program, shots: int, seed: int | None = None,
                     fixed: Mapping[str, int] | None = None) -> np.ndarray:
    """Concrete Monte-Carlo: run the tableau simulator with per-shot phases.

    Independent of the symbolic machinery; used as the statistical oracle.
    """
    rng = make_rng(seed)
    fixed = fixed or {}
    t = ConcreteTableau(prog.n_qubits, shots)
    cols = []
    for s in walk(prog.body.stmts):
        if isinstance(s, Seq):
            continue
        if isinstance(s, Unitary):
            t.apply(s.gate, s.qubits)
        elif isinstance(s, SymPauli):
            from .symexpr import evaluate

            if evaluate(s.guard, fixed):
                t.apply(s.pauli, (s.qubit,))
        elif isinstance(s, Measure):
            _, words = t.measure(s.qubit, rng)
            cols.append(words)
        else:
            raise SamplerError(f"reference sampler cannot run {type(s).__name__}")
    if not cols:
        return np.zeros((shots, 0), dtype=np.uint8)
    words = np.stack(cols)
    bits = np.unpackbits(words.astype("<u8").view(np.uint8), axis=1, bitorder="little")[:, :shots]
    return bits.T.copy()


def concrete_shots_per_second(prog: Program, shots: int = 3, seed: int = 0) -> float:
    """Throughput of re-running the single-shot concrete interpreter."""
    rng = make_rng(seed)
    t0 = time.perf_counter()
    for _ in range(shots):
        concrete_run(prog, {}, ConcreteTableau(prog.n_qubits), rng=rng)
    return shots / (time.perf_counter() - t0)


def tv_marginals(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-column total variation between two 0/1 sample matrices."""
    return np.abs(a.mean(axis=0) - b.mean(axis=0))


def tv_pairs(a: np.ndarray, b: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    """Total variation of the joint distribution of each column pair."""
    out = np.empty(len(pairs))
    for k, (i, j) in enumerate(pairs):
        ca = np.bincount(2 * a[:, i].astype(np.int64) + a[:, j], minlength=4) / len(a)
        cb = np.bincount(2 * b[:, i].astype(np.int64) + b[:, j], minlength=4) / len(b)
        out[k] = 0.5 * np.abs(ca - cb).sum()
    return out

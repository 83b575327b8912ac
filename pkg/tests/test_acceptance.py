"""Acceptance criteria, one test per criterion, with a PASS/FAIL summary line each.

Lines are printed as they complete (visible with ``-s``) and repeated in the
``acceptance criteria`` section at the end of the pytest report.
"""

import os
import random
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from qsymex.engine import Engine, explore
from qsymex.codes import repetition, tanner, tanner_check_rows, toric, toric_code
from qsymex.qprog import parse
from qsymex.sampler import (
    compile_sampler,
    concrete_shots_per_second,
    gen_layered_random_circuit,
    reference_sample,
    tv_marginals,
    tv_pairs,
)
from qsymex.symexpr import FreshGen, Var, bxor, evaluate
from qsymex.symstab import SymTableau, equality_formula
from qsymex.verify import BUG, INCONCLUSIVE, VERIFIED, build_setup, verify_decoder

import oracles
from conftest import ACCEPTANCE
from progen import coexecute, random_initial, random_program
from symgen import apply_ops, eval_stabs, random_initial as sym_initial, random_ops, valuations

ROOT = Path(__file__).resolve().parent.parent
BITFLIP = (ROOT / "programs" / "bitflip3.qp").read_text()
STRETCH = os.environ.get("QSYMEX_STRETCH") == "1"


@contextmanager
def criterion(name: str):
    notes: list[str] = []
    try:
        yield notes
    except BaseException as exc:
        msg = "; ".join(notes + [f"{type(exc).__name__}: {exc}".splitlines()[0]])
        ACCEPTANCE.append((name, False, msg))
        print(f"\nFAIL  {name}: {msg}")
        raise
    msg = "; ".join(notes)
    ACCEPTANCE.append((name, True, msg))
    print(f"\nPASS  {name}: {msg}")


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def test_1_bitflip_decoder():
    with criterion("1 three-qubit bit-flip decoder") as notes:
        v, dt = timed(verify_decoder, repetition(3), nerr_x=1, bases=("Z", "X"))
        notes.append(f"repetition n=3 dmax=1 -> {v.status} in {dt:.2f}s")
        assert v.status == VERIFIED and dt < 10
        # syndrome bindings of the three-qubit bit-flip decoder
        init = SymTableau.from_generators([("ZII", Var("s")), "+ZZI", "+IZZ"])
        (t,) = explore(parse(BITFLIP), init)
        e1, e2, e3 = Var("e1"), Var("e2"), Var("e3")
        assert t.store["m1"] == bxor(e1, e2) and t.store["m2"] == bxor(e2, e3)
        notes.append("m1 = e1^e2, m2 = e2^e3")


@pytest.mark.parametrize("n", [5, 11, 25, 51])
def test_2_bug_finding(n):
    with criterion(f"2 buggy repetition n={n}") as notes:
        v, dt = timed(verify_decoder, repetition(n, buggy=True))
        cex = v.counterexample or {}
        notes.append(f"{v.status}, replay={cex.get('replay_confirmed')}, {dt:.2f}s")
        assert v.status == BUG and cex["replay_confirmed"] and dt < 120
        assert cex["initial_tableau"] != cex["final_tableau"]


def test_2_large_instance_front_end():
    with criterion("2 n=1000 Init+QSE") as notes:
        inst = repetition(1000, buggy=True)
        t0 = time.perf_counter()
        total = 0
        for basis in ("Z", "X"):
            setup = build_setup(inst, basis)
            terms = Engine(inst.externals).explore(setup.program, setup.state.copy())
            total += len(terms)
        dt = time.perf_counter() - t0
        notes.append(f"{total} terminals over both bases in {dt:.2f}s")
        assert dt < 60


def test_3_path_counts():
    with criterion("3 path counts") as notes:
        init = SymTableau.from_generators([("ZII", Var("s")), "+ZZI", "+IZZ"])
        sp = len(explore(parse(BITFLIP), init.copy()))
        ifs_src = BITFLIP
        for k in (1, 2, 3):
            ifs_src = ifs_src.replace(f"if (e{k} == 1) X q{k};", f"X[e{k}] q{k};")
        ifs = len(explore(parse(ifs_src, sym_pauli=False), init.copy()))
        notes.append(f"symbolic Paulis: {sp} terminal, if statements: {ifs} terminals")
        assert (sp, ifs) == (1, 8)


@pytest.mark.parametrize("buggy", [False, True])
def test_4_toric_three(buggy):
    with criterion(f"4 toric d=3 {'buggy' if buggy else 'correct'}") as notes:
        v, dt = timed(verify_decoder, toric(3, buggy=buggy))
        notes.append(f"{v.status} in {dt:.2f}s")
        assert v.status == (BUG if buggy else VERIFIED) and dt < 600
        if buggy:
            assert v.counterexample["replay_confirmed"]


def test_4_toric_invariants():
    with criterion("4 toric invariants d<=8") as notes:
        for d in range(2, 9):
            code = toric_code(d)
            code.validate()
            assert (code.n, code.k, len(code.checks)) == (2 * d * d, 2, 2 * d * d - 2)
        notes.append("[[2d^2, 2, d]] counts and commuting checks for d = 2..8")


def test_5_tanner_construction():
    with criterion("5 Tanner sizes and orthogonality") as notes:
        sizes = []
        for k in (1, 2, 3, 4):
            n, hx_rows, hz_rows = tanner_check_rows(k)
            hx = np.array([[(r >> q) & 1 for q in range(n)] for r in hx_rows], dtype=np.int64)
            hz = np.array([[(r >> q) & 1 for q in range(n)] for r in hz_rows], dtype=np.int64)
            assert not ((hx @ hz.T) % 2).any()
            sizes.append(n)
        notes.append(f"n = {sizes}, H_X H_Z^T = 0")
        assert sizes == [343, 686, 1029, 1372]


@pytest.mark.skipif(not STRETCH, reason="stretch goal; set QSYMEX_STRETCH=1 (up to one hour)")
def test_5_tanner_stretch():
    with criterion("5 Tanner 343 verification (stretch)") as notes:
        v, dt = timed(verify_decoder, tanner(1), deadline=3600)
        notes.append(f"{v.status} in {dt:.0f}s ({v.reason})")
        assert v.status in (VERIFIED, INCONCLUSIVE)


def test_6_soundness_coexecution():
    with criterion("6 co-execution of 1000 random programs") as notes:
        bad = []
        for seed in range(1000):
            rng = random.Random(seed)
            n = rng.randint(1, 12)
            prog = random_program(rng, n, max_stmts=40)
            init = random_initial(rng, n)
            errs = coexecute(prog, init, rng)
            if errs:
                bad.append((seed, errs[0]))
        notes.append(f"{len(bad)} mismatches")
        assert bad == []


def test_7_brute_force_oracles():
    with criterion("7 dense/group oracles n<=4") as notes:
        checks = 0
        for seed in range(60):
            rng = random.Random(5000 + seed)
            n = 1 + seed % 4
            t = SymTableau.from_generators(sym_initial(rng, n))
            apply_ops(t, random_ops(rng, n, 10))
            u = t.copy()
            apply_ops(u, random_ops(rng, n, rng.randrange(3)))
            q = rng.randrange(n)
            m = t.copy()
            res = m.measure(q, FreshGen(), prefix="m")
            canon = t.canonical_form()
            eq = equality_formula(t, u)
            for v in valuations():
                psi = oracles.stabilizer_state(eval_stabs(t, v))
                p1 = oracles.prob_one(psi, q, n)
                if res.symbol is None:
                    assert abs(p1 - evaluate(res.outcome, v)) < 1e-9
                else:
                    assert abs(p1 - 0.5) < 1e-9
                g = oracles.stabilizer_group(eval_stabs(t, v))
                assert oracles.stabilizer_group(eval_stabs(canon, v)) == g
                assert bool(evaluate(eq, v)) == (g == oracles.stabilizer_group(eval_stabs(u, v)))
                checks += 1
        notes.append(f"{checks} valuations checked for measurement, canonical form and equality")


@pytest.mark.parametrize("n", [40, 100, 200])
def test_8_sampling(n):
    with criterion(f"8 sampling n={n}") as notes:
        shots = 100_000
        prog = gen_layered_random_circuit(n, seed=n)
        cs = compile_sampler(prog)
        fast, dt = timed(cs.sample, shots, seed=1)
        ref = reference_sample(prog, shots, seed=2)
        rng = np.random.default_rng(n)
        pairs = rng.choice(fast.shape[1], size=(200, 2))
        tvm, tvp = tv_marginals(fast, ref).max(), tv_pairs(fast, ref, pairs).max()
        notes.append(f"max TV marginal {tvm:.4f}, pairwise {tvp:.4f}")
        assert tvm <= 0.05 and tvp <= 0.05
        if n == 200:
            base = concrete_shots_per_second(prog, shots=2, seed=0)
            ratio = (shots / dt) / base
            notes.append(f"throughput {shots / dt:.0f}/s vs re-simulation {base:.2f}/s ({ratio:.0f}x)")
            assert ratio >= 100

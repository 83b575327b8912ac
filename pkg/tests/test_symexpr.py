import itertools
import shutil

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsymex.smt import SolverConfig, Unsat, check_formula
from qsymex.symexpr import (
    FALSE,
    TRUE,
    AtomTable,
    BVConst,
    FreshGen,
    Var,
    Xor,
    band,
    bnot,
    bor,
    bxor,
    count_le,
    evaluate,
    from_smt,
    iff,
    implies,
    popcount_bv,
    render,
    simplify,
    substitute,
    to_smt,
    to_smt_with_decls,
    variables,
)

NAMES = ["a", "b", "c", "d"]
a, b, c, d = map(Var, NAMES)


def exprs(max_leaves=12):
    leaves = st.sampled_from([Var(n) for n in NAMES] + [TRUE, FALSE])

    def extend(children):
        return st.one_of(
            children.map(bnot),
            st.lists(children, min_size=2, max_size=3).map(lambda xs: bxor(*xs)),
            st.lists(children, min_size=2, max_size=3).map(lambda xs: band(*xs)),
            st.lists(children, min_size=2, max_size=3).map(lambda xs: bor(*xs)),
            st.tuples(st.lists(children, min_size=1, max_size=4), st.integers(0, 3))
              .map(lambda t: count_le(t[0], t[1])),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


def all_valuations(names=NAMES):
    for bits in itertools.product((0, 1), repeat=len(names)):
        yield dict(zip(names, bits))


def test_constructor_normal_forms():
    assert bxor(a, a) == FALSE
    assert bxor(a, TRUE) == bnot(a)
    assert bnot(bnot(a)) == a
    assert bxor(a, b) == bxor(b, a)
    assert bxor(bxor(a, b), b) == a
    assert band(a, bnot(a)) == FALSE
    assert bor(a, bnot(a)) == TRUE
    assert band(a, TRUE) == a
    assert band(a, band(b, c)) == band(a, b, c)
    assert iff(a, a) == TRUE
    assert isinstance(bnot(bxor(a, b)), Xor)


def test_count_le_trivial_bounds():
    assert count_le([a, b], 2) == TRUE
    assert count_le([a, b], -1) == FALSE
    assert count_le([a, FALSE, FALSE], 1) == TRUE


@pytest.mark.parametrize("bound", range(0, 4))
def test_count_le_semantics(bound):
    e = count_le([a, b, c, d], bound)
    for v in all_valuations():
        assert evaluate(e, v) == int(sum(v.values()) <= bound)


def test_popcount_value():
    e = popcount_bv([a, b, c])
    for v in all_valuations():
        assert evaluate(e, v) == v["a"] + v["b"] + v["c"]


@settings(max_examples=300, deadline=None)
@given(exprs())
def test_simplify_preserves_semantics_and_is_idempotent(e):
    s = simplify(e)
    assert simplify(s) == s
    for v in all_valuations():
        assert evaluate(s, v) == evaluate(e, v)


@settings(max_examples=300, deadline=None)
@given(exprs())
def test_smt_round_trip(e):
    back = from_smt(to_smt(e))
    for v in all_valuations():
        assert evaluate(back, v) == evaluate(e, v)
    # rendering is canonical for hash-consed terms
    assert to_smt(from_smt(to_smt(e))) == to_smt(simplify(from_smt(to_smt(e))))


@settings(max_examples=200, deadline=None)
@given(exprs(), st.sampled_from(NAMES), exprs(4))
def test_substitute_matches_evaluation(e, name, repl):
    sub = substitute(e, {name: repl})
    for v in all_valuations():
        w = dict(v)
        w[name] = evaluate(repl, v)
        assert evaluate(sub, v) == evaluate(e, w)


def test_render_and_smt_text():
    e = band(bxor(a, b), bnot(c))
    assert render(e) in ("((a ^ b) & !c)", "(!c & (a ^ b))")
    assert to_smt(bxor(a, b)) == "(xor a b)"
    assert to_smt(bnot(bxor(a, b))) == "(not (xor a b))"
    assert to_smt(count_le([a, b, c], 1)).startswith("(bvule (bvadd")
    assert to_smt(Var("m 1")) == "|m 1|"


def test_declarations_follow_first_use():
    texts, decls = to_smt_with_decls([bxor(Var("z9"), Var("a1")), Var("k")])
    assert texts == ["(xor a1 z9)", "k"]
    assert list(decls) == ["a1", "z9", "k"]
    assert variables(popcount_bv([a, b])) == {"a": 0, "b": 0}


def test_evaluate_unbound_raises():
    with pytest.raises(KeyError):
        evaluate(band(a, b), {"a": 1})


def test_fresh_names():
    g = FreshGen(reserved={"m_1"})
    assert [g.name("m") for _ in range(3)] == ["m_0", "m_2", "m_3"]
    assert g.fresh("e") == Var("e_0")


def test_atom_table_encode_decode():
    t = AtomTable()
    for e in [bxor(a, b, c), bnot(a), band(a, b), TRUE, bnot(bxor(b, band(a, b)))]:
        m, k = t.encode(e)
        assert t.decode(m, k) == e
    vals = t.values({"a": 1, "b": 1, "c": 0})
    assert vals & (1 << t.intern(a))
    assert vals & (1 << t.intern(band(a, b)))
    assert not vals & (1 << t.intern(c))


@pytest.mark.skipif(not (shutil.which("z3") or shutil.which("bitwuzla")), reason="no SMT solver")
@settings(max_examples=25, deadline=None)
@given(exprs(8))
def test_solver_agrees_simplify_is_equivalent(e):
    # the solver parses our text and proves the simplified term equivalent
    goal = bnot(iff(e, simplify(from_smt(to_smt(e)))))
    assert isinstance(check_formula(goal, config=SolverConfig()), Unsat) or goal == FALSE


def test_implies_truth_table():
    for v in all_valuations(["a", "b"]):
        assert evaluate(implies(a, b), v) == int((not v["a"]) or v["b"])


def test_bvconst_width_checks():
    from qsymex.symexpr import SymExprError, bvadd, ule

    with pytest.raises(SymExprError):
        bvadd(BVConst(2, 1), BVConst(3, 1))
    with pytest.raises(SymExprError):
        ule(BVConst(2, 1), BVConst(3, 1))

"""Stabilizer codes and their decoder programs.

Each builder returns a :class:`DecoderInstance`: the code, a program that
measures every check in place and applies a correction, the external
decoder contracts it calls, and the error budget it is meant to handle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import gf2
from .engine import ExternalFnSpec
from .pauli import PauliString, symplectic
from .qprog import ExtCall, Program, Seq, Stmt, SymPauli, Unitary, Measure
from .symexpr import (
    BoolExpr,
    Expr,
    Var,
    band,
    bnot,
    bxor,
    count_le,
)


class CodeError(ValueError):
    pass


@dataclass
class CodeSpec:
    """Stabilizer code: independent checks plus paired logical operators."""

    name: str
    n: int
    checks: list[PauliString]
    logical_x: list[PauliString]
    logical_z: list[PauliString]
    distance: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.logical_z)

    def x_checks(self) -> list[PauliString]:
        return [c for c in self.checks if c.z == 0]

    def z_checks(self) -> list[PauliString]:
        return [c for c in self.checks if c.x == 0]

    def validate(self) -> None:
        """Raise :class:`CodeError` unless the stabilizer-code invariants hold."""
        n, checks = self.n, self.checks
        if any(c.n != n for c in checks + self.logical_x + self.logical_z):
            raise CodeError("operator size mismatch")
        if len(self.logical_x) != len(self.logical_z):
            raise CodeError("unpaired logical operators")
        if len(checks) + self.k != n:
            raise CodeError(f"{len(checks)} checks + {self.k} logicals != {n} qubits")
        if gf2.rank([c.as_int() for c in checks]) != len(checks):
            raise CodeError("checks are not independent")
        for i, a in enumerate(checks):
            for b in checks[i + 1:]:
                if symplectic(a, b):
                    raise CodeError("checks do not commute")
        for L in self.logical_x + self.logical_z:
            for c in checks:
                if symplectic(L, c):
                    raise CodeError("logical operator anticommutes with a check")
        for i, lx in enumerate(self.logical_x):
            for j, lz in enumerate(self.logical_z):
                if symplectic(lx, lz) != (i == j):
                    raise CodeError("logical operators are not paired")
        for group in (self.logical_x, self.logical_z):
            for i, a in enumerate(group):
                for b in group[i + 1:]:
                    if symplectic(a, b):
                        raise CodeError("logical operators of one kind anticommute")
        basis = gf2.reduce_basis([c.as_int() for c in checks])
        for L in self.logical_x + self.logical_z:
            if gf2.in_span(L.as_int(), basis):
                raise CodeError("logical operator lies in the stabilizer group")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "k": self.k,
            "distance": self.distance,
            "checks": [c.render() for c in self.checks],
            "logical_x": [p.render() for p in self.logical_x],
            "logical_z": [p.render() for p in self.logical_z],
            "meta": self.meta,
        }


@dataclass
class DecoderInstance:
    code: CodeSpec
    program: Program
    externals: dict[str, ExternalFnSpec]
    nerr_x: int
    nerr_z: int


# --------------------------------------------------------------------------
# CSS helpers


def css_code(name: str, n: int, hx: Sequence[int], hz: Sequence[int], distance: int | None = None,
             meta: dict | None = None) -> CodeSpec:
    """Build a :class:`CodeSpec` from X- and Z-check rows (ints over ``n`` bits).

    Dependent rows are dropped.  Logical operators come from
    ``ker(H_Z) / rowspace(H_X)`` (X type) and ``ker(H_X) / rowspace(H_Z)``
    (Z type), paired so that ``X_i`` and ``Z_j`` anticommute iff ``i == j``.
    """
    hx = [hx[i] for i in gf2.independent_subset(hx)]
    hz = [hz[i] for i in gf2.independent_subset(hz)]
    for a in hx:
        for b in hz:
            if (a & b).bit_count() & 1:
                raise CodeError("X and Z checks do not commute")
    lx = _quotient(gf2.nullspace(hz, n), hx)
    lz = _quotient(gf2.nullspace(hx, n), hz)
    if len(lx) != len(lz):
        raise CodeError("logical dimension mismatch")
    k = len(lx)
    if k:
        m = [sum(((a & b).bit_count() & 1) << j for j, b in enumerate(lz)) for a in lx]
        # want lx_i . lz'_j = delta_ij with lz' = B lz and B = (M^T)^-1
        mt = [sum(((m[i] >> j) & 1) << i for i in range(k)) for j in range(k)]
        b = gf2.inverse(mt, k)
        lz = [_combine(lz, row) for row in b]
    checks = [PauliString(n, r, 0) for r in hx] + [PauliString(n, 0, r) for r in hz]
    return CodeSpec(name, n, checks, [PauliString(n, r, 0) for r in lx],
                    [PauliString(n, 0, r) for r in lz], distance, meta or {})


def _combine(vecs: Sequence[int], sel: int) -> int:
    out = 0
    for j, v in enumerate(vecs):
        if (sel >> j) & 1:
            out ^= v
    return out


def _quotient(kernel: Sequence[int], rowspace: Sequence[int]) -> list[int]:
    basis = gf2.reduce_basis(rowspace)
    out = []
    for v in kernel:
        r = gf2.reduce_vec(v, basis)
        if r:
            basis[r.bit_length() - 1] = r
            out.append(v)
    return out


def support(p: PauliString) -> list[int]:
    return p.support


def measure_check_stmts(check: PauliString, target_name: str, target: int | None = None) -> list[Stmt]:
    """Measure a pure X- or Z-type check in place.

    CNOTs fold the parity onto one qubit of the support, which is then
    measured and unfolded; X-type checks are conjugated by ``H`` first.
    """
    qs = check.support
    if check.x and check.z:
        raise CodeError("only pure X- or Z-type checks are supported")
    t = qs[0] if target is None else target
    others = [q for q in qs if q != t]
    body: list[Stmt] = [Unitary("CNOT", (a, t)) for a in others]
    body.append(Measure(t, target_name))
    body += [Unitary("CNOT", (a, t)) for a in reversed(others)]
    if check.x:
        hs = [Unitary("H", (q,)) for q in qs]
        return hs + body + hs
    return body


def syndrome_condition(rows: Sequence[int], syndromes: Sequence[Expr], corr: Sequence[Expr],
                       bound: int) -> BoolExpr:
    """``H r == s`` and ``|r| <= bound``."""
    parts = []
    for row, s in zip(rows, syndromes):
        bits = [corr[q] for q in range(len(corr)) if (row >> q) & 1]
        parts.append(bnot(bxor(s, *bits)))
    parts.append(count_le(corr, bound))
    return band(*parts)


def _min_weight_decoder(rows: Sequence[int], n: int, bound: int):
    """Brute-force minimum-weight decoder used for concrete runs."""
    from itertools import combinations

    def decode(ins: list[int]) -> list[int]:
        syn = sum(int(b) << i for i, b in enumerate(ins))
        for w in range(bound + 1):
            for qs in combinations(range(n), w):
                e = sum(1 << q for q in qs)
                if gf2.matvec(rows, e) == syn:
                    return [(e >> q) & 1 for q in range(n)]
        return [0] * n

    return decode


def css_decoder_program(code: CodeSpec, nerr_x: int, nerr_z: int, buggy: bool = False) -> DecoderInstance:
    """Measure all checks, call a decoder per error type, apply corrections.

    The decoder contract asks for a correction with the measured syndrome and
    weight at most the injected error budget; two such vectors differ by a
    syndrome-free operator of weight below the distance when
    ``2 * budget < d``.  ``buggy`` adds a spurious ``X`` on qubit 0 that fires
    when the first ``nerr_x`` correction bits are all set.
    """
    n = code.n
    stmts: list[Stmt] = []
    zc, xc = code.z_checks(), code.x_checks()
    sz = [f"sz_{j}" for j in range(len(zc))]
    sx = [f"sx_{j}" for j in range(len(xc))]
    for c, name in zip(zc, sz):
        stmts += measure_check_stmts(c, name)
    for c, name in zip(xc, sx):
        stmts += measure_check_stmts(c, name)
    externals: dict[str, ExternalFnSpec] = {}
    zrows = [c.z for c in zc]
    xrows = [c.x for c in xc]
    if zc:
        rx = [f"rx_{q}" for q in range(n)]
        externals["decode_x"] = ExternalFnSpec(
            "decode_x", len(zc), n,
            lambda ins, outs, rows=zrows, b=nerr_x: syndrome_condition(rows, ins, outs, b),
            _min_weight_decoder(zrows, n, nerr_x))
        stmts.append(ExtCall(tuple(rx), "decode_x", tuple(sz)))
        stmts += [SymPauli("X", Var(r), q) for q, r in enumerate(rx)]
    if xc:
        rz = [f"rz_{q}" for q in range(n)]
        externals["decode_z"] = ExternalFnSpec(
            "decode_z", len(xc), n,
            lambda ins, outs, rows=xrows, b=nerr_z: syndrome_condition(rows, ins, outs, b),
            _min_weight_decoder(xrows, n, nerr_z))
        stmts.append(ExtCall(tuple(rz), "decode_z", tuple(sx)))
        stmts += [SymPauli("Z", Var(r), q) for q, r in enumerate(rz)]
    if buggy:
        t = max(1, nerr_x)
        stmts.append(SymPauli("X", band(*(Var(f"rx_{q}") for q in range(t))), 0))
    return DecoderInstance(code, Program(n, Seq(tuple(stmts))), externals, nerr_x, nerr_z)


# --------------------------------------------------------------------------
# repetition code


def repetition_code(n: int) -> CodeSpec:
    if n < 2:
        raise CodeError("repetition code needs n >= 2")
    checks = [PauliString(n, 0, (1 << j) | (1 << (j + 1))) for j in range(n - 1)]
    return CodeSpec(f"repetition-{n}", n, checks,
                    [PauliString(n, (1 << n) - 1, 0)], [PauliString(n, 0, 1)],
                    distance=n, meta={"family": "repetition"})


def repetition(n: int, buggy: bool = False) -> DecoderInstance:
    """Bit-flip repetition code with a minimum-weight-matching decoder call.

    All ``n`` cyclic parities ``Z_j Z_{j+1}`` (including ``Z_n Z_1``) are
    measured; the decoder returns ``r`` with ``s_j = r_j ^ r_{j+1}`` and
    ``|r| <= (n-1)//2``.  The buggy variant additionally flips qubit 1 when
    ``r_1 ... r_t`` are all set, ``t = (n-1)//2``.
    """
    if n < 3:
        raise CodeError("repetition decoder needs n >= 3")
    code = repetition_code(n)
    t = (n - 1) // 2
    stmts: list[Stmt] = []
    s = [f"s_{j + 1}" for j in range(n)]
    r = [f"r_{j + 1}" for j in range(n)]
    for j in range(n):
        a, b = j, (j + 1) % n
        stmts += [Unitary("CNOT", (a, b)), Measure(b, s[j]), Unitary("CNOT", (a, b))]

    cyc = [(1 << j) | (1 << ((j + 1) % n)) for j in range(n)]

    def cond(ins, outs):
        return syndrome_condition(cyc, ins, outs, t)

    ext = ExternalFnSpec("mwpm", n, n, cond, _repetition_decoder(n))
    stmts.append(ExtCall(tuple(r), "mwpm", tuple(s)))
    stmts += [SymPauli("X", Var(r[j]), j) for j in range(n)]
    if buggy:
        stmts.append(SymPauli("X", band(*(Var(r[j]) for j in range(max(1, t)))), 0))
    return DecoderInstance(code, Program(n, Seq(tuple(stmts))), {"mwpm": ext}, t, 0)


def _repetition_decoder(n: int):
    def decode(ins: list[int]) -> list[int]:
        # the two candidate corrections consistent with a cyclic syndrome
        e = [0] * n
        for j in range(1, n):
            e[j] = e[j - 1] ^ int(ins[j - 1])
        if sum(e) > n - sum(e):
            e = [1 - b for b in e]
        return e

    return decode


# --------------------------------------------------------------------------
# toric code


def toric_code(d: int) -> CodeSpec:
    """Toric code on a ``d x d`` torus; qubits live on edges.

    Edge ``2*(i*d+j)`` is horizontal and ``2*(i*d+j)+1`` vertical at site
    ``(i, j)``.  One star and one plaquette are dropped (they are products
    of the others).
    """
    if d < 2:
        raise CodeError("toric code needs d >= 2")
    n = 2 * d * d

    def h(i, j):
        return 2 * ((i % d) * d + (j % d))

    def v(i, j):
        return 2 * ((i % d) * d + (j % d)) + 1

    stars, plaqs = [], []
    for i in range(d):
        for j in range(d):
            stars.append(sum(1 << q for q in (h(i, j), h(i, j - 1), v(i, j), v(i - 1, j))))
            plaqs.append(sum(1 << q for q in (h(i, j), h(i + 1, j), v(i, j), v(i, j + 1))))
    code = css_code(f"toric-{d}", n, stars[:-1], plaqs[:-1], distance=d,
                    meta={"family": "toric", "d": d})
    if len(code.x_checks()) != d * d - 1 or len(code.z_checks()) != d * d - 1:
        raise CodeError("unexpected toric check rank")
    return code


def toric(d: int, buggy: bool = False, nerr: int | None = None) -> DecoderInstance:
    budget = (d - 1) // 2 if nerr is None else nerr
    return css_decoder_program(toric_code(d), budget, budget, buggy)


# --------------------------------------------------------------------------
# quantum Tanner codes on a cyclic group

# generator of the [7,4,3] Hamming code and of its dual (the [7,3] simplex code)
HAMMING_G = np.array([
    [1, 0, 0, 0, 1, 1, 0],
    [0, 1, 0, 0, 1, 0, 1],
    [0, 0, 1, 0, 0, 1, 1],
    [0, 0, 0, 1, 1, 1, 1],
], dtype=np.uint8)
HAMMING_H = np.array([
    [1, 1, 0, 1, 1, 0, 0],
    [1, 0, 1, 1, 0, 1, 0],
    [0, 1, 1, 1, 0, 0, 1],
], dtype=np.uint8)


def tanner_check_rows(k: int = 1, m: int = 1, ha: np.ndarray = HAMMING_G,
                      hb: np.ndarray = HAMMING_H) -> tuple[int, list[int], list[int]]:
    """All X- and Z-check rows (dependent ones included) of the Tanner code.

    Group ``Z_N`` with ``N = k * 7**m`` and generating sets
    ``A = B = {k * 7**(m-1) * i : i in 0..6}``.  Qubits are the squares
    ``(g, a, b)``.  Every vertex of ``V0 = V00 u V11`` carries the X checks
    ``u (x) v`` for rows ``u`` of ``ha`` and ``v`` of ``hb``; every vertex of
    ``V1 = V01 u V10`` carries the Z checks built from the dual codes.  Local
    coordinates are the positions of ``a`` in ``A`` and ``b`` in ``B``.
    Returns ``(n, hx, hz)`` with rows as integers over ``n`` bits.
    """
    if k < 1 or m < 1:
        raise CodeError("k and m must be positive")
    N = k * 7 ** m
    step = k * 7 ** (m - 1)
    A = [step * i for i in range(7)]
    B = list(A)
    na, nb = len(A), len(B)
    n = N * na * nb

    def sq(g, ia, ib):
        return (g % N) * na * nb + ia * nb + ib

    ha_perp = gf2.to_matrix(gf2.nullspace(gf2.from_matrix(ha), na), na)
    hb_perp = gf2.to_matrix(gf2.nullspace(gf2.from_matrix(hb), nb), nb)
    x_local = [(u, v) for u in ha for v in hb]
    z_local = [(u, v) for u in ha_perp for v in hb_perp]

    def check(pattern, squares_of):
        u, v = pattern
        bits = 0
        for ia in range(na):
            if not u[ia]:
                continue
            for ib in range(nb):
                if v[ib]:
                    bits |= 1 << squares_of(ia, ib)
        return bits

    hx, hz = [], []
    for g in range(N):
        for pat in x_local:
            hx.append(check(pat, lambda ia, ib, g=g: sq(g, ia, ib)))  # vertex (g, 00)
            hx.append(check(pat, lambda ia, ib, g=g: sq(g - A[ia] - B[ib], ia, ib)))  # (g, 11)
        for pat in z_local:
            hz.append(check(pat, lambda ia, ib, g=g: sq(g - A[ia], ia, ib)))  # (g, 01)
            hz.append(check(pat, lambda ia, ib, g=g: sq(g - B[ib], ia, ib)))  # (g, 10)
    return n, hx, hz


def tanner_code(k: int = 1, m: int = 1, ha: np.ndarray = HAMMING_G, hb: np.ndarray = HAMMING_H) -> CodeSpec:
    """Quantum Tanner code from :func:`tanner_check_rows`, dependent rows dropped."""
    n, hx, hz = tanner_check_rows(k, m, ha, hb)
    for a in hx:
        for b in hz:
            if (a & b).bit_count() & 1:
                raise CodeError("Tanner construction produced anticommuting checks")
    return css_code(f"tanner-{k}-{m}", n, hx, hz,
                    meta={"family": "tanner", "k": k, "m": m, "group_order": k * 7 ** m,
                          "x_rows": len(hx), "z_rows": len(hz)})


def tanner_check_matrices(code: CodeSpec) -> tuple[np.ndarray, np.ndarray]:
    hx = gf2.to_matrix([c.x for c in code.x_checks()], code.n)
    hz = gf2.to_matrix([c.z for c in code.z_checks()], code.n)
    return hx, hz


def tanner(k: int = 1, m: int = 1, nerr: int = 1, buggy: bool = False) -> DecoderInstance:
    return css_decoder_program(tanner_code(k, m), nerr, nerr, buggy)


# --------------------------------------------------------------------------
# error injection


def inject_errors(n: int, kind: str, dmax: int, prefix: str | None = None) -> tuple[list[Stmt], BoolExpr, list[str]]:
    """Guarded ``kind`` errors on every qubit with at most ``dmax`` of them active.

    Returns the statements ``kind[e_j] q_j``, the constraint
    ``sum(e) <= dmax`` and the error variable names (program inputs).
    """
    if kind not in ("X", "Y", "Z"):
        raise CodeError(f"bad error kind {kind!r}")
    prefix = prefix or f"e{kind.lower()}"
    names = [f"{prefix}_{j + 1}" for j in range(n)]
    stmts: list[Stmt] = [SymPauli(kind, Var(names[j]), j) for j in range(n)]
    return stmts, count_le([Var(x) for x in names], dmax), names

"""Symbolic stabilizer tableau.

The Pauli part is concrete and stored as packed ``uint64`` words: ``x`` and
``z`` have shape ``(2n, W)``, rows ``0..n-1`` are destabilizers and rows
``n..2n-1`` stabilizers.  Each row's sign is a symbolic Boolean phase kept in
affine form over a shared :class:`~qsymex.symexpr.AtomTable`: ``ph_mask[i]``
(a Python int) selects atoms and ``ph_const[i]`` is the constant bit.  Row
multiplication is then a handful of word XORs whatever the phase size.

Gate and measurement methods mutate the tableau in place; use
:meth:`SymTableau.copy` before forking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _bits
from .pauli import PauliString, gate_arity, plus_minus_masks, product_exponent
from .symexpr import (
    FALSE,
    TRUE,
    AtomTable,
    BoolExpr,
    FreshGen,
    band,
    bnot,
    bxor,
    const,
    render,
)
from .chp import DETERMINISTIC, RANDOM, ConcreteTableau


class TableauError(ValueError):
    pass


@dataclass(frozen=True)
class MeasResult:
    outcome: BoolExpr
    kind: str
    symbol: str | None = None


Generator = tuple[PauliString, BoolExpr | int | bool] | PauliString | str


def _as_generator(g: Generator) -> tuple[PauliString, BoolExpr]:
    if isinstance(g, str):
        neg = g.startswith("-")
        return PauliString.from_label(g.lstrip("+-")), const(neg)
    if isinstance(g, PauliString):
        return g, FALSE
    p, ph = g
    if isinstance(p, str):
        p = PauliString.from_label(p)
    if not isinstance(ph, BoolExpr):
        ph = const(bool(ph))
    return p, ph


def _symp(u: int, v: int, n: int) -> int:
    mask = (1 << n) - 1
    return (((u & mask) & (v >> n)) ^ ((u >> n) & (v & mask))).bit_count() & 1


def destabilizers_for(stabs: Sequence[int], n: int) -> list[int]:
    """Destabilizer rows for independent commuting ``2n``-bit stabilizer rows.

    Finds ``D0`` with ``<d_i, s_j> = delta_ij`` by elimination, then
    removes the symplectic products among the ``d_i`` by adding stabilizers:
    ``d_i += sum_{j<i} <d_i, d_j> s_j``.
    """
    mask = (1 << n) - 1
    # <d, s> = popcount(d & swap(s)) where swap exchanges the X and Z halves
    rows = [((s >> n) | ((s & mask) << n), 1 << i) for i, s in enumerate(stabs)]
    pivots: list[tuple[int, int]] = []  # (pivot column, combination mask)
    r = 0
    for col in range(2 * n):
        bit = 1 << col
        piv = next((i for i in range(r, len(rows)) if rows[i][0] & bit), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv, pc = rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][0] & bit:
                rows[i] = (rows[i][0] ^ pv, rows[i][1] ^ pc)
        r += 1
        if r == len(rows):
            break
    if r < len(stabs):
        raise TableauError("stabilizer generators are not independent")
    for i in range(r):
        col = (rows[i][0] & -rows[i][0]).bit_length() - 1
        pivots.append((col, rows[i][1]))
    d = [0] * len(stabs)
    for col, comb in pivots:
        c = comb
        while c:
            low = c & -c
            d[low.bit_length() - 1] |= 1 << col
            c ^= low
    d0 = list(d)
    for i in range(len(d)):
        acc = 0
        for j in range(i):
            if _symp(d0[i], d0[j], n):
                acc ^= stabs[j]
        d[i] = d0[i] ^ acc
    return d


class SymTableau:
    def __init__(self, n: int, x: np.ndarray, z: np.ndarray, ph_mask: list[int],
                 ph_const: np.ndarray, atoms: AtomTable):
        self.n = n
        self.x = x
        self.z = z
        self.ph_mask = ph_mask
        self.ph_const = ph_const
        self.atoms = atoms

    # -- construction ------------------------------------------------------

    @classmethod
    def zero_state(cls, n: int, atoms: AtomTable | None = None) -> "SymTableau":
        """``|0...0>``: destabilizers ``X_i``, stabilizers ``Z_i``."""
        w = _bits.n_words(n)
        x = np.zeros((2 * n, w), dtype=np.uint64)
        z = np.zeros((2 * n, w), dtype=np.uint64)
        for i in range(n):
            _bits.set_bit(x[i], i)
            _bits.set_bit(z[n + i], i)
        return cls(n, x, z, [0] * (2 * n), np.zeros(2 * n, dtype=np.uint8), atoms or AtomTable())

    @classmethod
    def from_generators(cls, gens: Iterable[Generator], atoms: AtomTable | None = None,
                        check: bool = True) -> "SymTableau":
        """Build the state stabilized by ``(-1)^{phase_j} P_j``.

        Rejects generator lists that are not ``n`` independent, pairwise
        commuting Paulis on ``n`` qubits.  Destabilizers get phase 0.
        """
        pairs = [_as_generator(g) for g in gens]
        if not pairs:
            raise TableauError("empty generator list")
        n = pairs[0][0].n
        if any(p.n != n for p, _ in pairs):
            raise TableauError("generators act on different numbers of qubits")
        if len(pairs) != n:
            raise TableauError(f"need {n} generators for {n} qubits, got {len(pairs)}")
        stabs = [p.as_int() for p, _ in pairs]
        if check:
            for i in range(n):
                for j in range(i + 1, n):
                    if _symp(stabs[i], stabs[j], n):
                        raise TableauError(f"generators {i} and {j} anticommute")
        destabs = destabilizers_for(stabs, n)
        return cls._from_rows(n, destabs, stabs, [ph for _, ph in pairs], atoms or AtomTable())

    @classmethod
    def _from_rows(cls, n: int, destabs: list[int], stabs: list[int], phases, atoms: AtomTable,
                   encoded: bool = False) -> "SymTableau":
        w = _bits.n_words(n)
        mask = (1 << n) - 1
        x = np.zeros((2 * n, w), dtype=np.uint64)
        z = np.zeros((2 * n, w), dtype=np.uint64)
        for i, v in enumerate(list(destabs) + list(stabs)):
            x[i] = _bits.int_to_words(v & mask, w)
            z[i] = _bits.int_to_words(v >> n, w)
        ph_mask = [0] * (2 * n)
        ph_const = np.zeros(2 * n, dtype=np.uint8)
        for i, ph in enumerate(phases):
            m, c = ph if encoded else atoms.encode(ph)
            ph_mask[n + i] = m
            ph_const[n + i] = c
        return cls(n, x, z, ph_mask, ph_const, atoms)

    def copy(self) -> "SymTableau":
        return SymTableau(self.n, self.x.copy(), self.z.copy(), list(self.ph_mask),
                          self.ph_const.copy(), self.atoms)

    # -- access ------------------------------------------------------------

    def _row_int(self, i: int) -> int:
        return _bits.words_to_int(self.x[i]) | (_bits.words_to_int(self.z[i]) << self.n)

    def row(self, i: int) -> PauliString:
        return PauliString(self.n, _bits.words_to_int(self.x[i]), _bits.words_to_int(self.z[i]))

    def phase(self, i: int) -> BoolExpr:
        return self.atoms.decode(self.ph_mask[i], int(self.ph_const[i]))

    def stabilizer(self, i: int) -> tuple[PauliString, BoolExpr]:
        return self.row(self.n + i), self.phase(self.n + i)

    def destabilizer(self, i: int) -> tuple[PauliString, BoolExpr]:
        return self.row(i), self.phase(i)

    def stabilizers(self) -> list[tuple[PauliString, BoolExpr]]:
        return [self.stabilizer(i) for i in range(self.n)]

    def phase_vars(self) -> set[str]:
        from .symexpr import variables

        out: set[str] = set()
        for i in range(2 * self.n):
            out.update(variables(self.phase(i)))
        return out

    # -- gates -------------------------------------------------------------

    def _check_targets(self, targets: tuple[int, ...]) -> None:
        for t in targets:
            if not 0 <= t < self.n:
                raise TableauError(f"qubit {t} out of range for n={self.n}")
        if len(set(targets)) != len(targets):
            raise TableauError("repeated gate target")

    def apply_clifford(self, gate: str, targets: Sequence[int]) -> "SymTableau":
        targets = tuple(int(t) for t in targets)
        if len(targets) != gate_arity(gate):
            raise TableauError(f"{gate} expects {gate_arity(gate)} target(s)")
        self._check_targets(targets)
        x, z = self.x, self.z
        if gate == "CNOT":
            c, t = targets
            xc, zc = _bits.get_col(x, c), _bits.get_col(z, c)
            xt, zt = _bits.get_col(x, t), _bits.get_col(z, t)
            self.ph_const ^= (xc & zt & ~(xt ^ zc)).astype(np.uint8)
            _bits.xor_col(x, t, xc)
            _bits.xor_col(z, c, zt)
            return self
        (q,) = targets
        if gate == "I":
            return self
        xq, zq = _bits.get_col(x, q), _bits.get_col(z, q)
        if gate == "H":
            self.ph_const ^= (xq & zq).astype(np.uint8)
            d = xq ^ zq
            _bits.xor_col(x, q, d)
            _bits.xor_col(z, q, d)
        elif gate == "S":
            self.ph_const ^= (xq & zq).astype(np.uint8)
            _bits.xor_col(z, q, xq)
        elif gate == "X":
            self.ph_const ^= zq.astype(np.uint8)
        elif gate == "Z":
            self.ph_const ^= xq.astype(np.uint8)
        elif gate == "Y":
            self.ph_const ^= (xq ^ zq).astype(np.uint8)
        else:
            raise TableauError(f"unknown gate {gate!r}")
        return self

    def apply_sym_pauli(self, tau: str, guard: BoolExpr, q: int) -> "SymTableau":
        """Apply ``tau_q`` when ``guard`` holds: XOR ``guard`` into anticommuting rows."""
        self._check_targets((q,))
        xq, zq = _bits.get_col(self.x, q), _bits.get_col(self.z, q)
        if tau == "X":
            rows = zq
        elif tau == "Z":
            rows = xq
        elif tau == "Y":
            rows = xq ^ zq
        else:
            raise TableauError(f"not a Pauli: {tau!r}")
        gm, gc = self.atoms.encode(guard)
        if gc:
            self.ph_const ^= rows.astype(np.uint8)
        if gm:
            for r in np.flatnonzero(rows):
                self.ph_mask[r] ^= gm
        return self

    # -- measurement -------------------------------------------------------

    def _mul_rows_into(self, rows: np.ndarray, p: int) -> None:
        x1, z1 = self.x[rows], self.z[rows]
        x2, z2 = self.x[p], self.z[p]
        plus, minus = plus_minus_masks(x2, z2, x1, z1)
        k = (_bits.popcount_rows(plus) - _bits.popcount_rows(minus)) % 4
        self.x[rows] = x1 ^ x2
        self.z[rows] = z1 ^ z2
        self.ph_const[rows] ^= ((k >> 1) & 1).astype(np.uint8) ^ self.ph_const[p]
        mp = self.ph_mask[p]
        if mp:
            for r in rows:
                self.ph_mask[r] ^= mp

    def product_phase(self, rows: np.ndarray) -> tuple[int, int, int]:
        """Multiply the Pauli parts of ``rows`` in order, ignoring their signs.

        Returns ``(x, z, k)``: the product is ``i^k`` times the Hermitian
        Pauli with bits ``x``/``z``.
        """
        xs, zs = self.x[rows], self.z[rows]
        k = int(_bits.popcount_rows(xs & zs).sum())
        X = np.bitwise_xor.reduce(xs, axis=0)
        Z = np.bitwise_xor.reduce(zs, axis=0)
        k -= int(np.bitwise_count(X & Z).sum())
        if len(rows) > 1:
            suffix = np.bitwise_xor.accumulate(xs[::-1], axis=0)[::-1]
            c = int(np.bitwise_count(zs[:-1] & suffix[1:]).sum()) & 1
            k += 2 * c
        return _bits.words_to_int(X), _bits.words_to_int(Z), k % 4

    def measure(self, q: int, gen: FreshGen, prefix: str = "m") -> MeasResult:
        self._check_targets((q,))
        n = self.n
        xq = _bits.get_col(self.x, q)
        hits = np.flatnonzero(xq[n:])
        if hits.size:
            p = n + int(hits[0])
            rows = np.flatnonzero(xq)
            rows = rows[(rows != p) & (rows != p - n)]
            if rows.size:
                self._mul_rows_into(rows, p)
            self.x[p - n] = self.x[p]
            self.z[p - n] = self.z[p]
            self.ph_const[p - n] = self.ph_const[p]
            self.ph_mask[p - n] = self.ph_mask[p]
            self.x[p] = 0
            self.z[p] = 0
            _bits.set_bit(self.z[p], q)
            s = gen.fresh(prefix)
            self.ph_mask[p] = 1 << self.atoms.intern(s)
            self.ph_const[p] = 0
            return MeasResult(s, RANDOM, s.name)
        js = np.flatnonzero(xq[:n]) + n
        X, Z, k = self.product_phase(js)
        if X != 0 or Z != 1 << q or k & 1:
            raise TableauError("tableau invariant broken during measurement")
        mask = 0
        for j in js:
            mask ^= self.ph_mask[j]
        c = (k >> 1) ^ (int(np.bitwise_xor.reduce(self.ph_const[js])) if js.size else 0)
        return MeasResult(self.atoms.decode(mask, c), DETERMINISTIC)

    # -- canonical form and equality ---------------------------------------

    def canonical_form(self) -> "SymTableau":
        """Stabilizer rows in reduced row echelon form.

        Pivot columns are taken in the order ``X_0..X_{n-1}, Z_0..Z_{n-1}``.
        Phases follow the row operations; destabilizers are recomputed.
        """
        n = self.n
        mask = (1 << n) - 1
        rows = [self._row_int(n + i) for i in range(n)]
        phm = [self.ph_mask[n + i] for i in range(n)]
        phc = [int(self.ph_const[n + i]) for i in range(n)]
        r = 0
        for col in range(2 * n):
            bit = 1 << col
            piv = next((i for i in range(r, n) if rows[i] & bit), None)
            if piv is None:
                continue
            rows[r], rows[piv] = rows[piv], rows[r]
            phm[r], phm[piv] = phm[piv], phm[r]
            phc[r], phc[piv] = phc[piv], phc[r]
            pv = rows[r]
            px, pz = pv & mask, pv >> n
            for i in range(n):
                v = rows[i]
                if i != r and v & bit:
                    k = product_exponent(v & mask, v >> n, px, pz)
                    rows[i] = v ^ pv
                    phm[i] ^= phm[r]
                    phc[i] ^= phc[r] ^ (k >> 1)
            r += 1
        destabs = destabilizers_for(rows, n)
        return SymTableau._from_rows(n, destabs, rows, list(zip(phm, phc)), self.atoms, encoded=True)

    # -- concrete view -----------------------------------------------------

    def instantiate(self, valuation) -> ConcreteTableau:
        used = 0
        for m in self.ph_mask:
            used |= m
        vals = self.atoms.values(valuation, used)
        r = np.array([int(self.ph_const[i]) ^ ((self.ph_mask[i] & vals).bit_count() & 1)
                      for i in range(2 * self.n)], dtype=np.uint8)
        return ConcreteTableau.from_arrays(_bits.unpack_rows(self.x, self.n),
                                           _bits.unpack_rows(self.z, self.n), r)

    def dump(self) -> str:
        lines = []
        for i in range(2 * self.n):
            tag = "D" if i < self.n else "S"
            idx = i if i < self.n else i - self.n
            lines.append(f"{tag} {idx} {self.row(i).render()} ; {render(self.phase(i))}")
        return "\n".join(lines)

    def to_json(self) -> list[dict]:
        return [{"pauli": p.render(), "phase": render(ph)} for p, ph in self.stabilizers()]

    def check_invariants(self) -> None:
        """Raise if the rows are not a symplectic basis (debug aid, O(n^3))."""
        n = self.n
        xs = _bits.unpack_rows(self.x, n).astype(np.int64)
        zs = _bits.unpack_rows(self.z, n).astype(np.int64)
        omega = (xs @ zs.T + zs @ xs.T) % 2
        want = np.zeros((2 * n, 2 * n), dtype=np.int64)
        want[:n, n:] = np.eye(n, dtype=np.int64)
        want[n:, :n] = np.eye(n, dtype=np.int64)
        if not np.array_equal(omega, want):
            raise TableauError("rows do not form a symplectic basis")


def equality_formula(t1: SymTableau, t2: SymTableau) -> BoolExpr:
    """Formula that holds exactly when the two symbolic states coincide."""
    if t1.n != t2.n:
        return FALSE
    c1, c2 = t1.canonical_form(), t2.canonical_form()
    n = t1.n
    if not (np.array_equal(c1.x[n:], c2.x[n:]) and np.array_equal(c1.z[n:], c2.z[n:])):
        return FALSE
    return band(*(bnot(bxor(c1.phase(n + i), c2.phase(n + i))) for i in range(n)))


__all__ = [
    "SymTableau",
    "MeasResult",
    "TableauError",
    "equality_formula",
    "destabilizers_for",
    "RANDOM",
    "DETERMINISTIC",
    "TRUE",
]

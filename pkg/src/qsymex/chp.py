"""Concrete stabilizer tableau (the classic CHP algorithm).

This is the concrete semantics the symbolic engine is checked against.  It
keeps the Pauli part as plain 0/1 ``uint8`` matrices and the phase column
as ``r_const ^ r_shots``: ``r_const`` is shared by every shot and
``r_shots`` holds one bit per shot, packed into words.  Phases never steer
the Pauli part, so a straight-line circuit can be run for many shots at
once; with ``shots=1`` this is an ordinary single-run simulator.
"""

from __future__ import annotations

import numpy as np

from ._bits import n_words
from .pauli import G_TABLE, PauliString, gate_arity

_G = np.zeros(16, dtype=np.int64)
for (_x1, _z1, _x2, _z2), _v in G_TABLE.items():
    _G[_x1 * 8 + _z1 * 4 + _x2 * 2 + _z2] = _v

RANDOM = "Random"
DETERMINISTIC = "Deterministic"


class ConcreteTableau:
    def __init__(self, n: int, shots: int = 1):
        self.n = n
        self.shots = shots
        self.w = n_words(shots)
        self.x = np.zeros((2 * n, n), dtype=np.uint8)
        self.z = np.zeros((2 * n, n), dtype=np.uint8)
        for i in range(n):
            self.x[i, i] = 1
            self.z[n + i, i] = 1
        self.r_const = np.zeros(2 * n, dtype=np.uint8)
        self.r_shots = np.zeros((2 * n, self.w), dtype=np.uint64)

    @classmethod
    def from_arrays(cls, x: np.ndarray, z: np.ndarray, r: np.ndarray) -> "ConcreteTableau":
        n = x.shape[1]
        t = cls(n)
        t.x = np.asarray(x, dtype=np.uint8).copy()
        t.z = np.asarray(z, dtype=np.uint8).copy()
        t.r_const = np.asarray(r, dtype=np.uint8).copy()
        return t

    def copy(self) -> "ConcreteTableau":
        t = ConcreteTableau.__new__(ConcreteTableau)
        t.n, t.shots, t.w = self.n, self.shots, self.w
        t.x, t.z = self.x.copy(), self.z.copy()
        t.r_const, t.r_shots = self.r_const.copy(), self.r_shots.copy()
        return t

    # -- gates -------------------------------------------------------------

    def apply(self, gate: str, targets) -> None:
        targets = tuple(targets)
        if len(targets) != gate_arity(gate):
            raise ValueError(f"{gate} expects {gate_arity(gate)} target(s)")
        x, z = self.x, self.z
        if gate == "CNOT":
            a, b = targets
            self.r_const ^= x[:, a] & z[:, b] & (x[:, b] ^ z[:, a] ^ 1)
            x[:, b] ^= x[:, a]
            z[:, a] ^= z[:, b]
            return
        (a,) = targets
        if gate == "H":
            self.r_const ^= x[:, a] & z[:, a]
            x[:, a], z[:, a] = z[:, a].copy(), x[:, a].copy()
        elif gate == "S":
            self.r_const ^= x[:, a] & z[:, a]
            z[:, a] ^= x[:, a]
        elif gate == "X":
            self.r_const ^= z[:, a]
        elif gate == "Z":
            self.r_const ^= x[:, a]
        elif gate == "Y":
            self.r_const ^= x[:, a] ^ z[:, a]

    # -- measurement -------------------------------------------------------

    def _gsum(self, xi, zi, xh, zh) -> int:
        idx = xi.astype(np.int64) * 8 + zi * 4 + xh * 2 + zh
        return int(_G[idx].sum())

    def _rowsum(self, h: int, i: int) -> None:
        """Row ``h`` <- row ``i`` * row ``h`` (CHP ``rowsum``)."""
        s = 2 * int(self.r_const[h]) + 2 * int(self.r_const[i])
        s += self._gsum(self.x[i], self.z[i], self.x[h], self.z[h])
        s %= 4
        if s not in (0, 2):
            raise AssertionError("rowsum of anticommuting rows")
        self.r_const[h] = s >> 1
        self.r_shots[h] ^= self.r_shots[i]
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def _random_words(self, rng: np.random.Generator) -> np.ndarray:
        out = rng.integers(0, np.iinfo(np.uint64).max, size=self.w, dtype=np.uint64, endpoint=True)
        tail = self.shots & 63
        if tail:
            out[-1] &= np.uint64((1 << tail) - 1)
        return out

    def is_random(self, q: int) -> bool:
        return bool(self.x[self.n:, q].any())

    def measure(self, q: int, rng: np.random.Generator | None = None, forced: int | None = None):
        """Measure ``Z_q``.  Returns ``(kind, outcome_words)``.

        Random outcomes are drawn from ``rng`` unless ``forced`` pins them.
        """
        n = self.n
        hits = np.flatnonzero(self.x[n:, q])
        if hits.size:
            p = n + int(hits[0])
            for i in np.flatnonzero(self.x[:, q]):
                if i != p and i != p - n:
                    self._rowsum(int(i), p)
            self.x[p - n] = self.x[p]
            self.z[p - n] = self.z[p]
            self.r_const[p - n] = self.r_const[p]
            self.r_shots[p - n] = self.r_shots[p]
            self.x[p] = 0
            self.z[p] = 0
            self.z[p, q] = 1
            self.r_const[p] = 0
            if forced is not None:
                words = np.zeros(self.w, dtype=np.uint64)
                if forced:
                    words[:] = np.iinfo(np.uint64).max
                    tail = self.shots & 63
                    if tail:
                        words[-1] = np.uint64((1 << tail) - 1)
            else:
                if rng is None:
                    raise ValueError("random measurement needs an rng or a forced outcome")
                words = self._random_words(rng)
            self.r_shots[p] = words
            return RANDOM, words.copy()
        # scratch row accumulates the product of the stabilizers that
        # reproduce Z_q
        sx = np.zeros(n, dtype=np.uint8)
        sz = np.zeros(n, dtype=np.uint8)
        sr = 0
        sw = np.zeros(self.w, dtype=np.uint64)
        for i in np.flatnonzero(self.x[:n, q]):
            j = n + int(i)
            s = 2 * sr + 2 * int(self.r_const[j]) + self._gsum(self.x[j], self.z[j], sx, sz)
            sr = (s % 4) >> 1
            sw ^= self.r_shots[j]
            sx ^= self.x[j]
            sz ^= self.z[j]
        if sr:
            sw = ~sw
            tail = self.shots & 63
            if tail:
                sw[-1] &= np.uint64((1 << tail) - 1)
        return DETERMINISTIC, sw

    def measure_one(self, q: int, rng=None, forced=None) -> tuple[str, int]:
        kind, words = self.measure(q, rng, forced)
        return kind, int(words[0] & np.uint64(1))

    # -- inspection --------------------------------------------------------

    def phase(self, i: int, shot: int = 0) -> int:
        return int(self.r_const[i]) ^ int((self.r_shots[i, shot >> 6] >> np.uint64(shot & 63)) & np.uint64(1))

    def row(self, i: int) -> PauliString:
        xs = int("".join(map(str, self.x[i][::-1])), 2) if self.n else 0
        zs = int("".join(map(str, self.z[i][::-1])), 2) if self.n else 0
        return PauliString(self.n, xs, zs)

    def stabilizers(self, shot: int = 0) -> list[tuple[PauliString, int]]:
        return [(self.row(self.n + i), self.phase(self.n + i, shot)) for i in range(self.n)]

    def canonical(self, shot: int = 0) -> tuple[tuple[str, int], ...]:
        """Reduced row echelon stabilizer list (X columns, then Z columns)."""
        n = self.n
        m = np.concatenate([self.x[n:], self.z[n:]], axis=1).astype(np.uint8)
        r = np.array([self.phase(n + i, shot) for i in range(n)], dtype=np.int64)
        rank = 0
        for col in range(2 * n):
            piv = next((i for i in range(rank, n) if m[i, col]), None)
            if piv is None:
                continue
            m[[rank, piv]] = m[[piv, rank]]
            r[[rank, piv]] = r[[piv, rank]]
            for i in range(n):
                if i != rank and m[i, col]:
                    s = 2 * r[i] + 2 * r[rank] + self._gsum(m[rank, :n], m[rank, n:], m[i, :n], m[i, n:])
                    r[i] = (s % 4) >> 1
                    m[i] ^= m[rank]
            rank += 1
        out = []
        for i in range(n):
            xs = sum(int(b) << q for q, b in enumerate(m[i, :n]))
            zs = sum(int(b) << q for q, b in enumerate(m[i, n:]))
            out.append((PauliString(n, xs, zs).label(), int(r[i])))
        return tuple(out)

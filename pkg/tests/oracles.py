"""Independent reference models used by the tests.

Everything here works on dense ``2^n x 2^n`` complex matrices and state
vectors, so it shares no code with the bit-level implementation.  Qubit 0
is the leftmost tensor factor.
"""

from __future__ import annotations

import itertools
from functools import lru_cache, reduce

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j]).astype(complex)
P0 = np.diag([1, 0]).astype(complex)
P1 = np.diag([0, 1]).astype(complex)
SINGLE = {"I": I2, "X": X, "Y": Y, "Z": Z, "H": H, "S": S}
PHASE = {0: 1, 1: 1j, 2: -1, 3: -1j}


def kron_all(ops) -> np.ndarray:
    return reduce(np.kron, ops, np.eye(1, dtype=complex))


def embed(op: np.ndarray, q: int, n: int) -> np.ndarray:
    return kron_all([op if i == q else I2 for i in range(n)])


@lru_cache(maxsize=None)
def _pauli(label: str) -> np.ndarray:
    m = kron_all([SINGLE[c] for c in label])
    m.setflags(write=False)
    return m


def pauli_matrix(label: str, sign: int = 0) -> np.ndarray:
    """``label`` like ``"XIZ"``; ``sign`` is the exponent of ``i``."""
    return PHASE[sign % 4] * _pauli(label)


def gate_matrix(gate: str, targets, n: int) -> np.ndarray:
    if gate in ("CNOT", "CX"):
        c, t = targets
        return embed(P0, c, n) + embed(P1, c, n) @ embed(X, t, n)
    if gate == "CZ":
        c, t = targets
        return embed(P0, c, n) + embed(P1, c, n) @ embed(Z, t, n)
    if gate == "SWAP":
        a, b = targets
        return (gate_matrix("CNOT", (a, b), n) @ gate_matrix("CNOT", (b, a), n)
                @ gate_matrix("CNOT", (a, b), n))
    if gate == "Sdg":
        return embed(S.conj().T, targets[0], n)
    return embed(SINGLE[gate], targets[0], n)


def decompose(m: np.ndarray, n: int) -> tuple[str, int]:
    """Write a Pauli-proportional matrix as ``i^k * P``."""
    # the column of the nonzero entry in row 0 fixes the X part (qubit 0 is
    # the most significant bit); only the Z part is searched
    col = int(np.argmax(np.abs(m[0])))
    xs = [(col >> (n - 1 - q)) & 1 for q in range(n)]
    for zs in itertools.product((0, 1), repeat=n):
        label = "".join("IZXY"[2 * x + z] for x, z in zip(xs, zs))
        p = pauli_matrix(label)
        c = np.trace(p.conj().T @ m) / 2**n
        if abs(abs(c) - 1) < 1e-9:
            for k, v in PHASE.items():
                if abs(c - v) < 1e-9 and np.allclose(m, v * p):
                    return label, k
    raise AssertionError("matrix is not a phased Pauli")


def stabilizer_state(gens: list[tuple[str, int]]) -> np.ndarray:
    """State fixed by ``(-1)^b P`` for each ``(label, b)``."""
    n = len(gens[0][0])
    proj = np.eye(2**n, dtype=complex)
    for label, b in gens:
        proj = proj @ (np.eye(2**n) + (-1) ** b * pauli_matrix(label)) / 2
    col = int(np.argmax(np.linalg.norm(proj, axis=0)))
    v = proj[:, col]
    nv = np.linalg.norm(v)
    assert nv > 1e-9, "generators do not stabilize a common state"
    return v / nv


def same_state(a: np.ndarray, b: np.ndarray) -> bool:
    return abs(abs(np.vdot(a, b)) - 1) < 1e-8


def prob_one(psi: np.ndarray, q: int, n: int) -> float:
    return float(np.real(np.vdot(psi, embed(P1, q, n) @ psi)))


def project(psi: np.ndarray, q: int, n: int, bit: int) -> np.ndarray:
    v = embed(P1 if bit else P0, q, n) @ psi
    return v / np.linalg.norm(v)


def stabilizer_group(gens: list[tuple[str, int]]) -> set[tuple[str, int]]:
    """All ``2^n`` signed elements generated by ``(-1)^b P``, as (label, sign bit)."""
    n = len(gens[0][0])
    mats = [(-1) ** b * pauli_matrix(label) for label, b in gens]
    out = set()
    for sel in itertools.product((0, 1), repeat=len(mats)):
        m = np.eye(2**n, dtype=complex)
        for s, g in zip(sel, mats):
            if s:
                m = m @ g
        label, k = decompose(m, n)
        assert k in (0, 2)
        out.add((label, k // 2))
    return out


def tableau_state(stabs) -> np.ndarray:
    """State vector for a list of ``(PauliString, bit)`` pairs."""
    return stabilizer_state([(p.label(), int(b)) for p, b in stabs])

"""Pauli strings in binary symplectic form.

A Pauli string on ``n`` qubits is a pair of ``n``-bit integers ``(x, z)``;
bit ``q`` of each selects the factor on qubit ``q``: ``(0,0)=I``, ``(1,0)=X``,
``(1,1)=Y``, ``(0,1)=Z``.  Strings are always the Hermitian representative,
so ``Y`` is ``iXZ`` rather than ``XZ``.  A global phase ``i^k`` lives in
:class:`PhasedPauli`.

Qubit indices are 0-based throughout the library.
"""

from __future__ import annotations

from dataclasses import dataclass

GATES_1Q = ("H", "S", "X", "Y", "Z", "I")
GATES_2Q = ("CNOT",)
GATES = GATES_1Q + GATES_2Q
PAULI_GATES = ("X", "Y", "Z")

_CHAR_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_CHAR = {v: k for k, v in _CHAR_BITS.items()}


def gate_arity(gate: str) -> int:
    if gate in GATES_1Q:
        return 1
    if gate in GATES_2Q:
        return 2
    raise ValueError(f"unknown gate {gate!r}")


@dataclass(frozen=True, slots=True)
class PauliString:
    n: int
    x: int = 0
    z: int = 0

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse ``"XZIY"`` (qubit 0 first).  A leading ``+`` is accepted."""
        if label.startswith("+"):
            label = label[1:]
        x = z = 0
        for q, ch in enumerate(label):
            try:
                bx, bz = _CHAR_BITS[ch]
            except KeyError:
                raise ValueError(f"bad Pauli character {ch!r} in {label!r}") from None
            x |= bx << q
            z |= bz << q
        return cls(len(label), x, z)

    @classmethod
    def single(cls, n: int, q: int, kind: str) -> "PauliString":
        bx, bz = _CHAR_BITS[kind]
        return cls(n, bx << q, bz << q)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    def __getitem__(self, q: int) -> str:
        return _BITS_CHAR[((self.x >> q) & 1, (self.z >> q) & 1)]

    def label(self) -> str:
        return "".join(self[q] for q in range(self.n))

    def render(self, negative: bool = False) -> str:
        return ("-" if negative else "+") + self.label()

    def __str__(self) -> str:
        return self.render()

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    @property
    def support(self) -> list[int]:
        s = self.x | self.z
        return [q for q in range(self.n) if (s >> q) & 1]

    def commutes(self, other: "PauliString") -> bool:
        return commutes(self, other)

    def __mul__(self, other: "PauliString") -> "PhasedPauli":
        return mul(self, other)

    def as_int(self) -> int:
        """Pack as a ``2n``-bit integer, X block in the low bits."""
        return self.x | (self.z << self.n)

    @classmethod
    def from_int(cls, n: int, v: int) -> "PauliString":
        mask = (1 << n) - 1
        return cls(n, v & mask, (v >> n) & mask)


@dataclass(frozen=True, slots=True)
class PhasedPauli:
    """``i^k * p`` with ``k`` in ``0..3``."""

    p: PauliString
    k: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "k", self.k % 4)

    def __mul__(self, other: "PhasedPauli") -> "PhasedPauli":
        r = mul(self.p, other.p)
        return PhasedPauli(r.p, r.k + self.k + other.k)

    def render(self) -> str:
        return ("+", "+i", "-", "-i")[self.k] + self.p.label()


# Exponent of i picked up by the single-qubit product (x1,z1)*(x2,z2).  This
# table is the reference; `product_exponent` below is the bit-sliced form.
G_TABLE: dict[tuple[int, int, int, int], int] = {}
for _a, _pa in _CHAR_BITS.items():
    for _b, _pb in _CHAR_BITS.items():
        if "I" in (_a, _b) or _a == _b:
            _g = 0
        elif _a + _b in ("XY", "YZ", "ZX"):
            _g = 1
        else:
            _g = -1
        G_TABLE[(*_pa, *_pb)] = _g


def g(x1: int, z1: int, x2: int, z2: int) -> int:
    return G_TABLE[(x1, z1, x2, z2)]


def plus_minus_masks(x1: int, z1: int, x2: int, z2: int) -> tuple[int, int]:
    """Bit masks of qubits contributing ``+1`` and ``-1`` to the product phase.

    Works on any integer-like operands supporting ``& | ^ ~`` (Python ints or
    numpy word arrays).
    """
    y1 = x1 & z1
    y2 = x2 & z2
    xo1 = x1 & ~z1
    zo1 = z1 & ~x1
    xo2 = x2 & ~z2
    zo2 = z2 & ~x2
    plus = (xo1 & y2) | (y1 & zo2) | (zo1 & xo2)
    minus = (xo1 & zo2) | (zo1 & y2) | (y1 & xo2)
    return plus, minus


def product_exponent(x1: int, z1: int, x2: int, z2: int) -> int:
    plus, minus = plus_minus_masks(x1, z1, x2, z2)
    return (plus.bit_count() - minus.bit_count()) % 4


def mul(p: PauliString, q: PauliString) -> PhasedPauli:
    """Return ``p*q`` as ``i^k * r`` with ``r`` Hermitian."""
    _check_sizes(p, q)
    k = product_exponent(p.x, p.z, q.x, q.z)
    return PhasedPauli(PauliString(p.n, p.x ^ q.x, p.z ^ q.z), k)


def symplectic(p: PauliString, q: PauliString) -> int:
    return ((p.x & q.z) ^ (p.z & q.x)).bit_count() & 1


def commutes(p: PauliString, q: PauliString) -> bool:
    _check_sizes(p, q)
    return symplectic(p, q) == 0


def _check_sizes(p: PauliString, q: PauliString) -> None:
    if p.n != q.n:
        raise ValueError(f"size mismatch: {p.n} vs {q.n}")


def conj_clifford(gate: str, targets: tuple[int, ...] | list[int], p: PauliString) -> tuple[PauliString, bool]:
    """Conjugate ``p`` by ``gate``: returns ``(p', flip)`` with ``U p U^dag = (-1)^flip p'``."""
    targets = tuple(targets)
    if len(targets) != gate_arity(gate):
        raise ValueError(f"{gate} expects {gate_arity(gate)} target(s), got {len(targets)}")
    for t in targets:
        if not 0 <= t < p.n:
            raise ValueError(f"qubit {t} out of range for n={p.n}")
    x, z = p.x, p.z
    if gate == "CNOT":
        c, t = targets
        if c == t:
            raise ValueError("CNOT control and target coincide")
        xc, zc = (x >> c) & 1, (z >> c) & 1
        xt, zt = (x >> t) & 1, (z >> t) & 1
        flip = xc & zt & (xt ^ zc ^ 1)
        x ^= xc << t
        z ^= zt << c
        return PauliString(p.n, x, z), bool(flip)
    (q,) = targets
    xq, zq = (x >> q) & 1, (z >> q) & 1
    if gate == "H":
        flip = xq & zq
        x = (x & ~(1 << q)) | (zq << q)
        z = (z & ~(1 << q)) | (xq << q)
    elif gate == "S":
        flip = xq & zq
        z ^= xq << q
    elif gate == "X":
        flip = zq
    elif gate == "Z":
        flip = xq
    elif gate == "Y":
        flip = xq ^ zq
    else:
        flip = 0
    return PauliString(p.n, x, z), bool(flip)

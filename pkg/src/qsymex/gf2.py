"""Linear algebra over GF(2) with rows stored as Python ints."""

from __future__ import annotations

from typing import Sequence


def reduce_basis(rows: Sequence[int]) -> dict[int, int]:
    """Echelon basis keyed by pivot bit (highest set bit of each stored row)."""
    basis: dict[int, int] = {}
    for r in rows:
        r = reduce_vec(r, basis)
        if r:
            basis[r.bit_length() - 1] = r
    return basis


def reduce_vec(v: int, basis: dict[int, int]) -> int:
    """Clear leading bits of ``v`` that hit a basis pivot; 0 means ``v`` is in the span."""
    while v:
        b = basis.get(v.bit_length() - 1)
        if b is None:
            break
        v ^= b
    return v


def rank(rows: Sequence[int]) -> int:
    return len(reduce_basis(rows))


def in_span(v: int, basis: dict[int, int]) -> bool:
    while v:
        b = basis.get(v.bit_length() - 1)
        if b is None:
            return False
        v ^= b
    return True


def independent_subset(rows: Sequence[int]) -> list[int]:
    """Indices of a maximal independent subset, keeping earlier rows first."""
    basis: dict[int, int] = {}
    keep = []
    for i, r in enumerate(rows):
        v = r
        while v:
            b = basis.get(v.bit_length() - 1)
            if b is None:
                break
            v ^= b
        if v:
            basis[v.bit_length() - 1] = v
            keep.append(i)
    return keep


def nullspace(rows: Sequence[int], n: int) -> list[int]:
    """Basis of ``{v : popcount(r & v) even for all rows r}`` in ``GF(2)^n``."""
    work = [r for r in rows if r]
    pivots: dict[int, int] = {}
    for r in work:
        for c, pr in pivots.items():
            if (r >> c) & 1:
                r ^= pr
        if not r:
            continue
        c = (r & -r).bit_length() - 1
        for c2 in list(pivots):
            if (pivots[c2] >> c) & 1:
                pivots[c2] ^= r
        pivots[c] = r
    piv_rows = sorted(pivots.items())
    free = [c for c in range(n) if c not in pivots]
    out = []
    for f in free:
        v = 1 << f
        for c, r in piv_rows:
            if (r >> f) & 1:
                v |= 1 << c
        out.append(v)
    return out


def inverse(mat: Sequence[int], k: int) -> list[int]:
    """Inverse of a ``k x k`` matrix given as row ints (bit ``j`` = column ``j``)."""
    aug = [(row, 1 << i) for i, row in enumerate(mat)]
    for col in range(k):
        piv = next((i for i in range(col, k) if (aug[i][0] >> col) & 1), None)
        if piv is None:
            raise ValueError("matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        pr, pi = aug[col]
        for i in range(k):
            if i != col and (aug[i][0] >> col) & 1:
                aug[i] = (aug[i][0] ^ pr, aug[i][1] ^ pi)
    return [aug[i][1] for i in range(k)]


def parity(v: int) -> int:
    return v.bit_count() & 1


def matvec(rows: Sequence[int], v: int) -> int:
    """Syndrome bits: bit ``i`` is ``<rows[i], v>``."""
    out = 0
    for i, r in enumerate(rows):
        if (r & v).bit_count() & 1:
            out |= 1 << i
    return out


def from_matrix(m) -> list[int]:
    return [sum(int(b) << j for j, b in enumerate(row) if b) for row in m]


def to_matrix(rows: Sequence[int], n: int):
    import numpy as np

    out = np.zeros((len(rows), n), dtype=np.uint8)
    for i, r in enumerate(rows):
        for j in range(n):
            out[i, j] = (r >> j) & 1
    return out

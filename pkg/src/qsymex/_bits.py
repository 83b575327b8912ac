"""Packed bit-matrix helpers (rows of uint64 words, bit ``q`` at word ``q>>6``)."""

from __future__ import annotations

import numpy as np

U64 = np.uint64
ONE = np.uint64(1)


def n_words(n: int) -> int:
    return max(1, (n + 63) >> 6)


def int_to_words(v: int, w: int) -> np.ndarray:
    return np.frombuffer(v.to_bytes(8 * w, "little"), dtype="<u8").astype(U64)


def words_to_int(row: np.ndarray) -> int:
    return int.from_bytes(np.ascontiguousarray(row, dtype="<u8").tobytes(), "little")


def get_col(arr: np.ndarray, q: int) -> np.ndarray:
    return ((arr[:, q >> 6] >> U64(q & 63)) & ONE).astype(bool)


def xor_col(arr: np.ndarray, q: int, bits: np.ndarray) -> None:
    arr[:, q >> 6] ^= bits.astype(U64) << U64(q & 63)


def set_bit(row: np.ndarray, q: int) -> None:
    row[q >> 6] |= ONE << U64(q & 63)


def popcount_rows(arr: np.ndarray) -> np.ndarray:
    return np.bitwise_count(arr).sum(axis=-1, dtype=np.int64)


def pack_bool_rows(m: np.ndarray) -> np.ndarray:
    """Pack a ``(r, n)`` 0/1 matrix into ``(r, n_words(n))`` uint64 words."""
    r, n = m.shape
    w = n_words(n)
    padded = np.zeros((r, 64 * w), dtype=np.uint8)
    padded[:, :n] = m
    return np.packbits(padded, axis=1, bitorder="little").view("<u8").astype(U64).reshape(r, w)


def unpack_rows(arr: np.ndarray, n: int) -> np.ndarray:
    b = np.ascontiguousarray(arr, dtype="<u8").view(np.uint8)
    return np.unpackbits(b, axis=1, bitorder="little")[:, :n]

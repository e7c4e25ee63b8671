"""Bit-packed GF(2) linear algebra.

Vectors are Python ints (bit k = coordinate k), which gives word-packed XOR
for free. The pivot of a row is its highest set bit.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np


class EchelonBasis:
    """Incrementally maintained row-echelon basis of a GF(2) subspace."""

    def __init__(self):
        self.rows: dict[int, int] = {}

    def __len__(self):
        return len(self.rows)

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, v: int) -> int:
        rows = self.rows
        out = 0
        while v:
            top = v.bit_length() - 1
            r = rows.get(top)
            if r is None:
                out |= 1 << top
                v ^= 1 << top
            else:
                v ^= r
        return out

    def add(self, v: int) -> bool:
        """Insert ``v``; return True when it enlarged the span."""
        rows = self.rows
        while v:
            top = v.bit_length() - 1
            r = rows.get(top)
            if r is None:
                rows[top] = v
                return True
            v ^= r
        return False

    def extend(self, vectors: Iterable[int]) -> None:
        for v in vectors:
            self.add(v)

    def reduced(self) -> ReducedBasis:
        """Fully reduced (RREF) copy: no row contains another row's pivot."""
        pivots = sorted(self.rows)
        out: dict[int, int] = {}
        pivot_mask = 0
        for p in pivots:  # ascending: lower pivots are already clean
            v = self.rows[p]
            hits = v & pivot_mask & ~(1 << p)
            while hits:
                q = hits.bit_length() - 1
                v ^= out[q]
                hits = v & pivot_mask & ~(1 << p)
            out[p] = v
            pivot_mask |= 1 << p
        return ReducedBasis(out, pivot_mask)


class ReducedBasis:
    def __init__(self, rows: dict[int, int], pivot_mask: int):
        self.rows = rows
        self.pivot_mask = pivot_mask

    @property
    def rank(self) -> int:
        return len(self.rows)

    def normal_form(self, v: int) -> int:
        """Unique representative of ``v`` modulo the span (no pivot bits)."""
        hits = v & self.pivot_mask
        while hits:
            p = hits.bit_length() - 1
            v ^= self.rows[p]
            hits ^= 1 << p
        return v


def rank(vectors: Iterable[int]) -> int:
    basis = EchelonBasis()
    basis.extend(vectors)
    return basis.rank


def matrix_rank(mat: np.ndarray) -> int:
    """Rank over GF(2) of a 0/1 numpy matrix."""
    mat = np.asarray(mat, dtype=np.uint8) & 1
    return rank(int("".join(map(str, row[::-1])), 2) if row.any() else 0 for row in mat)


def columns_to_matrix(columns: list[int], nrows: int) -> np.ndarray:
    out = np.zeros((nrows, len(columns)), dtype=np.uint8)
    for j, v in enumerate(columns):
        while v:
            b = v.bit_length() - 1
            out[b, j] = 1
            v ^= 1 << b
    return out


def iter_bits(v: int):
    while v:
        low = v & -v
        yield low.bit_length() - 1
        v ^= low

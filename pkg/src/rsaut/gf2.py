"""GF(2) linear algebra on int bitsets (bit k of a row = column k)."""

from __future__ import annotations

import numpy as np


def rref(rows: list[int]) -> list[int]:
    """Reduced row echelon form; pivots are taken at the lowest set bit.

    Returned rows are nonzero, sorted by pivot column, and each pivot column
    is clear in every other row, so two spans are equal iff their RREFs are.
    """
    pivots: dict[int, int] = {}
    for r in rows:
        for p, pr in pivots.items():
            if (r >> p) & 1:
                r ^= pr
        if r == 0:
            continue
        p = (r & -r).bit_length() - 1
        for q in pivots:
            if (pivots[q] >> p) & 1:
                pivots[q] ^= r
        pivots[p] = r
    return [pivots[p] for p in sorted(pivots)]


def rank(rows: list[int]) -> int:
    return len(rref(rows))


class RowReducer:
    """Incremental membership tests against a fixed row space."""

    def __init__(self, rows: list[int]):
        self.basis = rref(rows)
        self._pivots = [(r & -r).bit_length() - 1 for r in self.basis]

    @property
    def rank(self) -> int:
        return len(self.basis)

    def reduce(self, v: int) -> int:
        for p, r in zip(self._pivots, self.basis):
            if (v >> p) & 1:
                v ^= r
        return v

    def contains(self, v: int) -> bool:
        return self.reduce(v) == 0


def in_rowspace(v: int, rows: list[int]) -> bool:
    return RowReducer(rows).contains(v)


def nullspace(rows: list[int], ncols: int) -> list[int]:
    """Basis of ``{x : popcount(row & x) even for every row}``."""
    basis = rref(rows)
    pivots = [(r & -r).bit_length() - 1 for r in basis]
    pivot_set = set(pivots)
    out = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = 1 << free
        for p, r in zip(pivots, basis):
            if (r >> free) & 1:
                v |= 1 << p
        out.append(v)
    return out


def solve_affine(equations: list[tuple[int, int]], nvars: int) -> tuple[int, list[int]] | None:
    """Solve ``parity(coeffs & x) == rhs`` for each ``(coeffs, rhs)``.

    Returns one particular solution and a basis of the homogeneous solution
    space, or ``None`` when the system is inconsistent.
    """
    # augment with the rhs as bit nvars
    rows = rref([c | (b << nvars) for c, b in equations])
    mask = (1 << nvars) - 1
    particular = 0
    for r in rows:
        if r & mask == 0:
            return None
        p = (r & -r).bit_length() - 1
        if (r >> nvars) & 1:
            particular |= 1 << p
    homogeneous = nullspace([r & mask for r in rows], nvars)
    return particular, homogeneous


def parity(x: int) -> int:
    return bin(x).count("1") & 1


def int_to_bits(v: int, width: int) -> np.ndarray:
    return np.array([(v >> k) & 1 for k in range(width)], dtype=np.uint8)


def bits_to_int(bits) -> int:
    v = 0
    for k, b in enumerate(bits):
        if b:
            v |= 1 << k
    return v


def rows_to_matrix(rows: list[int], width: int) -> np.ndarray:
    return np.array([int_to_bits(r, width) for r in rows], dtype=np.uint8).reshape(len(rows), width)


def matrix_to_rows(mat) -> list[int]:
    return [bits_to_int(r) for r in np.asarray(mat)]

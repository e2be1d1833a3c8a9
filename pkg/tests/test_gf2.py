from __future__ import annotations

import numpy as np
from hypothesis import given, strategies as st

from rsaut import gf2

rows_st = st.lists(st.integers(0, 2 ** 12 - 1), max_size=10)


def _span(rows):
    out = {0}
    for r in rows:
        out |= {v ^ r for v in out}
    return out


@given(rows_st)
def test_rref_spans_same_space(rows):
    assert _span(gf2.rref(rows)) == _span(rows)
    assert 2 ** gf2.rank(rows) == len(_span(rows))


@given(rows_st, st.permutations(range(10)))
def test_rref_is_canonical(rows, perm):
    shuffled = [rows[i] for i in perm if i < len(rows)]
    assert gf2.rref(shuffled) == gf2.rref(rows)


@given(rows_st)
def test_nullspace_is_orthogonal(rows):
    ns = gf2.nullspace(rows, 12)
    assert len(ns) == 12 - gf2.rank(rows)
    for x in ns:
        assert all(gf2.parity(r & x) == 0 for r in rows)


@given(rows_st, st.integers(0, 2 ** 12 - 1))
def test_solve_affine(rows, x):
    eqs = [(r, gf2.parity(r & x)) for r in rows]
    sol = gf2.solve_affine(eqs, 12)
    assert sol is not None
    part, hom = sol
    assert all(gf2.parity(c & part) == b for c, b in eqs)
    assert len(hom) == 12 - gf2.rank(rows)


def test_inconsistent_system():
    assert gf2.solve_affine([(0b1, 0), (0b1, 1)], 3) is None


def test_row_reducer_membership():
    red = gf2.RowReducer([0b0011, 0b0110])
    assert red.rank == 2
    assert red.contains(0b0101)
    assert not red.contains(0b1000)
    assert gf2.in_rowspace(0b0110, [0b0011, 0b0110])


@given(st.integers(0, 2 ** 20 - 1))
def test_bits_round_trip(v):
    assert gf2.bits_to_int(gf2.int_to_bits(v, 20)) == v
    mat = gf2.rows_to_matrix([v, v >> 1], 20)
    assert mat.dtype == np.uint8
    assert gf2.matrix_to_rows(mat) == [v, v >> 1]

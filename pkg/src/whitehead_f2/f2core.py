"""Mod 2 arithmetic: integer binomials and bitset linear algebra over GF(2).

Vectors are ``int`` bitsets (bit ``j`` set means column ``j`` has coefficient
1); formal sums of hashable monomials are plain ``frozenset`` objects, added by
symmetric difference.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence


def binom2(a: int, b: int) -> int:
    """Coefficient of t^b in (1+t)^a over GF(2), for any integers a, b."""
    if b < 0:
        return 0
    if a < 0:
        # (1+t)^a = sum_b (-1)^b C(b-a-1, b) t^b
        a = b - a - 1
    return 1 if (b & ~a) == 0 else 0


def fsum(terms: Iterable[Hashable]) -> frozenset:
    """Reduce a stream of monomials mod 2 (pairs cancel)."""
    out: set = set()
    for t in terms:
        out ^= {t}
    return frozenset(out)


def bits(v: int) -> list[int]:
    """Indices of the set bits of ``v``, ascending."""
    out = []
    while v:
        low = v & -v
        out.append(low.bit_length() - 1)
        v ^= low
    return out


def reduce_rows(rows: Sequence[int]) -> tuple[list[int], list[int]]:
    """Row-reduce ``rows``; return (pivot rows, pivot columns).

    Pivots are taken at the lowest set bit, and every pivot row is cleared
    from the others, so the result is the reduced echelon form.
    """
    pivots: list[int] = []
    cols: list[int] = []
    for r in rows:
        for p, c in zip(pivots, cols):
            if (r >> c) & 1:
                r ^= p
        if r:
            c = (r & -r).bit_length() - 1
            for i, p in enumerate(pivots):
                if (p >> c) & 1:
                    pivots[i] = p ^ r
            pivots.append(r)
            cols.append(c)
    return pivots, cols


@dataclass(frozen=True)
class F2Matrix:
    """A matrix over GF(2) stored as a list of row bitsets.

    ``rows[i]`` bit ``j`` is the entry (i, j).  Labels are optional and are
    carried through transpose/products where they make sense.
    """

    rows: tuple[int, ...]
    ncols: int
    row_labels: tuple = field(default=(), compare=False)
    col_labels: tuple = field(default=(), compare=False)

    def __post_init__(self):
        limit = 1 << self.ncols
        for r in self.rows:
            if r < 0 or r >= limit:
                raise ValueError("row has bits outside the column range")

    @classmethod
    def from_lists(cls, entries: Sequence[Sequence[int]], ncols: int | None = None) -> F2Matrix:
        if ncols is None:
            ncols = len(entries[0]) if entries else 0
        rows = []
        for row in entries:
            if len(row) != ncols:
                raise ValueError("ragged matrix")
            rows.append(sum(1 << j for j, x in enumerate(row) if x % 2))
        return cls(tuple(rows), ncols)

    @classmethod
    def identity(cls, n: int, labels: tuple = ()) -> F2Matrix:
        return cls(tuple(1 << i for i in range(n)), n, labels, labels)

    @classmethod
    def zero(cls, nrows: int, ncols: int) -> F2Matrix:
        return cls((0,) * nrows, ncols)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def entry(self, i: int, j: int) -> int:
        return (self.rows[i] >> j) & 1

    def to_lists(self) -> list[list[int]]:
        return [[(r >> j) & 1 for j in range(self.ncols)] for r in self.rows]

    def transpose(self) -> F2Matrix:
        cols = [0] * self.ncols
        for i, r in enumerate(self.rows):
            for j in bits(r):
                cols[j] |= 1 << i
        return F2Matrix(tuple(cols), self.nrows, self.col_labels, self.row_labels)

    def __matmul__(self, other: F2Matrix) -> F2Matrix:
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        for r in self.rows:
            acc = 0
            for j in bits(r):
                acc ^= other.rows[j]
            out.append(acc)
        return F2Matrix(tuple(out), other.ncols, self.row_labels, other.col_labels)

    def __add__(self, other: F2Matrix) -> F2Matrix:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        return F2Matrix(tuple(a ^ b for a, b in zip(self.rows, other.rows)),
                        self.ncols, self.row_labels, self.col_labels)

    def apply(self, v: int) -> int:
        """Row vector times matrix: ``v`` indexes rows, result indexes columns."""
        acc = 0
        for i in bits(v):
            acc ^= self.rows[i]
        return acc

    def is_zero(self) -> bool:
        return not any(self.rows)

    def is_identity(self) -> bool:
        return self.nrows == self.ncols and all(r == 1 << i for i, r in enumerate(self.rows))

    def is_unitriangular(self) -> bool:
        """Square with unit diagonal and zero strictly above or strictly below it."""
        if self.nrows != self.ncols:
            return False
        if any(not (r >> i) & 1 for i, r in enumerate(self.rows)):
            return False
        upper = all(r >> i << i == r for i, r in enumerate(self.rows))
        lower = all(r < (1 << (i + 1)) for i, r in enumerate(self.rows))
        return upper or lower


def rank(m: F2Matrix) -> int:
    return len(reduce_rows(m.rows)[0])


def image(m: F2Matrix) -> list[int]:
    """Basis of the row space, in reduced echelon form."""
    return reduce_rows(m.rows)[0]


def left_kernel(m: F2Matrix) -> list[int]:
    """Basis of {v : v @ m = 0}, as bitsets over the rows of ``m``.

    Maps are stored one row per source basis element, so this is the kernel
    of the map ``m`` represents.
    """
    n = m.ncols
    mask = (1 << n) - 1
    pivots: list[int] = []
    cols: list[int] = []
    out = []
    for i, r in enumerate(m.rows):
        r |= 1 << (n + i)
        for p, c in zip(pivots, cols):
            if (r >> c) & 1:
                r ^= p
        if r & mask:
            pivots.append(r)
            cols.append((r & -r).bit_length() - 1)
        else:
            out.append(r >> n)
    return out


def kernel(m: F2Matrix) -> list[int]:
    """Basis of {x : m x = 0}, as bitsets over the columns of ``m``.

    rank(m) + len(kernel(m)) == m.ncols.
    """
    return left_kernel(m.transpose())


def is_invertible(m: F2Matrix) -> bool:
    return m.nrows == m.ncols and rank(m) == m.nrows


def in_span(v: int, basis: Sequence[int]) -> bool:
    pivots, cols = reduce_rows(basis)
    for p, c in zip(pivots, cols):
        if (v >> c) & 1:
            v ^= p
    return v == 0


def same_span(a: Sequence[int], b: Sequence[int]) -> bool:
    ra, rb = reduce_rows(a)[0], reduce_rows(b)[0]
    return sorted(ra) == sorted(rb)

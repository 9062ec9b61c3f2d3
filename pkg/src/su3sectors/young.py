"""Partition and Young-diagram combinatorics.

Enumeration of partitions with a bounded number of parts, Specht-module
dimensions (hook-length formula), SU(d) Weyl dimensions and the
Schur-Weyl bookkeeping that pairs them.  All dimension arithmetic is done
with Python integers (and ``Fraction`` where a product has rational
factors), so nothing here can overflow.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterator, Sequence

from .errors import InvalidInputError


@dataclass(frozen=True, order=True)
class YoungDiagram:
    """Row lengths of a Young diagram, non-increasing and positive."""

    rows: tuple[int, ...] = ()

    def __post_init__(self):
        rows = tuple(int(r) for r in self.rows)
        if any(r < 1 for r in rows):
            raise InvalidInputError(f"row lengths must be positive: {rows}")
        if any(a < b for a, b in zip(rows, rows[1:])):
            raise InvalidInputError(f"row lengths must be non-increasing: {rows}")
        object.__setattr__(self, "rows", rows)

    @property
    def size(self) -> int:
        return sum(self.rows)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def row(self, i: int) -> int:
        """Length of row ``i`` (0-based), zero past the last row."""
        return self.rows[i] if i < len(self.rows) else 0

    def conjugate(self) -> "YoungDiagram":
        if not self.rows:
            return YoungDiagram()
        return YoungDiagram(tuple(sum(1 for r in self.rows if r > j) for j in range(self.rows[0])))

    def cells(self) -> Iterator[tuple[int, int]]:
        for i, r in enumerate(self.rows):
            for j in range(r):
                yield i, j

    def column_counts(self) -> list[int]:
        """``h[a-1]`` = number of columns with exactly ``a`` boxes."""
        if not self.rows:
            return []
        padded = list(self.rows) + [0]
        return [padded[a] - padded[a + 1] for a in range(len(self.rows))]

    def __str__(self):
        return "(" + ",".join(map(str, self.rows)) + ")"


def as_diagram(obj) -> YoungDiagram:
    if isinstance(obj, YoungDiagram):
        return obj
    return YoungDiagram(tuple(r for r in obj if r != 0))


@dataclass(frozen=True)
class Su3Label:
    """Column counts of a diagram with at most three rows.

    ``p``, ``q``, ``r`` count columns of length one, two and three; the
    SU(3) irrep is ``D(p, q)`` and the diagram has ``p + 2q + 3r`` boxes.
    """

    p: int
    q: int
    r: int = 0

    def __post_init__(self):
        if min(self.p, self.q, self.r) < 0:
            raise InvalidInputError(f"negative SU(3) label {self}")

    @property
    def size(self) -> int:
        return self.p + 2 * self.q + 3 * self.r

    @property
    def dimension(self) -> int:
        return su3_dimension(self.p, self.q)

    def diagram(self) -> YoungDiagram:
        return as_diagram((self.p + self.q + self.r, self.q + self.r, self.r))

    @classmethod
    def from_diagram(cls, diagram) -> "Su3Label":
        lam = as_diagram(diagram)
        if lam.n_rows > 3:
            raise InvalidInputError(f"{lam} has more than three rows")
        l1, l2, l3 = lam.row(0), lam.row(1), lam.row(2)
        return cls(l1 - l2, l2 - l3, l3)


@dataclass(frozen=True)
class SchurWeylRow:
    diagram: YoungDiagram
    specht_dim: int
    weyl_dim: int
    stripped: YoungDiagram
    removed_columns: int


def su3_dimension(p: int, q: int) -> int:
    return (p + 1) * (q + 1) * (p + q + 2) // 2


def enumerate_partitions(L: int, max_parts: int) -> list[YoungDiagram]:
    """All partitions of ``L`` into at most ``max_parts`` parts.

    Ordered lexicographically decreasing, e.g. ``(4), (3,1), (2,2), (2,1,1)``.
    """
    if L < 1 or max_parts < 1:
        raise InvalidInputError(f"need L >= 1 and max_parts >= 1, got {L}, {max_parts}")
    out: list[YoungDiagram] = []

    def rec(remaining: int, largest: int, prefix: list[int]):
        if remaining == 0:
            out.append(YoungDiagram(tuple(prefix)))
            return
        if len(prefix) == max_parts:
            return
        for part in range(min(remaining, largest), 0, -1):
            prefix.append(part)
            rec(remaining - part, part, prefix)
            prefix.pop()

    rec(L, L, [])
    return out


def hook_lengths(diagram) -> list[int]:
    lam = as_diagram(diagram)
    conj = lam.conjugate()
    return [lam.rows[i] - j + conj.rows[j] - i - 1 for i, j in lam.cells()]


def specht_dimension(diagram) -> int:
    """Number of standard Young tableaux of the given shape (hook-length formula)."""
    lam = as_diagram(diagram)
    denom = 1
    for h in hook_lengths(lam):
        denom *= h
    num = factorial(lam.size)
    dim, rem = divmod(num, denom)
    assert rem == 0
    return dim


def weyl_dimension(stripped, d: int) -> int:
    """Dimension of the SU(d) irrep labelled by a diagram with at most d-1 rows."""
    lam = as_diagram(stripped)
    if d < 2:
        raise InvalidInputError(f"d must be >= 2, got {d}")
    if lam.n_rows > d - 1:
        raise InvalidInputError(f"{lam} has {lam.n_rows} rows; SU({d}) allows at most {d - 1}")
    rows = [lam.row(i) for i in range(d)]
    dim = Fraction(1)
    for i in range(d):
        for j in range(i + 1, d):
            dim *= 1 + Fraction(rows[i] - rows[j], j - i)
    assert dim.denominator == 1
    return int(dim)


def strip_full_columns(diagram, d: int) -> tuple[YoungDiagram, int]:
    """Remove all columns of length ``d``; return the rest and how many went."""
    lam = as_diagram(diagram)
    if lam.n_rows > d:
        raise InvalidInputError(f"{lam} has more than {d} rows")
    r = lam.row(d - 1)
    return as_diagram(tuple(x - r for x in lam.rows)), r


def schur_weyl_table(L: int, d: int) -> list[SchurWeylRow]:
    """One row per diagram in Par(L, d) with its Specht and Weyl dimensions."""
    if L < 1 or d < 2:
        raise InvalidInputError(f"need L >= 1 and d >= 2, got L={L}, d={d}")
    rows = []
    for lam in enumerate_partitions(L, d):
        bar, r = strip_full_columns(lam, d)
        rows.append(SchurWeylRow(lam, specht_dimension(lam), weyl_dimension(bar, d), bar, r))
    return rows


def schur_weyl_total(L: int, d: int) -> int:
    return sum(row.specht_dim * row.weyl_dim for row in schur_weyl_table(L, d))


def standard_tableaux(diagram) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Yield every standard filling of ``diagram`` with 1..L (rows as tuples).

    Entries are placed one at a time; entry k may go at the end of row i if
    row i is shorter than its target length and shorter than row i-1.
    """
    lam = as_diagram(diagram)
    target = lam.rows
    filling: list[list[int]] = [[] for _ in target]

    def rec(k: int):
        if k > lam.size:
            yield tuple(tuple(r) for r in filling)
            return
        for i, t in enumerate(target):
            n = len(filling[i])
            if n < t and (i == 0 or len(filling[i - 1]) > n):
                filling[i].append(k)
                yield from rec(k + 1)
                filling[i].pop()

    yield from rec(1)


def partition_count(L: int, max_parts: int | None = None) -> int:
    """p_d(L) by the standard recurrence p(n, k) = p(n, k-1) + p(n-k, k)."""
    k_max = L if max_parts is None else min(max_parts, L)
    table = [[0] * (k_max + 1) for _ in range(L + 1)]
    for k in range(k_max + 1):
        table[0][k] = 1
    for n in range(1, L + 1):
        for k in range(1, k_max + 1):
            table[n][k] = table[n][k - 1] + (table[n - k][k] if n >= k else 0)
    return table[L][k_max]


def local_dimension(n: int) -> int:
    """Number of single-site states with ``n`` bosons in three modes."""
    return (n + 1) * (n + 2) // 2



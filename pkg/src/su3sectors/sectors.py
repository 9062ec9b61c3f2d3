"""Dynamical sectors of the all-to-all three-level model.

With ``n_j`` bosons on site ``j`` the local space is spanned by the
occupation triples ``(n1, n2, n3)`` with ``n1 + n2 + n3 = n_j``.  The
Hamiltonian conserves every ``n_j``, the total magnetization
``M = sum_j (n_j1 - n_j3)`` and (for uniform ``n_j``) the site
permutation symmetry.

Concrete bases are built in second quantization over local states: the
sites are split into groups, and inside a group the local states are
either bosons (fully symmetric under permutations of the group's sites)
or fermions (fully antisymmetric).  A Fock-table sector is the special
case of one site per group.  Collective one-body operators then act with
the usual ``sqrt`` factors (bosons) or ordering signs (fermions), so no
product-space vectors are ever formed except in :meth:`SectorBasis.to_product_space`,
which exists for testing.
"""

from __future__ import annotations

import csv
import itertools
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial, sqrt
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import BudgetExceededError, InvalidInputError
from .young import (
    YoungDiagram,
    as_diagram,
    enumerate_partitions,
    local_dimension,
    specht_dimension,
    strip_full_columns,
    weyl_dimension,
)

MAX_SECTOR_STATES = 250_000
SYMMETRIC = "symmetric"
ANTISYMMETRIC = "antisymmetric"


@lru_cache(maxsize=None)
def local_states(n: int) -> tuple[tuple[int, int, int], ...]:
    """Occupation triples of one site with ``n`` bosons, lexicographically decreasing."""
    if n < 0:
        raise InvalidInputError(f"negative occupation {n}")
    return tuple((a, b, n - a - b) for a in range(n, -1, -1) for b in range(n - a, -1, -1))


def _local_magnetizations(n: int) -> np.ndarray:
    return np.array([s[0] - s[2] for s in local_states(n)], dtype=np.int64)


@lru_cache(maxsize=None)
def _local_raising(n: int) -> tuple[tuple[tuple[int, float, float], ...], ...]:
    """For each local state ``s``: tuples ``(s', <s'|T12|s>, <s'|T23|s>)``.

    ``T12 = b1^dag b2`` and ``T23 = b2^dag b3`` both raise the local
    magnetization by one.
    """
    states = local_states(n)
    index = {s: k for k, s in enumerate(states)}
    out = []
    for a, b, c in states:
        moves = []
        if b > 0:
            moves.append((index[(a + 1, b - 1, c)], sqrt(b * (a + 1)), 0.0))
        if c > 0:
            moves.append((index[(a, b + 1, c - 1)], 0.0, sqrt(c * (b + 1))))
        out.append(tuple(moves))
    return tuple(out)


@dataclass(frozen=True)
class SectorLabel:
    """Quantum numbers of one dynamical sector.

    ``occupations`` lists ``n_j`` per site.  ``permutation`` is a
    :class:`YoungDiagram`, ``"symmetric"``, ``"antisymmetric"`` or ``None``
    (no permutation symmetry imposed).  Only one copy of each Specht
    multiplicity class is represented.
    """

    occupations: tuple[int, ...]
    permutation: object = None
    M: int = 0

    def __post_init__(self):
        occ = tuple(int(x) for x in self.occupations)
        if not occ or min(occ) < 0:
            raise InvalidInputError(f"occupations must be a non-empty list of non-negative integers: {occ}")
        object.__setattr__(self, "occupations", occ)
        if abs(self.M) > sum(occ):
            raise InvalidInputError(f"|M| = {abs(self.M)} exceeds the particle number {sum(occ)}")
        perm = self.permutation
        if perm is not None and perm not in (SYMMETRIC, ANTISYMMETRIC):
            perm = as_diagram(perm)
            object.__setattr__(self, "permutation", perm)
            if not self.uniform:
                raise InvalidInputError("Young-diagram labels need equal occupation on every site")
            if perm.size != len(occ):
                raise InvalidInputError(f"diagram {perm} does not have {len(occ)} boxes")

    @property
    def n_sites(self) -> int:
        return len(self.occupations)

    @property
    def uniform(self) -> bool:
        return len(set(self.occupations)) == 1

    def describe(self) -> str:
        occ = ",".join(map(str, self.occupations))
        if isinstance(self.permutation, YoungDiagram):
            perm = f"lambda={self.permutation}"
        else:
            perm = self.permutation or "fock"
        return f"n=({occ}) {perm} M={self.M}"


@dataclass(frozen=True)
class SiteGroup:
    """Sites sharing an occupation ``n`` and one permutation statistic."""

    n: int
    sites: tuple[int, ...]
    fermionic: bool = False

    @property
    def size(self) -> int:
        return len(self.sites)


def _group_states(group: SiteGroup) -> dict[int, list[tuple[int, ...]]]:
    """Sorted tuples of local-state indices for ``group``, keyed by magnetization."""
    mags = _local_magnetizations(group.n)
    d = len(mags)
    if group.fermionic:
        combos = itertools.combinations(range(d), group.size)
    else:
        combos = itertools.combinations_with_replacement(range(d), group.size)
    out: dict[int, list[tuple[int, ...]]] = {}
    for combo in combos:
        out.setdefault(int(mags[list(combo)].sum()), []).append(combo)
    return out


def _group_count(group: SiteGroup) -> int:
    d = local_dimension(group.n)
    if group.fermionic:
        return factorial(d) // (factorial(group.size) * factorial(d - group.size)) if group.size <= d else 0
    return factorial(d + group.size - 1) // (factorial(group.size) * factorial(d - 1))


@dataclass
class SectorBasis:
    """Orthonormal basis of one magnetization sector.

    ``states[k]`` holds one sorted tuple of local-state indices per group.
    """

    label: SectorLabel
    groups: tuple[SiteGroup, ...]
    states: list[tuple[tuple[int, ...], ...]]
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {s: k for k, s in enumerate(self.states)}

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def n_sites(self) -> int:
        return self.label.n_sites

    @property
    def M(self) -> int:
        return self.label.M

    def index(self, state) -> int:
        return self._index[state]

    def shifted(self, dM: int) -> "SectorBasis":
        """Basis of the same groups at magnetization ``M + dM``."""
        total = sum(self.label.occupations)
        M = self.M + dM
        label = SectorLabel(self.label.occupations, self.label.permutation, max(-total, min(total, M)))
        if abs(M) > total:
            return SectorBasis(label, self.groups, [])
        return _build(label, self.groups)

    def raising_matrix(self, g1: float, g2: float, target: "SectorBasis | None" = None) -> sp.csr_matrix:
        """Matrix of ``X = g1 T12 + g2 T23`` from this sector to ``M + 1``."""
        target = self.shifted(+1) if target is None else target
        rows, cols, vals = [], [], []
        for k, state in enumerate(self.states):
            for gi, group in enumerate(self.groups):
                moves = _local_raising(group.n)
                gstate = state[gi]
                counts = Counter(gstate)
                for pos, s in enumerate(gstate):
                    if not group.fermionic and pos > 0 and gstate[pos - 1] == s:
                        continue
                    for s_new, a12, a23 in moves[s]:
                        amp = g1 * a12 + g2 * a23
                        if amp == 0.0:
                            continue
                        rest = gstate[:pos] + gstate[pos + 1:]
                        if group.fermionic:
                            if s_new in counts:
                                continue
                            ins = sum(1 for x in rest if x < s_new)
                            amp *= -1.0 if (pos + ins) % 2 else 1.0
                        else:
                            ins = sum(1 for x in rest if x <= s_new)
                            amp *= sqrt(counts[s] * (counts.get(s_new, 0) + 1))
                        new_g = rest[:ins] + (s_new,) + rest[ins:]
                        new_state = state[:gi] + (new_g,) + state[gi + 1:]
                        rows.append(target.index(new_state))
                        cols.append(k)
                        vals.append(amp)
        return sp.csr_matrix((vals, (rows, cols)), shape=(target.dim, self.dim))

    def diagonal_magnetization(self) -> np.ndarray:
        """Magnetization of every basis state (all equal to ``M``)."""
        out = np.zeros(self.dim, dtype=np.int64)
        for gi, group in enumerate(self.groups):
            mags = _local_magnetizations(group.n)
            out += np.array([mags[list(s[gi])].sum() for s in self.states], dtype=np.int64)
        return out

    def fock_tables(self) -> list[tuple[tuple[int, int, int], ...]]:
        """Occupation tables of a one-site-per-group basis, rows ordered by site."""
        if any(g.size != 1 for g in self.groups):
            raise InvalidInputError("fock_tables needs a basis with one site per group")
        order = np.argsort([g.sites[0] for g in self.groups])
        return [
            tuple(local_states(self.groups[i].n)[state[i][0]] for i in order)
            for state in self.states
        ]

    def to_product_space(self) -> np.ndarray:
        """Columns are the basis states written in the full site-product basis.

        Exponential in the number of sites; intended for cross-checks only.
        """
        occ = self.label.occupations
        dims = tuple(local_dimension(n) for n in occ)
        total = int(np.prod(dims))
        if total > 200_000:
            raise BudgetExceededError("product space", total, 200_000)
        out = np.zeros((total, self.dim))
        for k, state in enumerate(self.states):
            parts = [_group_expansion(group, gstate) for group, gstate in zip(self.groups, state)]
            for combo in itertools.product(*parts):
                labels = [0] * len(occ)
                coeff = 1.0
                for group, (assign, c) in zip(self.groups, combo):
                    coeff *= c
                    for site, s in zip(group.sites, assign):
                        labels[site] = s
                out[np.ravel_multi_index(labels, dims), k] += coeff
        return out


def _group_expansion(group: SiteGroup, gstate: tuple[int, ...]):
    """``(assignment to group sites, coefficient)`` pairs of one group state."""
    if group.fermionic:
        norm = 1.0 / sqrt(factorial(len(gstate)))
        out = []
        for perm in itertools.permutations(range(len(gstate))):
            inversions = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
            out.append((tuple(gstate[p] for p in perm), norm * (-1) ** inversions))
        return out
    distinct = sorted(set(itertools.permutations(gstate)))
    norm = 1.0 / sqrt(len(distinct))
    return [(assign, norm) for assign in distinct]


def _build(label: SectorLabel, groups: tuple[SiteGroup, ...], max_states: int = MAX_SECTOR_STATES) -> SectorBasis:
    bound = 1
    for g in groups:
        bound *= _group_count(g)
    if bound > 50 * max_states:
        raise BudgetExceededError("sector enumeration", bound, 50 * max_states)
    tables = [_group_states(g) for g in groups]
    # remaining magnetization range after group i, for pruning
    reach = [0] * (len(groups) + 1)
    for i in range(len(groups) - 1, -1, -1):
        reach[i] = reach[i + 1] + groups[i].size * groups[i].n
    states: list[tuple[tuple[int, ...], ...]] = []
    prefix: list[tuple[int, ...]] = []

    def rec(i: int, remaining: int):
        if i == len(groups):
            if remaining == 0:
                states.append(tuple(prefix))
                if len(states) > max_states:
                    raise BudgetExceededError("sector dimension", len(states), max_states)
            return
        for m in sorted(tables[i], reverse=True):
            if abs(remaining - m) > reach[i + 1]:
                continue
            for gstate in tables[i][m]:
                prefix.append(gstate)
                rec(i + 1, remaining - m)
                prefix.pop()

    rec(0, label.M)
    return SectorBasis(label, groups, states)


def _check_occupations(occupations) -> tuple[int, ...]:
    occ = tuple(int(x) for x in occupations)
    if not occ:
        raise InvalidInputError("need at least one site")
    if min(occ) < 0:
        raise InvalidInputError(f"occupations must be non-negative: {occ}")
    return occ


def fock_sector_basis(n_per_site: Sequence[int], M: int, max_states: int = MAX_SECTOR_STATES) -> SectorBasis:
    """All Fock tables with the given site occupations and magnetization."""
    occ = _check_occupations(n_per_site)
    groups = tuple(SiteGroup(n, (j,)) for j, n in enumerate(occ))
    if abs(M) > sum(occ):
        return SectorBasis(SectorLabel(occ, None, 0), groups, [])
    return _build(SectorLabel(occ, None, M), groups, max_states)


def enumerate_fock_tables(n_per_site: Sequence[int], M: int) -> list[tuple[tuple[int, int, int], ...]]:
    """Depth-first enumeration of ``L x 3`` occupation tables.

    Row ``j`` sums to ``n_j`` and the columns satisfy
    ``sum_j (n_j1 - n_j3) = M``.  An infeasible ``M`` gives an empty list.
    """
    return fock_sector_basis(n_per_site, M).fock_tables()


def symmetric_sector_basis(L: int, n: int, M: int, max_states: int = MAX_SECTOR_STATES) -> SectorBasis:
    """Fully permutation-symmetric states of ``L`` sites with ``n`` bosons each.

    Each basis vector is the normalized uniform superposition over the
    site-permutation orbit of one multiset of local states.
    """
    if L < 1 or n < 1:
        raise InvalidInputError(f"need L >= 1 and n >= 1, got L={L}, n={n}")
    return _build(SectorLabel((n,) * L, SYMMETRIC, M), (SiteGroup(n, tuple(range(L))),), max_states)


def antisymmetric_sector_basis(occupations: Sequence[int], M: int, max_states: int = MAX_SECTOR_STATES) -> SectorBasis:
    """Alternating sums over permutations of sites with equal occupation.

    Sites with different ``n_j`` have different local spaces and cannot be
    exchanged, so antisymmetry is imposed separately inside every group of
    equal occupation.  A group needs distinct local states on all of its
    sites, so groups larger than the local dimension give an empty basis.
    """
    occ = _check_occupations(occupations)
    by_n: dict[int, list[int]] = {}
    for j, n in enumerate(occ):
        by_n.setdefault(n, []).append(j)
    groups = tuple(SiteGroup(n, tuple(sites), fermionic=True) for n, sites in sorted(by_n.items()))
    if abs(M) > sum(occ) or any(g.size > local_dimension(g.n) for g in groups):
        return SectorBasis(SectorLabel(occ, ANTISYMMETRIC, 0), groups, [])
    return _build(SectorLabel(occ, ANTISYMMETRIC, M), groups, max_states)


# ---------------------------------------------------------------- census


@lru_cache(maxsize=None)
def _schur_magnetization(rows: tuple[int, ...], mags: tuple[int, ...]) -> tuple[tuple[int, int], ...]:
    """Coefficients of ``s_rows(z^m_1, ..., z^m_k)`` as sorted ``(M, count)`` pairs.

    Branching rule: strip a horizontal strip filled with the last variable.
    """
    k = len(mags)
    rows = tuple(r for r in rows if r)
    if len(rows) > k:
        return ()
    if not rows:
        return ((0, 1),)
    if k == 1:
        return ((rows[0] * mags[0], 1),)
    out: Counter = Counter()
    size = sum(rows)
    ranges = [range(rows[i + 1] if i + 1 < len(rows) else 0, rows[i] + 1) for i in range(len(rows))]
    for mu in itertools.product(*ranges):
        if len([x for x in mu if x]) > k - 1:
            continue
        shift = (size - sum(mu)) * mags[-1]
        for M, c in _schur_magnetization(tuple(mu), mags[:-1]):
            out[M + shift] += c
    return tuple(sorted(out.items()))


def magnetization_split(diagram, n: int) -> dict[int, int]:
    """Sizes of the magnetization blocks of the sector paired with ``diagram``."""
    lam = as_diagram(diagram)
    mags = tuple(int(m) for m in _local_magnetizations(n))
    return dict(sorted(_schur_magnetization(lam.rows, mags), reverse=True))


@dataclass(frozen=True)
class CensusRow:
    diagram: YoungDiagram
    p: int
    q: int
    r: int
    specht_dim: int
    weyl_dim: int
    by_M: dict


@dataclass
class Census:
    """Permutation sectors of ``L`` sites with ``n`` bosons per site.

    For ``n = 1`` the ``(p, q, r)`` columns are the exact SU(3) labels; for
    ``n > 1`` they are the effective SU(3) representation of the diagram.
    """

    L: int
    n: int
    d: int
    rows: list[CensusRow]

    @property
    def total_dimension(self) -> int:
        return sum(row.specht_dim * row.weyl_dim for row in self.rows)

    @property
    def expected_dimension(self) -> int:
        return self.d**self.L

    @property
    def largest_sector(self) -> int:
        return max(row.weyl_dim for row in self.rows)

    @property
    def largest_subsector(self) -> int:
        return max(max(row.by_M.values()) for row in self.rows)

    @property
    def n_sectors(self) -> int:
        return len(self.rows)

    def write_csv(self, fh) -> None:
        """One row per diagram (columns lambda, p, q, r, specht_dim, weyl_dim)."""
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda", "p", "q", "r", "specht_dim", "weyl_dim"])
        for row in self.rows:
            w.writerow([_fmt_diagram(row.diagram), row.p, row.q, row.r, row.specht_dim, row.weyl_dim])

    def write_split_csv(self, fh) -> None:
        """One row per (diagram, M) block."""
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda", "p", "q", "r", "specht_dim", "weyl_dim", "M", "subsector_dim"])
        for row in self.rows:
            for M, size in row.by_M.items():
                w.writerow([_fmt_diagram(row.diagram), row.p, row.q, row.r, row.specht_dim, row.weyl_dim, M, size])


def _fmt_diagram(lam: YoungDiagram) -> str:
    return "-".join(map(str, lam.rows))


def fragmentation_report(L: int, n: int, split_by_M: bool = True, max_rows: int = 20_000) -> Census:
    """Specht multiplicity, sector dimension and magnetization split per diagram."""
    from .hamiltonian import CartanVector, effective_rep

    if L < 1 or n < 1:
        raise InvalidInputError(f"need L >= 1 and n >= 1, got L={L}, n={n}")
    d = local_dimension(n)
    partitions = enumerate_partitions(L, d)
    if len(partitions) > max_rows:
        raise BudgetExceededError("census rows", len(partitions), max_rows)
    rows = []
    for lam in partitions:
        bar, _ = strip_full_columns(lam, d)
        cartan = CartanVector(tuple(lam.row(a) - lam.row(a + 1) for a in range(lam.n_rows)))
        p, q, r = effective_rep(cartan, n, L)
        by_M = magnetization_split(lam, n) if split_by_M else {}
        rows.append(CensusRow(lam, p, q, r, specht_dimension(lam), weyl_dimension(bar, d), by_M))
    census = Census(L, n, d, rows)
    if census.total_dimension != census.expected_dimension:
        raise AssertionError(f"dimension identity failed: {census.total_dimension} != {census.expected_dimension}")
    return census

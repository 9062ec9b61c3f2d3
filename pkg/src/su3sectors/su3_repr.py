"""SU(3) irreps D(p, q) in the Gelfand-Tsetlin basis.

A state of the gl(3) irrep with highest weight ``(p+q+r, q+r, r)`` is a
triangular pattern::

    m13   m23   m33
       m12   m22
          m11

with the betweenness conditions.  Mode occupations of a pattern are
``n1 = m11``, ``n2 = m12 + m22 - m11``, ``n3 = |top| - m12 - m22``, so the
diagonal generators ``T_aa`` are diagonal matrices of occupations.  The
adjacent off-diagonal generators use the standard Gelfand-Tsetlin matrix
elements in the orthonormal basis; ``T13`` and ``T31`` follow from
commutators.  All matrix elements are real and ``T_ba = T_ab^T``.

``brute_force_basis`` builds the same irrep the slow way, from
row-symmetrized and column-antisymmetrized product states of ``L`` sites,
and is kept as an independent check of the fast construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import sqrt
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import BudgetExceededError, InvalidInputError, NumericalError
from .young import Su3Label, as_diagram, su3_dimension

MAX_IRREP_DIM = 400_000
BRUTE_FORCE_MAX_SITES = 6


@dataclass(frozen=True)
class WeightLabel:
    i3: Fraction
    y: Fraction
    v3: Fraction
    y_prime: Fraction
    M: int

    @classmethod
    def from_occupations(cls, n1: int, n2: int, n3: int) -> "WeightLabel":
        return cls(
            i3=Fraction(n1 - n2, 2),
            y=Fraction(n1 + n2 - 2 * n3, 3),
            v3=Fraction(n1 - n3, 2),
            y_prime=Fraction(2 * n2 - n1 - n3, 3),
            M=n1 - n3,
        )


@dataclass
class IrrepBasis:
    """Orthonormal basis of one irrep with its nine generator matrices.

    ``generators[(a, b)]`` (0-based mode indices) is a sparse CSR matrix;
    use :meth:`T` for the 1-based spelling.  ``patterns`` is ``None`` for
    bases that do not come from Gelfand-Tsetlin patterns.
    """

    p: int
    q: int
    r: int
    occupations: np.ndarray  # (dim, 3) int
    generators: dict
    patterns: np.ndarray | None = None
    _blocks: dict = field(default_factory=dict, repr=False)

    @property
    def label(self) -> Su3Label:
        return Su3Label(self.p, self.q, self.r)

    @property
    def dim(self) -> int:
        return self.occupations.shape[0]

    @property
    def n_sites(self) -> int:
        return self.p + 2 * self.q + 3 * self.r

    @property
    def magnetization(self) -> np.ndarray:
        return self.occupations[:, 0] - self.occupations[:, 2]

    def T(self, a: int, b: int) -> sp.csr_matrix:
        return self.generators[(a - 1, b - 1)]

    def weights(self) -> list[WeightLabel]:
        return [WeightLabel.from_occupations(*map(int, occ)) for occ in self.occupations]

    def block_indices(self, M: int) -> np.ndarray:
        if M not in self._blocks:
            self._blocks[M] = np.flatnonzero(self.magnetization == M)
        return self._blocks[M]

    def magnetization_sizes(self) -> dict[int, int]:
        values, counts = np.unique(self.magnetization, return_counts=True)
        return {int(m): int(c) for m, c in sorted(zip(values, counts), reverse=True)}


def gt_patterns(p: int, q: int, r: int = 0) -> list[tuple[int, int, int, int, int, int]]:
    """Patterns ``(m13, m23, m33, m12, m22, m11)`` of D(p, q) with r full columns."""
    m13, m23, m33 = p + q + r, q + r, r
    out = []
    for m12 in range(m23, m13 + 1):
        for m22 in range(m33, m23 + 1):
            for m11 in range(m22, m12 + 1):
                out.append((m13, m23, m33, m12, m22, m11))
    return out


def _occupations(pattern) -> tuple[int, int, int]:
    m13, m23, m33, m12, m22, m11 = pattern
    return m11, m12 + m22 - m11, m13 + m23 + m33 - m12 - m22


def _sort_key(pattern):
    n1, n2, n3 = _occupations(pattern)
    # M descending, then Y' descending (3Y' = 2n2 - n1 - n3), then the pattern itself
    return (-(n1 - n3), -(2 * n2 - n1 - n3), tuple(-x for x in pattern[3:]))


def _raise_coefficient(rows, k: int, i: int) -> Fraction:
    """Squared coefficient of T_{k,k+1} shifting m_{k,i} up by one.

    ``rows[k]`` holds the k entries of row k (1-based k, 0-based i); the
    returned value is the square of the orthonormal-basis matrix element.
    """
    lk = [rows[k][j] - j for j in range(k)]
    lk1 = [rows[k + 1][j] - j for j in range(k + 1)]
    lkm = [rows[k - 1][j] - j for j in range(k - 1)] if k > 1 else []
    li = lk[i]
    num = Fraction(1)
    for l in lk1:
        num *= li - l
    for l in lkm:
        num *= li - l + 1
    den = Fraction(1)
    for j, l in enumerate(lk):
        if j != i:
            den *= (li - l) * (li - l + 1)
    return -num / den


@lru_cache(maxsize=64)
def build_basis(p: int, q: int, r: int = 0, max_dim: int = MAX_IRREP_DIM) -> IrrepBasis:
    """Gelfand-Tsetlin basis of D(p, q), shifted by ``r`` full columns.

    ``r`` only adds ``r`` to every mode occupation (a multiple of the
    identity in each ``T_aa``); it is kept so that occupations and the
    site count ``p + 2q + 3r`` refer to the physical system.
    """
    if min(p, q, r) < 0:
        raise InvalidInputError(f"negative irrep label ({p}, {q}, {r})")
    dim = su3_dimension(p, q)
    if dim > max_dim:
        raise BudgetExceededError(f"D({p},{q})", dim, max_dim)

    patterns = sorted(gt_patterns(p, q, r), key=_sort_key)
    assert len(patterns) == dim
    index = {pat: k for k, pat in enumerate(patterns)}
    occ = np.array([_occupations(pat) for pat in patterns], dtype=np.int64)

    def rows_of(pat):
        m13, m23, m33, m12, m22, m11 = pat
        return {3: (m13, m23, m33), 2: (m12, m22), 1: (m11,)}

    up12, up23 = ([], [], []), ([], [], [])
    for col, pat in enumerate(patterns):
        rows = rows_of(pat)
        # T12 raises m11, T23 raises m12 or m22
        for k, i, slot, store in ((1, 0, 5, up12), (2, 0, 3, up23), (2, 1, 4, up23)):
            target = list(pat)
            target[slot] += 1
            row = index.get(tuple(target))
            if row is None:
                continue
            c2 = _raise_coefficient(rows, k, i)
            if c2 < 0:
                raise NumericalError(f"negative squared matrix element at {pat}")
            if c2 > 0:
                store[0].append(row)
                store[1].append(col)
                store[2].append(sqrt(c2))

    def csr(entries):
        rows_, cols_, vals = entries
        return sp.csr_matrix((vals, (rows_, cols_)), shape=(dim, dim))

    gens = {}
    for a in range(3):
        gens[(a, a)] = sp.diags(occ[:, a].astype(float), format="csr")
    gens[(0, 1)] = csr(up12)
    gens[(1, 0)] = gens[(0, 1)].T.tocsr()
    gens[(1, 2)] = csr(up23)
    gens[(2, 1)] = gens[(1, 2)].T.tocsr()
    gens[(0, 2)] = (gens[(0, 1)] @ gens[(1, 2)] - gens[(1, 2)] @ gens[(0, 1)]).tocsr()
    gens[(2, 0)] = gens[(0, 2)].T.tocsr()
    for g in gens.values():
        g.eliminate_zeros()
    return IrrepBasis(p, q, r, occ, gens, np.array(patterns, dtype=np.int64))


def casimir_matrices(basis: IrrepBasis, traceless: bool = False, atol: float = 1e-10):
    """Quadratic and cubic Casimirs ``sum T_ab T_ba`` and ``sum T_ab T_bc T_ca``.

    With ``traceless=True`` the generators are first replaced by their
    su(3) parts ``T_ab - delta_ab N/3``; conjugate irreps then share the
    quadratic invariant.  Both matrices must be
    multiples of the identity; anything else means the generators are wrong
    and raises :class:`NumericalError`.
    """
    T = dict(basis.generators)
    if traceless:
        N = (T[(0, 0)] + T[(1, 1)] + T[(2, 2)]) / 3.0
        for a in range(3):
            T[(a, a)] = (T[(a, a)] - N).tocsr()
    dim = basis.dim
    C2 = sp.csr_matrix((dim, dim))
    C3 = sp.csr_matrix((dim, dim))
    for a in range(3):
        for b in range(3):
            C2 = C2 + T[(a, b)] @ T[(b, a)]
            for c in range(3):
                C3 = C3 + T[(a, b)] @ T[(b, c)] @ T[(c, a)]
    for name, C in (("C2", C2), ("C3", C3)):
        value = C.diagonal()[0] if dim else 0.0
        resid = abs(C - value * sp.identity(dim, format="csr"))
        if resid.nnz and resid.max() > atol * max(1.0, abs(value)):
            raise NumericalError(f"{name} is not scalar on D({basis.p},{basis.q}): residual {resid.max():.3e}")
    return C2.tocsr(), C3.tocsr()


def casimir_values(basis: IrrepBasis, traceless: bool = False) -> tuple[float, float]:
    C2, C3 = casimir_matrices(basis, traceless=traceless)
    return float(C2.diagonal()[0]), float(C3.diagonal()[0])


# ---------------------------------------------------------------------------
# brute-force construction on (C^3)^{\otimes L}
# ---------------------------------------------------------------------------


def collective_generators(L: int) -> dict:
    """Sparse ``T_ab = sum_j E_ab^{(j)}`` on the 3^L product space (0-based a, b)."""
    eye = sp.identity(3, format="csr")
    gens = {}
    for a in range(3):
        for b in range(3):
            e = sp.csr_matrix(([1.0], ([a], [b])), shape=(3, 3))
            total = sp.csr_matrix((3**L, 3**L))
            for j in range(L):
                term = sp.identity(1, format="csr")
                for k in range(L):
                    term = sp.kron(term, e if k == j else eye, format="csr")
                total = total + term
            gens[(a, b)] = total.tocsr()
    return gens


def _permute_sites(vec: np.ndarray, L: int, perm: Sequence[int]) -> np.ndarray:
    """Apply the site permutation sending site ``j`` to ``perm[j]``."""
    tensor = vec.reshape((3,) * L)
    inverse = np.argsort(perm)
    return np.transpose(tensor, inverse).reshape(-1)


def _perm_sign(perm: Sequence[int]) -> int:
    sign, seen = 1, [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length, j = 0, start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _group_action(vec, L, groups, signed):
    """Sum over the product of symmetric groups on ``groups`` (with signs if asked)."""
    out = vec
    for group in groups:
        if len(group) < 2:
            continue
        acc = np.zeros_like(out)
        for images in itertools.permutations(group):
            perm = list(range(L))
            for src, dst in zip(group, images):
                perm[src] = dst
            term = _permute_sites(out, L, perm)
            acc += _perm_sign(perm) * term if signed else term
        out = acc
    return out


def highest_weight_vector(diagram, L: int | None = None) -> np.ndarray:
    """``A_t S_t |phi>`` for the row-reading tableau of ``diagram``.

    Sites ``0..lambda_1-1`` fill row one, the next ``lambda_2`` row two and
    so on; the reference product state puts mode ``k`` on every site of row
    ``k``.  The result is not normalized.
    """
    lam = as_diagram(diagram)
    L = lam.size if L is None else L
    if lam.size != L:
        raise InvalidInputError(f"diagram {lam} has {lam.size} boxes, expected L={L}")
    if L > BRUTE_FORCE_MAX_SITES:
        raise BudgetExceededError("brute-force sites", L, BRUTE_FORCE_MAX_SITES)
    if lam.n_rows > 3:
        raise InvalidInputError(
            f"zero-norm highest weight: {lam} has {lam.n_rows} rows, cannot antisymmetrize over 3 local states"
        )
    tableau, site = [], 0
    for length in lam.rows:
        tableau.append(list(range(site, site + length)))
        site += length
    labels = [0] * L
    for mode, row in enumerate(tableau):
        for s in row:
            labels[s] = mode
    phi = np.zeros(3**L)
    phi[np.ravel_multi_index(labels, (3,) * L)] = 1.0
    columns = [[row[j] for row in tableau if len(row) > j] for j in range(lam.rows[0])]
    vec = _group_action(phi, L, tableau, signed=False)
    return _group_action(vec, L, columns, signed=True)


def _orthonormal_orbit(start: np.ndarray, lowering, tol: float) -> np.ndarray:
    basis: list[np.ndarray] = []

    def add(v):
        # frontier vectors are unit norm, so an absolute cut also rejects
        # images that vanish exactly but carry round-off
        w = v.copy()
        for _ in range(2):  # modified Gram-Schmidt, then one re-orthogonalization pass
            for b in basis:
                w -= (b @ w) * b
        norm = np.linalg.norm(w)
        if norm <= tol:
            return None
        w /= norm
        basis.append(w)
        return w

    frontier = [add(start)]
    while frontier:
        nxt = []
        for v in frontier:
            for op in lowering:
                w = add(op @ v)
                if w is not None:
                    nxt.append(w)
        frontier = nxt
    return np.array(basis).T


def brute_force_basis(diagram, L: int | None = None, tol: float = 1e-10) -> IrrepBasis:
    """Irrep spanned by the lowering-operator orbit of the symmetrized highest weight."""
    lam = as_diagram(diagram)
    L = lam.size if L is None else L
    hw = highest_weight_vector(lam, L)
    if np.linalg.norm(hw) < tol:
        raise InvalidInputError(f"zero-norm highest weight for diagram {lam}")
    gens = collective_generators(L)
    B = _orthonormal_orbit(hw / np.linalg.norm(hw), [gens[(1, 0)], gens[(2, 0)], gens[(2, 1)]], tol)
    reduced = {key: sp.csr_matrix(B.T @ (g @ B)) for key, g in gens.items()}
    for g in reduced.values():
        g.data[np.abs(g.data) < 1e-13] = 0.0
        g.eliminate_zeros()
    occ = np.rint(np.column_stack([reduced[(a, a)].diagonal() for a in range(3)])).astype(np.int64)
    label = Su3Label.from_diagram(lam)
    return IrrepBasis(label.p, label.q, label.r, occ, reduced)


def irrep_hamiltonian(basis: IrrepBasis, params, L: int | None = None) -> sp.csr_matrix:
    """``h(T11 - T33) - (1/L) X^T X`` with ``X = g1 T12 + g2 T23``, on the whole irrep."""
    L = basis.n_sites if L is None else L
    X = params.g1 * basis.T(1, 2) + params.g2 * basis.T(2, 3)
    return (params.h * (basis.T(1, 1) - basis.T(3, 3)) - (X.T @ X) / L).tocsr()


def bases_spectrally_equal(a: IrrepBasis, b: IrrepBasis, params, atol: float = 1e-9) -> bool:
    if a.dim != b.dim:
        raise InvalidInputError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.n_sites != b.n_sites:
        raise InvalidInputError(f"site-count mismatch: {a.n_sites} vs {b.n_sites}")
    ea = np.linalg.eigvalsh(irrep_hamiltonian(a, params).toarray())
    eb = np.linalg.eigvalsh(irrep_hamiltonian(b, params).toarray())
    return bool(np.max(np.abs(ea - eb), initial=0.0) <= atol)


def dump_basis(basis: IrrepBasis, path) -> None:
    """Write one state per line: GT pattern, occupations and weight labels."""
    with open(path, "w") as fh:
        fh.write(f"# D({basis.p},{basis.q}) r={basis.r} dim={basis.dim}\n")
        fh.write("# m13 m23 m33 m12 m22 m11 | n1 n2 n3 | I3 Y V3 Yp M\n")
        for k, w in enumerate(basis.weights()):
            pat = " ".join(map(str, basis.patterns[k])) if basis.patterns is not None else "- - - - - -"
            occ = " ".join(map(str, basis.occupations[k]))
            fh.write(f"{pat} | {occ} | {w.i3} {w.y} {w.v3} {w.y_prime} {w.M}\n")

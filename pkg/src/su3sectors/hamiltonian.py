"""Sector Hamiltonians and the effective SU(3) representation.

The model is

    H = h sum_j (n_j1 - n_j3) - (1/L) X^dag X,   X = g1 T12 + g2 T23,

with ``T_ab = sum_j b_ja^dag b_jb`` and the cavity frequency set to one.
``X`` raises the magnetization ``M`` by one, so within a magnetization
block ``H_M = h M - X_M^T X_M / L`` where ``X_M`` maps block ``M`` to
block ``M + 1``.  Every pathway (Gelfand-Tsetlin irreps, permutation
sectors, Fock tables) builds its block this way, which makes ``H_M``
symmetric by construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import isfinite

import numpy as np
import scipy.sparse as sp

from .errors import BudgetExceededError, InvalidInputError
from .sectors import SectorBasis, SectorLabel
from .su3_repr import IrrepBasis, build_basis
from .young import Su3Label, local_dimension

MAX_DENSE_DIM = 12_000


@dataclass(frozen=True)
class HamiltonianParams:
    h: float = 1.0
    g1: float = 1.7
    g2: float = 1.0

    def __post_init__(self):
        for name in ("h", "g1", "g2"):
            value = float(getattr(self, name))
            if not isfinite(value):
                raise InvalidInputError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)

    @property
    def integrable(self) -> bool:
        return self.g1 == self.g2


@dataclass
class SectorMatrix:
    """Dense real symmetric block of ``H`` for one sector."""

    matrix: np.ndarray
    sector: SectorLabel
    params: HamiltonianParams
    description: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class CartanVector:
    """``h[a-1]`` = number of columns with exactly ``a`` boxes in an S_L diagram."""

    h: tuple[int, ...]

    def __post_init__(self):
        h = tuple(int(x) for x in self.h)
        if any(x < 0 for x in h):
            raise InvalidInputError(f"Cartan entries must be non-negative: {h}")
        object.__setattr__(self, "h", h)

    @property
    def n_sites(self) -> int:
        return sum((a + 1) * x for a, x in enumerate(self.h))

    @property
    def alpha_max(self) -> int:
        nonzero = [a + 1 for a, x in enumerate(self.h) if x]
        return max(nonzero, default=0)

    def __getitem__(self, alpha: int) -> int:
        """1-based access, zero past the end."""
        return self.h[alpha - 1] if 1 <= alpha <= len(self.h) else 0

    @classmethod
    def from_diagram(cls, diagram) -> "CartanVector":
        rows = list(diagram.rows) if hasattr(diagram, "rows") else [r for r in diagram if r]
        return cls(tuple(rows[a] - (rows[a + 1] if a + 1 < len(rows) else 0) for a in range(len(rows))))


def _block_raising(basis: IrrepBasis, M: int, params: HamiltonianParams) -> sp.csr_matrix:
    X = params.g1 * basis.T(1, 2) + params.g2 * basis.T(2, 3)
    src = basis.block_indices(M)
    dst = basis.block_indices(M + 1)
    return X[dst][:, src]


def _check_dense(dim: int, max_dim: int) -> None:
    if dim > max_dim:
        raise BudgetExceededError("dense sector matrix", dim, max_dim)


def build_su3_sector_hamiltonian(p: int, q: int, r: int = 0, M=None, params: HamiltonianParams | None = None,
                                 max_dim: int = MAX_DENSE_DIM) -> SectorMatrix:
    """``H`` on the irrep D(p, q) with ``r`` full columns, one particle per site.

    ``M=None`` returns the whole irrep (block diagonal in ``M``, states
    ordered by decreasing ``M``); otherwise only the ``M`` block.
    """
    params = params or HamiltonianParams()
    basis = build_basis(p, q, r)
    L = basis.n_sites
    if L == 0:
        return SectorMatrix(np.zeros((1, 1)), SectorLabel((0,), None, 0), params, "D(0,0)")
    if M is not None and abs(M) > L:
        raise InvalidInputError(f"M={M} outside [-{L}, {L}]")
    blocks = [M] if M is not None else sorted(basis.magnetization_sizes(), reverse=True)
    dim = sum(len(basis.block_indices(m)) for m in blocks)
    _check_dense(dim, max_dim)
    H = np.zeros((dim, dim))
    start = 0
    for m in blocks:
        size = len(basis.block_indices(m))
        X = _block_raising(basis, m, params)
        H[start:start + size, start:start + size] = params.h * m * np.eye(size) - (X.T @ X).toarray() / L
        start += size
    lam = Su3Label(p, q, r).diagram()
    label = SectorLabel((1,) * L, lam, 0 if M is None else M)
    desc = f"D({p},{q}) r={r} M={'all' if M is None else M}"
    return SectorMatrix(H, label, params, desc, {"p": p, "q": q, "r": r, "L": L, "M": M})


def build_fock_sector_hamiltonian(basis: SectorBasis, params: HamiltonianParams | None = None,
                                  max_dim: int = MAX_DENSE_DIM) -> SectorMatrix:
    """``H`` on a symmetric, antisymmetric or Fock-table sector basis."""
    params = params or HamiltonianParams()
    if not isinstance(basis, SectorBasis):
        raise InvalidInputError(f"expected a SectorBasis, got {type(basis).__name__}")
    _check_dense(basis.dim, max_dim)
    L = basis.n_sites
    X = basis.raising_matrix(params.g1, params.g2)
    H = params.h * basis.M * np.eye(basis.dim) - (X.T @ X).toarray() / L
    return SectorMatrix(H, basis.label, params, basis.label.describe(), {"L": L, "M": basis.M})


def effective_rep(cartan: CartanVector, n: int, L: int | None = None) -> tuple[int, int, int]:
    """Effective U(3) labels ``(p*, q*, r*)`` of an S_L diagram with ``n`` bosons per site.

    Terms are grouped in blocks ``t = 0..n``; block ``t`` covers the
    Cartan entries ``phi_t + 1 .. phi_t + n + 1 - t`` with
    ``phi_t = n t - t (t - 3) / 2`` and carries ``m_t = t (n+1-t) (n+2-t)``.
    The result always satisfies ``p* + 2 q* + 3 r* = n L``.
    """
    if not isinstance(cartan, CartanVector):
        cartan = CartanVector(tuple(cartan))
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    L = cartan.n_sites if L is None else L
    if cartan.n_sites != L:
        raise InvalidInputError(f"sum_a a*h_a = {cartan.n_sites} does not equal L = {L}")
    if cartan.alpha_max > local_dimension(n):
        raise InvalidInputError(f"column length {cartan.alpha_max} exceeds {local_dimension(n)} local states")
    p = q = r = Fraction(0)
    for t in range(n + 1):
        phi = n * t - Fraction(t * (t - 3), 2)
        m = t * (n + 1 - t) * (n + 2 - t)
        for a in range(1, n + 2 - t):
            h = cartan[int(phi) + a]
            if not h:
                continue
            p += a * (n - a - t + 1) * h
            q += Fraction(m + a * (a - 1 - 2 * t), 2) * h
            r += Fraction(n * phi - m + 3 * a * t, 3) * h
    if any(x.denominator != 1 for x in (p, q, r)):
        raise AssertionError(f"non-integral effective labels {p}, {q}, {r}")
    out = (int(p), int(q), int(r))
    if out[0] + 2 * out[1] + 3 * out[2] != n * L:
        raise AssertionError(f"effective labels {out} violate p + 2q + 3r = nL = {n * L}")
    return out


def su2_operators(basis: IrrepBasis):
    """``S+ = T12 + T23``, ``S- = S+^T`` and ``Sz = T11 - T33``."""
    sp_ = (basis.T(1, 2) + basis.T(2, 3)).tocsr()
    return sp_, sp_.T.tocsr(), (basis.T(1, 1) - basis.T(3, 3)).tocsr()


def su2_embedding_commutator(p: int, q: int, r: int = 0, params: HamiltonianParams | None = None) -> float:
    """Largest entry of ``[H, S^2]`` on the whole irrep.

    ``S^2 = Sz^2 + (S+ S- + S- S+)/2`` is the total spin of the spin-1
    embedding; it commutes with ``H`` exactly when ``g1 = g2``.
    """
    params = params or HamiltonianParams()
    basis = build_basis(p, q, r)
    if basis.n_sites == 0 or basis.dim == 1:
        return 0.0
    X = params.g1 * basis.T(1, 2) + params.g2 * basis.T(2, 3)
    H = params.h * (basis.T(1, 1) - basis.T(3, 3)) - (X.T @ X) / basis.n_sites
    splus, sminus, sz = su2_operators(basis)
    S2 = sz @ sz + 0.5 * (splus @ sminus + sminus @ splus)
    comm = (H @ S2 - S2 @ H).tocsr()
    return float(np.max(np.abs(comm.data), initial=0.0))


def write_matrix(sm: SectorMatrix, path) -> None:
    """Text export: JSON header line, then one row-major matrix row per line."""
    header = {"sector": sm.description, "dim": sm.dim, "h": sm.params.h, "g1": sm.params.g1, "g2": sm.params.g2}
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        np.savetxt(fh, sm.matrix, fmt="%.17g")


def read_matrix(path) -> tuple[dict, np.ndarray]:
    with open(path) as fh:
        header = json.loads(fh.readline()[1:])
        mat = np.loadtxt(fh, ndmin=2)
    return header, mat

"""Truncated bosonic Fock space over a mode grid.

Occupation-number basis with a hard cap on the total photon number.  Each
discrete mode is unit-normalized; quadrature weights enter only through the
coupling coefficients, so the ladder operators satisfy canonical commutation
relations exactly below the cap.  Creation out of the top sector maps to zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np
import scipy.sparse as sp

from .modes import ModeGrid

HARD_CAP = 200_000
DENSE_LIMIT = 5000


class FockError(ValueError):
    pass


@dataclass(frozen=True)
class FockBasis:
    n_modes: int
    max_total: int
    states: np.ndarray          # (dim, n_modes) occupation numbers, vacuum first
    sector_of: np.ndarray       # (dim,) total occupation per state

    def __post_init__(self):
        self.states.setflags(write=False)
        self.sector_of.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    def index(self) -> dict:
        return {tuple(s): i for i, s in enumerate(self.states)}


@dataclass(frozen=True)
class ModeOperator:
    matrix: object              # scipy sparse or dense ndarray
    kind: str

    def dense(self) -> np.ndarray:
        m = self.matrix
        return m.toarray() if sp.issparse(m) else np.asarray(m)


def fock_dimension(n_modes: int, max_total: int) -> int:
    return math.comb(n_modes + max_total, max_total)


def build_fock_basis(grid_or_modes, max_total: int, hard_cap: int = HARD_CAP) -> FockBasis:
    """Lexicographically ordered occupation basis with sum(n) <= max_total."""
    n_modes = grid_or_modes.n_modes if isinstance(grid_or_modes, ModeGrid) else int(grid_or_modes)
    if max_total < 0:
        raise FockError("max_total must be >= 0")
    dim = fock_dimension(n_modes, max_total)
    if dim > hard_cap:
        raise FockError(
            f"Fock dimension {dim} exceeds the hard cap {hard_cap}")
    states = []
    for total in range(max_total + 1):
        for combo in combinations_with_replacement(range(n_modes), total):
            occ = [0] * n_modes
            for c in combo:
                occ[c] += 1
            states.append(occ)
    arr = np.array(sorted(states), dtype=np.int32).reshape(dim, n_modes)
    return FockBasis(n_modes=n_modes, max_total=max_total, states=arr,
                     sector_of=arr.sum(axis=1))


def annihilation(basis: FockBasis, mode: int) -> ModeOperator:
    """a_i with a_i |.., n_i, ..> = sqrt(n_i) |.., n_i - 1, ..>."""
    if not 0 <= mode < basis.n_modes:
        raise FockError(f"mode {mode} out of range")
    idx = basis.index()
    rows, cols, vals = [], [], []
    for c, s in enumerate(basis.states):
        n = s[mode]
        if n > 0:
            t = s.copy()
            t[mode] -= 1
            rows.append(idx[tuple(t)])
            cols.append(c)
            vals.append(math.sqrt(n))
    m = sp.csr_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim))
    return ModeOperator(matrix=m, kind="annihilation")


def creation(basis: FockBasis, mode: int) -> ModeOperator:
    """a*_i, the adjoint of a_i on the truncated space (hard cutoff on top)."""
    a = annihilation(basis, mode)
    return ModeOperator(matrix=a.matrix.T.tocsr(), kind="creation")


def all_creation(basis: FockBasis) -> list:
    return [creation(basis, i).matrix for i in range(basis.n_modes)]


def field_energy(basis: FockBasis, grid: ModeGrid) -> ModeOperator:
    """Diagonal free-field energy sum_i n_i omega(k_i)."""
    if basis.n_modes != grid.n_modes:
        raise FockError("basis was not built over this grid")
    diag = basis.states @ grid.omega
    return ModeOperator(matrix=sp.diags(diag).tocsr(), kind="field-energy")


def number_projector(basis: FockBasis, below: int) -> sp.csr_matrix:
    """Projector onto states with total occupation < below."""
    keep = (basis.sector_of < below).astype(float)
    return sp.diags(keep).tocsr()


def second_quantize(mode_map: np.ndarray, basis: FockBasis,
                    unitary_tol: float = 1e-10) -> ModeOperator:
    """Multiplicative lift Gamma(u) of a one-mode unitary to the Fock basis.

    Acts sector by sector: the column for an occupation state |n> is built by
    applying the transformed creation operators sum_j u_{ji} a*_j to the
    vacuum, n_i times per mode, normalized by sqrt(prod n_i!).  Leaves the
    vacuum invariant and restricts to u on the one-particle sector.  For an
    antiunitary mode map u K the same matrix is returned; the conjugation
    flag travels with the symmetry wrapper, not with this operator.
    """
    u = np.asarray(mode_map)
    if u.shape != (basis.n_modes, basis.n_modes):
        raise FockError("mode map has wrong shape")
    err = np.linalg.norm(u.conj().T @ u - np.eye(basis.n_modes))
    if err > unitary_tol:
        raise FockError(f"mode map is not unitary (deviation {err:.2e})")

    ads = all_creation(basis)
    # b*_i = sum_j u_{ji} a*_j
    bds = []
    for i in range(basis.n_modes):
        acc = None
        for j in range(basis.n_modes):
            if u[j, i] != 0:
                term = u[j, i] * ads[j]
                acc = term if acc is None else acc + term
        bds.append(acc if acc is not None else sp.csr_matrix((basis.dim, basis.dim)))

    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    vac = np.zeros(basis.dim, dtype=complex)
    vac[0] = 1.0
    for c, s in enumerate(basis.states):
        vec = vac
        norm = 1.0
        for i in np.nonzero(s)[0]:
            for _ in range(s[i]):
                vec = bds[i] @ vec
            norm *= math.factorial(s[i])
        out[:, c] = vec / math.sqrt(norm)
    return ModeOperator(matrix=out, kind="second-quantized")


def export_matrix_market(op: ModeOperator, path: str) -> None:
    from scipy.io import mmwrite
    m = op.matrix
    mmwrite(path, m if sp.issparse(m) else sp.coo_matrix(m))

"""Symmetry operators: SU(2) rotations, time reversal, and their checkers.

Antilinear operators are carried as (matrix, conjugation) pairs acting as
v -> M conj(v); composition and adjoints follow from that convention, so the
defining relation <x, T y> = conj(<T* x, y>) stays testable.  A symmetry S
satisfies S H S* = H (unitary) or S H S* = H-adjoint (antiunitary).
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .atom import AtomModel, PAULI
from .fock import FockBasis, second_quantize
from .modes import ModeGrid, inversion_map, rotation_direction_map
from .numutil import cluster_values, unitarity_residual

UNITARY_TOL = 1e-10
SYMMETRY_TOL = 1e-10


class SymmetryError(ValueError):
    pass


@dataclass(frozen=True)
class OperatorPart:
    """Linear or antilinear operator: v -> M v, or v -> M conj(v)."""
    matrix: np.ndarray
    antilinear: bool = False

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ (np.conj(v) if self.antilinear else v)

    def compose(self, other: "OperatorPart") -> "OperatorPart":
        m2 = np.conj(other.matrix) if self.antilinear else other.matrix
        return OperatorPart(self.matrix @ m2,
                            antilinear=self.antilinear != other.antilinear)

    def adjoint(self) -> "OperatorPart":
        if self.antilinear:
            return OperatorPart(self.matrix.T, antilinear=True)
        return OperatorPart(self.matrix.conj().T, antilinear=False)

    def sandwich(self, h: np.ndarray) -> np.ndarray:
        """S H S* as a matrix; conjugates entries when antilinear."""
        hh = np.conj(h) if self.antilinear else h
        return self.matrix @ hh @ self.matrix.conj().T

    def square(self) -> np.ndarray:
        return self.compose(self).matrix

    def unitarity(self) -> float:
        return unitarity_residual(self.matrix)


@dataclass(frozen=True)
class SymmetryOp:
    """Product symmetry atom_part tensor Gamma(photon_part), shared flag."""
    atom_part: OperatorPart
    photon_part: OperatorPart | None
    label: str

    def __post_init__(self):
        if self.photon_part is not None and \
                self.photon_part.antilinear != self.atom_part.antilinear:
            raise SymmetryError("atom and photon parts must share linearity")
        for part in (self.atom_part, self.photon_part):
            if part is not None and part.unitarity() > UNITARY_TOL:
                raise SymmetryError("symmetry parts must be unitary")

    def assemble(self, basis: FockBasis | None = None) -> OperatorPart:
        if self.photon_part is None:
            return self.atom_part
        if basis is None:
            raise SymmetryError("a Fock basis is needed to lift the photon part")
        gamma = second_quantize(self.photon_part.matrix, basis).dense()
        return OperatorPart(np.kron(self.atom_part.matrix, gamma),
                            antilinear=self.atom_part.antilinear)


# ---------------------------------------------------------------------------
# rotations
# ---------------------------------------------------------------------------

def su2_to_so3(u: np.ndarray) -> np.ndarray:
    """Image of U in SO(3): pi(U)_{lj} = tr(sigma_l U sigma_j U^dag) / 2."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or unitarity_residual(u) > UNITARY_TOL:
        raise SymmetryError("input is not a 2x2 unitary")
    if abs(np.linalg.det(u) - 1.0) > UNITARY_TOL:
        raise SymmetryError("input does not have determinant one")
    rot = np.empty((3, 3))
    for l in range(3):
        for j in range(3):
            rot[l, j] = np.real(np.trace(PAULI[l] @ u @ PAULI[j] @ u.conj().T)) / 2.0
    return rot


def su2_octahedral_generators() -> dict:
    """Double-cover generators of the 90-degree axis rotations."""
    out = {}
    for name, sigma in (("z", PAULI[2]), ("x", PAULI[0]), ("y", PAULI[1])):
        out[name] = np.cos(np.pi / 4) * np.eye(2) - 1j * np.sin(np.pi / 4) * sigma
    return out


def rotate_photon_modes(rot: np.ndarray, grid: ModeGrid) -> np.ndarray:
    """Mode-space unitary of a grid-preserving rotation.

    Row (k, lam) picks up eps(k,lam) . R eps(R^{-1}k, mu) at columns
    (R^{-1}k, mu); radii are untouched, directions permute exactly.
    """
    dmap = rotation_direction_map(grid, rot)
    m = np.zeros((grid.n_modes, grid.n_modes))
    n_dir = len(grid.directions)
    for rad in range(len(grid.radii)):
        for a in range(n_dir):
            b = dmap[a]
            for lam in (1, 2):
                row = grid.mode_index(rad, a, lam)
                eps_row = grid.eps[row]
                for mu in (1, 2):
                    col = grid.mode_index(rad, b, mu)
                    m[row, col] = eps_row @ (rot @ grid.eps[col])
    return m


def rotation_symmetry(u_su2: np.ndarray, model: AtomModel, grid: ModeGrid,
                      label: str = None) -> SymmetryOp:
    """R(U) = R_el(U) tensor Gamma(R_h(pi(U))) for a structured model."""
    rot = su2_to_so3(u_su2)
    atom_m = atom_rotation(model, u_su2, rot)
    photon_m = rotate_photon_modes(rot, grid)
    return SymmetryOp(OperatorPart(atom_m), OperatorPart(photon_m),
                      label or "R(U)")


def atom_rotation(model: AtomModel, u_su2: np.ndarray,
                  rot: np.ndarray = None) -> np.ndarray:
    """Rotation on the atomic space: orbital blocks rotate by pi(U), the
    spin factor by U itself.  Requires declared orbital structure."""
    if model.orbital_blocks is None:
        raise SymmetryError("model does not declare orbital blocks")
    if model.n_particles != 1:
        raise SymmetryError("rotation action implemented for single particles")
    if rot is None:
        rot = su2_to_so3(u_su2)
    blocks = []
    for l, d in model.orbital_blocks:
        if l == 0:
            blocks.append(np.eye(1))
        elif l == 1:
            # pullback of x_b f(r) by R^{-1} mixes components with (R^{-1})^T = R
            blocks.append(rot)
        else:
            raise SymmetryError("unsupported orbital angular momentum")
    orb = _block_diag(blocks)
    dspin = int(round(2 * model.spin_value + 1))
    spin_rep = np.asarray(u_su2) if dspin == 2 else np.eye(dspin)
    return np.kron(orb, spin_rep)


def _block_diag(blocks) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=complex)
    pos = 0
    for b in blocks:
        d = b.shape[0]
        out[pos:pos + d, pos:pos + d] = b
        pos += d
    return out


# ---------------------------------------------------------------------------
# time reversal
# ---------------------------------------------------------------------------

def time_reversal_photon(grid: ModeGrid) -> tuple[OperatorPart, OperatorPart]:
    """Antilinear mode map h(k,lam) -> sum_mu [eps(k,lam).eps(-k,mu)] conj(h(-k,mu)).

    Returns (K, -K); the field-side time reversal is Gamma(-K).  Requires the
    grid to be closed under inversion.
    """
    inv = inversion_map(grid)
    m = np.zeros((grid.n_modes, grid.n_modes))
    for row in range(grid.n_modes):
        rad, a = grid.rad_index[row], grid.dir_index[row]
        for mu in (1, 2):
            col = inv[grid.mode_index(rad, a, mu)]
            m[row, col] = grid.eps[row] @ grid.eps[col]
    return (OperatorPart(m, antilinear=True),
            OperatorPart(-m, antilinear=True))


def time_reversal_electron(model: AtomModel) -> OperatorPart:
    """Conjugation times sigma_2 on each spin-1/2 factor (spin factors last).

    Squares to (-1)^{2 s N}."""
    if model.orbital_dim is None:
        raise SymmetryError("model does not declare its orbital/spin structure")
    if model.spin_value == 0.0:
        return OperatorPart(np.eye(model.dim), antilinear=True)
    if model.spin_value != 0.5:
        raise SymmetryError("time reversal implemented for spin 0 and 1/2")
    factor = -PAULI[1]  # K sigma_2 = (-sigma_2) K
    m = np.eye(model.orbital_dim)
    for _ in range(model.n_particles):
        m = np.kron(m, factor)
    return OperatorPart(m, antilinear=True)


def time_reversal(model: AtomModel, grid: ModeGrid) -> SymmetryOp:
    t_el = time_reversal_electron(model)
    _, minus_k = time_reversal_photon(grid)
    return SymmetryOp(t_el, minus_k, "T")


# ---------------------------------------------------------------------------
# checkers
# ---------------------------------------------------------------------------

def check_symmetry(h: np.ndarray, op: OperatorPart) -> float:
    """|| S H S* - H || for unitary S, || S H S* - H^dag || for antiunitary."""
    h = np.asarray(h)
    if op.matrix.shape != h.shape:
        raise SymmetryError("dimension mismatch")
    target = h.conj().T if op.antilinear else h
    return float(np.linalg.norm(op.sandwich(h) - target))


@dataclass(frozen=True)
class KramersReport:
    multiplicities: tuple
    max_pair_gap: float
    max_self_overlap: float
    passed: bool


def kramers_check(h: np.ndarray, t: OperatorPart, tol: float = SYMMETRY_TOL,
                  pair_gap_tol: float = 1e-10,
                  overlap_tol: float = 1e-12) -> KramersReport:
    """Even multiplicities and <psi, T psi> = 0 for a T-symmetric Hermitian H.

    Refuses (raises) when T^2 != -1 or the symmetry residual exceeds tol.
    """
    sq = t.square()
    if np.linalg.norm(sq + np.eye(sq.shape[0])) > 1e-10:
        raise SymmetryError("time reversal does not square to -1")
    res = check_symmetry(h, t)
    if res > tol * max(1.0, np.linalg.norm(h)):
        raise SymmetryError(f"H is not T-symmetric (residual {res:.2e})")
    if np.linalg.norm(h - h.conj().T) > tol * max(1.0, np.linalg.norm(h)):
        raise SymmetryError("Kramers pairing check expects a Hermitian matrix")

    vals, vecs = np.linalg.eigh(h)
    clusters = cluster_values(vals)
    mult = tuple(len(c) for c in clusters)
    max_gap = 0.0
    for c in clusters:
        if len(c) % 2 == 1:
            return KramersReport(mult, float("inf"), float("inf"), False)
    # adjacent pair gap within clusters (sorted eigh output pairs up)
    for i in range(0, len(vals) - 1, 2):
        max_gap = max(max_gap, float(abs(vals[i + 1] - vals[i])))
    max_overlap = 0.0
    for i in range(vals.shape[0]):
        psi = vecs[:, i]
        max_overlap = max(max_overlap, float(abs(np.vdot(psi, t.apply(psi)))))
    passed = all(m % 2 == 0 for m in mult) and max_gap <= pair_gap_tol \
        and max_overlap <= overlap_tol
    return KramersReport(mult, max_gap, max_overlap, passed)


def irreducibility_check(generators: list, subspace: np.ndarray,
                         invariance_tol: float = 1e-8) -> int:
    """Dimension of the joint commutant of the restricted generators.

    Schur: the action on the subspace is irreducible iff the commutant has
    dimension one.  Only linear (unitary) generators are supported; the
    subspace is given by orthonormal columns and must be invariant.
    """
    q = np.asarray(subspace)
    d = q.shape[1]
    if np.linalg.norm(q.conj().T @ q - np.eye(d)) > 1e-10:
        raise SymmetryError("subspace basis is not orthonormal")
    restricted = []
    for g in generators:
        m = g.matrix if isinstance(g, OperatorPart) else np.asarray(g)
        if isinstance(g, OperatorPart) and g.antilinear:
            raise SymmetryError("irreducibility check takes linear generators")
        gq = m @ q
        leak = np.linalg.norm(gq - q @ (q.conj().T @ gq))
        if leak > invariance_tol:
            raise SymmetryError(f"subspace is not invariant (leak {leak:.2e})")
        restricted.append(q.conj().T @ m @ q)
    if not restricted:
        restricted = [np.eye(d)]
    rows = [np.kron(np.eye(d), r) - np.kron(r.T, np.eye(d)) for r in restricted]
    stacked = np.vstack(rows)
    s = np.linalg.svd(stacked, compute_uv=False)
    rank = int(np.sum(s > 1e-9 * max(1.0, s[0])))
    return d * d - rank


def symmetry_report_json(label: str, residual: float, multiplicities=None,
                         commutant_dim=None) -> str:
    return json.dumps({
        "label": label,
        "residual": residual,
        "multiplicity_table": list(multiplicities) if multiplicities else None,
        "commutant_dim": commutant_dim,
    }, indent=2, sort_keys=True)

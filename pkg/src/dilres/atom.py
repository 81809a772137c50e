"""Finite-level atomic models.

Units: hbar = c = 1, energies in multiples of four Rydberg, lengths in halves
of the Bohr radius.  In these units the radial hydrogen problem
-u'' + (l(l+1)/r^2 - Z/r) u = E u has eigenvalues -Z^2/(4 n^2).

An AtomModel is a Hermitian matrix with dipole and spin operator blocks and
optional product structure (orbital blocks tensor spin factors), enough to
assemble couplings and realize symmetry actions without any grid in sight.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .numutil import CLUSTER_RTOL, cluster_values, hermiticity_residual

HERMITICITY_TOL = 1e-12
SU2_BRACKET_TOL = 1e-12
DEFAULT_EXCITED_EPSILON = 0.3

PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


class AtomError(ValueError):
    pass


class GridResolutionError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# radial oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialGrid:
    """Uniform grid r_i = i h, i = 1..n, for the reduced radial problem."""
    r: np.ndarray
    h: float
    l: int

    def __post_init__(self):
        self.r.setflags(write=False)


def radial_grid(r_max: float, h: float, l: int = 0) -> RadialGrid:
    n = int(round(r_max / h))
    if n < 8:
        raise AtomError("radial grid too short")
    return RadialGrid(r=h * np.arange(1, n + 1), h=h, l=l)


def hydrogen_grid(Z: float, n_shell: int = 2, h_scale: float = 0.02,
                  r_scale: float = 40.0) -> RadialGrid:
    """Grid resolving the Bohr scale for shells up to n_shell."""
    return radial_grid(r_scale * n_shell ** 2 / Z, h_scale / Z)


def hydrogen_levels(Z: float, l: int, n_states: int, grid: RadialGrid,
                    refine_check: bool = False):
    """Lowest eigenpairs of -d^2/dr^2 + l(l+1)/r^2 - Z/r with Dirichlet ends.

    Three-point stencil on the uniform grid; eigenfunctions are returned
    normalized so that sum(u^2) h = 1.  With refine_check, a half-resolution
    solve must agree to 1e-4 per level or GridResolutionError is raised.
    """
    if Z <= 0:
        raise AtomError("Z must be positive")
    r, h = grid.r, grid.h
    diag = 2.0 / h ** 2 + l * (l + 1) / r ** 2 - Z / r
    off = -np.ones(len(r) - 1) / h ** 2
    vals, vecs = eigh_tridiagonal(diag, off, select="i",
                                  select_range=(0, n_states - 1))
    vecs = vecs / np.sqrt(np.sum(vecs ** 2, axis=0) * h)
    if refine_check:
        coarse = RadialGrid(r=grid.r[1::2], h=2 * grid.h, l=l)
        cvals, _ = hydrogen_levels(Z, l, n_states, coarse)
        shift = float(np.max(np.abs(cvals - vals)))
        if shift > 1e-4:
            raise GridResolutionError(
                f"radial grid too coarse: refinement shift {shift:.2e}")
    return vals, vecs


def hydrogen_level_set(Z: float, n_max: int) -> np.ndarray:
    """Analytic bound-state energies -Z^2/(4 n^2), n = 1..n_max."""
    return np.array([-Z ** 2 / (4.0 * n * n) for n in range(1, n_max + 1)])


def nu_epsilon(r, epsilon: float):
    """Regularized spin-orbit radial factor min(epsilon^-3, r^-3)."""
    if epsilon <= 0:
        raise AtomError("epsilon must be positive")
    r = np.asarray(r, dtype=float)
    out = np.full_like(r, epsilon ** -3.0)
    mask = r > epsilon
    out[mask] = r[mask] ** -3.0
    return out if out.ndim else float(out)


def uncertainty_probe(u: np.ndarray, grid: RadialGrid,
                      support_pad: int = 2) -> tuple[float, float]:
    """Quadrature values (lhs, rhs) of int u^2/(4 r^2) <= int (u')^2.

    u must vanish on the first and last support_pad grid points so the
    central-difference derivative sees compact support.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != grid.r.shape:
        raise AtomError("u does not live on this grid")
    if np.any(u[:support_pad] != 0.0) or np.any(u[-support_pad:] != 0.0):
        raise AtomError("u must be supported in the grid interior")
    h = grid.h
    du = np.gradient(u, h)
    lhs = float(np.sum(u ** 2 / (4.0 * grid.r ** 2)) * h)
    rhs = float(np.sum(du ** 2) * h)
    return lhs, rhs


# ---------------------------------------------------------------------------
# model container
# ---------------------------------------------------------------------------

def spin_matrices(s: float) -> np.ndarray:
    """su(2) generators in the (2s+1)-dimensional representation.

    Convention [S_a, S_b] = i eps_abc S_c; for s = 1/2 these are the half
    Pauli matrices, for s = 0 the 1x1 zero matrices.
    """
    d = int(round(2 * s + 1))
    m = s - np.arange(d)
    sp = np.zeros((d, d), dtype=complex)
    for i in range(d - 1):
        sp[i, i + 1] = math.sqrt(s * (s + 1) - m[i + 1] * (m[i + 1] + 1))
    sz = np.diag(m.astype(complex))
    sx = (sp + sp.conj().T) / 2
    sy = (sp - sp.conj().T) / 2j
    return np.array([sx, sy, sz])


def orbital_l1_matrices() -> np.ndarray:
    """Angular momentum on the Cartesian p basis: (L_a)_{bc} = -i eps_{abc}."""
    eps = np.zeros((3, 3, 3))
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[a, b, c] = 1.0
        eps[a, c, b] = -1.0
    return -1j * eps


@dataclass(frozen=True)
class AtomModel:
    """Hermitian atomic matrix with dipole/spin blocks and eigendata.

    orbital_blocks, when present, records the orbital factor as a direct sum
    of Cartesian angular blocks, e.g. ((0, 1), (1, 3)) for one s level plus
    one p level; basis order is orbital-major with the spin factor last.
    """
    h_el: np.ndarray
    dipole: np.ndarray          # (3, n, n)
    spin: np.ndarray            # (3, n, n)
    n_particles: int = 1
    spin_value: float = 0.0
    orbital_dim: int | None = None
    orbital_blocks: tuple | None = None
    labels: tuple | None = None
    name: str = "custom"
    eigenvalues: np.ndarray = field(default=None)
    eigenvectors: np.ndarray = field(default=None)
    levels: np.ndarray = field(default=None)
    multiplicities: np.ndarray = field(default=None)
    level_of_state: np.ndarray = field(default=None)

    @property
    def dim(self) -> int:
        return self.h_el.shape[0]

    def level_projector(self, j: int) -> np.ndarray:
        cols = np.nonzero(self.level_of_state == j)[0]
        v = self.eigenvectors[:, cols]
        return v @ v.conj().T

    def level_vectors(self, j: int) -> np.ndarray:
        cols = np.nonzero(self.level_of_state == j)[0]
        return self.eigenvectors[:, cols]


def make_atom_model(h_el, dipole=None, spin=None, n_particles: int = 1,
                    spin_value: float = 0.0, orbital_dim: int = None,
                    orbital_blocks=None, labels=None, name: str = "custom",
                    cluster_rtol: float = CLUSTER_RTOL) -> AtomModel:
    h_el = np.asarray(h_el, dtype=complex)
    n = h_el.shape[0]
    if dipole is None:
        dipole = np.zeros((3, n, n), dtype=complex)
    if spin is None:
        spin = np.zeros((3, n, n), dtype=complex)
    dipole = np.asarray(dipole, dtype=complex)
    spin = np.asarray(spin, dtype=complex)

    res = hermiticity_residual(h_el)
    if res > HERMITICITY_TOL * max(1.0, np.linalg.norm(h_el)):
        raise AtomError(f"h_el is not Hermitian (residual {res:.2e})")
    for block, label in ((dipole, "dipole"), (spin, "spin")):
        for a in range(3):
            if hermiticity_residual(block[a]) > HERMITICITY_TOL * max(
                    1.0, np.linalg.norm(block[a])):
                raise AtomError(f"{label}[{a}] is not Hermitian")
    bracket = _su2_bracket_residual(spin)
    if bracket > SU2_BRACKET_TOL * max(1.0, float(np.linalg.norm(spin))):
        raise AtomError(f"spin matrices violate the su(2) bracket ({bracket:.2e})")

    vals, vecs = np.linalg.eigh(h_el)
    clusters = cluster_values(vals, rtol=cluster_rtol)
    levels = np.array([np.mean(vals[c]).real for c in clusters])
    mult = np.array([len(c) for c in clusters])
    level_of = np.empty(n, dtype=int)
    for jc, c in enumerate(clusters):
        level_of[c] = jc
    for a in (h_el, dipole, spin, vals, vecs, levels, mult, level_of):
        np.asarray(a).setflags(write=False)
    return AtomModel(h_el=h_el, dipole=dipole, spin=spin,
                     n_particles=n_particles, spin_value=spin_value,
                     orbital_dim=orbital_dim, orbital_blocks=orbital_blocks,
                     labels=tuple(labels) if labels is not None else None,
                     name=name, eigenvalues=vals, eigenvectors=vecs,
                     levels=levels, multiplicities=mult, level_of_state=level_of)


def _su2_bracket_residual(spin: np.ndarray) -> float:
    out = 0.0
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        comm = spin[a] @ spin[b] - spin[b] @ spin[a]
        out = max(out, float(np.linalg.norm(comm - 1j * spin[c])))
    return out


# ---------------------------------------------------------------------------
# gaps and rescaling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GapData:
    j: int
    delta: float
    delta_check: float
    tau: float
    epsilon: float | None = None


def spectral_gap(model: AtomModel, j: int,
                 epsilon: float = DEFAULT_EXCITED_EPSILON) -> GapData:
    """Isolation distance of level j and the rescale parameter for it.

    Ground level: delta_check = delta, so the rescaled gap is one.  Excited
    level: delta_check solves (delta/delta_check) sin(epsilon)/2 = 1, leaving
    sectoral room below the level at dilation angles above epsilon.
    """
    levels = model.levels
    if len(levels) < 2:
        raise AtomError("spectrum has a single distinct eigenvalue")
    if not 0 <= j < len(levels):
        raise AtomError(f"level index {j} out of range")
    others = np.delete(levels, j)
    delta = float(np.min(np.abs(others - levels[j])))
    if j == 0:
        dcheck = delta
        eps_used = None
    else:
        if not 0 < epsilon < math.pi / 2:
            raise AtomError("epsilon must lie in (0, pi/2)")
        dcheck = delta * math.sin(epsilon) / 2.0
        eps_used = epsilon
    return GapData(j=j, delta=delta, delta_check=dcheck,
                   tau=-math.log(dcheck), epsilon=eps_used)


def rescaled_atom(model: AtomModel, gap: GapData, theta: complex) -> np.ndarray:
    """e^theta / delta_check * (h_el - E_j), with level j exactly in the kernel.

    Built spectrally with the level-j entries pinned to zero, so vectors of
    level j are annihilated up to eigenbasis roundoff (exactly, for diagonal
    input).
    """
    pref = cmath.exp(theta) / gap.delta_check
    shifted = np.where(model.level_of_state == gap.j, 0.0,
                       model.eigenvalues - model.levels[gap.j])
    diag = pref * shifted
    offdiag = model.h_el - np.diag(np.diagonal(model.h_el))
    if np.count_nonzero(offdiag) == 0:
        return np.diag(diag.astype(complex))
    v = model.eigenvectors
    return (v * diag) @ v.conj().T


# ---------------------------------------------------------------------------
# built-in models
# ---------------------------------------------------------------------------

def toy_two_level(gap: float = 1.0, mu: float = 1.0, axis: int = 0) -> AtomModel:
    """Spin-0 two-level atom with dipole mu sigma_x along one axis."""
    h = np.diag([0.0, gap]).astype(complex)
    dipole = np.zeros((3, 2, 2), dtype=complex)
    dipole[axis] = mu * np.array([[0, 1], [1, 0]], dtype=complex)
    return make_atom_model(h, dipole, None, n_particles=1, spin_value=0.0,
                           orbital_dim=2, name="toy2")


def toy_spin_half(gap: float = 1.0, mu: float = 1.0, axis: int = 0) -> AtomModel:
    """Two orbital levels tensor spin-1/2; Kramers-degenerate pairs."""
    horb = np.diag([0.0, gap])
    dorb = np.zeros((3, 2, 2))
    dorb[axis] = mu * np.array([[0, 1], [1, 0]])
    eye2 = np.eye(2)
    h = np.kron(horb, eye2).astype(complex)
    dipole = np.array([np.kron(dorb[a], eye2) for a in range(3)], dtype=complex)
    spin = np.array([np.kron(np.eye(2), PAULI[a] / 2) for a in range(3)])
    return make_atom_model(h, dipole, spin, n_particles=1, spin_value=0.5,
                           orbital_dim=2, name="spinhalf")


def toy_sp_shell(e_s: float = 0.0, e_p: float = 1.0, mu: float = 1.0) -> AtomModel:
    """One s level plus one Cartesian p shell, tensor spin-1/2 (dim 8).

    Fully rotation covariant: the dipole connects s and p as a vector
    operator, <p_b|x_a|s> = mu delta_ab.
    """
    horb = np.diag([e_s, e_p, e_p, e_p])
    dorb = np.zeros((3, 4, 4))
    for a in range(3):
        dorb[a][1 + a, 0] = mu
        dorb[a][0, 1 + a] = mu
    eye2 = np.eye(2)
    h = np.kron(horb, eye2).astype(complex)
    dipole = np.array([np.kron(dorb[a], eye2) for a in range(3)], dtype=complex)
    spin = np.array([np.kron(np.eye(4), PAULI[a] / 2) for a in range(3)])
    return make_atom_model(h, dipole, spin, n_particles=1, spin_value=0.5,
                           orbital_dim=4, orbital_blocks=((0, 1), (1, 3)),
                           name="sp-shell")


def fine_structure_model(Z: float, beta: float, epsilon: float,
                         radial: RadialGrid = None) -> AtomModel:
    """n = 2 hydrogen shell with first-order spin-orbit splitting (dim 8).

    Basis: (2s, 2p_x, 2p_y, 2p_z) tensor (up, down).  The shell energy E_2
    and the radial average c_R(epsilon) = <u_21| min(eps^-3, r^-3) |u_21>
    come from the radial oracle; the splitting operator is the angular
    L.S matrix, so the (0, -2, 1) x c_G c_R pattern with c_G = 1/2 and the
    (2, 2, 4) multiplicities emerge from diagonalization, not by fiat.
    Exact shell degeneracy at beta = 0 is imposed (single E_2 for both l).
    """
    if radial is None:
        radial = hydrogen_grid(Z, n_shell=2)
    vals_p, vecs_p = hydrogen_levels(Z, l=1, n_states=1, grid=radial)
    e2 = float(vals_p[0])
    u21 = vecs_p[:, 0]
    c_r = float(np.sum(u21 ** 2 * nu_epsilon(radial.r, epsilon)) * radial.h)

    vals_s, vecs_s = hydrogen_levels(Z, l=0, n_states=2, grid=radial)
    u20 = vecs_s[:, 1]
    mu_sp = float(np.sum(u20 * radial.r * u21) * radial.h) / math.sqrt(3.0)

    l1 = orbital_l1_matrices()
    lorb = np.zeros((3, 4, 4), dtype=complex)
    for a in range(3):
        lorb[a][1:, 1:] = l1[a]
    eye2 = np.eye(2)
    ls = sum(np.kron(lorb[a], PAULI[a] / 2) for a in range(3))
    h = e2 * np.eye(8, dtype=complex) + beta * c_r * ls

    dorb = np.zeros((3, 4, 4))
    for a in range(3):
        dorb[a][1 + a, 0] = mu_sp
        dorb[a][0, 1 + a] = mu_sp
    dipole = np.array([np.kron(dorb[a], eye2) for a in range(3)], dtype=complex)
    spin = np.array([np.kron(np.eye(4), PAULI[a] / 2) for a in range(3)])

    labels = _level_labels(h, lorb, spin)
    model = make_atom_model(h, dipole, spin, n_particles=1, spin_value=0.5,
                            orbital_dim=4, orbital_blocks=((0, 1), (1, 3)),
                            labels=labels, name="hydrogen-fine-structure")
    object.__setattr__(model, "shell_energy", e2)
    object.__setattr__(model, "c_r", c_r)
    object.__setattr__(model, "so_epsilon", epsilon)
    object.__setattr__(model, "beta", beta)
    object.__setattr__(model, "nuclear_charge", Z)
    return model


def _angular_operators(lorb, spin):
    dspin = spin.shape[1] // lorb.shape[1]
    lfull = np.array([np.kron(lorb[a], np.eye(dspin)) for a in range(3)])
    l2 = sum(lfull[a] @ lfull[a] for a in range(3))
    jop = np.array([lfull[a] + spin[a] for a in range(3)])
    j2 = sum(jop[a] @ jop[a] for a in range(3))
    return l2, jop, j2


def _quantum_number(expectation: float) -> float:
    # invert q(q+1) = expectation, rounded to the half-integer lattice
    return round(-1 + math.sqrt(1 + 4 * expectation)) / 2.0


def _level_labels(h, lorb, spin) -> tuple:
    """Per distinct level of h: (l, j, multiplicity), by ascending energy."""
    l2, jop, j2 = _angular_operators(lorb, spin)
    vals, vecs = np.linalg.eigh(h)
    labels = []
    for cluster in cluster_values(vals):
        w = vecs[:, cluster[0]]
        labels.append({
            "n": 2,
            "l": _quantum_number(float(np.real(w.conj() @ l2 @ w))),
            "j": _quantum_number(float(np.real(w.conj() @ j2 @ w))),
            "multiplicity": len(cluster),
        })
    return tuple(labels)


def labeled_basis(model: AtomModel):
    """Eigenbasis refined by J^2 and J_3, with (l, j, m_j) per column.

    Requires product structure (orbital_blocks with l in {0, 1} plus a
    spin-1/2 factor).  Columns group by ascending level, then j, then m_j.
    """
    if model.orbital_blocks is None or model.spin_value != 0.5:
        raise AtomError("model lacks the product structure needed for labels")
    lorb = _orbital_angular(model.orbital_blocks)
    l2, jop, j2 = _angular_operators(lorb, model.spin)
    cols, labels = [], []
    for j_level in range(len(model.levels)):
        v = model.level_vectors(j_level)
        for sub in _restricted_clusters(j2, v):
            for w in _restricted_eigvecs(jop[2], sub):
                lval = _quantum_number(float(np.real(w.conj() @ l2 @ w)))
                jval = _quantum_number(float(np.real(w.conj() @ j2 @ w)))
                mval = float(np.real(w.conj() @ jop[2] @ w))
                cols.append(w)
                labels.append({"level": j_level, "l": lval, "j": jval,
                               "m_j": round(2 * mval) / 2.0})
    return np.array(cols).T, labels


def _orbital_angular(blocks) -> np.ndarray:
    dim = sum(d for _, d in blocks)
    lorb = np.zeros((3, dim, dim), dtype=complex)
    pos = 0
    for l, d in blocks:
        if l == 0:
            pass
        elif l == 1:
            for a in range(3):
                lorb[a][pos:pos + 3, pos:pos + 3] = orbital_l1_matrices()[a]
        else:
            raise AtomError("only s and Cartesian p orbital blocks are supported")
        pos += d
    return lorb


def _restricted_clusters(op, v):
    r = v.conj().T @ op @ v
    vals, vecs = np.linalg.eigh(r)
    return [v @ vecs[:, c] for c in cluster_values(vals, scale=1.0)]


def _restricted_eigvecs(op, v):
    r = v.conj().T @ op @ v
    _, vecs = np.linalg.eigh(r)
    return [v @ vecs[:, i] for i in range(v.shape[1])]


def hydrogen_diagonal_model(Z: float = 1.0, n_max: int = 4) -> AtomModel:
    """Diagonal model carrying the analytic hydrogen level set."""
    return make_atom_model(np.diag(hydrogen_level_set(Z, n_max)),
                           name=f"hydrogen-levels-Z{Z:g}")


BUILTIN_MODELS = {
    "toy2": toy_two_level,
    "spinhalf": toy_spin_half,
    "sp-shell": toy_sp_shell,
}


def builtin_model(name: str, **kwargs) -> AtomModel:
    if name == "hydrogen-fine-structure":
        return fine_structure_model(kwargs.pop("Z", 1.0),
                                    kwargs.pop("beta", 1e-3),
                                    kwargs.pop("epsilon", 0.1),
                                    kwargs.pop("radial", None))
    if name in BUILTIN_MODELS:
        return BUILTIN_MODELS[name](**kwargs)
    raise AtomError(f"unknown builtin model {name!r}")


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------

def _mat_to_json(m: np.ndarray):
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m, dtype=complex)]


def _mat_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def model_to_json(model: AtomModel) -> str:
    doc = {
        "h_el": _mat_to_json(model.h_el),
        "dipole": [_mat_to_json(model.dipole[a]) for a in range(3)],
        "spin": [_mat_to_json(model.spin[a]) for a in range(3)],
        "labels": list(model.labels) if model.labels else None,
        "units": "4Ry=1",
        "n_particles": model.n_particles,
        "spin_value": model.spin_value,
        "orbital_dim": model.orbital_dim,
        "orbital_blocks": list(model.orbital_blocks) if model.orbital_blocks else None,
        "name": model.name,
        "levels": [float(x) for x in model.levels],
        "multiplicities": [int(x) for x in model.multiplicities],
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def model_from_json(text: str) -> AtomModel:
    doc = json.loads(text)
    if doc.get("units", "4Ry=1") != "4Ry=1":
        raise AtomError(f"unsupported unit convention {doc.get('units')!r}")
    blocks = doc.get("orbital_blocks")
    return make_atom_model(
        _mat_from_json(doc["h_el"]),
        np.array([_mat_from_json(m) for m in doc["dipole"]]),
        np.array([_mat_from_json(m) for m in doc["spin"]]),
        n_particles=doc.get("n_particles", 1),
        spin_value=doc.get("spin_value", 0.0),
        orbital_dim=doc.get("orbital_dim"),
        orbital_blocks=tuple(tuple(b) for b in blocks) if blocks else None,
        labels=doc.get("labels"),
        name=doc.get("name", "custom"),
    )

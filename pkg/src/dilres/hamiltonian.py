"""Assembly of the coupled atom-photon matrices.

The interaction couples the atomic dipole and spin blocks to each photon
mode through

    G_i(kappa, theta) = sqrt(w_i) e^{-2 theta} rho(e^{-theta} k_i) / sqrt(omega_i)
                        * ( kappa_1^3 omega_i i D.eps_i
                          + kappa_2^5 i S.(k_i x eps_i) ),

the quadrature weight folded in so each discrete mode stays unit-normalized.
The e^{-2 theta} factor is the one produced by conjugating the field with the
unitary dilation (the sqrt(omega) Jacobian plus the d^3k measure); with it the
assembled family at real theta is exactly the dilation orbit of the theta = 0
operator on the correspondingly rescaled grid, and eigenvalues are
theta-independent up to quadrature error.

Full operator on (atom) tensor (Fock):

    H = h_el x 1 + g W + e^{-theta} 1 x H_f,
    W = sum_i [ G_i(conj kappa, conj theta)^dag x a_i + G_i(kappa, theta) x a*_i ].

The rescaled variant shifts the level of interest to zero, normalizes the gap
and the field coefficient to one, and shifts the cutoff argument by
tau = -log(delta_check):

    Hcheck = e^theta/delta_check (h_el - E_j) x 1 + g Wcheck + 1 x H_f,
    Gcheck_i(kappa, theta) = e^theta / delta_check * G_i(kappa, theta + tau).
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .atom import AtomModel, GapData, rescaled_atom
from .fock import DENSE_LIMIT, FockBasis, all_creation, field_energy
from .modes import ModeGrid, THETA_STRIP, gaussian_cutoff


class AssemblyError(ValueError):
    pass


def _as_kappa_pair(kappa) -> tuple[complex, complex]:
    if np.isscalar(kappa):
        return complex(kappa), complex(kappa)
    k1, k2 = kappa
    return complex(k1), complex(k2)


@dataclass(frozen=True)
class Coupling:
    """Per-mode atomic matrices entering the interaction.

    create[i] multiplies a*_i and is G_i at (kappa, theta); annihilate[i]
    multiplies a_i and is G_i at the conjugated parameters, adjointed.
    """
    create: np.ndarray        # (M, n, n)
    annihilate: np.ndarray    # (M, n, n)
    kappa: tuple
    theta: complex
    scale: complex = 1.0

    @property
    def n_modes(self) -> int:
        return self.create.shape[0]

    @property
    def atom_dim(self) -> int:
        return self.create.shape[1]


def _one_sided_coupling(model: AtomModel, grid: ModeGrid, kappa, theta,
                        scale: complex) -> np.ndarray:
    k1, k2 = kappa
    theta = complex(theta)
    if abs(theta.imag) >= THETA_STRIP:
        raise AssemblyError("theta outside the cutoff continuation strip")
    om = grid.omega
    pref = (np.sqrt(grid.weights) * cmath.exp(-2.0 * theta)
            * gaussian_cutoff(cmath.exp(-theta) * om, grid.cutoff)
            / np.sqrt(om)) * scale
    d_dot_eps = np.einsum("ia,abc->ibc", grid.eps, model.dipole)
    k_cross_eps = np.cross(grid.k, grid.eps)
    s_dot = np.einsum("ia,abc->ibc", k_cross_eps, model.spin)
    return (pref * om)[:, None, None] * (1j * k1 ** 3) * d_dot_eps \
        + pref[:, None, None] * (1j * k2 ** 5) * s_dot


def coupling_matrices(model: AtomModel, grid: ModeGrid, kappa, theta,
                      gap: GapData = None) -> Coupling:
    """Both sides of the interaction coupling; rescaled when gap is given.

    Physical runs use a single kappa with kappa_1 = kappa_2; the two
    components can be switched independently to isolate the dipole and
    magnetic channels.
    """
    pair = _as_kappa_pair(kappa)
    theta = complex(theta)
    if gap is None:
        scale_c = scale_a = 1.0
        th_eff = theta
    else:
        scale_c = cmath.exp(theta) / gap.delta_check
        scale_a = cmath.exp(theta.conjugate()) / gap.delta_check
        th_eff = theta + gap.tau
    create = _one_sided_coupling(model, grid, pair, th_eff, scale_c)
    conj_pair = (pair[0].conjugate(), pair[1].conjugate())
    other = _one_sided_coupling(model, grid, conj_pair, th_eff.conjugate(), scale_a)
    annihilate = np.conj(np.transpose(other, (0, 2, 1)))
    return Coupling(create=create, annihilate=annihilate, kappa=pair,
                    theta=theta, scale=complex(scale_c))


def coupling_mu_norm(coupling: Coupling, grid: ModeGrid, mu: float) -> float:
    """Operator-valued mu-norm with the folded weights accounted for."""
    if mu <= 0:
        raise AssemblyError("mu must be positive")
    om = grid.omega
    norms = np.array([np.linalg.norm(coupling.create[i], 2)
                      for i in range(coupling.n_modes)])
    return float(np.sqrt(np.sum(norms ** 2 / om ** (2 + 2 * mu))))


def interaction(coupling: Coupling, basis: FockBasis):
    """W = sum_i [ annihilate_i x a_i + create_i x a*_i ], photon number +-1."""
    if coupling.n_modes != basis.n_modes:
        raise AssemblyError("coupling was not built over this basis's grid")
    ads = all_creation(basis)
    n = coupling.atom_dim
    w = sp.csr_matrix((n * basis.dim, n * basis.dim), dtype=complex)
    for i in range(coupling.n_modes):
        ad = ads[i]
        w = w + sp.kron(sp.csr_matrix(coupling.create[i]), ad, format="csr")
        w = w + sp.kron(sp.csr_matrix(coupling.annihilate[i]), ad.T, format="csr")
    return w


@dataclass(frozen=True)
class DilatedHamiltonian:
    matrix: object            # dense ndarray (sparse above the dense limit)
    params: dict

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray() if sp.issparse(self.matrix) else self.matrix


def _finalize(h: sp.spmatrix, params: dict) -> DilatedHamiltonian:
    if h.shape[0] <= DENSE_LIMIT:
        return DilatedHamiltonian(matrix=np.asarray(h.todense()), params=params)
    return DilatedHamiltonian(matrix=h.tocsr(), params=params)


def assemble(model: AtomModel, grid: ModeGrid, basis: FockBasis, kappa,
             theta: complex = 0.0, g: float = 1.0) -> DilatedHamiltonian:
    """H(kappa, theta) = h_el x 1 + g W(kappa, theta) + e^{-theta} 1 x H_f."""
    if basis.n_modes != grid.n_modes:
        raise AssemblyError("Fock basis does not match the grid")
    theta = complex(theta)
    coup = coupling_matrices(model, grid, kappa, theta)
    w = interaction(coup, basis)
    hf = field_energy(basis, grid).matrix
    h = sp.kron(sp.csr_matrix(model.h_el), sp.identity(basis.dim), format="csr") \
        + g * w \
        + cmath.exp(-theta) * sp.kron(sp.identity(model.dim), hf, format="csr")
    params = {
        "kappa_re": [coup.kappa[0].real, coup.kappa[1].real],
        "kappa_im": [coup.kappa[0].imag, coup.kappa[1].imag],
        "theta_re": theta.real, "theta_im": theta.imag, "g": g,
        "model": model.name, "atom_dim": model.dim,
        "n_modes": grid.n_modes, "fock_dim": basis.dim,
        "max_total": basis.max_total, "rescaled": False, "level": None,
    }
    return _finalize(h, params)


def assemble_rescaled(model: AtomModel, grid: ModeGrid, basis: FockBasis,
                      kappa, theta: complex, g: float,
                      gap: GapData) -> DilatedHamiltonian:
    """Level-pinned variant: zero eigenvalue at the chosen level, unit H_f."""
    if basis.n_modes != grid.n_modes:
        raise AssemblyError("Fock basis does not match the grid")
    theta = complex(theta)
    coup = coupling_matrices(model, grid, kappa, theta, gap=gap)
    w = interaction(coup, basis)
    hat = rescaled_atom(model, gap, theta)
    hf = field_energy(basis, grid).matrix
    h = sp.kron(sp.csr_matrix(hat), sp.identity(basis.dim), format="csr") \
        + g * w \
        + sp.kron(sp.identity(model.dim), hf, format="csr")
    params = {
        "kappa_re": [coup.kappa[0].real, coup.kappa[1].real],
        "kappa_im": [coup.kappa[0].imag, coup.kappa[1].imag],
        "theta_re": theta.real, "theta_im": theta.imag, "g": g,
        "model": model.name, "atom_dim": model.dim,
        "n_modes": grid.n_modes, "fock_dim": basis.dim,
        "max_total": basis.max_total, "rescaled": True, "level": gap.j,
        "delta": gap.delta, "delta_check": gap.delta_check, "tau": gap.tau,
    }
    return _finalize(h, params)


def export_matrix_market(h: DilatedHamiltonian, path: str) -> None:
    from scipy.io import mmwrite
    m = h.matrix
    mmwrite(path, m if sp.issparse(m) else sp.coo_matrix(m))

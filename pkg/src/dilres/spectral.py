"""Non-Hermitian eigensolving, resonance continuation, and bound audits.

Eigenvalue clusters are matched across parameter points by subspace overlap
(Frobenius inner product of orthonormalized eigenprojections), which stays
stable through near-crossings where plain eigenvalue distance does not.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .atom import AtomModel, GapData
from .fock import FockBasis
from .hamiltonian import Coupling, DilatedHamiltonian
from .modes import ModeGrid
from .numutil import CLUSTER_RTOL, cluster_values

RESIDUAL_TOL = 1e-8
OVERLAP_RATIO_MIN = 3.0
MAX_STEP_HALVINGS = 10


class SpectralError(RuntimeError):
    pass


class TrackingError(SpectralError):
    pass


# ---------------------------------------------------------------------------
# dense eigensolver wrapper
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray          # sorted by real part
    eigenvectors: np.ndarray         # right eigenvectors, matching columns
    residuals: np.ndarray            # ||H v - E v|| per normalized pair
    clusters: tuple                  # tuple of index tuples into eigenvalues
    params: dict
    defective_warning: bool

    @property
    def multiplicities(self) -> tuple:
        return tuple(len(c) for c in self.clusters)

    def cluster_means(self) -> np.ndarray:
        return np.array([np.mean(self.eigenvalues[list(c)]) for c in self.clusters])


def eig_all(h, params: dict = None, cluster_rtol: float = CLUSTER_RTOL) -> SpectrumResult:
    """Full dense eigendecomposition with residuals and cluster structure."""
    if isinstance(h, DilatedHamiltonian):
        params = params or h.params
        h = h.dense()
    h = np.asarray(h)
    if not np.all(np.isfinite(h)):
        raise SpectralError("matrix has non-finite entries")
    vals, vecs = scipy.linalg.eig(h)
    order = np.lexsort((vals.imag, vals.real))
    vals, vecs = vals[order], vecs[:, order]
    hv = h @ vecs
    residuals = np.linalg.norm(hv - vecs * vals, axis=0)
    scale = max(1.0, float(np.linalg.norm(h, "fro")))
    if np.any(residuals > RESIDUAL_TOL * scale):
        raise SpectralError("eigensolver residuals above tolerance")
    svals = np.linalg.svd(vecs, compute_uv=False)
    defective = bool(svals[-1] < 1e-12 * svals[0])
    clusters = tuple(tuple(c) for c in cluster_values(vals, rtol=cluster_rtol))
    return SpectrumResult(eigenvalues=vals, eigenvectors=vecs,
                          residuals=residuals, clusters=clusters,
                          params=params or {}, defective_warning=defective)


# ---------------------------------------------------------------------------
# cluster location and continuation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Seed:
    subspace: np.ndarray     # orthonormal columns spanning the seed states
    d: int
    energy: complex
    level: int


def make_seed(model: AtomModel, basis: FockBasis, level: int) -> Seed:
    """Seed at coupling zero: atomic level vectors tensor the Fock vacuum."""
    vecs = model.level_vectors(level)
    vac = np.zeros(basis.dim)
    vac[0] = 1.0
    q = np.stack([np.kron(v, vac) for v in vecs.T], axis=1)
    return Seed(subspace=q, d=q.shape[1], energy=complex(model.levels[level]),
                level=level)


@dataclass(frozen=True)
class ClusterFix:
    energy: complex
    spread: float
    indices: tuple
    subspace: np.ndarray
    overlap_ratio: float
    max_residual: float


def _pick_by_overlap(vals: np.ndarray, vecs: np.ndarray, residuals: np.ndarray,
                     subspace: np.ndarray, d: int) -> ClusterFix:
    v = vecs / np.linalg.norm(vecs, axis=0)
    overlaps = np.sum(np.abs(subspace.conj().T @ v) ** 2, axis=0)
    order = np.argsort(overlaps)[::-1]
    chosen = order[:d]
    ratio = float("inf")
    if len(order) > d and overlaps[order[d]] > 0:
        ratio = float(overlaps[order[d - 1]] / overlaps[order[d]])
    sel_vals = vals[chosen]
    spread = float(np.max(np.abs(sel_vals[:, None] - sel_vals[None, :]))) if d > 1 else 0.0
    qsel, _ = np.linalg.qr(v[:, chosen])
    return ClusterFix(energy=complex(np.mean(sel_vals)), spread=spread,
                      indices=tuple(int(i) for i in chosen), subspace=qsel,
                      overlap_ratio=ratio,
                      max_residual=float(np.max(residuals[chosen])))


def locate_cluster(spec: SpectrumResult, subspace: np.ndarray, d: int) -> ClusterFix:
    """Pick the d eigenvalues whose eigenvectors overlap the subspace most."""
    return _pick_by_overlap(spec.eigenvalues, spec.eigenvectors,
                            spec.residuals, subspace, d)


def locate_cluster_shift_invert(h, subspace: np.ndarray, d: int,
                                sigma: complex, k: int = None) -> ClusterFix:
    """Shift-invert location of the seed cluster in a sparse matrix.

    Finds the k eigenvalues nearest sigma with ARPACK, then applies the same
    overlap selection as the dense path.  Reserved for assemblies above the
    dense-eigensolver size; the overlap-ratio guard still applies.
    """
    h = h.tocsc() if sp.issparse(h) else sp.csc_matrix(h)
    k = k or max(2 * d + 4, 8)
    vals, vecs = spla.eigs(h, k=k, sigma=sigma)
    residuals = np.linalg.norm(h @ vecs - vecs * vals, axis=0)
    return _pick_by_overlap(vals, vecs, residuals, subspace, d)


@dataclass
class TrajectoryPoint:
    point: tuple
    energy: complex
    spread: float
    residual: float
    overlap_ratio: float


@dataclass
class ResonanceTrajectory:
    seed_level: int
    d: int
    points: list = field(default_factory=list)
    aborted: bool = False
    abort_reason: str = ""

    def energies(self) -> np.ndarray:
        return np.array([p.energy for p in self.points])

    def max_spread(self) -> float:
        return max((p.spread for p in self.points), default=0.0)


def _midpoint(a, b):
    return tuple((np.asarray(x) + np.asarray(y)) / 2 for x, y in zip(a, b))


def track_resonance(builder, path, seed: Seed,
                    ratio_min: float = OVERLAP_RATIO_MIN,
                    max_halvings: int = MAX_STEP_HALVINGS) -> ResonanceTrajectory:
    """Continue the seed cluster along a parameter path.

    builder maps a path point (tuple of numbers) to a DilatedHamiltonian.
    Ambiguous matches (overlap ratio below ratio_min) trigger step halving
    between the previous and offending point, then abort; the partial
    trajectory is preserved on the result.  Cluster spread is recorded per
    point and never silently collapsed.
    """
    traj = ResonanceTrajectory(seed_level=seed.level, d=seed.d)
    current = seed.subspace
    sigma = seed.energy
    queue = [tuple(p) for p in path]
    prev_point = None
    pos = 0
    halvings = 0
    while pos < len(queue):
        point = queue[pos]
        fix = _locate_in(builder(*point), current, seed.d, sigma)
        if fix.overlap_ratio < ratio_min:
            if prev_point is None or halvings >= max_halvings:
                traj.aborted = True
                traj.abort_reason = (
                    f"ambiguous cluster match at {point} "
                    f"(overlap ratio {fix.overlap_ratio:.2f} < {ratio_min})")
                return traj
            queue.insert(pos, _midpoint(prev_point, point))
            halvings += 1
            continue
        halvings = 0
        traj.points.append(TrajectoryPoint(
            point=point, energy=fix.energy, spread=fix.spread,
            residual=fix.max_residual, overlap_ratio=fix.overlap_ratio))
        current = fix.subspace
        sigma = fix.energy
        prev_point = point
        pos += 1
    return traj


def _locate_in(h: DilatedHamiltonian, subspace: np.ndarray, d: int,
               sigma: complex) -> ClusterFix:
    if sp.issparse(h.matrix):
        # nudge the shift off the eigenvalue so the factorization stays regular
        return locate_cluster_shift_invert(h.matrix, subspace, d,
                                           sigma + 1e-8 + 1e-8j)
    return locate_cluster(eig_all(h), subspace, d)


def theta_independence(builder, thetas, seed: Seed) -> tuple[float, np.ndarray]:
    """Max pairwise deviation of the seed-cluster eigenvalue across thetas."""
    energies = []
    for theta in thetas:
        fix = _locate_in(builder(theta), seed.subspace, seed.d, seed.energy)
        energies.append(fix.energy)
    energies = np.array(energies)
    dev = float(np.max(np.abs(energies[:, None] - energies[None, :])))
    return dev, energies


# ---------------------------------------------------------------------------
# analyticity probe
# ---------------------------------------------------------------------------

def cauchy_riemann_residual(f, z0: complex, h: float) -> tuple[float, float]:
    """Central-difference Cauchy-Riemann residual and its step-halved limit.

    Returns (residual at h, Richardson estimate of the h -> 0 limit); the
    latter is the discretization floor for analytic f and stays O(1) for
    genuinely non-analytic behavior.
    """
    def resid(step):
        dre = (f(z0 + step) - f(z0 - step)) / (2 * step)
        dim = (f(z0 + 1j * step) - f(z0 - 1j * step)) / (2j * step)
        return abs(dre - dim)

    r1 = resid(h)
    r2 = resid(h / 2)
    limit = abs(4 * r2 - r1) / 3.0
    return float(r1), float(limit)


# ---------------------------------------------------------------------------
# resolvent bound audit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResolventCheck:
    measured: float
    bound: float
    passed: bool
    q_at_max: float
    interior_max: bool


def _measured_sup(levels: np.ndarray, j: int, delta_check: float,
                  theta: complex, z: complex, q_grid) -> tuple[float, float, bool]:
    ej = levels[j]
    others = np.delete(levels, j)
    eth = cmath.exp(theta)
    best, q_at = -1.0, 0.0
    vals = []
    for q in q_grid:
        denom = eth * (others - ej) / delta_check - eth * z + q
        m = float(np.max((q + 1.0) / np.abs(denom)))
        vals.append(m)
        if m > best:
            best, q_at = m, float(q)
    qs = list(q_grid)
    i = int(np.argmax(vals))
    interior = 0 < i < len(qs) - 1
    return best, q_at, interior


def resolvent_bound_check(model: AtomModel, gap: GapData, case: str,
                          theta: complex, z: complex, q_grid,
                          theta0: float, rho: float) -> ResolventCheck:
    """Measured resolvent sup against the closed-form majorant.

    Ground case (level 0, d = delta/delta_check):
        region |Im theta| <= theta0 < pi/2, |z| < rho < d;
        bound  e^{-Re theta}/(d - rho) + 1/cos(theta0).
    Excited case (level j >= 1):
        region 0 < Im theta <= theta0 < pi/2, |z| < rho sin(Im theta), rho < d;
        bound adds, to the upper-spectrum term with d - rho sin(Im theta),
        max(2 (1 + 1/q1), (1 + q1)/(|e^theta| sin(Im theta)(d - rho))),
        q1 = 2 |e^theta| ((E_j - E_0)/delta_check + rho sin(Im theta)).
    Parameters outside the stated region are refused, not clamped.
    """
    theta = complex(theta)
    z = complex(z)
    if not 0 <= theta0 < math.pi / 2:
        raise SpectralError("theta0 must lie in [0, pi/2)")
    d = gap.delta / gap.delta_check
    if rho <= 0 or rho >= d:
        raise SpectralError("rho must lie in (0, delta/delta_check)")
    levels = model.levels
    if case == "ground":
        if gap.j != 0:
            raise SpectralError("ground case requires level 0")
        if abs(theta.imag) > theta0:
            raise SpectralError("theta outside the ground-case region")
        if abs(z) >= rho:
            raise SpectralError("z outside the ground-case disc")
        bound = math.exp(-theta.real) / (d - rho) + 1.0 / math.cos(theta0)
    elif case == "excited":
        if gap.j < 1:
            raise SpectralError("excited case requires a level above the ground state")
        if not 0 < theta.imag <= theta0:
            raise SpectralError("theta outside the excited-case region")
        sin_t = math.sin(theta.imag)
        if abs(z) >= rho * sin_t:
            raise SpectralError("z outside the excited-case disc")
        q1 = 2.0 * abs(cmath.exp(theta)) * (
            (levels[gap.j] - levels[0]) / gap.delta_check + sin_t * rho)
        lower = max(2.0 * (1.0 + 1.0 / q1),
                    (1.0 + q1) / (abs(cmath.exp(theta)) * sin_t * (d - rho)))
        bound = math.exp(-theta.real) / (d - rho * sin_t) \
            + 1.0 / math.cos(theta0) + lower
    else:
        raise SpectralError("case must be 'ground' or 'excited'")
    measured, q_at, interior = _measured_sup(levels, gap.j, gap.delta_check,
                                             theta, z, q_grid)
    bound = float(bound)
    return ResolventCheck(measured=measured, bound=bound,
                          passed=bool(measured <= bound), q_at_max=q_at,
                          interior_max=interior)


def resolvent_audit(model: AtomModel, gap: GapData, case: str, thetas, zs,
                    q_grid, theta0: float, rho: float) -> dict:
    """Sweep the (theta, z, q) grid; zs may depend on theta via a callable."""
    records = []
    for theta in thetas:
        z_list = zs(theta) if callable(zs) else zs
        for z in z_list:
            chk = resolvent_bound_check(model, gap, case, theta, z, q_grid,
                                        theta0, rho)
            records.append({
                "theta_re": float(np.real(theta)), "theta_im": float(np.imag(theta)),
                "z_re": z.real if isinstance(z, complex) else float(np.real(z)),
                "z_im": float(np.imag(z)),
                "measured": chk.measured, "bound": chk.bound,
                "passed": chk.passed, "q_at_max": chk.q_at_max,
                "interior_max": chk.interior_max,
            })
    ratios = [r["bound"] / r["measured"] for r in records if r["measured"] > 0]
    return {
        "case": case,
        "n_points": len(records),
        "all_passed": all(r["passed"] for r in records),
        "min_bound_over_measured": min(ratios) if ratios else float("inf"),
        "records": records,
    }


# ---------------------------------------------------------------------------
# second-order perturbation oracle
# ---------------------------------------------------------------------------

def second_order_shift(model: AtomModel, grid: ModeGrid, coupling: Coupling,
                       level: int, theta: complex = 0.0,
                       identity_tol: float = 1e-8,
                       denom_floor: float = 1e-12) -> complex:
    """Second-order energy coefficient of the seed level, per unit g^2.

    Sums single-photon intermediate states directly from coupling matrix
    elements, never assembling the full operator:

        sum_i sum_m  A_i[jj', m] C_i[m, j''] / (E_j - E_m - e^{-theta} omega_i)

    projected onto the seed level.  For a degenerate level the block must be
    proportional to the identity (symmetry-protected case); its scalar is
    returned.
    """
    theta = complex(theta)
    v = model.eigenvectors
    evals = model.eigenvalues
    cols = np.nonzero(model.level_of_state == level)[0]
    d = len(cols)
    ej = model.levels[level]
    eth = cmath.exp(-theta)
    block = np.zeros((d, d), dtype=complex)
    for i in range(coupling.n_modes):
        cre = v.conj().T @ coupling.create[i] @ v
        ann = v.conj().T @ coupling.annihilate[i] @ v
        denoms = ej - evals - eth * grid.omega[i]
        if np.any(np.abs(denoms) < denom_floor):
            m = int(np.argmin(np.abs(denoms)))
            raise SpectralError(
                f"vanishing denominator at intermediate state m={m}, mode i={i}")
        block += (ann[np.ix_(cols, range(model.dim))] / denoms) \
            @ cre[np.ix_(range(model.dim), cols)]
    if d == 1:
        return complex(block[0, 0])
    scalar = np.trace(block) / d
    dev = np.linalg.norm(block - scalar * np.eye(d))
    if dev > identity_tol * max(1.0, np.linalg.norm(block)):
        raise SpectralError(
            f"second-order block is not symmetry-scalar (deviation {dev:.2e})")
    return complex(scalar)

"""Discrete photon momentum grids: quadrature, polarization, cutoff data.

A grid is a finite set of momentum nodes (k, lambda) with positive volume
weights, closed exactly under k -> -k and under a finite rotation group, so
that symmetry operations act as exact node permutations (no interpolation).
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np

INVERSION_GROUP = "inversion-only"
OCTAHEDRAL_GROUP = "octahedral"
GROUPS = (INVERSION_GROUP, OCTAHEDRAL_GROUP)

# The Gaussian cutoff continues analytically in theta only while
# Re(e^{-2 theta}) > 0, i.e. |Im theta| < pi/4.
THETA_STRIP = math.pi / 4

_E1 = np.array([1.0, 0.0, 0.0])
_E3 = np.array([0.0, 0.0, 1.0])
_POLE_TOL = 1e-8


class GridError(ValueError):
    pass


def polarization(k, lam: int) -> np.ndarray:
    """Transverse unit vector eps(k, lam) for lam in {1, 2}.

    eps(k,1) = (khat x a)/|khat x a| with reference axis a = e3 and fallback
    a = e1 near the poles; eps(k,2) = khat x eps(k,1).  Depends on k only
    through khat.
    """
    k = np.asarray(k, dtype=float)
    norm = np.linalg.norm(k)
    if norm == 0.0:
        raise GridError("polarization undefined at k = 0")
    if lam not in (1, 2):
        raise GridError(f"polarization index must be 1 or 2, got {lam}")
    khat = k / norm
    c = np.cross(khat, _E3)
    if np.linalg.norm(c) < _POLE_TOL:
        c = np.cross(khat, _E1)
    eps1 = c / np.linalg.norm(c)
    if lam == 1:
        return eps1
    return np.cross(khat, eps1)


def octahedral_rotations() -> list[np.ndarray]:
    """The 24 proper rotations mapping the coordinate axes to themselves.

    Returned as exact signed permutation matrices (det +1), generated by
    closure from the 90-degree rotations about e3 and e1.
    """
    rz = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 1]])
    rx = np.array([[1, 0, 0], [0, 0, -1], [0, 1, 0]])
    group = {tuple(np.eye(3, dtype=int).flatten())}
    frontier = [np.eye(3, dtype=int)]
    while frontier:
        nxt = []
        for g in frontier:
            for gen in (rz, rx):
                h = gen @ g
                key = tuple(h.flatten())
                if key not in group:
                    group.add(key)
                    nxt.append(h)
        frontier = nxt
    out = [np.array(key, dtype=float).reshape(3, 3) for key in sorted(group)]
    assert len(out) == 24
    return out


def group_directions(group: str) -> np.ndarray:
    """Single angular orbit of unit vectors for the given group id."""
    if group == INVERSION_GROUP:
        return np.array([_E3, -_E3])
    if group == OCTAHEDRAL_GROUP:
        return np.array([
            [1.0, 0, 0], [-1.0, 0, 0],
            [0, 1.0, 0], [0, -1.0, 0],
            [0, 0, 1.0], [0, 0, -1.0],
        ])
    raise GridError(f"unknown angular group {group!r}")


def group_rotations(group: str) -> list[np.ndarray]:
    if group == INVERSION_GROUP:
        return [np.eye(3)]
    if group == OCTAHEDRAL_GROUP:
        return octahedral_rotations()
    raise GridError(f"unknown angular group {group!r}")


def radial_rule(n_radial: int, r_max: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights mapped from [-1,1] to (0, r_max]."""
    x, w = np.polynomial.legendre.leggauss(n_radial)
    return (x + 1.0) / 2.0 * r_max, w * r_max / 2.0


@dataclass(frozen=True)
class ModeGrid:
    """Photon modes (k_i, lambda_i) with quadrature weights and polarization.

    Modes are ordered radial-major: index = (rad * n_dir + dir) * 2 + (lam-1).
    Weights carry the full momentum-space volume r^2 dr dOmega, so sums over
    nodes approximate integrals d^3k per polarization.
    """
    k: np.ndarray           # (M, 3)
    lam: np.ndarray         # (M,) values in {1, 2}
    weights: np.ndarray     # (M,) positive
    eps: np.ndarray         # (M, 3)
    cutoff: float           # Gaussian scale Lambda
    group: str
    radii: np.ndarray       # (n_radial,)
    radial_weights: np.ndarray  # (n_radial,) 1d rule weights
    directions: np.ndarray  # (n_dir, 3)
    rad_index: np.ndarray   # (M,)
    dir_index: np.ndarray   # (M,)

    def __post_init__(self):
        for name in ("k", "lam", "weights", "eps", "radii", "radial_weights",
                     "directions", "rad_index", "dir_index"):
            getattr(self, name).setflags(write=False)

    @property
    def n_modes(self) -> int:
        return self.k.shape[0]

    @property
    def omega(self) -> np.ndarray:
        return np.linalg.norm(self.k, axis=1)

    def direction_lookup(self) -> dict:
        return {tuple(np.round(d, 12)): i for i, d in enumerate(self.directions)}

    def mode_index(self, rad: int, direc: int, lam: int) -> int:
        return (rad * len(self.directions) + direc) * 2 + (lam - 1)


def build_mode_grid(n_radial: int, r_max: float, group: str, cutoff: float) -> ModeGrid:
    """Tensor grid: Gauss-Legendre radii x one angular orbit x 2 polarizations."""
    if n_radial < 1:
        raise GridError("n_radial must be >= 1")
    if r_max <= 0:
        raise GridError("r_max must be positive")
    if cutoff <= 0:
        raise GridError("cutoff scale must be positive")
    dirs = group_directions(group)
    radii, rweights = radial_rule(n_radial, r_max)
    n_dir = len(dirs)
    ang_weight = 4.0 * math.pi / n_dir

    ks, lams, ws, epss, ris, dis = [], [], [], [], [], []
    for i, (r, wr) in enumerate(zip(radii, rweights)):
        for a, d in enumerate(dirs):
            for lam in (1, 2):
                ks.append(r * d)
                lams.append(lam)
                ws.append(wr * r * r * ang_weight)
                epss.append(polarization(d, lam))
                ris.append(i)
                dis.append(a)
    return ModeGrid(
        k=np.array(ks), lam=np.array(lams, dtype=int), weights=np.array(ws),
        eps=np.array(epss), cutoff=float(cutoff), group=group,
        radii=radii, radial_weights=rweights, directions=dirs,
        rad_index=np.array(ris, dtype=int), dir_index=np.array(dis, dtype=int),
    )


def gaussian_cutoff(r, cutoff: float):
    """rho(k) = exp(-(|k|/Lambda)^2), evaluated at radius r (possibly complex)."""
    r = np.asarray(r)
    return np.exp(-((r / cutoff) ** 2))


def _check_theta(theta: complex):
    if abs(theta.imag) >= THETA_STRIP:
        raise GridError(
            f"|Im theta| = {abs(theta.imag):.6f} outside the continuation "
            f"strip (< pi/4) of the Gaussian cutoff")


def dilated_cutoff_at(theta: complex, r, cutoff: float) -> np.ndarray:
    """K_theta(r) = r^{1/2} rho(e^{-theta} r) for real radii r > 0."""
    theta = complex(theta)
    _check_theta(theta)
    r = np.asarray(r, dtype=float)
    scale = cmath.exp(-2.0 * theta)  # (e^{-theta} r / Lambda)^2 = scale r^2/Lambda^2
    return np.sqrt(r) * np.exp(-scale * (r / cutoff) ** 2)


def dilated_cutoff(theta: complex, grid: ModeGrid) -> np.ndarray:
    """Per-node values of K_theta(k) = |k|^{1/2} rho(e^{-theta} k)."""
    return dilated_cutoff_at(theta, grid.omega, grid.cutoff)


def mu_norm(values, grid: ModeGrid, mu: float) -> float:
    """Infrared-weighted norm (sum_i w_i |v_i|^2 / |k_i|^{2+2mu})^{1/2}."""
    if mu <= 0:
        raise GridError("mu must be positive")
    v = np.asarray(values)
    if v.shape[0] != grid.n_modes:
        raise GridError("values length does not match grid size")
    om = grid.omega
    return float(np.sqrt(np.sum(grid.weights * np.abs(v) ** 2 / om ** (2 + 2 * mu))))


def cutoff_scaling_exponent(theta: float, tau: float, cutoff: float,
                            n_radial: int = 200, r_max: float = None) -> float:
    """Measured exponent p in ||K_{theta+tau}||_{L^2} = e^{p tau} ||K_theta||_{L^2}.

    The L2 norm is over d^3k.  Reported as a measurement; the operator
    identity K_{theta+t} = e^{2t} u(t) K_theta fixes p = 2 under unitarity
    of the dilation.
    """
    if r_max is None:
        r_max = 12.0 * cutoff * math.exp(max(theta + tau, theta, 0.0))
    r, w = radial_rule(n_radial, r_max)
    vol = w * r * r * 4.0 * math.pi

    def l2(th):
        vals = np.abs(dilated_cutoff_at(th, r, cutoff)) ** 2
        return math.sqrt(float(np.sum(vol * vals)))

    return math.log(l2(theta + tau) / l2(theta)) / tau


def inversion_map(grid: ModeGrid) -> np.ndarray:
    """Node permutation i -> index of (-k_i, lam_i); exact, no interpolation."""
    lut = grid.direction_lookup()
    out = np.empty(grid.n_modes, dtype=int)
    for i in range(grid.n_modes):
        key = tuple(np.round(-grid.directions[grid.dir_index[i]], 12))
        if key not in lut:
            raise GridError("grid not closed under inversion")
        out[i] = grid.mode_index(grid.rad_index[i], lut[key], grid.lam[i])
    return out


def rotation_direction_map(grid: ModeGrid, rot: np.ndarray) -> np.ndarray:
    """Direction permutation a -> index of R^{-1} d_a, exact on the orbit."""
    lut = grid.direction_lookup()
    out = np.empty(len(grid.directions), dtype=int)
    rinv = rot.T
    for a, d in enumerate(grid.directions):
        key = tuple(np.round(rinv @ d, 12))
        if key not in lut:
            raise GridError("rotation does not preserve the direction orbit")
        out[a] = lut[key]
    return out


def grid_to_json(grid: ModeGrid) -> str:
    nodes = [
        {"k": [float(x) for x in grid.k[i]],
         "lambda": int(grid.lam[i]),
         "weight": float(grid.weights[i]),
         "eps": [float(x) for x in grid.eps[i]]}
        for i in range(grid.n_modes)
    ]
    doc = {"nodes": nodes, "Lambda": grid.cutoff, "group": grid.group,
           "n_radial": len(grid.radii), "r_max_hint": float(np.max(grid.radii))}
    return json.dumps(doc, indent=2, sort_keys=True)


def grid_from_json(text: str) -> ModeGrid:
    """Rebuild a grid from its JSON form (structure recovered from node data)."""
    doc = json.loads(text)
    nodes = doc["nodes"]
    k = np.array([n["k"] for n in nodes])
    lam = np.array([n["lambda"] for n in nodes], dtype=int)
    weights = np.array([n["weight"] for n in nodes])
    eps = np.array([n["eps"] for n in nodes])
    om = np.linalg.norm(k, axis=1)
    radii, rad_index = np.unique(np.round(om, 12), return_inverse=True)
    dirs_all = k / om[:, None]
    directions, dir_index = np.unique(np.round(dirs_all, 12), axis=0,
                                      return_inverse=True)
    n_dir = len(directions)
    rw = np.zeros(len(radii))
    for i in range(len(nodes)):
        if lam[i] == 1:
            rw[rad_index[i]] = weights[i] / (radii[rad_index[i]] ** 2 * 4 * np.pi / n_dir)
    # restore the canonical radial-major mode ordering
    order = np.lexsort((lam, dir_index, rad_index))
    return ModeGrid(k=k[order], lam=lam[order], weights=weights[order],
                    eps=eps[order], cutoff=float(doc["Lambda"]),
                    group=doc["group"], radii=radii, radial_weights=rw,
                    directions=directions, rad_index=rad_index[order],
                    dir_index=dir_index[order])

"""Named verification checks over all modules.

Each check returns (name, measured, bound, passed); the command-line verify
command serializes them, and the acceptance suite asserts them.  Checks take
their tolerances from DEFAULTS, overridable per run (a tightened override is
expected to produce honest failures).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, asdict

import numpy as np

from . import modes as md
from .atom import (fine_structure_model, hydrogen_diagonal_model, nu_epsilon,
                   hydrogen_levels, hydrogen_grid, spectral_gap, toy_sp_shell,
                   toy_spin_half, toy_two_level)
from .fock import (build_fock_basis, annihilation, creation, field_energy,
                   number_projector, second_quantize)
from .hamiltonian import assemble, coupling_matrices
from .numutil import random_su2, random_unitary, random_hermitian
from .spectral import (eig_all, locate_cluster, make_seed, resolvent_audit,
                       second_order_shift, theta_independence, track_resonance)
from .symmetry import (OperatorPart, check_symmetry, irreducibility_check,
                       kramers_check, rotation_symmetry,
                       su2_octahedral_generators, su2_to_so3, time_reversal)
from .atom import PAULI

DEFAULTS = {
    "grid_identity_tol": 1e-12,
    "ccr_tol": 1e-12,
    "gamma_tol": 1e-10,
    "symmetry_tol": 1e-10,
    "kramers_pair_gap": 1e-10,
    "fine_structure_rel": 1e-6,
    "slope_window": 0.05,
    "slope_agreement": 0.05,
    "im_energy_tol": 1e-10,
    "protected_spread_rel": 1e-9,
    "split_detection": 1e-5,
    "nonvacuous_factor": 10.0,
}


@dataclass
class CheckResult:
    name: str
    measured: float
    bound: float
    passed: bool
    info: dict | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["info"] is None:
            d.pop("info")
        return d


def _res(name, measured, bound, larger_ok=False, info=None) -> CheckResult:
    measured = float(measured)
    bound = float(bound)
    passed = measured >= bound if larger_ok else measured <= bound
    return CheckResult(name, measured, bound, bool(passed), info)


def _tol(overrides: dict, key: str) -> float:
    return float((overrides or {}).get(key, DEFAULTS[key]))


# ---------------------------------------------------------------------------
# mode grid and Fock suite
# ---------------------------------------------------------------------------

def fock_ccr_suite(seed: int = 0, overrides: dict = None) -> list:
    rng = np.random.default_rng(seed)
    tol = _tol(overrides, "grid_identity_tol")
    ccr_tol = _tol(overrides, "ccr_tol")
    gamma_tol = _tol(overrides, "gamma_tol")
    out = []
    grid = md.build_mode_grid(2, 2.0, "octahedral", 1.0)  # 24 modes

    pol_res = 0.0
    for i in range(0, grid.n_modes, 2):
        k = grid.k[i]
        khat = k / np.linalg.norm(k)
        e1, e2 = grid.eps[i], grid.eps[i + 1]
        pol_res = max(pol_res,
                      abs(e1 @ e2),
                      abs(np.linalg.norm(e1) - 1), abs(np.linalg.norm(e2) - 1),
                      abs(k @ e1), abs(k @ e2),
                      float(np.max(np.abs(np.outer(e1, e1) + np.outer(e2, e2)
                                          - np.eye(3) + np.outer(khat, khat)))))
    out.append(_res("modes.polarization_identities", pol_res, tol))
    out.append(_res("modes.positive_weights", float(np.min(grid.weights)), 0.0,
                    larger_ok=True))
    out.append(_res("modes.positive_omega", float(np.min(grid.omega)), 0.0,
                    larger_ok=True))

    inv = md.inversion_map(grid)
    bij = float(np.linalg.norm(np.sort(inv) - np.arange(grid.n_modes)))
    rot_bij = 0.0
    for rot in md.octahedral_rotations():
        dm = md.rotation_direction_map(grid, rot)
        rot_bij = max(rot_bij, float(np.linalg.norm(np.sort(dm) - np.arange(6))))
    out.append(_res("modes.permutations_exact", max(bij, rot_bij), 0.0))

    k0 = md.dilated_cutoff(0.0, grid)
    exact = np.sqrt(grid.omega) * np.exp(-(grid.omega / grid.cutoff) ** 2)
    out.append(_res("modes.cutoff_theta0_exact",
                    float(np.max(np.abs(k0 - exact))), 0.0))
    th, t = 0.1, 0.3
    lhs = md.dilated_cutoff_at(th + t, grid.radii, grid.cutoff)
    rhs = math.exp(0.5 * t) * md.dilated_cutoff_at(th, np.exp(-t) * grid.radii,
                                                   grid.cutoff)
    out.append(_res("modes.dilation_identity",
                    float(np.max(np.abs(lhs - rhs))), 1e-13))
    out.append(_res("modes.l2_scaling_exponent",
                    abs(md.cutoff_scaling_exponent(0.0, 0.2, 1.0) - 2.0), 1e-6,
                    info={"note": "measured exponent, fixed to 2 by unitarity"}))

    basis = build_fock_basis(grid, 2)
    out.append(_res("fock.dimension_stars_and_bars",
                    abs(basis.dim - math.comb(26, 2)), 0.0))
    proj = number_projector(basis, basis.max_total)
    worst = 0.0
    ads = [creation(basis, i).matrix for i in range(grid.n_modes)]
    ans = [annihilation(basis, i).matrix for i in range(grid.n_modes)]
    eye = np.eye(basis.dim)
    for i in range(grid.n_modes):
        for j in range(grid.n_modes):
            comm = (ans[i] @ ads[j] - ads[j] @ ans[i]).toarray()
            if i == j:
                comm -= eye
            worst = max(worst, float(np.linalg.norm(comm @ proj.toarray())))
    out.append(_res("fock.ccr_below_cap", worst, ccr_tol))

    hf = field_energy(basis, grid).dense()
    u = np.zeros((grid.n_modes, grid.n_modes), dtype=complex)
    for rad in range(2):
        block = [grid.mode_index(rad, d, lam) for d in range(6) for lam in (1, 2)]
        perm = rng.permutation(12)
        phases = np.exp(2j * np.pi * rng.random(12))
        for col, row in enumerate(perm):
            u[block[row], block[col]] = phases[col]
    gu = second_quantize(u, basis).dense()
    out.append(_res("fock.field_energy_commutes_with_lifts",
                    float(np.linalg.norm(gu @ hf - hf @ gu)), ccr_tol))

    u1, u2 = random_unitary(grid.n_modes, rng), random_unitary(grid.n_modes, rng)
    g1 = second_quantize(u1, basis).dense()
    g2 = second_quantize(u2, basis).dense()
    g12 = second_quantize(u1 @ u2, basis).dense()
    out.append(_res("fock.lift_multiplicative",
                    float(np.linalg.norm(g1 @ g2 - g12)), gamma_tol))
    out.append(_res("fock.lift_unitary",
                    float(np.linalg.norm(g1.conj().T @ g1 - eye)), gamma_tol))
    vac = np.zeros(basis.dim)
    vac[0] = 1.0
    out.append(_res("fock.lift_fixes_vacuum",
                    float(np.linalg.norm(g1 @ vac - vac)), 1e-12))
    return out


# ---------------------------------------------------------------------------
# symmetry suite
# ---------------------------------------------------------------------------

def symmetry_suite(seed: int = 0, overrides: dict = None) -> list:
    rng = np.random.default_rng(seed)
    tol = _tol(overrides, "symmetry_tol")
    pair_tol = _tol(overrides, "kramers_pair_gap")
    out = []

    hom = 0.0
    for _ in range(20):
        u, v = random_su2(rng), random_su2(rng)
        hom = max(hom, float(np.linalg.norm(
            su2_to_so3(u @ v) - su2_to_so3(u) @ su2_to_so3(v))))
    out.append(_res("symmetry.su2_so3_homomorphism", hom, tol))

    model = toy_sp_shell(e_s=0.0, e_p=1.0, mu=0.8)
    grid12 = md.build_mode_grid(1, 2.5, "octahedral", 1.0)
    basis12 = build_fock_basis(grid12, 1)
    h_rot = assemble(model, grid12, basis12, 0.1, 0.2j, g=1.0).dense()
    rot_res = 0.0
    for u in su2_octahedral_generators().values():
        r = rotation_symmetry(u, model, grid12).assemble(basis12)
        rot_res = max(rot_res, check_symmetry(h_rot, r))
    out.append(_res("symmetry.full_chain_rotation", rot_res, tol,
                    info={"grid": "octahedral, 12 modes", "kappa": 0.1}))

    spin_model = toy_spin_half(gap=1.0, mu=0.8)
    grid8 = md.build_mode_grid(2, 3.0, "inversion-only", 1.0)
    basis8 = build_fock_basis(grid8, 2)
    h_t = assemble(spin_model, grid8, basis8, 0.1, 0.0, g=1.0).dense()
    t_full = time_reversal(spin_model, grid8).assemble(basis8)
    out.append(_res("symmetry.full_chain_time_reversal",
                    check_symmetry(h_t, t_full), tol,
                    info={"grid": "inversion-only, 8 modes", "kappa": 0.1}))

    t_sq = t_full.compose(t_full).matrix
    out.append(_res("symmetry.time_reversal_squares_minus_one",
                    float(np.linalg.norm(t_sq + np.eye(t_sq.shape[0]))), 1e-12))

    worst_gap, worst_overlap, all_even = 0.0, 0.0, True
    t10 = OperatorPart(np.kron(np.eye(5), -PAULI[1]), antilinear=True)
    for _ in range(50):
        h0 = random_hermitian(10, rng)
        h10 = (h0 + t10.sandwich(h0)) / 2
        h10 = (h10 + h10.conj().T) / 2
        rep = kramers_check(h10, t10, pair_gap_tol=pair_tol)
        worst_gap = max(worst_gap, rep.max_pair_gap)
        worst_overlap = max(worst_overlap, rep.max_self_overlap)
        all_even = all_even and all(m % 2 == 0 for m in rep.multiplicities)
    out.append(_res("symmetry.kramers_pair_gap", worst_gap, pair_tol,
                    info={"samples": 50, "all_even": all_even}))
    out.append(_res("symmetry.kramers_self_overlap", worst_overlap, 1e-12))
    out.append(_res("symmetry.kramers_even_multiplicities",
                    0.0 if all_even else 1.0, 0.0))

    gens = [OperatorPart(cmath.cos(0.5) * np.eye(2) - 1j * cmath.sin(0.5) * PAULI[a])
            for a in range(3)]
    out.append(_res("symmetry.schur_doublet_commutant",
                    irreducibility_check(gens, np.eye(2)), 1.0))
    fs = fine_structure_model(1.0, 1e-3, 0.1)
    from .symmetry import atom_rotation
    j32 = int(np.argmax(fs.multiplicities))
    rot_gens = [OperatorPart(atom_rotation(fs, random_su2(rng))) for _ in range(20)]
    out.append(_res("symmetry.fine_structure_j32_irreducible",
                    irreducibility_check(rot_gens, fs.level_vectors(j32),
                                         invariance_tol=1e-7), 1.0))
    return out


# ---------------------------------------------------------------------------
# fine structure suite
# ---------------------------------------------------------------------------

def fine_structure_suite(beta: float = 1e-3, eps_so: float = 0.1,
                         Z: float = 1.0, overrides: dict = None) -> list:
    rel = _tol(overrides, "fine_structure_rel")
    out = []
    model = fine_structure_model(Z, beta, eps_so)
    out.append(_res("fine_structure.three_distinct_levels",
                    len(model.levels), 3.0, larger_ok=True,
                    info={"levels": [float(x) for x in model.levels]}))
    mult_ok = sorted(model.multiplicities) == [2, 2, 4]
    out.append(_res("fine_structure.multiplicities_2_2_4",
                    0.0 if mult_ok else 1.0, 0.0,
                    info={"multiplicities": [int(m) for m in model.multiplicities]}))

    # pattern (0, -2, 1) in units of c_G c_R, c_G = 1/2
    c = beta * model.c_r / 2.0
    shifts = np.sort((model.levels - model.shell_energy) / c)
    pattern = np.array([-2.0, 0.0, 1.0])
    out.append(_res("fine_structure.shift_pattern",
                    float(np.max(np.abs(shifts - pattern))), rel,
                    info={"normalized_shifts": [float(s) for s in shifts]}))

    # proportionality constant against the radial-oracle integral
    grid = hydrogen_grid(Z, n_shell=2)
    _, vecs = hydrogen_levels(Z, l=1, n_states=1, grid=grid)
    u21 = vecs[:, 0]
    c_r_integral = float(np.sum(u21 ** 2 * nu_epsilon(grid.r, eps_so)) * grid.h)
    extracted = (np.max(model.levels) - np.min(model.levels)) / (3.0 * beta)
    out.append(_res("fine_structure.constant_matches_radial_integral",
                    abs(extracted - 0.5 * c_r_integral) / (0.5 * c_r_integral),
                    rel, info={"c_G_c_R": 0.5 * c_r_integral}))
    return out


# ---------------------------------------------------------------------------
# resolvent suite
# ---------------------------------------------------------------------------

def resolvent_suite(overrides: dict = None) -> list:
    factor = _tol(overrides, "nonvacuous_factor")
    out = []
    model = hydrogen_diagonal_model(1.0, 4)

    gap0 = spectral_gap(model, 0)
    thetas = [tr + 1j * ti for tr in (-0.25, 0.25)
              for ti in np.linspace(-0.9, 0.9, 5)]
    zs = [r * cmath.exp(1j * phi) for r in (0.3, 0.72)
          for phi in np.linspace(0.0, 2 * math.pi, 5, endpoint=False)]
    qs = np.linspace(0.0, 40.0, 20)
    audit_g = resolvent_audit(model, gap0, "ground", thetas, zs, qs,
                              theta0=1.0, rho=0.75)
    out.append(_res("resolvent.ground_all_points",
                    0.0 if audit_g["all_passed"] else 1.0, 0.0,
                    info={"points": audit_g["n_points"]}))

    gap1 = spectral_gap(model, 1, epsilon=0.25)
    rho1 = 0.5 * gap1.delta / gap1.delta_check
    thetas1 = [0.05 + 1j * ti for ti in np.linspace(0.3, 0.9, 10)]
    zs1 = lambda th: [r * rho1 * math.sin(np.imag(th)) * cmath.exp(1j * phi)
                      for r in (0.4, 0.9)
                      for phi in np.linspace(0.0, 2 * math.pi, 5, endpoint=False)]
    audit_e = resolvent_audit(model, gap1, "excited", thetas1, zs1, qs,
                              theta0=1.0, rho=rho1)
    out.append(_res("resolvent.excited_all_points",
                    0.0 if audit_e["all_passed"] else 1.0, 0.0,
                    info={"points": audit_e["n_points"]}))

    # non-vacuity over the union: some interior point comes within the factor
    out.append(_res("resolvent.nonvacuous",
                    min(audit_g["min_bound_over_measured"],
                        audit_e["min_bound_over_measured"]), factor,
                    info={"ground_min_ratio": audit_g["min_bound_over_measured"],
                          "excited_min_ratio": audit_e["min_bound_over_measured"]}))
    return out


# ---------------------------------------------------------------------------
# perturbative slope suite
# ---------------------------------------------------------------------------

def slope_suite(overrides: dict = None) -> list:
    window = _tol(overrides, "slope_window")
    agree = _tol(overrides, "slope_agreement")
    out = []
    model = toy_two_level(gap=1.0, mu=1.0)
    grid = md.build_mode_grid(4, 3.0, "inversion-only", 1.0)
    basis = build_fock_basis(grid, 2)
    coup = coupling_matrices(model, grid, 1.0, 0.0)
    c2 = second_order_shift(model, grid, coup, 0)
    seed = make_seed(model, basis, 0)
    builder = lambda g: assemble(model, grid, basis, 1.0, 0.0, g=g)
    gs = np.geomspace(1e-3, 1e-2, 6)
    traj = track_resonance(builder, [(0.0,)] + [(g,) for g in gs], seed)
    shifts = traj.energies()[1:] - seed.energy
    rel_dev = float(np.max(np.abs(shifts - gs ** 2 * c2) / np.abs(gs ** 2 * c2)))
    out.append(_res("slope.oracle_agreement", rel_dev, agree,
                    info={"coefficient": [c2.real, c2.imag]}))
    fit = np.polyfit(np.log(gs), np.log(np.abs(shifts)), 1)
    out.append(_res("slope.log_log_exponent", abs(fit[0] - 2.0), window,
                    info={"slope": float(fit[0])}))
    return out


# ---------------------------------------------------------------------------
# theta-independence trend suite
# ---------------------------------------------------------------------------

def theta_trend_suite(overrides: dict = None, n_radials=(2, 4, 8),
                      thetas=(0.3j, 0.4j, 0.5j), kappa: float = 0.1) -> list:
    im_tol = _tol(overrides, "im_energy_tol")
    out = []
    model = toy_two_level(gap=1.0, mu=1.0)
    devs = []
    energies_fine = None
    for n_rad in n_radials:
        grid = md.build_mode_grid(n_rad, 3.0, "inversion-only", 1.0)
        basis = build_fock_basis(grid, 2)
        seed = make_seed(model, basis, 1)
        builder = lambda th: assemble(model, grid, basis, kappa, th, g=1.0)
        dev, energies = theta_independence(builder, thetas, seed)
        devs.append(dev)
        energies_fine = energies
    monotone = all(devs[i] > devs[i + 1] for i in range(len(devs) - 1))
    out.append(_res("theta_trend.monotone_decrease",
                    0.0 if monotone else 1.0, 0.0,
                    info={"deviations": devs,
                          "n_radials": list(n_radials)}))

    im_excited = float(np.max(energies_fine.imag))
    out.append(_res("theta_trend.excited_imag_nonpositive", im_excited, im_tol,
                    info={"finest_n_radial": n_radials[-1]}))

    grid = md.build_mode_grid(n_radials[-1], 3.0, "inversion-only", 1.0)
    basis = build_fock_basis(grid, 2)
    seed0 = make_seed(model, basis, 0)
    spec = eig_all(assemble(model, grid, basis, kappa, 0.0, g=1.0))
    fix = locate_cluster(spec, seed0.subspace, seed0.d)
    out.append(_res("theta_trend.ground_real_at_real_parameters",
                    abs(fix.energy.imag), im_tol))
    return out


# ---------------------------------------------------------------------------
# degeneracy protection suite
# ---------------------------------------------------------------------------

def protection_suite(overrides: dict = None, perturbation: float = 1e-3) -> list:
    spread_rel = _tol(overrides, "protected_spread_rel")
    split_tol = _tol(overrides, "split_detection")
    out = []
    model = toy_spin_half(gap=1.0, mu=0.8)
    grid = md.build_mode_grid(2, 3.0, "inversion-only", 1.0)
    basis = build_fock_basis(grid, 1)
    seed = make_seed(model, basis, 0)
    path = [(k,) for k in np.linspace(0.0, 0.3, 10)]

    builder = lambda k: assemble(model, grid, basis, k, 0.0, g=1.0)
    traj = track_resonance(builder, path, seed)
    h_norm = float(np.linalg.norm(builder(0.3).dense()))
    out.append(_res("protection.kramers_cluster_spread",
                    traj.max_spread(), spread_rel * h_norm,
                    info={"points": len(traj.points), "d": seed.d}))

    breaker = perturbation * np.kron(model.spin[2],
                                     np.eye(basis.dim)).astype(complex)

    def broken_builder(k):
        h = builder(k)
        return type(h)(matrix=h.dense() + breaker, params=h.params)

    traj_b = track_resonance(broken_builder, path, seed)
    out.append(_res("protection.split_detected_under_breaking",
                    traj_b.max_spread(), split_tol, larger_ok=True,
                    info={"perturbation": perturbation}))
    return out


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

SUITES = {
    "fock": lambda cfg, seed, ov: fock_ccr_suite(seed, ov),
    "symmetry": lambda cfg, seed, ov: symmetry_suite(seed, ov),
    "fine_structure": lambda cfg, seed, ov: fine_structure_suite(
        cfg.get("beta", 1e-3), cfg.get("epsilon", 0.1), cfg.get("Z", 1.0), ov),
    "resolvent": lambda cfg, seed, ov: resolvent_suite(ov),
    "slope": lambda cfg, seed, ov: slope_suite(ov),
    "theta_trend": lambda cfg, seed, ov: theta_trend_suite(ov),
    "protection": lambda cfg, seed, ov: protection_suite(
        ov, cfg.get("perturbation", 1e-3)),
}


def run_suites(names, cfg: dict = None, seed: int = 0,
               overrides: dict = None) -> list:
    cfg = cfg or {}
    results = []
    for name in names:
        if name not in SUITES:
            raise KeyError(f"unknown check suite {name!r}")
        try:
            results.extend(SUITES[name](cfg, seed, overrides))
        except Exception as exc:  # individual failures recorded, run continues
            results.append(CheckResult(
                name=f"{name}.exception", measured=float("inf"), bound=0.0,
                passed=False, info={"error": f"{type(exc).__name__}: {exc}"}))
    return results

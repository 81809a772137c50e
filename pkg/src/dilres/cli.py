"""Command-line front end: spectrum, scan, and verify runs.

All physics parameters come from a TOML config; outputs are CSV/JSON files
plus a manifest echoing every parameter that influenced the run.  Identical
config and seed produce byte-identical outputs; wall time goes to a separate
timing.json excluded from that contract.

Exit codes: 0 ok, 1 check failure, 2 config error, 3 numerical abort.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

EXIT_OK = 0
EXIT_CHECK_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ABORT = 3

CSV_SCHEMAS = {
    "spectrum": ["index", "E_re", "E_im", "residual", "cluster", "multiplicity"],
    "trajectory": ["kappa_re", "kappa_im", "theta_re", "theta_im",
                   "E_re", "E_im", "cluster_spread", "residual"],
    "theta_deviation": ["n_radial", "deviation", "E_re_mean", "E_im_mean"],
    "levels": ["energy", "multiplicity", "l", "j"],
}
SCHEMA_VERSION = 1


class ConfigError(Exception):
    """Carries a single-line machine-parsable reason."""


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _apply_thread_cap():
    cap = os.environ.get("DILRES_THREADS")
    if not cap:
        return
    for var in ("OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "OMP_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, cap)
    try:
        import threadpoolctl
        threadpoolctl.threadpool_limits(int(cap))
    except Exception:
        pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

GRID_DEFAULTS = {"n_radial": 4, "r_max": 3.0, "group": "inversion-only",
                 "Lambda": 1.0}
BUILTIN_NAMES = ("toy2", "spinhalf", "sp-shell", "hydrogen-fine-structure")


def load_config(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigError("config: file not found")
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config: parse error: {exc}") from None
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    model = cfg.get("model", {})
    if "file" in model:
        if not os.path.exists(model["file"]):
            raise ConfigError("model: file not found")
    elif model.get("builtin", "toy2") not in BUILTIN_NAMES:
        raise ConfigError(f"model: unknown builtin {model.get('builtin')!r}")
    grid = {**GRID_DEFAULTS, **cfg.get("grid", {})}
    if grid["n_radial"] < 1:
        raise ConfigError("grid: n_radial must be >= 1")
    if grid["r_max"] <= 0:
        raise ConfigError("grid: r_max must be positive")
    if grid["group"] not in ("inversion-only", "octahedral"):
        raise ConfigError(f"grid: unknown group {grid['group']!r}")
    if grid["Lambda"] <= 0:
        raise ConfigError("grid: Lambda must be positive")
    if cfg.get("fock", {}).get("max_total", 2) < 0:
        raise ConfigError("fock: max_total must be >= 0")
    import math
    for sect in ("params", "scan"):
        theta_im = cfg.get(sect, {}).get("theta_im", 0.0)
        if abs(theta_im) >= math.pi / 4:
            raise ConfigError(f"{sect}: |theta_im| must be below pi/4")
    scan = cfg.get("scan", {})
    if scan.get("kind", "kappa") not in ("kappa", "theta"):
        raise ConfigError(f"scan: unknown kind {scan.get('kind')!r}")
    if scan.get("n_points", 10) < 1:
        raise ConfigError("scan: n_points must be >= 1")


def build_model(cfg: dict):
    from . import atom
    model_cfg = cfg.get("model", {})
    if "file" in model_cfg:
        with open(model_cfg["file"]) as fh:
            return atom.model_from_json(fh.read())
    name = model_cfg.get("builtin", "toy2")
    kwargs = {k: v for k, v in model_cfg.items() if k != "builtin"}
    return atom.builtin_model(name, **kwargs)


def build_grid(cfg: dict):
    from . import modes
    g = {**GRID_DEFAULTS, **cfg.get("grid", {})}
    return modes.build_mode_grid(g["n_radial"], g["r_max"], g["group"],
                                 g["Lambda"])


def build_basis(cfg: dict, grid):
    from . import fock
    return fock.build_fock_basis(grid, cfg.get("fock", {}).get("max_total", 2))


# ---------------------------------------------------------------------------
# manifest and file output
# ---------------------------------------------------------------------------

def make_manifest(cfg: dict, command: str, seed: int, extra: dict = None) -> dict:
    import numpy
    import scipy
    from . import __version__
    from .atom import DEFAULT_EXCITED_EPSILON, HERMITICITY_TOL
    from .fock import HARD_CAP, DENSE_LIMIT
    from .modes import THETA_STRIP
    from .numutil import CLUSTER_RTOL
    from .checks import DEFAULTS as CHECK_DEFAULTS
    manifest = {
        "command": command,
        "seed": seed,
        "config": cfg,
        "versions": {"dilres": __version__, "numpy": numpy.__version__,
                     "scipy": scipy.__version__},
        "design": {
            "radial_quadrature": "gauss-legendre on (0, r_max]",
            "angular_weights": "equal over one group orbit",
            "polarization_gauge": "khat x e3 normalized, fallback khat x e1",
            "coupling_prefactor": "e^{-2 theta} (dilation covariant)",
            "theta_strip": THETA_STRIP,
            "cluster_rtol": CLUSTER_RTOL,
            "hermiticity_tol": HERMITICITY_TOL,
            "fock_hard_cap": HARD_CAP,
            "dense_limit": DENSE_LIMIT,
            "c_G": 0.5,
            "excited_epsilon_default": DEFAULT_EXCITED_EPSILON,
            "check_tolerances": CHECK_DEFAULTS,
        },
        "csv_schemas": CSV_SCHEMAS,
        "schema_version": SCHEMA_VERSION,
    }
    if extra:
        manifest.update(extra)
    return manifest


def write_json(path: str, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_csv(path: str, schema_name: str, rows) -> None:
    cols = CSV_SCHEMAS[schema_name]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if isinstance(v, float) else str(v)
                              for v in row) + "\n")


def _write_timing(outdir: str, seconds: float) -> None:
    write_json(os.path.join(outdir, "timing.json"),
               {"wall_time_seconds": seconds,
                "note": "excluded from the determinism contract"})


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_spectrum(cfg: dict, outdir: str, seed: int) -> int:
    from .hamiltonian import assemble
    from .spectral import eig_all
    t0 = time.perf_counter()
    model = build_model(cfg)
    grid = build_grid(cfg)
    basis = build_basis(cfg, grid)
    p = cfg.get("params", {})
    kappa = p.get("kappa", 0.1)
    if "kappa1" in p or "kappa2" in p:
        kappa = (p.get("kappa1", 0.0), p.get("kappa2", 0.0))
    theta = complex(p.get("theta_re", 0.0), p.get("theta_im", 0.0))
    h = assemble(model, grid, basis, kappa, theta, g=p.get("g", 1.0))
    spec = eig_all(h)
    rows = []
    cluster_of = {}
    for ci, cluster in enumerate(spec.clusters):
        for i in cluster:
            cluster_of[i] = (ci, len(cluster))
    for i, ev in enumerate(spec.eigenvalues):
        ci, mult = cluster_of[i]
        rows.append((i, float(ev.real), float(ev.imag),
                     float(spec.residuals[i]), ci, mult))
    write_csv(os.path.join(outdir, "spectrum.csv"), "spectrum", rows)
    manifest = make_manifest(cfg, "spectrum", seed, {
        "hamiltonian": h.params,
        "model_levels": [float(x) for x in model.levels],
        "model_multiplicities": [int(m) for m in model.multiplicities],
    })
    write_json(os.path.join(outdir, "manifest.json"), manifest)
    _write_timing(outdir, time.perf_counter() - t0)
    return EXIT_OK


def _scan_kappa(cfg: dict, outdir: str, seed: int) -> int:
    import numpy as np
    from .hamiltonian import DilatedHamiltonian, assemble
    from .spectral import make_seed, track_resonance
    model = build_model(cfg)
    grid = build_grid(cfg)
    basis = build_basis(cfg, grid)
    s = cfg.get("scan", {})
    level = s.get("level", 0)
    theta = complex(s.get("theta_re", 0.0), s.get("theta_im", 0.0))
    g = s.get("g", 1.0)
    perturbation = s.get("perturbation", 0.0)
    kappas = np.linspace(0.0, s.get("kappa_max", 0.3), s.get("n_points", 10))

    breaker = None
    if perturbation:
        if model.spin_value == 0.0:
            raise ConfigError("scan: perturbation control needs a spin model")
        breaker = perturbation * np.kron(model.spin[2], np.eye(basis.dim))

    def builder(kappa):
        h = assemble(model, grid, basis, kappa, theta, g=g)
        if breaker is None:
            return h
        return DilatedHamiltonian(matrix=h.dense() + breaker, params=h.params)

    seed_cluster = make_seed(model, basis, level)
    traj = track_resonance(builder, [(float(k),) for k in kappas], seed_cluster)
    rows = [(float(pt.point[0]), 0.0, theta.real, theta.imag,
             pt.energy.real, pt.energy.imag, pt.spread, pt.residual)
            for pt in traj.points]
    write_csv(os.path.join(outdir, "trajectory.csv"), "trajectory", rows)
    split = traj.max_spread() > 1e-5
    manifest = make_manifest(cfg, "scan", seed, {
        "scan_kind": "kappa", "level": level,
        "aborted": traj.aborted, "abort_reason": traj.abort_reason,
        "max_cluster_spread": traj.max_spread(),
        "cluster_split_detected": bool(split),
        "perturbation": perturbation,
        "model_levels": [float(x) for x in model.levels],
    })
    write_json(os.path.join(outdir, "manifest.json"), manifest)
    if traj.aborted:
        print(f"scan: {traj.abort_reason}", file=sys.stderr)
        return EXIT_NUMERICAL_ABORT
    return EXIT_OK


def _scan_theta(cfg: dict, outdir: str, seed: int) -> int:
    from .hamiltonian import assemble
    from .spectral import make_seed, theta_independence
    model = build_model(cfg)
    s = cfg.get("scan", {})
    level = s.get("level", 1)
    kappa = s.get("kappa", 0.1)
    g = s.get("g", 1.0)
    thetas = [complex(0.0, ti) for ti in s.get("thetas_im", [0.3, 0.4, 0.5])]
    n_radials = s.get("n_radials", [2, 4, 8])
    grid_cfg = {**GRID_DEFAULTS, **cfg.get("grid", {})}
    max_total = cfg.get("fock", {}).get("max_total", 2)

    from . import fock, modes
    dev_rows, traj_rows = [], []
    for n_rad in n_radials:
        grid = modes.build_mode_grid(n_rad, grid_cfg["r_max"],
                                     grid_cfg["group"], grid_cfg["Lambda"])
        basis = fock.build_fock_basis(grid, max_total)
        seed_cluster = make_seed(model, basis, level)
        builder = lambda th: assemble(model, grid, basis, kappa, th, g=g)
        dev, energies = theta_independence(builder, thetas, seed_cluster)
        dev_rows.append((n_rad, float(dev),
                         float(energies.real.mean()), float(energies.imag.mean())))
        for th, en in zip(thetas, energies):
            traj_rows.append((float(kappa), 0.0, th.real, th.imag,
                              en.real, en.imag, 0.0, 0.0))
    write_csv(os.path.join(outdir, "theta_deviation.csv"), "theta_deviation",
              dev_rows)
    write_csv(os.path.join(outdir, "trajectory.csv"), "trajectory", traj_rows)
    deviations = [r[1] for r in dev_rows]
    manifest = make_manifest(cfg, "scan", seed, {
        "scan_kind": "theta", "level": level,
        "deviations": deviations,
        "monotone_decrease": all(deviations[i] > deviations[i + 1]
                                 for i in range(len(deviations) - 1)),
        "model_levels": [float(x) for x in model.levels],
    })
    write_json(os.path.join(outdir, "manifest.json"), manifest)
    return EXIT_OK


def cmd_scan(cfg: dict, outdir: str, seed: int) -> int:
    t0 = time.perf_counter()
    kind = cfg.get("scan", {}).get("kind", "kappa")
    code = _scan_kappa(cfg, outdir, seed) if kind == "kappa" \
        else _scan_theta(cfg, outdir, seed)
    _write_timing(outdir, time.perf_counter() - t0)
    return code


def cmd_verify(cfg: dict, outdir: str, seed: int) -> int:
    import math
    import cmath
    import numpy as np
    from .atom import fine_structure_model, hydrogen_diagonal_model, spectral_gap
    from .checks import SUITES, run_suites
    from .spectral import resolvent_audit
    t0 = time.perf_counter()
    vcfg = cfg.get("verify", {})
    names = vcfg.get("suites", list(SUITES))
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ConfigError(f"verify: unknown suite {unknown[0]!r}")
    overrides = vcfg.get("tolerances", {})
    if "tolerance" in vcfg:
        from .checks import DEFAULTS
        overrides = {**{k: vcfg["tolerance"] for k in DEFAULTS
                        if k.endswith("_tol") or k.endswith("_gap")
                        or k.endswith("_rel")}, **overrides}
    results = run_suites(names, vcfg, seed=seed, overrides=overrides)
    all_pass = all(r.passed for r in results)

    # per-point resolvent audit block
    model = hydrogen_diagonal_model(1.0, 4)
    gap0 = spectral_gap(model, 0)
    qs = np.linspace(0.0, 40.0, 20)
    thetas = [tr + 1j * ti for tr in (-0.25, 0.25)
              for ti in np.linspace(-0.9, 0.9, 5)]
    zs = [r * cmath.exp(1j * phi) for r in (0.3, 0.72)
          for phi in np.linspace(0.0, 2 * math.pi, 5, endpoint=False)]
    audit_ground = resolvent_audit(model, gap0, "ground", thetas, zs, qs,
                                   theta0=1.0, rho=0.75)
    gap1 = spectral_gap(model, 1, epsilon=0.25)
    rho1 = 0.5 * gap1.delta / gap1.delta_check
    thetas1 = [0.05 + 1j * ti for ti in np.linspace(0.3, 0.9, 10)]
    zs1 = lambda th: [r * rho1 * math.sin(np.imag(th)) * cmath.exp(1j * phi)
                      for r in (0.4, 0.9)
                      for phi in np.linspace(0.0, 2 * math.pi, 5, endpoint=False)]
    audit_excited = resolvent_audit(model, gap1, "excited", thetas1, zs1, qs,
                                    theta0=1.0, rho=rho1)

    doc = {
        "all_pass": all_pass,
        "n_checks": len(results),
        "n_failed": sum(not r.passed for r in results),
        "checks": [r.to_dict() for r in results],
        "resolvent_audit": {"ground": audit_ground, "excited": audit_excited},
    }
    write_json(os.path.join(outdir, "verify.json"), doc)

    fs = fine_structure_model(vcfg.get("Z", 1.0), vcfg.get("beta", 1e-3),
                              vcfg.get("epsilon", 0.1))
    rows = [(float(fs.levels[i]), int(fs.multiplicities[i]),
             float(fs.labels[i]["l"]), float(fs.labels[i]["j"]))
            for i in range(len(fs.levels))]
    write_csv(os.path.join(outdir, "levels.csv"), "levels", rows)

    write_json(os.path.join(outdir, "manifest.json"),
               make_manifest(cfg, "verify", seed, {"suites": names}))
    _write_timing(outdir, time.perf_counter() - t0)
    for r in results:
        status = "pass" if r.passed else "FAIL"
        print(f"[{status}] {r.name}: measured={r.measured:.6g} "
              f"bound={r.bound:.6g}")
    return EXIT_OK if all_pass else EXIT_CHECK_FAILURE


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def main(argv=None) -> int:
    _apply_thread_cap()
    parser = argparse.ArgumentParser(
        prog="dilres",
        description="Spectra and resonance continuation for dipole-coupled "
                    "atom-photon models under complex dilation.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("spectrum", "scan", "verify"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG_ERROR
    os.makedirs(args.out, exist_ok=True)
    try:
        if args.command == "spectrum":
            return cmd_spectrum(cfg, args.out, args.seed)
        if args.command == "scan":
            return cmd_scan(cfg, args.out, args.seed)
        return cmd_verify(cfg, args.out, args.seed)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except Exception as exc:
        print(f"{args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_ABORT


if __name__ == "__main__":
    sys.exit(main())

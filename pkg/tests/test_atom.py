import json
import math

import numpy as np
import pytest

from dilres import atom
from dilres.atom import (AtomError, GridResolutionError, fine_structure_model,
                         hydrogen_grid, hydrogen_level_set, hydrogen_levels,
                         labeled_basis, make_atom_model, model_from_json,
                         model_to_json, nu_epsilon, radial_grid, rescaled_atom,
                         spectral_gap, spin_matrices, toy_sp_shell,
                         toy_spin_half, toy_two_level, uncertainty_probe)

RNG = np.random.default_rng(5)


class TestHydrogenOracle:
    def test_ground_state_energy(self):
        grid = hydrogen_grid(1.0, n_shell=2)
        vals, vecs = hydrogen_levels(1.0, 0, 2, grid)
        assert abs(vals[0] - (-0.25)) < 1e-4
        assert abs(vals[1] - (-0.0625)) < 1e-4

    def test_accidental_degeneracy_l0_l1(self):
        grid = hydrogen_grid(1.0, n_shell=2)
        v0, _ = hydrogen_levels(1.0, 0, 2, grid)
        v1, _ = hydrogen_levels(1.0, 1, 1, grid)
        assert abs(v0[1] - (-0.0625)) < 1e-4
        assert abs(v1[0] - (-0.0625)) < 1e-4

    def test_z_scaling(self):
        g1 = hydrogen_grid(1.0)
        g2 = hydrogen_grid(2.0)
        e1, _ = hydrogen_levels(1.0, 0, 1, g1)
        e2, _ = hydrogen_levels(2.0, 0, 1, g2)
        assert abs(e2[0] / e1[0] - 4.0) < 1e-3

    def test_second_order_convergence(self):
        # halving h divides the eigenvalue error by about four
        errs = []
        for h in (0.08, 0.04, 0.02):
            grid = radial_grid(120.0, h)
            vals, _ = hydrogen_levels(1.0, 0, 1, grid)
            errs.append(abs(vals[0] + 0.25))
        assert 3.0 < errs[0] / errs[1] < 5.0
        assert 3.0 < errs[1] / errs[2] < 5.0

    def test_refine_check_passes_on_fine_grid(self):
        grid = hydrogen_grid(1.0)
        hydrogen_levels(1.0, 0, 2, grid, refine_check=True)

    def test_refine_check_flags_coarse_grid(self):
        grid = radial_grid(30.0, 1.0)
        with pytest.raises(GridResolutionError):
            hydrogen_levels(1.0, 0, 3, grid, refine_check=True)

    def test_analytic_level_set(self):
        assert np.allclose(hydrogen_level_set(1.0, 3),
                           [-0.25, -0.0625, -1.0 / 36.0])


class TestNuEpsilon:
    def test_plateau_and_tail(self):
        eps = 0.2
        assert nu_epsilon(2 * eps, eps) == pytest.approx((2 * eps) ** -3, rel=1e-15)
        assert nu_epsilon(eps / 2, eps) == pytest.approx(eps ** -3, rel=1e-15)
        assert nu_epsilon(0.0, eps) == pytest.approx(eps ** -3, rel=1e-15)

    def test_monotone_and_continuous(self):
        eps = 0.3
        r = np.linspace(0.0, 2.0, 1001)
        v = nu_epsilon(r, eps)
        assert np.all(np.diff(v) <= 0)
        assert abs(nu_epsilon(eps - 1e-12, eps) - nu_epsilon(eps + 1e-12, eps)) < 1e-6

    def test_rejects_bad_epsilon(self):
        with pytest.raises(AtomError):
            nu_epsilon(1.0, 0.0)


class TestUncertaintyProbe:
    def test_bump_at_large_radius(self):
        grid = radial_grid(40.0, 0.01)
        u = np.exp(-((grid.r - 30.0) ** 2))
        u[np.abs(grid.r - 30.0) > 5.0] = 0.0
        lhs, rhs = uncertainty_probe(u, grid)
        assert lhs < rhs / 100

    def test_channel_function(self):
        grid = radial_grid(40.0, 0.005)
        u = grid.r * np.exp(-grid.r)
        u[:2] = 0.0
        u[grid.r > 30.0] = 0.0
        lhs, rhs = uncertainty_probe(u, grid)
        assert lhs <= rhs * (1 + 1e-6)

    def test_random_smooth_functions(self):
        grid = radial_grid(20.0, 0.01)
        for _ in range(20):
            c = RNG.uniform(5.0, 15.0)
            w = RNG.uniform(0.5, 3.0)
            p = RNG.integers(0, 3)
            u = (grid.r ** p) * np.exp(-((grid.r - c) / w) ** 2)
            u[np.abs(grid.r - c) > 4 * w] = 0.0
            u[:2] = 0.0
            u[-2:] = 0.0
            lhs, rhs = uncertainty_probe(u, grid)
            assert lhs <= rhs * (1 + 1e-9)

    def test_rejects_boundary_support(self):
        grid = radial_grid(10.0, 0.1)
        u = np.ones_like(grid.r)
        with pytest.raises(AtomError):
            uncertainty_probe(u, grid)


class TestModelContainer:
    def test_spin_bracket_convention(self):
        s = spin_matrices(0.5)
        assert np.allclose(s, atom.PAULI / 2)
        for sval in (0.0, 0.5, 1.0, 1.5):
            m = spin_matrices(sval)
            for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
                comm = m[a] @ m[b] - m[b] @ m[a]
                assert np.linalg.norm(comm - 1j * m[c]) < 1e-12

    def test_rejects_non_hermitian(self):
        with pytest.raises(AtomError):
            make_atom_model(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_levels_and_multiplicities(self):
        m = make_atom_model(np.diag([0.0, 0.0, 1.0]))
        assert np.allclose(m.levels, [0.0, 1.0])
        assert list(m.multiplicities) == [2, 1]
        assert int(m.multiplicities.sum()) == m.dim


class TestSpectralGap:
    def test_hydrogen_like_gaps(self):
        m = make_atom_model(np.diag([-0.25, -0.0625, 0.0]))
        g0 = spectral_gap(m, 0)
        assert abs(g0.delta - 0.1875) < 1e-14
        assert g0.delta_check == g0.delta
        g1 = spectral_gap(m, 1, epsilon=0.3)
        assert abs(g1.delta - 0.0625) < 1e-14
        assert abs(g1.delta_check - 0.0625 * math.sin(0.3) / 2) < 1e-15
        assert abs(g1.tau + math.log(g1.delta_check)) < 1e-12

    def test_degenerate_level_counted_once(self):
        m = make_atom_model(np.diag([0.0, 0.0, 1.0]))
        assert spectral_gap(m, 0).delta == 1.0

    def test_single_level_rejected(self):
        m = make_atom_model(np.eye(3))
        with pytest.raises(AtomError):
            spectral_gap(m, 0)


class TestRescaledAtom:
    def test_diagonal_example(self):
        m = make_atom_model(np.diag([0.0, 1.0]))
        gap = spectral_gap(m, 0)
        h = rescaled_atom(m, gap, 0.0)
        assert np.array_equal(h, np.diag([0.0, 1.0]).astype(complex))

    def test_theta_rotates_nonzero_eigenvalues(self):
        m = make_atom_model(np.diag([0.0, 1.0]))
        gap = spectral_gap(m, 0)
        h = rescaled_atom(m, gap, 1j * math.pi / 4)
        assert abs(h[1, 1] - np.exp(1j * math.pi / 4)) < 1e-15

    def test_kernel_property_exact_for_diagonal(self):
        m = make_atom_model(np.diag([-0.25, -0.0625, 0.0]))
        gap = spectral_gap(m, 1, epsilon=0.3)
        h = rescaled_atom(m, gap, 0.1 + 0.2j)
        p = m.level_projector(1)
        assert np.linalg.norm(h @ p) == 0.0

    def test_spectrum_is_affine_map(self):
        hmat = np.diag([-0.25, -0.0625, 0.0]) + 0.0j
        u = np.linalg.qr(RNG.standard_normal((3, 3)))[0]
        m = make_atom_model(u @ hmat @ u.conj().T)
        gap = spectral_gap(m, 0)
        theta = 0.3 + 0.2j
        h = rescaled_atom(m, gap, theta)
        got = np.sort_complex(np.linalg.eigvals(h))
        want = np.sort_complex(np.exp(theta) / gap.delta_check *
                               (np.array([-0.25, -0.0625, 0.0]) + 0.25))
        assert np.allclose(got, want, atol=1e-12)
        p = m.level_projector(0)
        assert np.linalg.norm(h @ p) < 1e-13


@pytest.fixture(scope="module")
def model():
    return fine_structure_model(1.0, 1e-3, 0.1)


class TestFineStructure:
    def test_three_levels_multiplicities(self, model):
        assert len(model.levels) == 3
        assert list(model.multiplicities) == [2, 2, 4]

    def test_shift_pattern(self, model):
        beta, c_r = model.beta, model.c_r
        shifts = (model.levels - model.shell_energy) / (beta * c_r / 2.0)
        order = np.argsort(shifts)
        assert np.allclose(shifts[order], [-2.0, 0.0, 1.0], atol=1e-9)

    def test_ls_block_eigenvalues(self, model):
        # L.S on (l=1, j=3/2) block: +l/... = c_G * l with c_G = 1/2 folded out
        labels = {(lab["l"], lab["j"]): lab for lab in model.labels}
        assert labels[(1.0, 1.5)]["multiplicity"] == 4
        assert labels[(1.0, 0.5)]["multiplicity"] == 2
        assert labels[(0.0, 0.5)]["multiplicity"] == 2
        shifts = {(lab["l"], lab["j"]):
                  (model.levels[i] - model.shell_energy) / (model.beta * model.c_r)
                  for i, lab in enumerate(model.labels)}
        assert abs(shifts[(1.0, 1.5)] - 0.5) < 1e-9    # c_G * l, l = 1
        assert abs(shifts[(1.0, 0.5)] - (-1.0)) < 1e-9  # -c_G (l + 1)
        assert abs(shifts[(0.0, 0.5)]) < 1e-9

    def test_splitting_ratio_one_half(self, model):
        lookup = {(lab["l"], lab["j"]): model.levels[i]
                  for i, lab in enumerate(model.labels)}
        num = lookup[(1.0, 1.5)] - lookup[(0.0, 0.5)]
        den = lookup[(0.0, 0.5)] - lookup[(1.0, 0.5)]
        assert abs(num / den - 0.5) < 1e-9

    def test_c_r_against_analytic_wavefunction(self, model):
        # u_21 ~ r^2 e^{-r/4}: independent quadrature of the closed form
        r = np.linspace(1e-6, 300.0, 600001)
        u2 = r ** 4 * np.exp(-r / 2.0)
        c_r = np.trapezoid(u2 * nu_epsilon(r, 0.1), r) / np.trapezoid(u2, r)
        assert abs(model.c_r - c_r) / c_r < 1e-3

    def test_labeled_basis_m_j_content(self, model):
        vecs, labels = labeled_basis(model)
        assert np.linalg.norm(vecs.conj().T @ vecs - np.eye(8)) < 1e-12
        mj_by_block = {}
        for lab in labels:
            mj_by_block.setdefault((lab["l"], lab["j"]), []).append(lab["m_j"])
        assert sorted(mj_by_block[(1.0, 1.5)]) == [-1.5, -0.5, 0.5, 1.5]
        assert sorted(mj_by_block[(1.0, 0.5)]) == [-0.5, 0.5]
        assert sorted(mj_by_block[(0.0, 0.5)]) == [-0.5, 0.5]


class TestBuiltinsAndJson:
    def test_toys_have_expected_structure(self):
        t2 = toy_two_level()
        assert t2.dim == 2 and t2.spin_value == 0.0
        th = toy_spin_half()
        assert th.dim == 4 and list(th.multiplicities) == [2, 2]
        sp = toy_sp_shell()
        assert sp.dim == 8 and list(th.multiplicities) == [2, 2]

    def test_json_round_trip(self):
        m = toy_sp_shell(mu=0.7)
        m2 = model_from_json(model_to_json(m))
        assert np.allclose(m2.h_el, m.h_el)
        assert np.allclose(m2.dipole, m.dipole)
        assert np.allclose(m2.spin, m.spin)
        assert m2.orbital_blocks == ((0, 1), (1, 3))
        doc = json.loads(model_to_json(m))
        assert doc["units"] == "4Ry=1"

    def test_json_rejects_other_units(self):
        doc = json.loads(model_to_json(toy_two_level()))
        doc["units"] = "hartree"
        with pytest.raises(AtomError):
            model_from_json(json.dumps(doc))

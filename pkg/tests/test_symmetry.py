import math

import numpy as np
import pytest

from dilres.atom import (PAULI, make_atom_model, fine_structure_model,
                         toy_spin_half, toy_two_level, toy_sp_shell)
from dilres.fock import build_fock_basis, field_energy, second_quantize
from dilres.modes import build_mode_grid, octahedral_rotations
from dilres.numutil import random_hermitian, random_su2, random_unitary
from dilres.symmetry import (OperatorPart, SymmetryError, atom_rotation,
                             check_symmetry, irreducibility_check,
                             kramers_check, rotate_photon_modes,
                             su2_octahedral_generators, su2_to_so3,
                             time_reversal_electron, time_reversal_photon)

RNG = np.random.default_rng(23)


class TestOperatorPart:
    def test_antilinear_adjoint_relation(self):
        # <x, T y> = conj(<T* x, y>)
        for _ in range(10):
            m = random_unitary(4, RNG)
            t = OperatorPart(m, antilinear=True)
            x = RNG.standard_normal(4) + 1j * RNG.standard_normal(4)
            y = RNG.standard_normal(4) + 1j * RNG.standard_normal(4)
            lhs = np.vdot(x, t.apply(y))
            rhs = np.conj(np.vdot(t.adjoint().apply(x), y))
            assert abs(lhs - rhs) < 1e-12

    def test_composition_flags(self):
        m = random_unitary(3, RNG)
        t = OperatorPart(m, antilinear=True)
        u = OperatorPart(random_unitary(3, RNG), antilinear=False)
        assert t.compose(t).antilinear is False
        assert t.compose(u).antilinear is True
        v = RNG.standard_normal(3) + 1j * RNG.standard_normal(3)
        assert np.allclose(t.compose(u).apply(v), t.apply(u.apply(v)))


class TestSu2ToSo3:
    def test_identity(self):
        assert np.allclose(su2_to_so3(np.eye(2)), np.eye(3), atol=1e-14)

    def test_quarter_turn_about_z(self):
        # U = exp(-i phi sigma_3 / 2) maps to the rotation by phi about e3
        phi = math.pi / 2
        u = math.cos(phi / 2) * np.eye(2) - 1j * math.sin(phi / 2) * PAULI[2]
        expected = np.array([[0.0, -1.0, 0], [1.0, 0.0, 0], [0, 0, 1.0]])
        assert np.allclose(su2_to_so3(u), expected, atol=1e-14)

    def test_double_cover(self):
        for _ in range(10):
            u = random_su2(RNG)
            assert np.allclose(su2_to_so3(u), su2_to_so3(-u), atol=1e-13)

    def test_homomorphism_and_orthogonality(self):
        for _ in range(15):
            u, v = random_su2(RNG), random_su2(RNG)
            pu, pv, puv = su2_to_so3(u), su2_to_so3(v), su2_to_so3(u @ v)
            assert np.linalg.norm(puv - pu @ pv) < 1e-10
            assert np.linalg.norm(pu @ pu.T - np.eye(3)) < 1e-12
            assert abs(np.linalg.det(pu) - 1.0) < 1e-12

    def test_rejects_non_unitary(self):
        with pytest.raises(SymmetryError):
            su2_to_so3(np.diag([1.0, 2.0]))

    def test_octahedral_generators_map_to_quarter_turns(self):
        gens = su2_octahedral_generators()
        octa = {tuple(np.round(r, 9).flatten()) for r in octahedral_rotations()}
        for u in gens.values():
            assert tuple(np.round(su2_to_so3(u), 9).flatten()) in octa


@pytest.fixture(scope="module")
def grid():
    return build_mode_grid(2, 1.5, "octahedral", 1.0)


class TestRotatePhotonModes:
    def test_identity_rotation(self, grid):
        m = rotate_photon_modes(np.eye(3), grid)
        assert np.allclose(m, np.eye(grid.n_modes), atol=1e-14)

    def test_unitary_and_block_orthogonal(self, grid):
        for rot in octahedral_rotations()[:8]:
            m = rotate_photon_modes(rot, grid)
            assert np.linalg.norm(m.T @ m - np.eye(grid.n_modes)) < 1e-12
            # per target (k, radius) the 2x2 polarization block is orthogonal
            nz = np.nonzero(m)
            for rad in range(2):
                for a in range(6):
                    rows = [grid.mode_index(rad, a, lam) for lam in (1, 2)]
                    block = m[rows][:, np.any(m[rows] != 0, axis=0)]
                    assert block.shape == (2, 2)
                    assert np.linalg.norm(block.T @ block - np.eye(2)) < 1e-12

    def test_representation_property_brute_force(self, grid):
        rots = octahedral_rotations()
        for _ in range(12):
            r1, r2 = rots[RNG.integers(24)], rots[RNG.integers(24)]
            m1 = rotate_photon_modes(r1, grid)
            m2 = rotate_photon_modes(r2, grid)
            m12 = rotate_photon_modes(r1 @ r2, grid)
            assert np.linalg.norm(m1 @ m2 - m12) < 1e-12

    def test_commutes_with_field_energy(self, grid):
        basis = build_fock_basis(grid, 1)
        hf = field_energy(basis, grid).dense()
        for rot in octahedral_rotations()[:4]:
            g = second_quantize(rotate_photon_modes(rot, grid), basis).dense()
            assert np.linalg.norm(g @ hf - hf @ g) <= 1e-12

    def test_rejects_non_preserving_rotation(self, grid):
        c, s = math.cos(0.3), math.sin(0.3)
        rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])
        with pytest.raises(Exception):
            rotate_photon_modes(rot, grid)


class TestTimeReversalPhoton:
    def test_squares_to_identity(self, grid):
        k, minus_k = time_reversal_photon(grid)
        assert np.linalg.norm(k.square() - np.eye(grid.n_modes)) < 1e-12
        assert np.linalg.norm(minus_k.square() - np.eye(grid.n_modes)) < 1e-12

    def test_antiunitary_norm_preserving(self, grid):
        k, _ = time_reversal_photon(grid)
        for _ in range(10):
            h = RNG.standard_normal(grid.n_modes) + 1j * RNG.standard_normal(grid.n_modes)
            assert abs(np.linalg.norm(k.apply(h)) - np.linalg.norm(h)) < 1e-12

    def test_vacuum_invariant(self, grid):
        _, minus_k = time_reversal_photon(grid)
        basis = build_fock_basis(grid, 1)
        g = second_quantize(minus_k.matrix, basis).dense()
        vac = np.zeros(basis.dim)
        vac[0] = 1.0
        assert np.allclose(g @ vac, vac, atol=1e-14)


class TestTimeReversalElectron:
    def test_squares(self):
        t = time_reversal_electron(toy_spin_half())
        assert np.linalg.norm(t.square() + np.eye(4)) < 1e-14  # (-1)^{2s}, s=1/2
        t0 = time_reversal_electron(toy_two_level())
        assert np.linalg.norm(t0.square() - np.eye(2)) < 1e-14

    def test_flips_spin(self):
        model = toy_spin_half()
        t = time_reversal_electron(model)
        for a in range(3):
            got = t.sandwich(model.spin[a])
            assert np.linalg.norm(got + model.spin[a]) < 1e-14

    def test_requires_structure(self):
        bare = make_atom_model(np.diag([0.0, 1.0]), spin_value=0.5)
        with pytest.raises(SymmetryError):
            time_reversal_electron(bare)


class TestCheckSymmetry:
    def test_real_diagonal_conjugation(self):
        h = np.diag([1.0, 2.0, 3.0]).astype(complex)
        s = OperatorPart(np.eye(3), antilinear=True)
        assert check_symmetry(h, s) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(SymmetryError):
            check_symmetry(np.eye(3), OperatorPart(np.eye(2)))


class TestKramers:
    def _random_trs_hamiltonian(self, n_orb, rng):
        t = OperatorPart(np.kron(np.eye(n_orb), -PAULI[1]), antilinear=True)
        h0 = random_hermitian(2 * n_orb, rng)
        return (h0 + t.sandwich(h0).conj().T + t.sandwich(h0) + h0.conj().T) / 4, t

    def test_random_audit_even_multiplicities(self):
        rng = np.random.default_rng(123)
        for _ in range(50):
            h, t = self._random_trs_hamiltonian(5, rng)
            rep = kramers_check(h, t)
            assert rep.passed
            assert all(m % 2 == 0 for m in rep.multiplicities)
            assert rep.max_pair_gap <= 1e-10
            assert rep.max_self_overlap <= 1e-12

    def test_diagonal_embedded_pairing(self):
        h = np.kron(np.diag([0.3, 1.7]), np.eye(2))
        t = OperatorPart(np.kron(np.eye(2), -PAULI[1]), antilinear=True)
        rep = kramers_check(h, t)
        assert rep.passed and rep.max_self_overlap <= 1e-12

    def test_refuses_broken_symmetry(self):
        h, t = self._random_trs_hamiltonian(3, np.random.default_rng(7))
        h = h + 0.1 * np.kron(np.eye(3), PAULI[2])  # breaks T
        with pytest.raises(SymmetryError):
            kramers_check(h, t)


class TestIrreducibility:
    def test_spin_half_doublet(self):
        gens = [OperatorPart(np.cos(0.5) * np.eye(2) - 1j * np.sin(0.5) * PAULI[a])
                for a in range(3)]
        dim = irreducibility_check(gens, np.eye(2))
        assert dim == 1

    def test_identity_only(self):
        dim = irreducibility_check([OperatorPart(np.eye(2))], np.eye(2))
        assert dim == 4

    def test_fine_structure_j32_block(self):
        model = fine_structure_model(1.0, 1e-3, 0.1)
        j32 = int(np.argmax(model.multiplicities))
        q = model.level_vectors(j32)
        gens = []
        for _ in range(20):
            u = random_su2(RNG)
            gens.append(OperatorPart(atom_rotation(model, u)))
        assert irreducibility_check(gens, q, invariance_tol=1e-7) == 1

    def test_reducible_sum(self):
        # two copies of the trivial rep: commutant is the full 2x2 algebra
        gens = [OperatorPart(np.eye(2))]
        assert irreducibility_check(gens, np.eye(2)) == 4

    def test_rejects_non_invariant_subspace(self):
        q = np.array([[1.0], [0.0]])
        gens = [OperatorPart(np.array([[0.0, 1.0], [1.0, 0.0]]) + 0j)]
        with pytest.raises(SymmetryError):
            irreducibility_check(gens, q)


class TestAtomRotationCovariance:
    def test_dipole_vector_covariance(self):
        model = toy_sp_shell(mu=0.8)
        for _ in range(10):
            u = random_su2(RNG)
            rot = su2_to_so3(u)
            r = atom_rotation(model, u, rot)
            assert np.linalg.norm(r.conj().T @ r - np.eye(8)) < 1e-12
            for a in range(3):
                lhs = r @ model.dipole[a] @ r.conj().T
                rhs = sum(rot[c, a] * model.dipole[c] for c in range(3))
                assert np.linalg.norm(lhs - rhs) < 1e-12

    def test_spin_covariance_and_hamiltonian_invariance(self):
        model = toy_sp_shell()
        for _ in range(10):
            u = random_su2(RNG)
            rot = su2_to_so3(u)
            r = atom_rotation(model, u, rot)
            assert np.linalg.norm(r @ model.h_el @ r.conj().T - model.h_el) < 1e-12
            for a in range(3):
                lhs = r @ model.spin[a] @ r.conj().T
                rhs = sum(rot[c, a] * model.spin[c] for c in range(3))
                assert np.linalg.norm(lhs - rhs) < 1e-12


def test_symmetry_report_json():
    import json
    from dilres.symmetry import symmetry_report_json
    doc = json.loads(symmetry_report_json("T", 1e-12, (2, 2, 4), 1))
    assert doc["label"] == "T"
    assert doc["residual"] == 1e-12
    assert doc["multiplicity_table"] == [2, 2, 4]
    assert doc["commutant_dim"] == 1

import math

import numpy as np
import pytest
from scipy.linalg import expm

from circuit_engine import StateVector
from ising_model import (
    Boundary,
    CapacityError,
    ModelParams,
    Parity,
    apply_creation,
    build_hamiltonian,
    exact_evolve,
    exact_ground_state,
    four_fermion_identity_check,
    hamiltonian_terms,
    jw_annihilation,
    jw_creation,
    momentum_grid,
    number_operator,
    pauli_matrix,
)


def cyclic_shift(n_sites):
    """Permutation moving the bit on qubit q to qubit q + 1 (mod N)."""
    dim = 2 ** n_sites
    shift = np.zeros((dim, dim))
    for index in range(dim):
        shifted = ((index << 1) | (index >> (n_sites - 1))) & (dim - 1)
        shift[shifted, index] = 1
    return shift


class TestModelParams:
    def test_rejects_single_site(self):
        with pytest.raises(ValueError):
            ModelParams(1)

    def test_boundary_coerced_from_string(self):
        assert ModelParams(4, boundary="open").boundary == Boundary.OPEN

    def test_bonds(self):
        assert ModelParams(4).bonds() == [(0, 1), (1, 2), (2, 3), (3, 0)]
        assert ModelParams(4, boundary="open").bonds() == [(0, 1), (1, 2), (2, 3)]
        assert ModelParams(2).bonds() == [(0, 1)]

    def test_dict_round_trip(self):
        params = ModelParams(6, 0.4, 1.0, 0.05, "open")
        assert ModelParams.from_dict(params.to_dict()) == params


class TestHamiltonian:
    def test_hermitian(self):
        hamiltonian = build_hamiltonian(ModelParams(5, 0.4, 1.0, 0.1))
        assert hamiltonian.shape == (32, 32)
        np.testing.assert_allclose(hamiltonian, hamiltonian.conj().T, atol=1e-14)

    def test_zero_couplings_give_zero_operator(self):
        params = ModelParams(3, 0.0, 0.0, 0.0)
        assert hamiltonian_terms(params) == []
        assert not np.any(build_hamiltonian(params))

    def test_field_only_ground_state_is_empty_lattice(self):
        energy, state = exact_ground_state(ModelParams(2, 0.0, 1.0, 0.0))
        assert energy == pytest.approx(-2.0)
        assert abs(state.amplitudes[0]) == pytest.approx(1.0)

    def test_two_site_periodic_counts_bond_once(self):
        periodic = build_hamiltonian(ModelParams(2, 0.7, 1.0, 0.2, "periodic"))
        open_chain = build_hamiltonian(ModelParams(2, 0.7, 1.0, 0.2, "open"))
        np.testing.assert_allclose(periodic, open_chain)

    def test_pure_hopping_spectrum(self):
        eigenvalues = np.linalg.eigvalsh(build_hamiltonian(ModelParams(2, 1.0, 0.0, 0.0)))
        np.testing.assert_allclose(eigenvalues, [-1, -1, 1, 1], atol=1e-12)

    def test_periodic_chain_is_translation_invariant(self):
        hamiltonian = build_hamiltonian(ModelParams(5, 0.4, 1.0, 0.1))
        shift = cyclic_shift(5)
        np.testing.assert_allclose(shift @ hamiltonian, hamiltonian @ shift, atol=1e-12)

    def test_capacity_enforced(self):
        with pytest.raises(CapacityError):
            build_hamiltonian(ModelParams(13, 0.4))

    def test_pauli_matrix_little_endian(self):
        # Z on qubit 0 flips the sign of odd basis indices
        np.testing.assert_allclose(pauli_matrix("ZI").diagonal(), [1, -1, 1, -1])


class TestJordanWigner:
    N = 4

    def test_canonical_anticommutation(self):
        n = self.N
        identity = np.eye(2 ** n)
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                ci, cj_dag = jw_annihilation(i, n), jw_creation(j, n)
                np.testing.assert_allclose(ci @ cj_dag + cj_dag @ ci, identity * (i == j), atol=1e-12)
                cj = jw_annihilation(j, n)
                np.testing.assert_allclose(ci @ cj + cj @ ci, 0, atol=1e-12)

    def test_creation_on_vacuum(self):
        n = self.N
        for site in range(1, n + 1):
            column = jw_creation(site, n)[:, 0]
            expected = np.zeros(2 ** n)
            expected[1 << (site - 1)] = (-1) ** (site - 1)
            np.testing.assert_allclose(column, expected)

    def test_number_operator_matches_pauli_form(self):
        n = self.N
        for site in range(1, n + 1):
            z = pauli_matrix("".join("Z" if q == site - 1 else "I" for q in range(n))).toarray()
            np.testing.assert_allclose(number_operator(site, n), (np.eye(2 ** n) - z) / 2, atol=1e-12)

    def test_matrix_free_creation_matches_dense(self):
        n = 5
        state = StateVector.random(n, np.random.default_rng(1))
        for site in range(1, n + 1):
            np.testing.assert_allclose(
                apply_creation(state.amplitudes, site, n),
                jw_creation(site, n) @ state.amplitudes,
                atol=1e-12,
            )

    def test_matrix_free_creation_passes_extra_qubits_through(self):
        n = 3
        state = StateVector.random(n, np.random.default_rng(2))
        wide = state.extend(2)
        out = apply_creation(wide.amplitudes, 2, n)
        np.testing.assert_allclose(out[: 2 ** n], apply_creation(state.amplitudes, 2, n), atol=1e-12)
        assert not np.any(out[2 ** n:])

    def test_site_out_of_range(self):
        with pytest.raises(IndexError):
            apply_creation(np.zeros(8, dtype=complex), 4, 3)

    @pytest.mark.parametrize("n_sites,boundary", [(2, "periodic"), (4, "periodic"), (5, "open"), (6, "periodic")])
    def test_four_fermion_identity(self, n_sites, boundary):
        assert four_fermion_identity_check(n_sites, Boundary(boundary)) < 1e-12


class TestMomentumGrid:
    def test_grids_for_four_sites(self):
        np.testing.assert_allclose(momentum_grid(4, Parity.ODD).values, [-np.pi / 2, 0, np.pi / 2, np.pi])
        np.testing.assert_allclose(
            momentum_grid(4, Parity.EVEN).values, [-3 * np.pi / 4, -np.pi / 4, np.pi / 4, 3 * np.pi / 4]
        )

    def test_packet_momentum_lies_on_sixteen_site_grid(self):
        values = momentum_grid(16, "even").values
        assert len(values) == 16
        assert any(math.isclose(v, 7 * np.pi / 16) for v in values)
        assert all(-np.pi < v <= np.pi for v in values)

    def test_odd_lattice_rejected(self):
        with pytest.raises(ValueError):
            momentum_grid(5, Parity.ODD)


class TestExactSolver:
    def test_ground_state_is_lowest_eigenpair(self):
        params = ModelParams(6, 0.4, 1.0, 0.05, "open")
        energy, state = exact_ground_state(params)
        hamiltonian = build_hamiltonian(params)
        assert energy == pytest.approx(np.linalg.eigvalsh(hamiltonian)[0], abs=1e-10)
        rayleigh = np.vdot(state.amplitudes, hamiltonian @ state.amplitudes).real
        assert rayleigh == pytest.approx(energy, abs=1e-10)

    def test_ground_state_phase_convention(self):
        _, state = exact_ground_state(ModelParams(4, 0.6, 1.0, 0.1))
        pivot = state.amplitudes[np.argmax(np.abs(state.amplitudes))]
        assert abs(pivot.imag) < 1e-14
        assert pivot.real > 0

    def test_exact_evolution_matches_expm(self):
        params = ModelParams(4, 0.4, 1.0, 0.1)
        state = StateVector.random(4, np.random.default_rng(6))
        expected = expm(-1j * 0.7 * build_hamiltonian(params)) @ state.amplitudes
        np.testing.assert_allclose(exact_evolve(state, params, 0.7).amplitudes, expected, atol=1e-10)

    def test_width_mismatch(self):
        with pytest.raises(ValueError):
            exact_evolve(StateVector.zero(3), ModelParams(4), 1.0)

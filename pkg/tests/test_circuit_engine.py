import math

import numpy as np
import pytest
from qiskit.quantum_info import Operator
from scipy.linalg import expm

from circuit_engine import (
    Circuit,
    Gate,
    GateKind,
    PostSelectionError,
    QubitRole,
    StateVector,
    UnexportableGateError,
    apply_circuit,
    apply_gate,
    circuit_unitary,
    cnot_depth,
    decompose_toffoli,
    expectation_pauli,
    export_qasm,
    load_qasm,
    project_ancilla,
    qasm_state_fidelity,
    reduce_register,
    serial_cnot_count,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"I": np.eye(2), "X": X, "Y": Y, "Z": Z}


def dense_embed(matrix, qubits, n):
    """Full 2^n matrix of a local gate, built entry by entry."""
    k = len(qubits)
    dim = 2 ** n
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        local_in = sum(((col >> q) & 1) << (k - 1 - pos) for pos, q in enumerate(qubits))
        rest = col
        for q in qubits:
            rest &= ~(1 << q)
        for local_out in range(2 ** k):
            row = rest
            for pos, q in enumerate(qubits):
                if (local_out >> (k - 1 - pos)) & 1:
                    row |= 1 << q
            full[row, col] += matrix[local_out, local_in]
    return full


def assert_equal_up_to_phase(actual, expected, atol=1e-10):
    pivot = np.unravel_index(np.argmax(np.abs(expected)), expected.shape)
    phase = actual[pivot] / expected[pivot]
    assert abs(abs(phase) - 1) < atol
    np.testing.assert_allclose(actual, phase * expected, atol=atol)


ALL_KINDS = list(GateKind)
ARITY = {GateKind.TOFFOLI: 3, GateKind.RXX: 2, GateKind.RYY: 2, GateKind.RZZ: 2,
         GateKind.CNOT: 2, GateKind.GIVENS: 2}
ANGLED = {GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.RXX, GateKind.RYY,
          GateKind.RZZ, GateKind.GIVENS}


def random_gate(rng, n):
    kind = ALL_KINDS[int(rng.integers(len(ALL_KINDS)))]
    qubits = tuple(int(q) for q in rng.choice(n, size=ARITY.get(kind, 1), replace=False))
    angle = float(rng.uniform(-np.pi, np.pi)) if kind in ANGLED else 0.0
    return Gate(kind, qubits, angle)


class TestGateMatrices:
    @pytest.mark.parametrize("kind,pauli", [
        (GateKind.RX, X), (GateKind.RY, Y), (GateKind.RZ, Z),
        (GateKind.RXX, np.kron(X, X)), (GateKind.RYY, np.kron(Y, Y)), (GateKind.RZZ, np.kron(Z, Z)),
    ])
    def test_rotations_follow_half_angle_convention(self, kind, pauli):
        theta = 0.737
        qubits = (0,) if pauli.shape[0] == 2 else (0, 1)
        np.testing.assert_allclose(
            Gate(kind, qubits, theta).matrix(), expm(-0.5j * theta * pauli), atol=1e-12
        )

    def test_givens_matches_generator(self):
        theta = 1.1
        generator = np.kron(X, Y) - np.kron(Y, X)
        np.testing.assert_allclose(
            Gate(GateKind.GIVENS, (0, 1), theta).matrix(), expm(0.5j * theta * generator), atol=1e-12
        )

    def test_givens_rotates_single_excitation(self):
        theta = 0.4
        # local index 2 is |10>: excitation on the first listed qubit
        column = Gate(GateKind.GIVENS, (0, 1), theta).matrix()[:, 2]
        np.testing.assert_allclose(column, [0, -math.sin(theta), math.cos(theta), 0], atol=1e-12)

    def test_inverse_negates_rotation_angle(self):
        gate = Gate(GateKind.GIVENS, (2, 3), 0.3)
        np.testing.assert_allclose(gate.inverse().matrix() @ gate.matrix(), np.eye(4), atol=1e-12)
        assert Gate(GateKind.CNOT, (0, 1)).inverse() == Gate(GateKind.CNOT, (0, 1))

    def test_invalid_gates_rejected(self):
        with pytest.raises(ValueError):
            Gate(GateKind.CNOT, (1, 1))
        with pytest.raises(ValueError):
            Gate(GateKind.TOFFOLI, (0, 1))
        with pytest.raises(ValueError):
            Gate(GateKind.H, (0,), 0.5)


class TestStatevector:
    def test_little_endian_ordering(self):
        state = apply_gate(StateVector.zero(2), Gate(GateKind.X, (0,)))
        assert abs(state.amplitudes[1] - 1) < 1e-12

    def test_bell_state(self):
        circuit = Circuit(2, (Gate(GateKind.H, (0,)), Gate(GateKind.CNOT, (0, 1))))
        state = apply_circuit(StateVector.zero(2), circuit)
        np.testing.assert_allclose(state.amplitudes, [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)], atol=1e-12)

    def test_apply_gate_matches_dense_oracle(self):
        rng = np.random.default_rng(11)
        n = 4
        for _ in range(60):
            gate = random_gate(rng, n)
            state = StateVector.random(n, rng)
            expected = dense_embed(gate.matrix(), gate.qubits, n) @ state.amplitudes
            np.testing.assert_allclose(apply_gate(state, gate).amplitudes, expected, atol=1e-12)

    def test_norm_preserved_over_random_circuit(self):
        rng = np.random.default_rng(3)
        circuit = Circuit(5, tuple(random_gate(rng, 5) for _ in range(80)))
        state = apply_circuit(StateVector.random(5, rng), circuit)
        assert abs(state.norm() - 1) < 1e-10

    def test_out_of_range_gate_raises(self):
        with pytest.raises(IndexError):
            apply_gate(StateVector.zero(2), Gate(GateKind.X, (2,)))

    def test_circuit_validation(self):
        with pytest.raises(ValueError):
            Circuit(2, (Gate(GateKind.X, (2,)),))
        with pytest.raises(ValueError):
            Circuit(3, (), (QubitRole.SYSTEM, QubitRole.ANCILLA, QubitRole.SYSTEM))

    def test_circuit_inverse_undoes_circuit(self):
        rng = np.random.default_rng(5)
        circuit = Circuit(3, tuple(random_gate(rng, 3) for _ in range(25)))
        state = StateVector.random(3, rng)
        restored = apply_circuit(apply_circuit(state, circuit), circuit.inverse())
        np.testing.assert_allclose(restored.amplitudes, state.amplitudes, atol=1e-10)


class TestDecompositions:
    def test_toffoli_decomposition_uses_six_cnots(self):
        circuit = decompose_toffoli(0, 1, 2)
        assert circuit.count(GateKind.CNOT) == 6

    def test_toffoli_decomposition_unitary(self):
        toffoli = Gate(GateKind.TOFFOLI, (0, 1, 2)).matrix()
        expected = dense_embed(toffoli, (0, 1, 2), 3)
        assert_equal_up_to_phase(circuit_unitary(decompose_toffoli(0, 1, 2)), expected, atol=1e-12)

    def test_toffoli_flips_target_when_both_controls_set(self):
        # controls on qubits 0 and 1 set, target qubit 2 empty
        state = apply_circuit(StateVector.basis(3, 0b011), decompose_toffoli(0, 1, 2))
        assert abs(abs(state.amplitudes[0b111]) - 1) < 1e-12

    def test_native_and_decomposed_application_agree(self):
        rng = np.random.default_rng(21)
        gates = [Gate(GateKind.GIVENS, (1, 3), 0.9), Gate(GateKind.TOFFOLI, (3, 0, 2))]
        for _ in range(100):
            state = StateVector.random(4, rng)
            for gate in gates:
                native = apply_gate(state, gate)
                decomposed = apply_gate(state, gate, decompose=True)
                assert abs(native.fidelity(decomposed) - 1) < 1e-12

    def test_givens_decomposition_is_exact(self):
        circuit = Circuit(2, (Gate(GateKind.GIVENS, (0, 1), -0.6),))
        np.testing.assert_allclose(
            circuit_unitary(circuit, decompose=True), circuit_unitary(circuit), atol=1e-12
        )


class TestCnotDepth:
    def test_disjoint_cnots_share_a_layer(self):
        circuit = Circuit(6, tuple(Gate(GateKind.CNOT, (q, q + 1)) for q in (0, 2, 4)))
        assert cnot_depth(circuit) == 1
        assert serial_cnot_count(circuit) == 3

    def test_chained_cnots_are_serial(self):
        circuit = Circuit(3, (Gate(GateKind.CNOT, (0, 1)), Gate(GateKind.CNOT, (1, 2))))
        assert cnot_depth(circuit) == 2

    def test_block_costs(self):
        assert cnot_depth(Circuit(2, (Gate(GateKind.GIVENS, (0, 1), 0.2),))) == 2
        assert cnot_depth(Circuit(3, (Gate(GateKind.TOFFOLI, (0, 1, 2)),))) == 6
        assert cnot_depth(Circuit(2, (Gate(GateKind.RYY, (0, 1), 0.2),))) == 2

    def test_bond_layer_has_single_bond_depth(self):
        single = Circuit(4, (Gate(GateKind.RZZ, (0, 1), 0.1),))
        layer = Circuit(4, (Gate(GateKind.RZZ, (0, 1), 0.1), Gate(GateKind.RZZ, (2, 3), 0.1)))
        assert cnot_depth(layer) == cnot_depth(single) == 2

    def test_single_qubit_gates_are_free(self):
        circuit = Circuit(2, (Gate(GateKind.H, (0,)), Gate(GateKind.RZ, (1,), 0.3)))
        assert cnot_depth(circuit) == 0

    def test_depth_is_subadditive(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            first = Circuit(4, tuple(random_gate(rng, 4) for _ in range(10)))
            second = Circuit(4, tuple(random_gate(rng, 4) for _ in range(10)))
            assert cnot_depth(first + second) <= cnot_depth(first) + cnot_depth(second)


class TestMeasurement:
    def test_projection_on_product_state(self):
        rng = np.random.default_rng(2)
        psi = StateVector.random(2, rng)
        # qubit 0 in |0>, psi on qubits 1 and 2
        state = StateVector(np.kron(psi.amplitudes, [1, 0]))
        result = project_ancilla(state, 0, 0)
        assert abs(result.probability - 1) < 1e-12
        np.testing.assert_allclose(result.state.amplitudes, state.amplitudes, atol=1e-12)

    def test_projection_on_bell_state(self):
        bell = StateVector.from_amplitudes([1, 0, 0, 1])
        result = project_ancilla(bell, 0, 0)
        assert abs(result.probability - 0.5) < 1e-12
        np.testing.assert_allclose(result.state.amplitudes, [1, 0, 0, 0], atol=1e-12)

    def test_outcome_probabilities_sum_to_one(self):
        state = StateVector.random(4, np.random.default_rng(9))
        total = project_ancilla(state, 2, 0).probability + project_ancilla(state, 2, 1).probability
        assert abs(total - 1) < 1e-12

    def test_zero_probability_outcome_raises(self):
        with pytest.raises(PostSelectionError):
            project_ancilla(StateVector.zero(2), 1, 1)

    def test_reduce_register_drops_definite_qubits(self):
        rng = np.random.default_rng(4)
        system = StateVector.random(3, rng)
        wide = apply_gate(system.extend(2), Gate(GateKind.X, (3,)))
        reduced = reduce_register(wide, range(3))
        np.testing.assert_allclose(reduced.amplitudes, system.amplitudes, atol=1e-12)

    def test_reduce_register_refuses_entangled_qubit(self):
        bell = StateVector.from_amplitudes([1, 0, 0, 1])
        with pytest.raises(ValueError):
            reduce_register(bell, [0])


class TestExpectation:
    def test_z_on_basis_states(self):
        assert expectation_pauli(StateVector.zero(1), "Z") == pytest.approx(1.0)
        assert expectation_pauli(StateVector.basis(1, 1), "Z") == pytest.approx(-1.0)

    def test_zz_on_bell_state(self):
        bell = StateVector.from_amplitudes([1, 0, 0, 1])
        assert expectation_pauli(bell, "ZZ") == pytest.approx(1.0)

    def test_y_eigenstate(self):
        state = StateVector.from_amplitudes([1, 1j])
        assert expectation_pauli(state, "Y") == pytest.approx(1.0)

    def test_matches_dense_pauli_matrix(self):
        state = StateVector.random(4, np.random.default_rng(17))
        pauli = "XYZI"
        # character q acts on qubit q, so the kron runs from the last character
        dense = np.kron(np.kron(PAULIS["I"], PAULIS["Z"]), np.kron(PAULIS["Y"], PAULIS["X"]))
        expected = np.vdot(state.amplitudes, dense @ state.amplitudes).real
        assert expectation_pauli(state, pauli) == pytest.approx(expected, abs=1e-12)

    def test_malformed_string_raises(self):
        with pytest.raises(ValueError):
            expectation_pauli(StateVector.zero(2), "XA")
        with pytest.raises(ValueError):
            expectation_pauli(StateVector.zero(2), "X")


class TestQasm:
    def test_single_cnot(self):
        text = export_qasm(Circuit(2, (Gate(GateKind.CNOT, (0, 1)),)))
        assert text.startswith("OPENQASM 3.0;")
        assert [line for line in text.splitlines() if line.startswith("cx")] == ["cx q[0], q[1];"]

    def test_givens_exports_as_two_cnots(self):
        text = export_qasm(Circuit(2, (Gate(GateKind.GIVENS, (0, 1), 0.5),)))
        assert text.count("cx ") == 2
        assert "givens" not in text

    def test_toffoli_kept_or_expanded(self):
        circuit = Circuit(3, (Gate(GateKind.TOFFOLI, (0, 1, 2)),))
        assert "ccx q[0], q[1], q[2];" in export_qasm(circuit)
        expanded = export_qasm(circuit, expand_toffoli=True)
        assert "ccx" not in expanded
        assert expanded.count("cx ") == 6

    def test_round_trip_preserves_unitary(self):
        rng = np.random.default_rng(12)
        circuit = Circuit(3, tuple(random_gate(rng, 3) for _ in range(30)))
        parsed = load_qasm(export_qasm(circuit))
        assert parsed.num_qubits == 3
        assert Operator(parsed).equiv(circuit_unitary(circuit), atol=1e-10)

    def test_expanded_toffoli_round_trip(self):
        circuit = Circuit(3, (Gate(GateKind.H, (2,)), Gate(GateKind.TOFFOLI, (0, 1, 2))))
        parsed = load_qasm(export_qasm(circuit, expand_toffoli=True))
        assert Operator(parsed).equiv(circuit_unitary(circuit), atol=1e-10)

    def test_state_fidelity_of_exported_text(self):
        rng = np.random.default_rng(5)
        circuit = Circuit(4, tuple(random_gate(rng, 4) for _ in range(40)))
        assert qasm_state_fidelity(export_qasm(circuit), circuit) == pytest.approx(1.0, abs=1e-10)
        with pytest.raises(ValueError):
            qasm_state_fidelity(export_qasm(circuit), Circuit(5, circuit.gates))

    def test_strict_export_rejects_non_native_gate(self):
        with pytest.raises(UnexportableGateError):
            export_qasm(Circuit(1, (Gate(GateKind.RY, (0,), 0.2),)), lower=False)

    def test_load_rejects_undefined_gate(self):
        with pytest.raises(ValueError):
            load_qasm('OPENQASM 3.0;\ninclude "stdgates.inc";\nqubit[1] q;\nfrobnicate q[0];\n')

"""
Circuit Engine
Gate IR, dense statevector simulation, CNOT-depth scheduling, ancilla projection
and OpenQASM 3 export (re-imported through qiskit) for the scattering-state circuits.

Conventions used everywhere in this repository:
  - Basis index bit q is qubit q (little-endian: qubit 0 is the least significant bit).
  - |0> is the sigma_z = +1 state (unoccupied site), |1> is occupied.
  - Multi-qubit gate matrices list the first gate qubit as the most significant bit.
  - Rotation gates follow RP(theta) = exp(-i P theta / 2).
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import qiskit.qasm3
from qiskit import QuantumCircuit
from qiskit.quantum_info import Statevector as QiskitStatevector

# ============================================================================
# GATE IR
# ============================================================================


class GateKind(str, Enum):
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    RXX = "rxx"
    RYY = "ryy"
    RZZ = "rzz"
    H = "h"
    X = "x"
    Z = "z"
    CNOT = "cx"
    TOFFOLI = "ccx"
    GIVENS = "givens"


class QubitRole(str, Enum):
    SYSTEM = "system"
    CONTROL = "control"
    ANCILLA = "ancilla"


ROTATION_KINDS = {
    GateKind.RX, GateKind.RY, GateKind.RZ,
    GateKind.RXX, GateKind.RYY, GateKind.RZZ, GateKind.GIVENS,
}

GATE_ARITY = {
    GateKind.RX: 1, GateKind.RY: 1, GateKind.RZ: 1,
    GateKind.H: 1, GateKind.X: 1, GateKind.Z: 1,
    GateKind.RXX: 2, GateKind.RYY: 2, GateKind.RZZ: 2,
    GateKind.CNOT: 2, GateKind.GIVENS: 2,
    GateKind.TOFFOLI: 3,
}

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


@dataclass(frozen=True)
class Gate:
    """A single gate: kind, ordered qubits and (for rotations) an angle in radians"""

    kind: GateKind
    qubits: Tuple[int, ...]
    angle: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "angle", float(self.angle))

        if len(self.qubits) != GATE_ARITY[self.kind]:
            raise ValueError(
                f"{self.kind.value} acts on {GATE_ARITY[self.kind]} qubit(s), got {self.qubits}"
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"Repeated qubits in {self.kind.value}: {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"Negative qubit index in {self.kind.value}: {self.qubits}")
        if self.kind not in ROTATION_KINDS and self.angle != 0.0:
            raise ValueError(f"{self.kind.value} takes no angle")

    def inverse(self) -> "Gate":
        if self.kind in ROTATION_KINDS:
            return Gate(self.kind, self.qubits, -self.angle)
        return self

    def matrix(self) -> np.ndarray:
        """Local unitary; the first listed qubit is the most significant bit."""
        theta = self.angle
        c, s = math.cos(theta / 2), math.sin(theta / 2)

        if self.kind == GateKind.RX:
            return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
        if self.kind == GateKind.RY:
            return np.array([[c, -s], [s, c]], dtype=complex)
        if self.kind == GateKind.RZ:
            return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
        if self.kind == GateKind.H:
            return _HADAMARD.copy()
        if self.kind == GateKind.X:
            return _PAULI["X"].copy()
        if self.kind == GateKind.Z:
            return _PAULI["Z"].copy()
        if self.kind == GateKind.RXX:
            return c * np.eye(4, dtype=complex) - 1j * s * np.kron(_PAULI["X"], _PAULI["X"])
        if self.kind == GateKind.RYY:
            return c * np.eye(4, dtype=complex) - 1j * s * np.kron(_PAULI["Y"], _PAULI["Y"])
        if self.kind == GateKind.RZZ:
            phase = np.exp(-0.5j * theta)
            return np.diag([phase, phase.conjugate(), phase.conjugate(), phase])
        if self.kind == GateKind.CNOT:
            m = np.eye(4, dtype=complex)
            m[[2, 3]] = m[[3, 2]]
            return m
        if self.kind == GateKind.TOFFOLI:
            m = np.eye(8, dtype=complex)
            m[[6, 7]] = m[[7, 6]]
            return m
        if self.kind == GateKind.GIVENS:
            # exp[i theta/2 (X_p Y_q - Y_p X_q)] rotates |10> -> cos|10> - sin|01>
            cf, sf = math.cos(theta), math.sin(theta)
            m = np.eye(4, dtype=complex)
            m[1, 1], m[1, 2] = cf, -sf
            m[2, 1], m[2, 2] = sf, cf
            return m
        raise ValueError(f"No matrix for gate kind {self.kind}")


@dataclass(frozen=True)
class Circuit:
    """Immutable gate list over `width` qubits with per-qubit role tags"""

    width: int
    gates: Tuple[Gate, ...] = ()
    roles: Optional[Tuple[QubitRole, ...]] = None

    def __post_init__(self):
        if self.width < 0:
            raise ValueError("Circuit width must be non-negative")
        object.__setattr__(self, "gates", tuple(self.gates))

        roles = self.roles
        if roles is None:
            roles = (QubitRole.SYSTEM,) * self.width
        roles = tuple(QubitRole(r) for r in roles)
        if len(roles) != self.width:
            raise ValueError(f"Expected {self.width} role tags, got {len(roles)}")
        n_system = sum(1 for r in roles if r == QubitRole.SYSTEM)
        if any(r != QubitRole.SYSTEM for r in roles[:n_system]):
            raise ValueError("System qubits must be contiguous and come first")
        object.__setattr__(self, "roles", roles)

        for gate in self.gates:
            if max(gate.qubits) >= self.width:
                raise ValueError(
                    f"Gate {gate.kind.value}{gate.qubits} exceeds circuit width {self.width}"
                )

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.width != self.width:
            raise ValueError(f"Cannot concatenate widths {self.width} and {other.width}")
        return Circuit(self.width, self.gates + other.gates, self.roles)

    def __len__(self) -> int:
        return len(self.gates)

    def inverse(self) -> "Circuit":
        return Circuit(self.width, tuple(g.inverse() for g in reversed(self.gates)), self.roles)

    def with_gates(self, gates: Sequence[Gate]) -> "Circuit":
        return Circuit(self.width, tuple(gates), self.roles)

    def qubits_with_role(self, role: QubitRole) -> List[int]:
        return [q for q, r in enumerate(self.roles) if r == QubitRole(role)]

    def count(self, kind: GateKind) -> int:
        return sum(1 for g in self.gates if g.kind == kind)


# ============================================================================
# STATEVECTOR
# ============================================================================


class PostSelectionError(RuntimeError):
    """Raised when a projection keeps a subspace of zero weight"""


@dataclass
class StateVector:
    """Complex amplitudes over 2**n_qubits little-endian basis states"""

    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        size = self.amplitudes.size
        if size == 0 or size & (size - 1):
            raise ValueError(f"Amplitude count {size} is not a power of two")

    @property
    def n_qubits(self) -> int:
        return int(self.amplitudes.size).bit_length() - 1

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        return cls.basis(n_qubits, 0)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = True) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValueError("Cannot normalize the zero vector")
            amps = amps / norm
        return cls(amps)

    @classmethod
    def random(cls, n_qubits: int, rng: np.random.Generator) -> "StateVector":
        amps = rng.normal(size=2 ** n_qubits) + 1j * rng.normal(size=2 ** n_qubits)
        return cls.from_amplitudes(amps)

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: "StateVector") -> complex:
        """<self|other>"""
        if other.n_qubits != self.n_qubits:
            raise ValueError(f"Width mismatch: {self.n_qubits} vs {other.n_qubits}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "StateVector") -> float:
        return float(abs(self.overlap(other)) ** 2)

    def extend(self, n_extra: int) -> "StateVector":
        """Append n_extra high qubits in |0>."""
        amps = np.zeros(2 ** (self.n_qubits + n_extra), dtype=complex)
        amps[: self.amplitudes.size] = self.amplitudes
        return StateVector(amps)


@dataclass
class ProjectionResult:
    state: StateVector
    probability: float


# ============================================================================
# KERNELS
# ============================================================================


def apply_matrix(amplitudes: np.ndarray, matrix: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Apply a k-qubit matrix (first qubit most significant) to a flat amplitude array."""
    n_qubits = int(amplitudes.size).bit_length() - 1
    k = len(qubits)
    if any(q >= n_qubits or q < 0 for q in qubits):
        raise IndexError(f"Qubits {tuple(qubits)} out of range for {n_qubits} qubits")

    tensor = amplitudes.reshape((2,) * n_qubits)
    axes = [n_qubits - 1 - q for q in qubits]
    gate = np.asarray(matrix, dtype=complex).reshape((2,) * (2 * k))
    out = np.tensordot(gate, tensor, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return np.ascontiguousarray(out).reshape(-1)


def apply_gate(state: StateVector, gate: Gate, decompose: bool = False) -> StateVector:
    """Return gate|state>. With decompose=True, Givens and Toffoli run via their CNOT forms."""
    if max(gate.qubits) >= state.n_qubits:
        raise IndexError(
            f"Gate {gate.kind.value}{gate.qubits} out of range for {state.n_qubits} qubits"
        )
    if decompose and gate.kind in (GateKind.GIVENS, GateKind.TOFFOLI):
        amps = state.amplitudes
        for sub in _decomposition(gate):
            amps = apply_matrix(amps, sub.matrix(), sub.qubits)
        return StateVector(amps)
    return StateVector(apply_matrix(state.amplitudes, gate.matrix(), gate.qubits))


def apply_circuit(state: StateVector, circuit: Circuit, decompose: bool = False) -> StateVector:
    if circuit.width != state.n_qubits:
        raise ValueError(f"Circuit width {circuit.width} != state width {state.n_qubits}")
    for gate in circuit.gates:
        state = apply_gate(state, gate, decompose=decompose)
    return state


def circuit_unitary(circuit: Circuit, decompose: bool = False) -> np.ndarray:
    """Dense unitary of a small circuit, built column by column."""
    if circuit.width > 10:
        raise ValueError(f"Dense unitary limited to 10 qubits, circuit has {circuit.width}")
    dim = 2 ** circuit.width
    columns = [
        apply_circuit(StateVector.basis(circuit.width, i), circuit, decompose).amplitudes
        for i in range(dim)
    ]
    return np.stack(columns, axis=1)


# ============================================================================
# DECOMPOSITIONS
# ============================================================================


def decompose_toffoli(control1: int, control2: int, target: int) -> Circuit:
    """Six-CNOT Toffoli; T gates become RZ(+-pi/4), so equality holds up to global phase."""
    if len({control1, control2, target}) != 3:
        raise ValueError(f"Toffoli needs three distinct qubits, got {(control1, control2, target)}")
    c1, c2, t = control1, control2, target
    quarter = math.pi / 4
    gates = [
        Gate(GateKind.H, (t,)),
        Gate(GateKind.CNOT, (c2, t)),
        Gate(GateKind.RZ, (t,), -quarter),
        Gate(GateKind.CNOT, (c1, t)),
        Gate(GateKind.RZ, (t,), quarter),
        Gate(GateKind.CNOT, (c2, t)),
        Gate(GateKind.RZ, (t,), -quarter),
        Gate(GateKind.CNOT, (c1, t)),
        Gate(GateKind.RZ, (c2,), quarter),
        Gate(GateKind.RZ, (t,), quarter),
        Gate(GateKind.H, (t,)),
        Gate(GateKind.CNOT, (c1, c2)),
        Gate(GateKind.RZ, (c1,), quarter),
        Gate(GateKind.RZ, (c2,), -quarter),
        Gate(GateKind.CNOT, (c1, c2)),
    ]
    return Circuit(max(c1, c2, t) + 1, tuple(gates))


def decompose_givens(first: int, second: int, theta: float) -> List[Gate]:
    """Two-CNOT form of exp[i theta/2 (X_p Y_q - Y_p X_q)]; exact, no global phase."""
    p, q = first, second
    half = math.pi / 2
    return [
        Gate(GateKind.RZ, (p,), half),
        Gate(GateKind.RX, (p,), half),
        Gate(GateKind.RX, (q,), half),
        Gate(GateKind.CNOT, (p, q)),
        Gate(GateKind.RX, (p,), -theta),
        Gate(GateKind.RZ, (q,), -theta),
        Gate(GateKind.CNOT, (p, q)),
        Gate(GateKind.RX, (p,), -half),
        Gate(GateKind.RZ, (p,), -half),
        Gate(GateKind.RX, (q,), -half),
    ]


def _decompose_pauli_rotation(gate: Gate) -> List[Gate]:
    a, b = gate.qubits
    core = [
        Gate(GateKind.CNOT, (a, b)),
        Gate(GateKind.RZ, (b,), gate.angle),
        Gate(GateKind.CNOT, (a, b)),
    ]
    if gate.kind == GateKind.RZZ:
        return core
    if gate.kind == GateKind.RXX:
        basis = [Gate(GateKind.H, (a,)), Gate(GateKind.H, (b,))]
        return basis + core + basis
    # RYY: RX(pi/2) maps Y to Z under conjugation
    half = math.pi / 2
    into = [Gate(GateKind.RX, (a,), half), Gate(GateKind.RX, (b,), half)]
    out = [Gate(GateKind.RX, (a,), -half), Gate(GateKind.RX, (b,), -half)]
    return into + core + out


def _decomposition(gate: Gate, keep_toffoli: bool = False) -> List[Gate]:
    if gate.kind == GateKind.GIVENS:
        return decompose_givens(gate.qubits[0], gate.qubits[1], gate.angle)
    if gate.kind == GateKind.TOFFOLI and not keep_toffoli:
        return list(decompose_toffoli(*gate.qubits).gates)
    if gate.kind in (GateKind.RXX, GateKind.RYY, GateKind.RZZ):
        return _decompose_pauli_rotation(gate)
    return [gate]


def expand_to_cnot_basis(circuit: Circuit, keep_toffoli: bool = False) -> Circuit:
    """Rewrite every multi-qubit gate as CNOTs plus single-qubit gates."""
    gates: List[Gate] = []
    for gate in circuit.gates:
        gates.extend(_decomposition(gate, keep_toffoli=keep_toffoli))
    return circuit.with_gates(gates)


# ============================================================================
# DEPTH ACCOUNTING
# ============================================================================


def cnot_depth(circuit: Circuit) -> int:
    """Number of CNOT layers under greedy as-soon-as-possible scheduling.

    Single-qubit gates are free. Givens blocks cost 2 CNOTs, two-qubit Pauli
    rotations 2, Toffolis 6.
    """
    expanded = expand_to_cnot_basis(circuit)
    layer_end = [0] * max(circuit.width, 1)
    depth = 0
    for gate in expanded.gates:
        if gate.kind != GateKind.CNOT:
            continue
        a, b = gate.qubits
        layer = max(layer_end[a], layer_end[b]) + 1
        layer_end[a] = layer_end[b] = layer
        depth = max(depth, layer)
    return depth


def serial_cnot_count(circuit: Circuit) -> int:
    return expand_to_cnot_basis(circuit).count(GateKind.CNOT)


# ============================================================================
# MEASUREMENT PRIMITIVES
# ============================================================================


def _bit(indices: np.ndarray, qubit: int) -> np.ndarray:
    return (indices >> qubit) & 1


def project_ancilla(state: StateVector, qubit: int, outcome: int) -> ProjectionResult:
    """Keep the branch where `qubit` reads `outcome`; renormalize and report its weight."""
    if not 0 <= qubit < state.n_qubits:
        raise IndexError(f"Qubit {qubit} out of range for {state.n_qubits} qubits")
    if outcome not in (0, 1):
        raise ValueError(f"Outcome must be 0 or 1, got {outcome}")

    indices = np.arange(state.amplitudes.size)
    keep = _bit(indices, qubit) == outcome
    probability = float(np.sum(np.abs(state.amplitudes[keep]) ** 2))
    if probability < 1e-14:
        raise PostSelectionError(
            f"Outcome {outcome} on qubit {qubit} has zero probability; post-selection impossible"
        )

    amps = np.where(keep, state.amplitudes, 0.0) / math.sqrt(probability)
    return ProjectionResult(StateVector(amps), probability)


def reduce_register(state: StateVector, keep: Sequence[int], tolerance: float = 1e-9) -> StateVector:
    """Drop qubits that sit in a definite basis state; keep[i] becomes new qubit i."""
    keep = list(keep)
    dropped = [q for q in range(state.n_qubits) if q not in keep]
    indices = np.arange(state.amplitudes.size)
    weights = np.abs(state.amplitudes) ** 2

    mask = np.ones(indices.size, dtype=bool)
    for q in dropped:
        p_one = float(np.sum(weights[_bit(indices, q) == 1]))
        if p_one < tolerance:
            mask &= _bit(indices, q) == 0
        elif p_one > 1 - tolerance:
            mask &= _bit(indices, q) == 1
        else:
            raise ValueError(
                f"Qubit {q} is not in a definite basis state (P(1) = {p_one:.3e}); cannot drop it"
            )

    selected = indices[mask]
    new_index = np.zeros(selected.size, dtype=np.int64)
    for new_q, q in enumerate(keep):
        new_index |= _bit(selected, q) << new_q

    amps = np.zeros(2 ** len(keep), dtype=complex)
    amps[new_index] = state.amplitudes[selected]
    return StateVector.from_amplitudes(amps)


def apply_pauli(amplitudes: np.ndarray, pauli: str) -> np.ndarray:
    """P|psi> for a Pauli string whose character q acts on qubit q."""
    n_qubits = int(amplitudes.size).bit_length() - 1
    if len(pauli) != n_qubits:
        raise ValueError(f"Pauli string length {len(pauli)} != {n_qubits} qubits")
    if set(pauli) - set("IXYZ"):
        raise ValueError(f"Malformed Pauli string {pauli!r}")

    indices = np.arange(amplitudes.size)
    flip_mask = 0
    parity = np.zeros(indices.size, dtype=np.int64)
    n_y = 0
    for q, op in enumerate(pauli):
        if op in "XY":
            flip_mask |= 1 << q
        if op in "YZ":
            parity ^= _bit(indices, q)
        if op == "Y":
            n_y += 1

    phase = (1j ** n_y) * (1 - 2 * parity)
    out = np.empty_like(amplitudes)
    out[indices ^ flip_mask] = phase * amplitudes
    return out


def expectation_pauli(state: StateVector, pauli: str) -> float:
    value = np.vdot(state.amplitudes, apply_pauli(state.amplitudes, pauli))
    if abs(value.imag) > 1e-8:
        raise ValueError(f"Expectation of {pauli} has imaginary part {value.imag:.3e}")
    return float(value.real)


def pauli_on(n_qubits: int, assignments: Dict[int, str]) -> str:
    """Build a Pauli string from {qubit: 'X'|'Y'|'Z'}."""
    chars = ["I"] * n_qubits
    for q, op in assignments.items():
        chars[q] = op
    return "".join(chars)


# ============================================================================
# OPENQASM 3
# ============================================================================

QASM_NATIVE = {GateKind.RZ, GateKind.RX, GateKind.H, GateKind.X, GateKind.CNOT, GateKind.TOFFOLI}


class UnexportableGateError(ValueError):
    """Raised when a gate has no form in the exportable gate set"""


def _lower_for_export(gate: Gate, expand_toffoli: bool) -> List[Gate]:
    if gate.kind == GateKind.TOFFOLI:
        return list(decompose_toffoli(*gate.qubits).gates) if expand_toffoli else [gate]
    if gate.kind in QASM_NATIVE:
        return [gate]
    if gate.kind == GateKind.Z:
        # equal to Z up to global phase
        return [Gate(GateKind.RZ, gate.qubits, math.pi)]
    if gate.kind == GateKind.RY:
        q = gate.qubits
        return [
            Gate(GateKind.RZ, q, -math.pi / 2),
            Gate(GateKind.RX, q, gate.angle),
            Gate(GateKind.RZ, q, math.pi / 2),
        ]
    lowered: List[Gate] = []
    for sub in _decomposition(gate, keep_toffoli=True):
        lowered.extend(_lower_for_export(sub, expand_toffoli))
    return lowered


def export_qasm(circuit: Circuit, expand_toffoli: bool = False, lower: bool = True) -> str:
    """OpenQASM 3 text over {rz, rx, h, x, cx, ccx}.

    With lower=False any gate outside that set raises UnexportableGateError.
    """
    lines = [
        "OPENQASM 3.0;",
        'include "stdgates.inc";',
        f"qubit[{circuit.width}] q;",
    ]
    for gate in circuit.gates:
        if not lower and gate.kind not in QASM_NATIVE:
            raise UnexportableGateError(f"Gate kind {gate.kind.value} is not exportable")
        for g in _lower_for_export(gate, expand_toffoli):
            operands = ", ".join(f"q[{q}]" for q in g.qubits)
            if g.kind in ROTATION_KINDS:
                lines.append(f"{g.kind.value}({g.angle!r}) {operands};")
            else:
                lines.append(f"{g.kind.value} {operands};")
    return "\n".join(lines) + "\n"


def load_qasm(text: str) -> QuantumCircuit:
    """Parse OpenQASM 3 text with qiskit's importer."""
    try:
        return qiskit.qasm3.loads(text)
    except qiskit.qasm3.exceptions.QASM3ImporterError as exc:
        raise ValueError(f"Cannot import OpenQASM 3 program: {exc}") from exc


def qasm_state_fidelity(text: str, circuit: Circuit, initial: Optional[StateVector] = None) -> float:
    """|<a|b>|^2 between `circuit` and the parsed `text`, both run on `initial` (default |0...0>)."""
    parsed = load_qasm(text)
    if parsed.num_qubits != circuit.width:
        raise ValueError(f"QASM declares {parsed.num_qubits} qubits, circuit has {circuit.width}")
    initial = initial if initial is not None else StateVector.zero(circuit.width)
    expected = apply_circuit(initial, circuit).amplitudes
    actual = QiskitStatevector(initial.amplitudes).evolve(parsed).data
    return float(abs(np.vdot(expected, actual)) ** 2)

"""
Trotterized Time Evolution
First-order Trotter steps for the modified Ising model, trajectory stepping with
observers, the exact-evolution convergence check and imaginary-time vacuum projection.
"""

import csv
import io
import json
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from circuit_engine import (
    Circuit,
    Gate,
    GateKind,
    QubitRole,
    StateVector,
    apply_circuit,
    apply_matrix,
)
from ising_model import Boundary, ModelParams, exact_evolve, hamiltonian_terms

OBSERVABLE_NAMES = ("occupations", "entropies")


@dataclass(frozen=True)
class TrotterConfig:
    """Step size, number of steps and an optional boundary override for the model"""

    dt: float = 0.1
    n_steps: int = 120
    boundary: Optional[Boundary] = None

    def __post_init__(self):
        if not float(self.dt) > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if isinstance(self.n_steps, bool) or int(self.n_steps) != self.n_steps or self.n_steps < 0:
            raise ValueError(f"n_steps must be a non-negative integer, got {self.n_steps!r}")
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "n_steps", int(self.n_steps))
        if self.boundary is not None:
            object.__setattr__(self, "boundary", Boundary(self.boundary))

    def resolve(self, params: ModelParams) -> ModelParams:
        if self.boundary is None or self.boundary == params.boundary:
            return params
        return replace(params, boundary=self.boundary)

    def to_dict(self) -> Dict:
        return {
            "dt": self.dt,
            "n_steps": self.n_steps,
            "boundary": self.boundary.value if self.boundary else None,
        }


@dataclass
class TrajectoryDataset:
    """Observables recorded at t = 0, dt, ..., n_steps * dt"""

    times: List[float] = field(default_factory=list)
    occupations: List[np.ndarray] = field(default_factory=list)
    entropies: List[np.ndarray] = field(default_factory=list)
    config_echo: Dict = field(default_factory=dict)
    metrics: Dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def occupation_matrix(self) -> np.ndarray:
        return np.array(self.occupations, dtype=float)

    def entropy_matrix(self) -> np.ndarray:
        return np.array(self.entropies, dtype=float)

    def to_csv(self) -> str:
        n_sites = len(self.occupations[0]) if self.occupations else 0
        n_cuts = len(self.entropies[0]) if self.entropies else 0
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(
            ["t"] + [f"n_{j}" for j in range(1, n_sites + 1)] + [f"S_{c}" for c in range(1, n_cuts + 1)]
        )
        for index, t in enumerate(self.times):
            row = [repr(float(t))]
            if n_sites:
                row += [repr(float(v)) for v in self.occupations[index]]
            if n_cuts:
                row += [repr(float(v)) for v in self.entropies[index]]
            writer.writerow(row)
        return buffer.getvalue()

    def to_dict(self) -> Dict:
        return {
            "config_echo": self.config_echo,
            "metrics": self.metrics,
            "steps": [
                {
                    "t": float(t),
                    "occupations": [float(v) for v in self.occupations[i]] if self.occupations else [],
                    "entropies": [float(v) for v in self.entropies[i]] if self.entropies else [],
                }
                for i, t in enumerate(self.times)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    @classmethod
    def from_dict(cls, data: Dict) -> "TrajectoryDataset":
        steps = data.get("steps", [])
        return cls(
            times=[step["t"] for step in steps],
            occupations=[np.array(step["occupations"]) for step in steps if step["occupations"]],
            entropies=[np.array(step["entropies"]) for step in steps if step["entropies"]],
            config_echo=data.get("config_echo", {}),
            metrics=data.get("metrics", {}),
        )


Observer = Tuple[str, Callable[[StateVector], Sequence[float]]]


# ============================================================================
# TROTTER STEP
# ============================================================================


def bond_layers(params: ModelParams) -> List[List[Tuple[int, int]]]:
    """Even bonds, odd bonds, then the wrap bond (merged into the odd layer when N is even)."""
    n = params.n_sites
    even = [(a, a + 1) for a in range(0, n - 1, 2)]
    odd = [(a, a + 1) for a in range(1, n - 1, 2)]
    layers = [even, odd]
    if params.boundary == Boundary.PERIODIC and n > 2:
        if n % 2 == 0:
            odd.append((n - 1, 0))
        else:
            layers.append([(n - 1, 0)])
    return [layer for layer in layers if layer]


def build_trotter_step(params: ModelParams, dt: float, width: Optional[int] = None) -> Circuit:
    """One first-order step: RZZ layers (g), RZ layer (h), H-RZZ-H layers (J)."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    n = params.n_sites
    width = n if width is None else width
    if width < n:
        raise ValueError(f"Width {width} smaller than the {n}-site lattice")

    layers = bond_layers(params)
    gates: List[Gate] = []
    if params.g_coupling != 0.0:
        for layer in layers:
            gates += [Gate(GateKind.RZZ, bond, -2 * params.g_coupling * dt) for bond in layer]
    if params.h_field != 0.0:
        gates += [Gate(GateKind.RZ, (q,), -2 * params.h_field * dt) for q in range(n)]
    if params.j_coupling != 0.0:
        for layer in layers:
            hadamards = [Gate(GateKind.H, (q,)) for bond in layer for q in bond]
            gates += hadamards
            gates += [Gate(GateKind.RZZ, bond, -2 * params.j_coupling * dt) for bond in layer]
            gates += hadamards

    roles = (QubitRole.SYSTEM,) * n + (QubitRole.ANCILLA,) * (width - n)
    return Circuit(width, tuple(gates), roles)


def evolve_trajectory(
    state: StateVector,
    params: ModelParams,
    config: TrotterConfig,
    observers: Sequence[Observer] = (),
    progress: Optional[Callable[[int, int], None]] = None,
) -> TrajectoryDataset:
    """Record observers at t = 0 and after each of config.n_steps Trotter steps."""
    params = config.resolve(params)
    if state.n_qubits < params.n_sites:
        raise ValueError(
            f"State has {state.n_qubits} qubits but the model has {params.n_sites} sites"
        )
    for name, _ in observers:
        if name not in OBSERVABLE_NAMES:
            raise ValueError(f"Unknown observer {name!r}; expected one of {OBSERVABLE_NAMES}")

    step = build_trotter_step(params, config.dt, width=state.n_qubits)
    dataset = TrajectoryDataset()

    def record(current: StateVector, t: float):
        dataset.times.append(t)
        for name, observer in observers:
            getattr(dataset, name).append(np.asarray(observer(current), dtype=float))

    record(state, 0.0)
    for index in range(1, config.n_steps + 1):
        state = apply_circuit(state, step)
        record(state, index * config.dt)
        if progress:
            progress(index, config.n_steps)

    dataset.metrics["final_norm"] = state.norm()
    return dataset


def evolve_state(state: StateVector, params: ModelParams, dt: float, n_steps: int) -> StateVector:
    step = build_trotter_step(params, dt, width=state.n_qubits)
    for _ in range(n_steps):
        state = apply_circuit(state, step)
    return state


def trotter_unitary_error(
    params: ModelParams, dt: float, total_time: float, state: StateVector
) -> Dict[str, float]:
    """Distance and infidelity between Trotterized and exact evolution to total_time.

    The distance sqrt(2 (1 - |<exact|trotter>|)) ignores global phase and scales
    linearly in dt; the infidelity scales quadratically.
    """
    n_steps = int(round(total_time / dt))
    if n_steps < 1 or abs(n_steps * dt - total_time) > 1e-9:
        raise ValueError(f"total_time {total_time} is not a positive multiple of dt {dt}")
    trotterized = evolve_state(state, params, dt, n_steps)
    exact = exact_evolve(state, params, total_time)
    overlap = min(abs(exact.overlap(trotterized)), 1.0)
    return {
        "distance": float(np.sqrt(max(0.0, 2 * (1 - overlap)))),
        "infidelity": float(1 - overlap ** 2),
        "n_steps": n_steps,
    }


# ============================================================================
# IMAGINARY TIME
# ============================================================================

_PAULI_DENSE = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _term_propagator(coefficient: float, pauli: str, dtau: float) -> Tuple[np.ndarray, List[int]]:
    """exp(-dtau c P) = cosh(dtau c) - sinh(dtau c) P restricted to the support of P."""
    support = [q for q, op in enumerate(pauli) if op != "I"]
    local = np.array([[1.0]], dtype=complex)
    for q in support:
        local = np.kron(local, _PAULI_DENSE[pauli[q]])
    x = dtau * coefficient
    matrix = np.cosh(x) * np.eye(local.shape[0]) - np.sinh(x) * local
    return matrix, support


def imaginary_time_ground_state(
    params: ModelParams,
    dtau: float = 0.05,
    n_steps: int = 400,
    initial: Optional[StateVector] = None,
    progress: Optional[Callable[[int, int], None]] = None,
) -> StateVector:
    """Project onto the ground state with repeated first-order exp(-dtau H) sweeps.

    Matrix-free, so it serves lattices above the dense cap. The default start
    |0...0> lies in the even-parity sector, which holds the ground state.
    """
    if not dtau > 0 or n_steps < 1:
        raise ValueError(f"Need dtau > 0 and n_steps >= 1, got {dtau}, {n_steps}")
    state = StateVector.zero(params.n_sites) if initial is None else initial
    if state.n_qubits != params.n_sites:
        raise ValueError(f"Initial state width {state.n_qubits} != {params.n_sites} sites")

    propagators = [_term_propagator(c, p, dtau) for c, p in hamiltonian_terms(params)]
    amplitudes = state.amplitudes.copy()
    for index in range(1, n_steps + 1):
        for matrix, support in propagators:
            amplitudes = apply_matrix(amplitudes, matrix, support)
        amplitudes /= np.linalg.norm(amplitudes)
        if progress:
            progress(index, n_steps)
    return StateVector(amplitudes)

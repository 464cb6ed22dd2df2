"""
Fermionic Gaussian Wave Packets
Gaussian profiles, Givens-rotation schedules, the LOBE sigma^- block and the
ancilla-assisted packet-preparation circuit, plus the dense creation-operator
oracles the circuit is checked against.

A packet on window [lo, hi] (1-based, inclusive) is
    G^dagger = sum_j a_j e^{-i k j} c_j^dagger,   a_j ~ exp(-(j - x)^2 / sigma^2)
and is prepared as V(beta) V(theta) sigma^-_lo V(theta)^dagger V(beta)^dagger.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from circuit_engine import (
    Circuit,
    Gate,
    GateKind,
    QubitRole,
    StateVector,
    cnot_depth,
    serial_cnot_count,
)
from ising_model import apply_creation


class PrepVariant(str, Enum):
    EXACT_ORACLE = "exact_oracle"
    TRUNCATED_ORACLE = "truncated_oracle"
    TRUNCATED_UNITARY = "truncated_unitary"


class PacketAnnihilatedError(ValueError):
    """Raised when a creation operator maps the state to the zero vector"""


DISTANCES = ("open", "periodic")


@dataclass(frozen=True)
class WavePacketSpec:
    """Center x, momentum k, width sigma and 1-based inclusive site window"""

    center: float
    momentum: float
    width: float
    window: Tuple[int, int]
    distance: str = "open"

    def __post_init__(self):
        object.__setattr__(self, "center", float(self.center))
        object.__setattr__(self, "momentum", float(self.momentum))
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "window", (int(self.window[0]), int(self.window[1])))

        if not self.width > 0:
            raise ValueError(f"Packet width must be positive, got {self.width}")
        if not -np.pi - 1e-12 < self.momentum <= np.pi + 1e-12:
            raise ValueError(f"Momentum must lie in (-pi, pi], got {self.momentum}")
        lo, hi = self.window
        if lo < 1 or hi < lo:
            raise ValueError(f"Invalid window {self.window}; need 1 <= lo <= hi")
        if self.distance not in DISTANCES:
            raise ValueError(f"distance must be one of {DISTANCES}, got {self.distance!r}")

    @property
    def sites(self) -> List[int]:
        return list(range(self.window[0], self.window[1] + 1))

    @property
    def window_length(self) -> int:
        return self.window[1] - self.window[0] + 1

    def with_window(self, lo: int, hi: int) -> "WavePacketSpec":
        return replace(self, window=(lo, hi))

    def to_dict(self) -> Dict:
        return {
            "center": self.center,
            "momentum": self.momentum,
            "width": self.width,
            "window": list(self.window),
            "distance": self.distance,
        }


@dataclass(frozen=True)
class GivensSchedule:
    """Phases beta_j, angles theta_i for local pairs (i, i+1) and the target amplitudes"""

    window: Tuple[int, int]
    phases: Tuple[float, ...]
    angles: Tuple[float, ...]
    target_amplitudes: Tuple[float, ...]


@dataclass(frozen=True)
class PacketPlan:
    spec: WavePacketSpec
    system_qubits: Tuple[int, ...]
    control: int
    ancilla: int
    schedule: GivensSchedule

    @property
    def analytic_depth(self) -> int:
        return 4 * (self.spec.window_length - 1) + 6


# ============================================================================
# GAUSSIAN PROFILE AND GIVENS ANGLES
# ============================================================================


def gaussian_coefficients(
    spec: WavePacketSpec, n_sites: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Normalized real amplitudes a_j and phases beta_j = k j over the window sites."""
    sites = np.array(spec.sites, dtype=float)
    if sites.size == 0:
        raise ValueError("Empty packet window")

    distance = sites - spec.center
    if spec.distance == "periodic":
        if n_sites is None:
            raise ValueError("Periodic packet distance needs the lattice size")
        distance = (distance + n_sites / 2) % n_sites - n_sites / 2

    amplitudes = np.exp(-(distance ** 2) / spec.width ** 2)
    norm = np.linalg.norm(amplitudes)
    if norm == 0 or not np.isfinite(norm):
        raise ValueError(
            f"Gaussian at x = {spec.center} with sigma = {spec.width} vanishes on window {spec.window}"
        )
    return amplitudes / norm, spec.momentum * sites


def givens_angles(amplitudes: Sequence[float]) -> np.ndarray:
    """Angles that rotate the real vector `amplitudes` onto e_1.

    Pairs are processed from (m-2, m-1) down to (0, 1); angles[i] belongs to
    the local pair (i, i+1).
    """
    work = np.array(amplitudes, dtype=float)
    if work.ndim != 1 or work.size < 1:
        raise ValueError("Amplitudes must be a non-empty vector")
    norm = np.linalg.norm(work)
    if norm == 0:
        raise ValueError("Cannot compute Givens angles for the zero vector")
    if abs(norm - 1) > 1e-8:
        raise ValueError(f"Amplitudes must be normalized, got norm {norm:.12f}")

    angles = np.zeros(work.size - 1)
    for j in range(work.size - 1, 0, -1):
        angles[j - 1] = np.arctan2(-work[j], work[j - 1])
        work[j - 1] = np.hypot(work[j - 1], work[j])
        work[j] = 0.0
    return angles


def reconstruct_amplitudes(angles: Sequence[float]) -> np.ndarray:
    """Inverse of givens_angles: apply the rotations by -theta to e_1 from pair (0, 1) up."""
    vector = np.zeros(len(angles) + 1)
    vector[0] = 1.0
    for i, theta in enumerate(angles):
        c, s = np.cos(-theta), np.sin(-theta)
        first, second = vector[i], vector[i + 1]
        vector[i] = c * first - s * second
        vector[i + 1] = s * first + c * second
    return vector


def packet_schedule(spec: WavePacketSpec, n_sites: Optional[int] = None) -> GivensSchedule:
    amplitudes, phases = gaussian_coefficients(spec, n_sites)
    return GivensSchedule(
        window=spec.window,
        phases=tuple(phases),
        angles=tuple(givens_angles(amplitudes)),
        target_amplitudes=tuple(amplitudes),
    )


def term_count(variant: PrepVariant, n_sites: int) -> int:
    """Two-packet creation terms: N(N-1)/2 on the full lattice, N(N/2-1)/4 when truncated."""
    if n_sites % 2:
        raise ValueError(f"Two-packet term counts need an even lattice, got N = {n_sites}")
    if PrepVariant(variant) == PrepVariant.EXACT_ORACLE:
        return n_sites * (n_sites - 1) // 2
    return n_sites * (n_sites // 2 - 1) // 4


def default_packet_pair(
    n_sites: int,
    momentum: float = 7 * np.pi / 16,
    width: float = 1.0,
    centers: Optional[Tuple[float, float]] = None,
) -> Tuple[WavePacketSpec, WavePacketSpec]:
    """Right mover (+k) centred in the left half, left mover (-k) in the right half."""
    if n_sites % 2 or n_sites < 4:
        raise ValueError(f"A packet pair needs an even lattice of at least 4 sites, got {n_sites}")
    half = n_sites // 2
    if centers is None:
        centers = ((1 + half) / 2, (half + 1 + n_sites) / 2)
    left = WavePacketSpec(centers[0], momentum, width, (1, half))
    right = WavePacketSpec(centers[1], -momentum, width, (half + 1, n_sites))
    return left, right


# ============================================================================
# CIRCUIT BLOCKS
# ============================================================================


def build_v_beta(phases: Sequence[float], window: Tuple[int, int], width: Optional[int] = None) -> Circuit:
    """RZ(beta_j) on every window qubit: V(beta)^dagger."""
    lo, hi = window
    if len(phases) != hi - lo + 1:
        raise ValueError(f"{len(phases)} phases for a window of {hi - lo + 1} sites")
    gates = [Gate(GateKind.RZ, (lo - 1 + i,), beta) for i, beta in enumerate(phases)]
    return Circuit(width if width is not None else hi, tuple(gates))


def build_v_theta(angles: Sequence[float], window: Tuple[int, int], width: Optional[int] = None) -> Circuit:
    """Givens blocks on descending neighbour pairs: V(theta)^dagger."""
    lo, hi = window
    if len(angles) != hi - lo:
        raise ValueError(f"{len(angles)} angles for a window of {hi - lo + 1} sites")
    gates = [
        Gate(GateKind.GIVENS, (lo - 1 + i, lo + i), angles[i])
        for i in range(len(angles) - 1, -1, -1)
    ]
    return Circuit(width if width is not None else hi, tuple(gates))


def build_lobe_sigma_minus(
    target: int,
    control: int,
    ancilla: int,
    width: Optional[int] = None,
    prepare_control: bool = False,
) -> Circuit:
    """Ancilla-assisted sigma^- on `target`.

    Toffoli(control, target -> ancilla) then X(target). With the control in |1>
    and the ancilla post-selected on 0 this is exactly |1><0| on the target.
    """
    if len({target, control, ancilla}) != 3:
        raise ValueError(f"LOBE needs three distinct qubits, got {(target, control, ancilla)}")
    gates = []
    if prepare_control:
        gates.append(Gate(GateKind.X, (control,)))
    gates.append(Gate(GateKind.TOFFOLI, (control, target, ancilla)))
    gates.append(Gate(GateKind.X, (target,)))
    return Circuit(width if width is not None else max(target, control, ancilla) + 1, tuple(gates))


def plan_packets(specs: Sequence[WavePacketSpec], n_sites: int) -> List[PacketPlan]:
    """Assign qubits: system 0..N-1, then one control per packet, then one ancilla per packet."""
    if not specs:
        raise ValueError("At least one packet is required")
    occupied = set()
    for spec in specs:
        if spec.window[1] > n_sites:
            raise ValueError(f"Window {spec.window} exceeds the {n_sites}-site lattice")
        if occupied & set(spec.sites):
            raise ValueError(f"Window {spec.window} overlaps another packet window")
        occupied |= set(spec.sites)

    count = len(specs)
    return [
        PacketPlan(
            spec=spec,
            system_qubits=tuple(site - 1 for site in spec.sites),
            control=n_sites + index,
            ancilla=n_sites + count + index,
            schedule=packet_schedule(spec, n_sites),
        )
        for index, spec in enumerate(specs)
    ]


def _packet_gates(plan: PacketPlan, width: int) -> List[Gate]:
    schedule = plan.schedule
    lo = plan.spec.window[0]
    # Jordan-Wigner string of the packet's first site
    string = [Gate(GateKind.Z, (q,)) for q in range(lo - 1)]
    rotate_in = build_v_beta(schedule.phases, schedule.window, width) + build_v_theta(
        schedule.angles, schedule.window, width
    )
    lobe = build_lobe_sigma_minus(lo - 1, plan.control, plan.ancilla, width)
    return string + list(rotate_in.gates) + list(lobe.gates) + list(rotate_in.inverse().gates)


def build_packet_circuit(
    specs: Sequence[WavePacketSpec],
    variant: PrepVariant = PrepVariant.TRUNCATED_UNITARY,
    n_sites: Optional[int] = None,
) -> Circuit:
    """Preparation circuit for packets on disjoint windows.

    Controls are flipped to |1> first; the last listed packet is applied first.
    Ancillas must be post-selected on 0 afterwards.
    """
    if PrepVariant(variant) != PrepVariant.TRUNCATED_UNITARY:
        raise ValueError(f"Only the truncated_unitary variant has a circuit, got {variant}")
    if n_sites is None:
        n_sites = max(spec.window[1] for spec in specs)
    plans = plan_packets(specs, n_sites)
    count = len(plans)
    width = n_sites + 2 * count
    roles = (
        (QubitRole.SYSTEM,) * n_sites
        + (QubitRole.CONTROL,) * count
        + (QubitRole.ANCILLA,) * count
    )

    gates = [Gate(GateKind.X, (plan.control,)) for plan in plans]
    for plan in reversed(plans):
        gates.extend(_packet_gates(plan, width))
    return Circuit(width, tuple(gates), roles)


def preparation_metrics(
    specs: Sequence[WavePacketSpec], n_sites: int, variant: PrepVariant
) -> Dict:
    """Depth and size figures for a packet configuration."""
    metrics: Dict = {
        "variant": PrepVariant(variant).value,
        "n_packets": len(specs),
        "unwindowed_serial_depth": 8 * (n_sites - 1),
    }
    if len(specs) == 2 and n_sites % 2 == 0:
        metrics["term_count"] = term_count(variant, n_sites)
    circuit = build_packet_circuit(specs, PrepVariant.TRUNCATED_UNITARY, n_sites)
    metrics["cnot_depth"] = cnot_depth(circuit)
    metrics["serial_cnot_count"] = serial_cnot_count(circuit)
    metrics["analytic_depth"] = max(plan.analytic_depth for plan in plan_packets(specs, n_sites))
    metrics["circuit_width"] = circuit.width
    return metrics


# ============================================================================
# ORACLES
# ============================================================================


def apply_packet_oracle(
    state: StateVector,
    spec: WavePacketSpec,
    variant: PrepVariant,
    n_sites: int,
) -> StateVector:
    """Normalized G^dagger|state>; ExactOracle spans the whole lattice, TruncatedOracle the window."""
    variant = PrepVariant(variant)
    if variant == PrepVariant.TRUNCATED_UNITARY:
        raise ValueError("truncated_unitary packets are prepared by circuit, not by oracle")
    if state.n_qubits < n_sites:
        raise ValueError(f"State has {state.n_qubits} qubits, lattice needs {n_sites}")
    if spec.window[1] > n_sites:
        raise ValueError(f"Window {spec.window} exceeds the {n_sites}-site lattice")

    active = spec.with_window(1, n_sites) if variant == PrepVariant.EXACT_ORACLE else spec
    amplitudes, phases = gaussian_coefficients(active, n_sites)

    result = np.zeros_like(state.amplitudes)
    for site, a, beta in zip(active.sites, amplitudes, phases):
        result += a * np.exp(-1j * beta) * apply_creation(state.amplitudes, site, n_sites)

    norm = np.linalg.norm(result)
    if norm < 1e-12:
        raise PacketAnnihilatedError(
            f"Packet at x = {spec.center} annihilates the state (every window site occupied)"
        )
    return StateVector(result / norm)


def apply_packet_oracles(
    state: StateVector,
    specs: Sequence[WavePacketSpec],
    variant: PrepVariant,
    n_sites: int,
) -> StateVector:
    """Apply packets in reverse order so the first listed packet acts last."""
    for spec in reversed(list(specs)):
        state = apply_packet_oracle(state, spec, variant, n_sites)
    return state

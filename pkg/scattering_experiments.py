"""
Scattering Experiments
Observables, vacuum preparation (exact, Trotter-projected, VQE with SPSA), the
end-to-end scattering run and the three-variant relative-error study.
"""

import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import svdvals

from circuit_engine import (
    Circuit,
    Gate,
    GateKind,
    StateVector,
    apply_circuit,
    apply_pauli,
    expectation_pauli,
    pauli_on,
    project_ancilla,
    reduce_register,
)
from ising_model import (
    DENSE_CAP,
    CapacityError,
    ModelParams,
    build_hamiltonian,
    exact_ground_state,
    hamiltonian_terms,
)
from trotter_evolution import (
    Observer,
    TrajectoryDataset,
    TrotterConfig,
    evolve_trajectory,
    imaginary_time_ground_state,
)
from wave_packets import (
    PrepVariant,
    WavePacketSpec,
    apply_packet_oracles,
    build_packet_circuit,
    plan_packets,
    preparation_metrics,
)

# Largest register the entropy routine will reshape
ENTROPY_CAP = 24
AGGREGATIONS = ("l2", "per_site")
# Vacuum the exact (EWP) packets sit on in the error study
REFERENCE_VACUA = ("interacting", "free")


class VacuumSource(str, Enum):
    TRIVIAL = "trivial"
    EXACT_GROUND = "exact_ground"
    VQE = "vqe"
    TROTTER_PROJECTED = "trotter_projected"


@dataclass(frozen=True)
class VacuumConfig:
    """Vacuum source plus the imaginary-time settings used by trotter_projected.

    `reference` only matters for the error study: "free" builds the exact
    packets on the g = 0 vacuum while the truncated ones keep the interacting one.
    """

    source: VacuumSource = VacuumSource.EXACT_GROUND
    dtau: float = 0.05
    n_steps: int = 400
    reference: str = "interacting"

    def __post_init__(self):
        object.__setattr__(self, "source", VacuumSource(self.source))
        if not self.dtau > 0 or self.n_steps < 1:
            raise ValueError("Imaginary-time settings need dtau > 0 and n_steps >= 1")
        if self.reference not in REFERENCE_VACUA:
            raise ValueError(f"reference must be one of {REFERENCE_VACUA}, got {self.reference!r}")

    @classmethod
    def coerce(cls, value) -> "VacuumConfig":
        return value if isinstance(value, VacuumConfig) else cls(VacuumSource(value))

    def to_dict(self) -> Dict:
        return {"source": self.source.value, "dtau": self.dtau, "n_steps": self.n_steps, "reference": self.reference}


@dataclass(frozen=True)
class VqeConfig:
    """Ansatz depth and SPSA schedule a_k = a/(k+1+A)^alpha, c_k = c/(k+1)^gamma"""

    n_layers: int = 1
    max_iterations: int = 400
    learning_rate: Optional[float] = None
    perturbation: float = 0.1
    stability_constant: float = 10.0
    alpha: float = 0.602
    gamma: float = 0.101
    target_magnitude: float = 0.1
    calibration_steps: int = 25
    initial_scale: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.n_layers < 1:
            raise ValueError(f"n_layers must be at least 1, got {self.n_layers}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be at least 1, got {self.max_iterations}")
        if not self.perturbation > 0:
            raise ValueError(f"perturbation must be positive, got {self.perturbation}")
        if self.learning_rate is not None and not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")

    def to_dict(self) -> Dict:
        return dict(self.__dict__)


@dataclass
class VqeResult:
    state: StateVector
    energy: float
    parameters: np.ndarray
    history: List[float] = field(default_factory=list)
    evaluations: int = 0
    learning_rate: float = 0.0
    seed: int = 0


# ============================================================================
# OBSERVABLES
# ============================================================================


def site_occupations(state: StateVector, n_sites: Optional[int] = None) -> np.ndarray:
    """<n_j> = (1 - <Z_j>) / 2 for j = 1..n_sites."""
    n_sites = state.n_qubits if n_sites is None else n_sites
    return np.array(
        [(1 - expectation_pauli(state, pauli_on(state.n_qubits, {q: "Z"}))) / 2 for q in range(n_sites)]
    )


def total_occupation(state: StateVector, n_sites: Optional[int] = None) -> float:
    return float(np.sum(site_occupations(state, n_sites)))


def excess_center_of_mass(occupations: Sequence[float], vacuum_occupations: Sequence[float]) -> float:
    """Mean site (1-based) of the occupation in excess of the vacuum."""
    excess = np.asarray(occupations, dtype=float) - np.asarray(vacuum_occupations, dtype=float)
    weight = excess.sum()
    if abs(weight) < 1e-12:
        raise ValueError("No excess occupation over the vacuum")
    sites = np.arange(1, excess.size + 1)
    return float(np.dot(sites, excess) / weight)


def bipartite_entropy(state: StateVector, cut: int) -> float:
    """Von Neumann entropy (natural log) of qubits 0..cut-1 against the rest."""
    n = state.n_qubits
    if n > ENTROPY_CAP:
        raise CapacityError(f"Entropy limited to {ENTROPY_CAP} qubits, state has {n}")
    if not 1 <= cut <= n - 1:
        raise ValueError(f"Cut {cut} outside 1..{n - 1}")
    # rows index qubits cut..n-1, columns index qubits 0..cut-1
    matrix = state.amplitudes.reshape(2 ** (n - cut), 2 ** cut)
    probabilities = svdvals(matrix) ** 2
    probabilities = probabilities[probabilities > 1e-15]
    probabilities = probabilities / probabilities.sum()
    return float(max(0.0, -np.sum(probabilities * np.log(probabilities))))


def entanglement_profile(state: StateVector) -> np.ndarray:
    return np.array([bipartite_entropy(state, cut) for cut in range(1, state.n_qubits)])


def standard_observers(n_sites: int) -> List[Observer]:
    return [
        ("occupations", lambda state: site_occupations(state, n_sites)),
        ("entropies", entanglement_profile),
    ]


def energy_expectation(
    state: StateVector, params: ModelParams, hamiltonian: Optional[np.ndarray] = None
) -> float:
    """<H>, matrix-free from the Pauli terms unless a dense Hamiltonian is supplied."""
    amplitudes = state.amplitudes
    if hamiltonian is not None:
        return float(np.vdot(amplitudes, hamiltonian @ amplitudes).real)
    total = 0.0
    for coefficient, pauli in hamiltonian_terms(params):
        total += coefficient * float(np.vdot(amplitudes, apply_pauli(amplitudes, pauli)).real)
    return total


# ============================================================================
# RELATIVE ERRORS
# ============================================================================


def _step_error(reference: np.ndarray, approx: np.ndarray, aggregation: str) -> Optional[float]:
    if aggregation == "l2":
        norm = np.linalg.norm(reference)
        if norm < 1e-12:
            return None
        return 100 * float(np.linalg.norm(reference - approx) / norm)
    mask = np.abs(reference) >= 1e-12
    if not mask.any():
        return None
    return 100 * float(np.mean(np.abs(reference[mask] - approx[mask]) / np.abs(reference[mask])))


def _series_error(reference: List[np.ndarray], approx: List[np.ndarray], aggregation: str, exclude_initial: bool) -> float:
    indices = list(range(len(reference)))
    if exclude_initial and len(indices) > 1:
        indices = indices[1:]
    errors = [_step_error(np.asarray(reference[i]), np.asarray(approx[i]), aggregation) for i in indices]
    errors = [e for e in errors if e is not None]
    return float(np.mean(errors)) if errors else 0.0


def relative_error_series(
    reference: TrajectoryDataset,
    approx: TrajectoryDataset,
    aggregation: str = "l2",
    exclude_initial: bool = True,
) -> Tuple[float, float]:
    """Time-averaged percent errors of (occupations, entropies).

    l2 aggregates sites with 100 |ref - approx| / |ref| per step; per_site
    averages the per-site relative errors. Steps with a vanishing reference are skipped.
    """
    if aggregation not in AGGREGATIONS:
        raise ValueError(f"aggregation must be one of {AGGREGATIONS}, got {aggregation!r}")
    if len(reference.times) != len(approx.times) or not np.allclose(reference.times, approx.times):
        raise ValueError("Datasets have different time grids")
    if reference.occupation_matrix().shape != approx.occupation_matrix().shape:
        raise ValueError("Datasets have different lattice sizes")

    occupation_error = _series_error(reference.occupations, approx.occupations, aggregation, exclude_initial)
    entropy_error = _series_error(reference.entropies, approx.entropies, aggregation, exclude_initial)
    return occupation_error, entropy_error


# ============================================================================
# VQE
# ============================================================================


def parameter_count(n_qubits: int, n_layers: int) -> int:
    return 2 * n_qubits * (n_layers + 1)


def efficient_su2_circuit(n_qubits: int, n_layers: int, parameters: Sequence[float]) -> Circuit:
    """RY/RZ on every qubit, then per layer a reverse-linear CNOT ladder and RY/RZ again."""
    parameters = np.asarray(parameters, dtype=float)
    if parameters.size != parameter_count(n_qubits, n_layers):
        raise ValueError(
            f"Expected {parameter_count(n_qubits, n_layers)} parameters, got {parameters.size}"
        )
    blocks = parameters.reshape(n_layers + 1, 2, n_qubits)

    def rotations(block: np.ndarray) -> List[Gate]:
        gates = [Gate(GateKind.RY, (q,), block[0, q]) for q in range(n_qubits)]
        return gates + [Gate(GateKind.RZ, (q,), block[1, q]) for q in range(n_qubits)]

    gates = rotations(blocks[0])
    for layer in range(1, n_layers + 1):
        gates += [Gate(GateKind.CNOT, (q, q + 1)) for q in range(n_qubits - 2, -1, -1)]
        gates += rotations(blocks[layer])
    return Circuit(n_qubits, tuple(gates))


def calibrate_learning_rate(
    loss: Callable[[np.ndarray], float],
    initial_point: np.ndarray,
    config: VqeConfig,
    rng: np.random.Generator,
) -> float:
    """Pick a so the first update has roughly target_magnitude per parameter."""
    c = config.perturbation
    total = 0.0
    for _ in range(config.calibration_steps):
        delta = rng.choice([-1.0, 1.0], size=initial_point.size)
        total += abs(loss(initial_point + c * delta) - loss(initial_point - c * delta)) / (2 * c)
    average = total / max(config.calibration_steps, 1)
    if average < 1e-10:
        return config.target_magnitude
    return config.target_magnitude / average


def spsa_minimize(
    loss: Callable[[np.ndarray], float],
    initial_point: Sequence[float],
    config: VqeConfig,
    rng: np.random.Generator,
    progress: Optional[Callable[[int, float], None]] = None,
) -> Tuple[np.ndarray, float, List[float], int, float]:
    """Minimize with SPSA; returns (best point, best value, history, evaluations, a)."""
    x = np.array(initial_point, dtype=float)
    best_x, best_f = x.copy(), loss(x)
    evaluations = 1

    a = config.learning_rate
    if a is None:
        a = calibrate_learning_rate(loss, x, config, rng)
        evaluations += 2 * config.calibration_steps

    history: List[float] = []
    for k in range(config.max_iterations):
        a_k = a / (k + 1 + config.stability_constant) ** config.alpha
        c_k = config.perturbation / (k + 1) ** config.gamma
        delta = rng.choice([-1.0, 1.0], size=x.size)

        plus, minus = x + c_k * delta, x - c_k * delta
        f_plus, f_minus = loss(plus), loss(minus)
        evaluations += 2
        for point, value in ((plus, f_plus), (minus, f_minus)):
            if value < best_f:
                best_x, best_f = point.copy(), value

        x = x - a_k * (f_plus - f_minus) / (2 * c_k) * delta
        history.append(best_f)
        if progress:
            progress(k + 1, best_f)

    final = loss(x)
    evaluations += 1
    if final < best_f:
        best_x, best_f = x.copy(), final
    return best_x, float(best_f), history, evaluations, float(a)


def run_vqe(
    params: ModelParams,
    config: VqeConfig,
    progress: Optional[Callable[[int, float], None]] = None,
) -> VqeResult:
    n = params.n_sites
    rng = np.random.default_rng(config.seed)
    hamiltonian = build_hamiltonian(params) if n <= DENSE_CAP else None
    reference = StateVector.zero(n)

    def prepare(theta: np.ndarray) -> StateVector:
        return apply_circuit(reference, efficient_su2_circuit(n, config.n_layers, theta))

    def loss(theta: np.ndarray) -> float:
        return energy_expectation(prepare(theta), params, hamiltonian)

    initial = rng.uniform(-config.initial_scale, config.initial_scale, parameter_count(n, config.n_layers))
    best_x, best_f, history, evaluations, a = spsa_minimize(loss, initial, config, rng, progress)
    return VqeResult(
        state=prepare(best_x),
        energy=best_f,
        parameters=best_x,
        history=history,
        evaluations=evaluations,
        learning_rate=a,
        seed=config.seed,
    )


def vqe_ground_state(params: ModelParams, config: VqeConfig) -> Tuple[StateVector, float]:
    result = run_vqe(params, config)
    return result.state, result.energy


def best_of_seeds(params: ModelParams, config: VqeConfig, seeds: Sequence[int]) -> VqeResult:
    results = [run_vqe(params, VqeConfig(**{**config.to_dict(), "seed": seed})) for seed in seeds]
    return min(results, key=lambda result: result.energy)


# ============================================================================
# SCATTERING RUNS
# ============================================================================


def prepare_vacuum(
    params: ModelParams,
    vacuum: VacuumConfig,
    vqe_config: Optional[VqeConfig] = None,
) -> Tuple[StateVector, Dict]:
    """Return the vacuum state and a description of how it was made."""
    vacuum = VacuumConfig.coerce(vacuum)
    info: Dict = {"vacuum_source": vacuum.source.value}
    if vacuum.source == VacuumSource.TRIVIAL:
        state = StateVector.zero(params.n_sites)
    elif vacuum.source == VacuumSource.EXACT_GROUND:
        energy, state = exact_ground_state(params)
        info["vacuum_energy"] = energy
    elif vacuum.source == VacuumSource.VQE:
        result = run_vqe(params, vqe_config or VqeConfig())
        state = result.state
        info["vacuum_energy"] = result.energy
        info["vqe_evaluations"] = result.evaluations
    else:
        state = imaginary_time_ground_state(params, vacuum.dtau, vacuum.n_steps)
        info["vacuum_energy"] = energy_expectation(state, params)
    return state, info


def prepare_scattering_state(
    params: ModelParams,
    packets: Sequence[WavePacketSpec],
    variant: PrepVariant,
    vacuum_state: StateVector,
) -> Tuple[StateVector, Dict]:
    """Put the packets on top of the vacuum; the truncated unitary path post-selects ancillas."""
    variant = PrepVariant(variant)
    n = params.n_sites
    metrics: Dict = {"variant": variant.value}

    if variant != PrepVariant.TRUNCATED_UNITARY:
        return apply_packet_oracles(vacuum_state, packets, variant, n), metrics

    circuit = build_packet_circuit(packets, variant, n)
    state = apply_circuit(vacuum_state.extend(circuit.width - n), circuit)
    probability = 1.0
    for plan in plan_packets(packets, n):
        projection = project_ancilla(state, plan.ancilla, 0)
        probability *= projection.probability
        state = projection.state
    metrics["post_selection_probability"] = probability
    return reduce_register(state, range(n)), metrics


def run_scattering_experiment(
    params: ModelParams,
    packets: Sequence[WavePacketSpec],
    variant: PrepVariant,
    trotter: TrotterConfig,
    vacuum=VacuumSource.EXACT_GROUND,
    vqe_config: Optional[VqeConfig] = None,
    vacuum_state: Optional[StateVector] = None,
    progress: Optional[Callable[[int, int], None]] = None,
) -> TrajectoryDataset:
    """Vacuum, packet preparation and Trotter evolution with the standard observers."""
    vacuum = VacuumConfig.coerce(vacuum)
    params = trotter.resolve(params)
    info: Dict = {}
    if vacuum_state is None:
        vacuum_state, info = prepare_vacuum(params, vacuum, vqe_config)

    state, metrics = prepare_scattering_state(params, packets, variant, vacuum_state)
    dataset = evolve_trajectory(state, params, trotter, standard_observers(params.n_sites), progress)

    dataset.metrics.update(info)
    dataset.metrics.update(metrics)
    if len(packets) == 2 and params.n_sites % 2 == 0:
        dataset.metrics.update(preparation_metrics(packets, params.n_sites, variant))
    dataset.config_echo = {
        "model": params.to_dict(),
        "packets": [spec.to_dict() for spec in packets],
        "variant": PrepVariant(variant).value,
        "trotter": trotter.to_dict(),
        "vacuum": vacuum.to_dict(),
    }
    if vacuum.source == VacuumSource.VQE:
        dataset.config_echo["vqe"] = (vqe_config or VqeConfig()).to_dict()
    return dataset


# ============================================================================
# RELATIVE ERROR STUDY
# ============================================================================


@dataclass
class ErrorRow:
    j_coupling: float
    g_coupling: float
    occupation_twp: float = math.nan
    entropy_twp: float = math.nan
    occupation_tuwp: float = math.nan
    entropy_tuwp: float = math.nan
    post_selection_probability: float = math.nan
    status: str = "ok"
    message: str = ""

    @property
    def failed(self) -> bool:
        return self.status != "ok"

    def to_dict(self) -> Dict:
        return dict(self.__dict__)


@dataclass
class ErrorReport:
    """Relative percent errors of TWP and TUWP against EWP over a (J, g) grid"""

    rows: List[ErrorRow] = field(default_factory=list)
    aggregation: str = "l2"
    config_echo: Dict = field(default_factory=dict)

    @property
    def failed_rows(self) -> List[ErrorRow]:
        return [row for row in self.rows if row.failed]

    def row(self, j_coupling: float, g_coupling: float) -> ErrorRow:
        for row in self.rows:
            if math.isclose(row.j_coupling, j_coupling) and math.isclose(row.g_coupling, g_coupling):
                return row
        raise KeyError(f"No row for J = {j_coupling}, g = {g_coupling}")

    def to_text(self) -> str:
        header = f"{'J':>6} {'g':>6} | {'occ TWP':>9} {'S TWP':>9} | {'occ TUWP':>9} {'S TUWP':>9} | {'P(post)':>8}"
        lines = [header, "-" * len(header)]
        for row in self.rows:
            if row.failed:
                lines.append(f"{row.j_coupling:>6.2f} {row.g_coupling:>6.2f} | FAILED: {row.message}")
                continue
            lines.append(
                f"{row.j_coupling:>6.2f} {row.g_coupling:>6.2f} | "
                f"{row.occupation_twp:>8.3f}% {row.entropy_twp:>8.3f}% | "
                f"{row.occupation_tuwp:>8.3f}% {row.entropy_tuwp:>8.3f}% | "
                f"{row.post_selection_probability:>8.4f}"
            )
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        columns = list(ErrorRow.__dataclass_fields__)
        lines = [",".join(columns)]
        for row in self.rows:
            values = row.to_dict()
            lines.append(",".join(
                repr(values[c]) if isinstance(values[c], float) else str(values[c]).replace(",", ";")
                for c in columns
            ))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> Dict:
        return {
            "aggregation": self.aggregation,
            "config_echo": self.config_echo,
            "rows": [row.to_dict() for row in self.rows],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ErrorReport":
        return cls(
            rows=[ErrorRow(**row) for row in data.get("rows", [])],
            aggregation=data.get("aggregation", "l2"),
            config_echo=data.get("config_echo", {}),
        )


def run_table_cell(
    params: ModelParams,
    packets: Sequence[WavePacketSpec],
    trotter: TrotterConfig,
    vacuum: VacuumConfig,
    vqe_config: Optional[VqeConfig] = None,
    exclude_initial: bool = True,
) -> Dict[str, ErrorRow]:
    """One (J, g) cell: three trajectories, rows for both aggregations.

    All variants share the interacting vacuum unless vacuum.reference is
    "free", in which case the exact packets go on the g = 0 vacuum.
    """
    vacuum = VacuumConfig.coerce(vacuum)
    params = trotter.resolve(params)
    vacuum_state, _ = prepare_vacuum(params, vacuum, vqe_config)
    reference_vacuum = vacuum_state
    if vacuum.reference == "free" and params.g_coupling != 0:
        reference_vacuum, _ = prepare_vacuum(params.with_couplings(g_coupling=0.0), vacuum, vqe_config)
    runs = {
        variant: run_scattering_experiment(
            params, packets, variant, trotter, vacuum, vqe_config,
            vacuum_state=reference_vacuum if variant == PrepVariant.EXACT_ORACLE else vacuum_state,
        )
        for variant in PrepVariant
    }
    reference = runs[PrepVariant.EXACT_ORACLE]
    probability = runs[PrepVariant.TRUNCATED_UNITARY].metrics["post_selection_probability"]

    rows = {}
    for aggregation in AGGREGATIONS:
        occupation_twp, entropy_twp = relative_error_series(
            reference, runs[PrepVariant.TRUNCATED_ORACLE], aggregation, exclude_initial
        )
        occupation_tuwp, entropy_tuwp = relative_error_series(
            reference, runs[PrepVariant.TRUNCATED_UNITARY], aggregation, exclude_initial
        )
        rows[aggregation] = ErrorRow(
            j_coupling=params.j_coupling,
            g_coupling=params.g_coupling,
            occupation_twp=occupation_twp,
            entropy_twp=entropy_twp,
            occupation_tuwp=occupation_tuwp,
            entropy_tuwp=entropy_tuwp,
            post_selection_probability=probability,
        )
    return rows


def table1_reports(
    grid: Sequence[Tuple[float, float]],
    base_params: ModelParams,
    packets: Sequence[WavePacketSpec],
    trotter: TrotterConfig,
    vacuum=VacuumSource.EXACT_GROUND,
    vqe_config: Optional[VqeConfig] = None,
    exclude_initial: bool = True,
    jobs: int = 1,
    progress: Optional[Callable[[Tuple[float, float], bool], None]] = None,
    cell_runner: Callable[..., Dict[str, ErrorRow]] = run_table_cell,
) -> Dict[str, ErrorReport]:
    """Sweep the (J, g) grid once and report it under every aggregation.

    A failing cell becomes a failed row instead of aborting the sweep.
    """
    vacuum = VacuumConfig.coerce(vacuum)
    cells = [base_params.with_couplings(j_coupling=j, g_coupling=g) for j, g in grid]
    arguments = [(cell, packets, trotter, vacuum, vqe_config, exclude_initial) for cell in cells]
    results: Dict[int, Dict[str, ErrorRow]] = {}

    def settle(index: int, compute: Callable[[], Dict[str, ErrorRow]]):
        cell = cells[index]
        try:
            results[index] = compute()
        except Exception as e:
            failure = ErrorRow(cell.j_coupling, cell.g_coupling, status="failed", message=f"{type(e).__name__}: {e}")
            results[index] = {aggregation: failure for aggregation in AGGREGATIONS}
        if progress:
            progress((cell.j_coupling, cell.g_coupling), not results[index][AGGREGATIONS[0]].failed)

    if jobs <= 1:
        for index, args in enumerate(arguments):
            settle(index, lambda: cell_runner(*args))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(cell_runner, *args): index for index, args in enumerate(arguments)}
            for future in as_completed(futures):
                settle(futures[future], future.result)

    config_echo = {
        "model": base_params.to_dict(),
        "grid": [list(cell) for cell in grid],
        "packets": [spec.to_dict() for spec in packets],
        "trotter": trotter.to_dict(),
        "vacuum": vacuum.to_dict(),
        "exclude_initial": exclude_initial,
    }
    return {
        aggregation: ErrorReport(
            rows=[results[index][aggregation] for index in range(len(cells))],
            aggregation=aggregation,
            config_echo=config_echo,
        )
        for aggregation in AGGREGATIONS
    }


def table1_report(
    grid: Sequence[Tuple[float, float]],
    base_params: ModelParams,
    packets: Sequence[WavePacketSpec],
    trotter: TrotterConfig,
    vacuum=VacuumSource.EXACT_GROUND,
    vqe_config: Optional[VqeConfig] = None,
    aggregation: str = "l2",
    exclude_initial: bool = True,
    jobs: int = 1,
) -> ErrorReport:
    if aggregation not in AGGREGATIONS:
        raise ValueError(f"aggregation must be one of {AGGREGATIONS}, got {aggregation!r}")
    reports = table1_reports(grid, base_params, packets, trotter, vacuum, vqe_config, exclude_initial, jobs)
    return reports[aggregation]

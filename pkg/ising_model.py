"""
Modified Transverse-Field Ising Model
Hamiltonian, Jordan-Wigner fermion operators, momentum grids and the dense
exact-diagonalization oracles used to validate every circuit in this repo.

H = -sum_bonds (J X_j X_{j+1} + g Z_j Z_{j+1}) - h sum_j Z_j
"""

from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh

from circuit_engine import StateVector, pauli_on

# Largest lattice for which dense 2^N x 2^N operators are built
DENSE_CAP = 12

_SPARSE_PAULI = {
    "I": sp.identity(2, dtype=complex, format="csr"),
    "X": sp.csr_matrix(np.array([[0, 1], [1, 0]], dtype=complex)),
    "Y": sp.csr_matrix(np.array([[0, -1j], [1j, 0]], dtype=complex)),
    "Z": sp.csr_matrix(np.array([[1, 0], [0, -1]], dtype=complex)),
}
# sigma^- = |1><0| creates a particle on an empty site
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)


class CapacityError(ValueError):
    """Raised when a dense operator would exceed DENSE_CAP sites"""


class Boundary(str, Enum):
    PERIODIC = "periodic"
    OPEN = "open"


class Parity(str, Enum):
    ODD = "odd"
    EVEN = "even"


@dataclass(frozen=True)
class ModelParams:
    """Lattice size, couplings and boundary of the modified TFIM"""

    n_sites: int
    j_coupling: float = 0.0
    h_field: float = 1.0
    g_coupling: float = 0.0
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        if isinstance(self.n_sites, bool) or int(self.n_sites) != self.n_sites:
            raise ValueError(f"n_sites must be an integer, got {self.n_sites!r}")
        if self.n_sites < 2:
            raise ValueError(f"n_sites must be at least 2, got {self.n_sites}")
        object.__setattr__(self, "n_sites", int(self.n_sites))
        for name in ("j_coupling", "h_field", "g_coupling"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    def bonds(self) -> List[Tuple[int, int]]:
        """Nearest-neighbour qubit pairs (0-based).

        Periodic N = 2 has a single bond: the wrap (2, 1) is the same pair as
        (1, 2) and is not added again, so the bond terms appear once where the
        literal sum with sigma_{N+1} = sigma_1 would count them twice.
        """
        n = self.n_sites
        pairs = [(j, j + 1) for j in range(n - 1)]
        if self.boundary == Boundary.PERIODIC and n > 2:
            pairs.append((n - 1, 0))
        return pairs

    def with_couplings(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def to_dict(self) -> Dict:
        return {
            "n_sites": self.n_sites,
            "j_coupling": self.j_coupling,
            "h_field": self.h_field,
            "g_coupling": self.g_coupling,
            "boundary": self.boundary.value,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ModelParams":
        return cls(**data)


@dataclass(frozen=True)
class MomentumGrid:
    parity: Parity
    values: Tuple[float, ...]


def _check_dense(n_sites: int):
    if n_sites > DENSE_CAP:
        raise CapacityError(
            f"Dense operators are limited to N <= {DENSE_CAP} sites, got N = {n_sites}"
        )


# ============================================================================
# OPERATORS
# ============================================================================


def pauli_matrix(pauli: str) -> sp.csr_matrix:
    """Sparse matrix of a Pauli string; character q acts on qubit q (little-endian)."""
    if set(pauli) - set("IXYZ"):
        raise ValueError(f"Malformed Pauli string {pauli!r}")
    result = sp.identity(1, dtype=complex, format="csr")
    for op in reversed(pauli):
        result = sp.kron(result, _SPARSE_PAULI[op], format="csr")
    return result


def _embed(local: Dict[int, np.ndarray], n_qubits: int) -> np.ndarray:
    result = sp.identity(1, dtype=complex, format="csr")
    for q in range(n_qubits - 1, -1, -1):
        factor = sp.csr_matrix(local[q]) if q in local else _SPARSE_PAULI["I"]
        result = sp.kron(result, factor, format="csr")
    return result.toarray()


def hamiltonian_terms(params: ModelParams) -> List[Tuple[float, str]]:
    """H as (coefficient, Pauli string) pairs; zero-coupling terms are omitted."""
    n = params.n_sites
    terms: List[Tuple[float, str]] = []
    for a, b in params.bonds():
        if params.j_coupling != 0.0:
            terms.append((-params.j_coupling, pauli_on(n, {a: "X", b: "X"})))
        if params.g_coupling != 0.0:
            terms.append((-params.g_coupling, pauli_on(n, {a: "Z", b: "Z"})))
    if params.h_field != 0.0:
        for j in range(n):
            terms.append((-params.h_field, pauli_on(n, {j: "Z"})))
    return terms


def build_hamiltonian(params: ModelParams) -> np.ndarray:
    """Dense Hermitian 2^N x 2^N Hamiltonian."""
    _check_dense(params.n_sites)
    dim = 2 ** params.n_sites
    total = sp.csr_matrix((dim, dim), dtype=complex)
    for coefficient, pauli in hamiltonian_terms(params):
        total = total + coefficient * pauli_matrix(pauli)
    return total.toarray()


def jw_creation(site: int, n_sites: int) -> np.ndarray:
    """c_site^dagger = prod_{i<site} (-Z_i) sigma^-_site, sites 1-based."""
    _check_dense(n_sites)
    if not 1 <= site <= n_sites:
        raise IndexError(f"Site {site} outside 1..{n_sites}")
    q = site - 1
    local = {i: -_SPARSE_PAULI["Z"].toarray() for i in range(q)}
    local[q] = SIGMA_MINUS
    return _embed(local, n_sites)


def jw_annihilation(site: int, n_sites: int) -> np.ndarray:
    return jw_creation(site, n_sites).conj().T


def number_operator(site: int, n_sites: int) -> np.ndarray:
    """n_site = c^dagger c = (1 - Z_site) / 2."""
    creation = jw_creation(site, n_sites)
    return creation @ creation.conj().T


def _popcount(values: np.ndarray) -> np.ndarray:
    counts = np.zeros(values.shape, dtype=np.int64)
    remaining = values.copy()
    while np.any(remaining):
        counts += remaining & 1
        remaining >>= 1
    return counts


def apply_creation(amplitudes: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Matrix-free c_site^dagger on a flat amplitude array (extra high qubits pass through)."""
    if not 1 <= site <= n_sites:
        raise IndexError(f"Site {site} outside 1..{n_sites}")
    amplitudes = np.asarray(amplitudes, dtype=complex)
    q = site - 1
    indices = np.arange(amplitudes.size)
    empty = ((indices >> q) & 1) == 0
    source = indices[empty]

    occupied_below = _popcount(source & ((1 << q) - 1))
    # each -Z_i contributes -1 on an empty site and +1 on an occupied one
    sign = np.where((q - occupied_below) % 2 == 0, 1.0, -1.0)

    out = np.zeros_like(amplitudes)
    out[source | (1 << q)] = sign * amplitudes[source]
    return out


def momentum_grid(n_sites: int, parity: Parity) -> MomentumGrid:
    """Allowed momenta in (-pi, pi]: 2 pi m / N (odd sector) or (2m + 1) pi / N (even)."""
    if n_sites % 2:
        raise ValueError(f"Momentum grids need an even lattice size, got N = {n_sites}")
    parity = Parity(parity)
    half = n_sites // 2
    if parity == Parity.ODD:
        values = [2 * np.pi * m / n_sites for m in range(-half + 1, half + 1)]
    else:
        values = [(2 * m + 1) * np.pi / n_sites for m in range(-half, half)]
    return MomentumGrid(parity, tuple(float(v) for v in values))


# ============================================================================
# EXACT DIAGONALIZATION
# ============================================================================


@lru_cache(maxsize=4)
def _eigensystem(params: ModelParams) -> Tuple[np.ndarray, np.ndarray]:
    hamiltonian = build_hamiltonian(params)
    # every term is a real matrix in the Z basis
    energies, vectors = eigh(hamiltonian.real)
    return energies, vectors.astype(complex)


def exact_ground_state(params: ModelParams) -> Tuple[float, StateVector]:
    """Lowest eigenpair; the largest-magnitude amplitude is made real and positive."""
    energies, vectors = _eigensystem(params)
    ground = vectors[:, 0].copy()
    pivot = ground[np.argmax(np.abs(ground))]
    ground *= abs(pivot) / pivot
    return float(energies[0]), StateVector.from_amplitudes(ground)


def exact_evolve(state: StateVector, params: ModelParams, time: float) -> StateVector:
    """exp(-i H t)|state> through the cached eigendecomposition."""
    if state.n_qubits != params.n_sites:
        raise ValueError(
            f"State has {state.n_qubits} qubits but the model has {params.n_sites} sites"
        )
    energies, vectors = _eigensystem(params)
    coefficients = vectors.conj().T @ state.amplitudes
    evolved = vectors @ (np.exp(-1j * energies * time) * coefficients)
    return StateVector(evolved)


def four_fermion_identity_check(n_sites: int, boundary: Boundary = Boundary.PERIODIC) -> float:
    """Max deviation between 4 sum c+_j c_j c+_{j+1} c_{j+1} and its Pauli form."""
    _check_dense(n_sites)
    params = ModelParams(n_sites, boundary=boundary)
    dim = 2 ** n_sites
    identity = np.eye(dim, dtype=complex)
    numbers = {site: number_operator(site, n_sites) for site in range(1, n_sites + 1)}

    lhs = np.zeros((dim, dim), dtype=complex)
    rhs = np.zeros((dim, dim), dtype=complex)
    for a, b in params.bonds():
        lhs += 4 * numbers[a + 1] @ numbers[b + 1]
        z_a = pauli_matrix(pauli_on(n_sites, {a: "Z"})).toarray()
        z_b = pauli_matrix(pauli_on(n_sites, {b: "Z"})).toarray()
        rhs += identity - z_a - z_b + z_a @ z_b
    return float(np.max(np.abs(lhs - rhs)))

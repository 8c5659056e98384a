import logging
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy import linalg

logger = logging.getLogger(__name__)

# Local (qubit, qutrit) and joint (two qubits, three qubits, two qutrits) sizes
LOCAL_DIMS = (2, 3)
JOINT_DIMS = (4, 8, 9)
SUPPORTED_DIMS = LOCAL_DIMS + JOINT_DIMS
MAX_DIM = 9

TOL_NORM = 1e-12
TOL_HERMITIAN = 1e-12
TOL_UNITARY = 1e-12
TOL_PSD = -1e-10


def _frozen(values, shape_check) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    shape_check(arr)
    arr.setflags(write=False)
    return arr


def _check_dim(dim: int) -> None:
    if dim not in SUPPORTED_DIMS:
        raise ValueError(f"Unsupported dimension {dim}; expected one of {SUPPORTED_DIMS}")


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state |psi> in the row-major product basis"""
    amplitudes: np.ndarray

    def __post_init__(self):
        def check(arr):
            if arr.ndim != 1:
                raise ValueError(f"State vector must be one-dimensional, got shape {arr.shape}")
            _check_dim(arr.shape[0])
        object.__setattr__(self, 'amplitudes', _frozen(self.amplitudes, check))
        norm = float(np.sum(np.abs(self.amplitudes) ** 2))
        if abs(norm - 1.0) > TOL_NORM:
            raise ValueError(f"State vector is not normalized: sum |c|^2 = {norm!r}")

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @classmethod
    def basis(cls, index: int, dim: int) -> 'StateVector':
        """Computational basis state |index>"""
        if not 0 <= index < dim:
            raise ValueError(f"Basis index {index} out of range for dimension {dim}")
        amps = np.zeros(dim, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def density(self) -> 'DensityMatrix':
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix"""
    entries: np.ndarray

    def __post_init__(self):
        def check(arr):
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise ValueError(f"Density matrix must be square, got shape {arr.shape}")
            _check_dim(arr.shape[0])
        object.__setattr__(self, 'entries', _frozen(self.entries, check))
        diagnostics = validate_density(self.entries)
        if not diagnostics.ok:
            raise ValueError(f"Invalid density matrix: {diagnostics}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def expectation(self, operator: np.ndarray) -> float:
        """Tr[O rho] for a Hermitian observable O"""
        return float(np.real(np.trace(np.asarray(operator) @ self.entries)))

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.entries)).copy()


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    """Square matrix with U^dagger U = I"""
    entries: np.ndarray

    def __post_init__(self):
        def check(arr):
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise ValueError(f"Unitary must be square, got shape {arr.shape}")
            _check_dim(arr.shape[0])
        object.__setattr__(self, 'entries', _frozen(self.entries, check))
        defect = unitarity_defect(self.entries)
        if defect >= TOL_UNITARY:
            raise ValueError(f"Matrix is not unitary: ||U^dagger U - I|| = {defect!r}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def dagger(self) -> 'UnitaryMatrix':
        return UnitaryMatrix(self.entries.conj().T)

    def apply(self, state: StateVector) -> StateVector:
        if state.dim != self.dim:
            raise ValueError(f"Dimension mismatch: unitary {self.dim} vs state {state.dim}")
        return StateVector(self.entries @ state.amplitudes)

    @classmethod
    def identity(cls, dim: int) -> 'UnitaryMatrix':
        return cls(np.eye(dim, dtype=complex))


@dataclass(frozen=True)
class DensityDiagnostics:
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float

    @property
    def ok(self) -> bool:
        return (self.hermiticity_defect < TOL_HERMITIAN
                and self.trace_defect < TOL_NORM
                and self.min_eigenvalue >= TOL_PSD)


Operand = Union[StateVector, DensityMatrix, UnitaryMatrix, np.ndarray]


def unitarity_defect(matrix: np.ndarray) -> float:
    m = np.asarray(matrix, dtype=complex)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def validate_density(rho: Union[DensityMatrix, np.ndarray]) -> DensityDiagnostics:
    """Report Hermiticity defect, trace defect and the smallest eigenvalue.

    Never raises on content; only a non-square input is rejected.
    """
    m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {m.shape}")
    herm_defect = float(np.max(np.abs(m - m.conj().T)))
    trace_defect = float(abs(np.trace(m) - 1.0))
    hermitian_part = (m + m.conj().T) / 2
    min_eig = float(linalg.eigvalsh(hermitian_part)[0])
    return DensityDiagnostics(herm_defect, trace_defect, min_eig)


def _raw(x: Operand) -> np.ndarray:
    if isinstance(x, StateVector):
        return x.amplitudes
    if isinstance(x, (DensityMatrix, UnitaryMatrix)):
        return x.entries
    return np.asarray(x, dtype=complex)


def tensor(a: Operand, b: Operand) -> Operand:
    """Kronecker product; |ij> sits at index i*dim_b + j.

    Typed operands keep their type (state x state -> state, unitary x unitary
    -> unitary, density x density -> density); raw arrays give raw arrays.
    """
    left, right = _raw(a), _raw(b)
    if left.ndim != right.ndim or left.ndim not in (1, 2):
        raise ValueError("tensor needs two vectors or two matrices")
    dim = left.shape[0] * right.shape[0]
    if dim > MAX_DIM:
        raise ValueError(f"Tensor product dimension {dim} exceeds supported maximum {MAX_DIM}")
    product = np.kron(left, right)
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(product)
    if isinstance(a, UnitaryMatrix) and isinstance(b, UnitaryMatrix):
        return UnitaryMatrix(product)
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(product)
    return product


def tensor_all(*operands: Operand) -> Operand:
    result = operands[0]
    for operand in operands[1:]:
        result = tensor(result, operand)
    return result


def evolve_density(rho: DensityMatrix, unitary: UnitaryMatrix) -> DensityMatrix:
    """U rho U^dagger"""
    if rho.dim != unitary.dim:
        raise ValueError(f"Dimension mismatch: density {rho.dim} vs unitary {unitary.dim}")
    u = unitary.entries
    return DensityMatrix(u @ rho.entries @ u.conj().T)


def mix_densities(weights: Sequence[float], densities: Sequence[DensityMatrix]) -> DensityMatrix:
    """Convex combination sum_k w_k rho_k"""
    if len(weights) != len(densities):
        raise ValueError("weights and densities differ in length")
    total = np.zeros_like(densities[0].entries)
    for weight, rho in zip(weights, densities):
        if weight < 0:
            raise ValueError(f"Negative mixing weight {weight!r}")
        total = total + weight * rho.entries
    return DensityMatrix(total)


def permutation_unitary(mapping: Sequence[int]) -> UnitaryMatrix:
    """Unitary sending |i> to |mapping[i]>"""
    dim = len(mapping)
    if sorted(mapping) != list(range(dim)):
        raise ValueError(f"Not a permutation: {list(mapping)}")
    m = np.zeros((dim, dim), dtype=complex)
    for source, target in enumerate(mapping):
        m[target, source] = 1.0
    return UnitaryMatrix(m)


IDENTITY2 = UnitaryMatrix.identity(2)
SIGMA_X = permutation_unitary([1, 0])

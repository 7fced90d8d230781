"""Small-dimension dense operator algebra: Haar sampling, swap operator,
and the dense-circuit oracle used to cross-check the gate-wise simulator.

Dense paths scale as 4^n in memory and worse in time, so every entry point
takes an `n_cap` guard (default 6 qubits).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .states import apply_gates_array

DEFAULT_DENSE_CAP = 6


class ResourceGuardError(RuntimeError):
    """A dense-operator path was requested above its qubit cap."""


@dataclass
class DenseOperator:
    """A dim x dim complex matrix with optional structure guarantees."""

    entries: np.ndarray
    hermitian_flag: bool = False
    unitary_flag: bool = False

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1] or self.entries.shape[0] < 1:
            raise ValueError(f"entries must be a square matrix, got shape {self.entries.shape}")
        if self.hermitian_flag:
            dev = np.max(np.abs(self.entries - self.entries.conj().T))
            if dev > 1e-12:
                raise ValueError(f"hermitian_flag set but deviation is {dev:.3e}")
        if self.unitary_flag:
            dev = unitarity_deviation(self.entries)
            if dev > 1e-10:
                raise ValueError(f"unitary_flag set but U^dag U deviates from I by {dev:.3e}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def unitarity_deviation(matrix: np.ndarray) -> float:
    dim = matrix.shape[0]
    return float(np.max(np.abs(matrix.conj().T @ matrix - np.eye(dim))))


def haar_unitaries(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Stack of `count` Haar-random unitaries, shape (count, dim, dim).

    QR of a complex Ginibre matrix with the diag(R)/|diag(R)| phase
    correction; without the correction plain QR is not Haar distributed.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    z = rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal((count, dim, dim))
    q, r = np.linalg.qr(z / np.sqrt(2.0))
    diag = r[..., np.arange(dim), np.arange(dim)]
    q *= (diag / np.abs(diag))[..., None, :]
    return q


def haar_random_unitary(dim: int, rng: np.random.Generator) -> DenseOperator:
    """One Haar-random unitary on a dim-dimensional space."""
    return DenseOperator(haar_unitaries(dim, 1, rng)[0], unitary_flag=True)


def swap_operator(d: int) -> DenseOperator:
    """Subsystem swap W|i>|j> = |j>|i> on a d^2-dimensional space."""
    if d < 1:
        raise ValueError("subsystem dimension must be >= 1")
    w = np.zeros((d * d, d * d))
    i, j = np.divmod(np.arange(d * d), d)
    w[j * d + i, np.arange(d * d)] = 1.0
    return DenseOperator(w, hermitian_flag=True, unitary_flag=True)


def circuit_matrix(gates, n_qubits: int) -> np.ndarray:
    """Dense matrix of a gate sequence, built by evolving all basis columns.

    Rows of the working array are the evolved basis states, so the result
    is the transpose of the final array.
    """
    dim = 1 << n_qubits
    rows = np.eye(dim, dtype=complex)
    rows = apply_gates_array(rows, gates, n_qubits)
    return rows.T.copy()


def dense_circuit_unitary(gates, n_qubits: int, n_cap: int = DEFAULT_DENSE_CAP) -> DenseOperator:
    """Dense unitary of a gate sequence (oracle path, guarded by `n_cap`)."""
    if n_qubits > n_cap:
        raise ResourceGuardError(
            f"dense circuit unitary requested for n={n_qubits} above cap {n_cap}"
        )
    return DenseOperator(circuit_matrix(gates, n_qubits), unitary_flag=True)

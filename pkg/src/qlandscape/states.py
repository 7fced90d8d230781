"""Dense statevector simulation of qubit registers.

Conventions used throughout the package:

* Qubit 0 is the most significant bit of the amplitude index, i.e. basis
  state |b0 b1 ... b_{n-1}> lives at index sum_i b_i * 2^(n-1-i).
* Rotations are full-angle: R_k(theta) = exp(-i * theta * sigma_k), so any
  expectation value is 2pi/2 = pi periodic in every rotation angle and the
  parameter-shift offsets are +-pi/4.
* All amplitudes are complex128.

The low-level kernels accept arrays whose *last* axis is the amplitude
index; leading axes are treated as a batch (used for propagating many
ensemble members, branch pairs, or the columns of an operator in lockstep).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

AXES = ("x", "y", "z")
_AXIS_CODE = {"x": 0, "y": 1, "z": 2}

PAULI_MATRICES = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """2x2 matrix of exp(-i*angle*sigma_axis)."""
    c, s = math.cos(angle), math.sin(angle)
    if axis == "x":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if axis == "y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if axis == "z":
        return np.array([[c - 1j * s, 0.0], [0.0, c + 1j * s]])
    raise ValueError(f"unknown rotation axis {axis!r}")


def axis_codes(axes: np.ndarray) -> np.ndarray:
    """Map an array of 'x'/'y'/'z' strings to uint8 codes 0/1/2."""
    codes = np.empty(axes.shape, dtype=np.uint8)
    for name, code in _AXIS_CODE.items():
        codes[axes == name] = code
    return codes


def rotation_matrices(codes: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """Batch of exp(-i*theta*sigma_k) matrices, shape (S, 2, 2)."""
    c = np.cos(angles)
    s = np.sin(angles)
    mats = np.zeros(angles.shape + (2, 2), dtype=complex)
    x, y, z = codes == 0, codes == 1, codes == 2
    mats[x, 0, 0] = c[x]
    mats[x, 1, 1] = c[x]
    mats[x, 0, 1] = -1j * s[x]
    mats[x, 1, 0] = -1j * s[x]
    mats[y, 0, 0] = c[y]
    mats[y, 1, 1] = c[y]
    mats[y, 0, 1] = -s[y]
    mats[y, 1, 0] = s[y]
    mats[z, 0, 0] = c[z] - 1j * s[z]
    mats[z, 1, 1] = c[z] + 1j * s[z]
    return mats


def pauli_matrices(codes: np.ndarray) -> np.ndarray:
    """Batch of Pauli matrices selected by axis code, shape (S, 2, 2)."""
    mats = np.zeros(codes.shape + (2, 2), dtype=complex)
    x, y, z = codes == 0, codes == 1, codes == 2
    mats[x, 0, 1] = 1.0
    mats[x, 1, 0] = 1.0
    mats[y, 0, 1] = -1.0j
    mats[y, 1, 0] = 1.0j
    mats[z, 0, 0] = 1.0
    mats[z, 1, 1] = -1.0
    return mats


def apply_one_qubit(amps: np.ndarray, mat: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Apply one 2x2 matrix on `qubit` to amplitudes with last axis 2^n."""
    shape = amps.shape
    psi = amps.reshape(-1, 1 << qubit, 2, 1 << (n - 1 - qubit))
    a, b = psi[:, :, 0], psi[:, :, 1]
    out = np.empty_like(psi)
    out[:, :, 0] = mat[0, 0] * a + mat[0, 1] * b
    out[:, :, 1] = mat[1, 0] * a + mat[1, 1] * b
    return out.reshape(shape)


def apply_one_qubit_batch(amps: np.ndarray, mats: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Apply per-sample 2x2 matrices (S, 2, 2) to amplitudes (S, ..., 2^n)."""
    shape = amps.shape
    ns = shape[0]
    psi = amps.reshape(ns, -1, 1 << qubit, 2, 1 << (n - 1 - qubit))
    a, b = psi[:, :, :, 0], psi[:, :, :, 1]
    m00, m01 = mats[:, 0, 0].reshape(ns, 1, 1, 1), mats[:, 0, 1].reshape(ns, 1, 1, 1)
    m10, m11 = mats[:, 1, 0].reshape(ns, 1, 1, 1), mats[:, 1, 1].reshape(ns, 1, 1, 1)
    out = np.empty_like(psi)
    out[:, :, :, 0] = m00 * a + m01 * b
    out[:, :, :, 1] = m10 * a + m11 * b
    return out.reshape(shape)


@lru_cache(maxsize=None)
def ladder_phases(n: int) -> np.ndarray:
    """Diagonal of the C-Phase ladder on an open n-qubit chain (+-1)."""
    if n < 2:
        raise ValueError("the C-Phase ladder needs at least 2 qubits")
    idx = np.arange(1 << n)
    signs = np.ones(1 << n)
    for i in range(n - 1):
        hi = (idx >> (n - 1 - i)) & 1
        lo = (idx >> (n - 2 - i)) & 1
        signs = np.where((hi & lo) == 1, -signs, signs)
    signs.setflags(write=False)
    return signs


@dataclass(frozen=True)
class Rotation:
    """Single-qubit rotation exp(-i*angle*sigma_axis) on one qubit."""

    qubit: int
    axis: str
    angle: float


@dataclass(frozen=True)
class CPhaseLadder:
    """C-Phase (diag(1,1,1,-1)) between qubits (i, i+1) for i = 0..n-2."""


Gate = "Rotation | CPhaseLadder"


def apply_gate_array(amps: np.ndarray, gate, n: int) -> np.ndarray:
    if isinstance(gate, Rotation):
        if not 0 <= gate.qubit < n:
            raise IndexError(f"qubit {gate.qubit} out of range for {n} qubits")
        return apply_one_qubit(amps, rotation_matrix(gate.axis, gate.angle), gate.qubit, n)
    if isinstance(gate, CPhaseLadder):
        return amps * ladder_phases(n)
    raise TypeError(f"unknown gate {gate!r}")


def apply_gates_array(amps: np.ndarray, gates, n: int) -> np.ndarray:
    for gate in gates:
        amps = apply_gate_array(amps, gate, n)
    return amps


@dataclass
class StateVector:
    """Normalized complex amplitude vector for an n-qubit register."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"amplitudes must have length 2^{self.n_qubits}, got shape {self.amplitudes.shape}"
            )

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def from_product(cls, single: np.ndarray, n_qubits: int) -> "StateVector":
        amps = np.array([1.0 + 0.0j])
        for _ in range(n_qubits):
            amps = np.kron(amps, np.asarray(single, dtype=complex))
        return cls(n_qubits, amps)

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class InitialStateSpec:
    """Recipe for a pure product input state.

    kind "all-zero" gives |0...0>; "tilted-product" gives
    (exp(-i*angle*sigma_y)|0>)^(x n), the tilted fiducial state with
    angle pi/8 by default.
    """

    kind: str
    n_qubits: int
    angle: float = math.pi / 8

    def __post_init__(self):
        if self.kind not in ("all-zero", "tilted-product"):
            raise ValueError(f"unknown initial state kind {self.kind!r}")
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")

    def realize(self) -> StateVector:
        if self.kind == "all-zero":
            return StateVector.zero(self.n_qubits)
        single = np.array([math.cos(self.angle), math.sin(self.angle)], dtype=complex)
        return StateVector.from_product(single, self.n_qubits)


def apply_rotation(state: StateVector, qubit: int, axis: str, angle: float) -> StateVector:
    """Rotate `qubit` by exp(-i*angle*sigma_axis) in place."""
    if not 0 <= qubit < state.n_qubits:
        raise IndexError(f"qubit {qubit} out of range for {state.n_qubits} qubits")
    if not math.isfinite(angle):
        raise ValueError("rotation angle must be finite")
    state.amplitudes = apply_one_qubit(
        state.amplitudes, rotation_matrix(axis, angle), qubit, state.n_qubits
    )
    return state


def apply_cphase_ladder(state: StateVector) -> StateVector:
    """Apply the C-Phase ladder of the 1-D open chain in place."""
    if state.n_qubits < 2:
        raise ValueError("the C-Phase ladder needs at least 2 qubits")
    state.amplitudes = state.amplitudes * ladder_phases(state.n_qubits)
    return state


def apply_gates(state: StateVector, gates) -> StateVector:
    state.amplitudes = apply_gates_array(state.amplitudes, gates, state.n_qubits)
    return state

"""Weighted Pauli-string observables and their expectation values."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .states import PAULI_MATRICES, StateVector, apply_one_qubit


class NumericConsistencyError(RuntimeError):
    """A quantity that must be real carries too large an imaginary part."""


@dataclass(frozen=True)
class PauliTerm:
    """coefficient * product of single-qubit Paulis on distinct qubits.

    An empty factor list is the identity term.
    """

    coefficient: float
    factors: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coefficient", float(self.coefficient))
        factors = tuple(sorted((int(q), a) for q, a in self.factors))
        qubits = [q for q, _ in factors]
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"duplicate qubit index in Pauli term: {qubits}")
        if any(q < 0 for q in qubits):
            raise ValueError("qubit indices must be non-negative")
        if any(a not in ("x", "y", "z") for _, a in factors):
            raise ValueError("Pauli axes must be one of x, y, z")
        object.__setattr__(self, "factors", factors)

    def apply(self, amps: np.ndarray, n: int) -> np.ndarray:
        """Return coefficient * P |amps> (last axis is the amplitude index)."""
        out = amps
        for qubit, axis in self.factors:
            if qubit >= n:
                raise IndexError(f"qubit {qubit} out of range for {n} qubits")
            out = apply_one_qubit(out, PAULI_MATRICES[axis], qubit, n)
        return self.coefficient * out


@dataclass
class Observable:
    """Hermitian measurement operator: a real-weighted sum of Pauli strings.

    Duplicate strings are merged on construction so that Tr[H^2] can be
    evaluated from Pauli orthogonality as 2^n * sum(coeff^2).
    """

    n_qubits: int
    terms: tuple[PauliTerm, ...]

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        merged: dict[tuple, float] = {}
        for term in self.terms:
            for qubit, _ in term.factors:
                if qubit >= self.n_qubits:
                    raise IndexError(
                        f"qubit {qubit} out of range for {self.n_qubits} qubits"
                    )
            merged[term.factors] = merged.get(term.factors, 0.0) + term.coefficient
        if not merged:
            raise ValueError("an Observable needs at least one term")
        self.terms = tuple(PauliTerm(c, f) for f, c in sorted(merged.items()))

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def trace(self) -> float:
        """Tr[H]; only the identity string contributes."""
        return self.dim * sum(t.coefficient for t in self.terms if not t.factors)

    def trace_square(self) -> float:
        """Tr[H^2] = 2^n * sum coeff^2, by Pauli-string orthogonality."""
        return self.dim * sum(t.coefficient ** 2 for t in self.terms)

    def hs_norm_sq(self) -> float:
        """Squared Hilbert-Schmidt norm ||H||_2^2 = Tr[H^2]."""
        return self.trace_square()

    def apply(self, amps: np.ndarray) -> np.ndarray:
        """H |amps>, summed over terms (last axis is the amplitude index)."""
        out = np.zeros_like(amps)
        for term in self.terms:
            contrib = amps
            for qubit, axis in term.factors:
                contrib = apply_one_qubit(contrib, PAULI_MATRICES[axis], qubit, self.n_qubits)
            out += term.coefficient * contrib
        return out

    def to_dense(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix built term by term with Kronecker products."""
        dim = self.dim
        dense = np.zeros((dim, dim), dtype=complex)
        eye = np.eye(2, dtype=complex)
        for term in self.terms:
            by_qubit = dict(term.factors)
            mat = np.array([[term.coefficient]], dtype=complex)
            for q in range(self.n_qubits):
                mat = np.kron(mat, PAULI_MATRICES[by_qubit[q]] if q in by_qubit else eye)
            dense += mat
        return dense


def single_pauli(n_qubits: int, qubit: int, axis: str) -> Observable:
    return Observable(n_qubits, (PauliTerm(1.0, ((qubit, axis),)),))


def global_z(n_qubits: int) -> Observable:
    """Tensor product of sigma_z on every qubit (the global cost operator)."""
    return Observable(n_qubits, (PauliTerm(1.0, tuple((q, "z") for q in range(n_qubits))),))


def local_z(n_qubits: int, k: int = 2) -> Observable:
    """sigma_z string on the first min(k, n) qubits (the local cost operator)."""
    k = min(k, n_qubits)
    return Observable(n_qubits, (PauliTerm(1.0, tuple((q, "z") for q in range(k))),))


def expectation(state: StateVector, obs: Observable) -> float:
    """<psi|H|psi>; raises if the imaginary residue exceeds 1e-9."""
    if obs.n_qubits != state.n_qubits:
        raise ValueError(
            f"observable acts on {obs.n_qubits} qubits, state has {state.n_qubits}"
        )
    value = complex(np.vdot(state.amplitudes, obs.apply(state.amplitudes)))
    if abs(value.imag) > 1e-9:
        raise NumericConsistencyError(
            f"expectation value has imaginary residue {value.imag:.3e}"
        )
    return value.real

"""Layered hardware-efficient ansatz with tunable expressibility.

A circuit is D layers of (one single-qubit rotation per qubit, then a
C-Phase ladder).  Expressibility is tuned four ways: depth, parameter
correlation (sharing angles across qubits and/or layers), restricting the
rotation axes, and restricting the sampled angle range.

Indices are 0-based everywhere in this module: slot (layer, qubit) with
layer in [0, D) and qubit in [0, n).  The slot flattening used for the
bipartite circuit cut orders rotations within a layer by ascending qubit
index, and the cut puts the target rotation at the end of the right
segment.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .paulis import PauliTerm
from .states import AXES, CPhaseLadder, Rotation


class CorrelationScheme(str, enum.Enum):
    INDEPENDENT = "independent"
    QUBITS = "correlate-qubits"
    LAYERS = "correlate-layers"
    ALL = "correlate-all"


@dataclass(frozen=True)
class AxisPolicy:
    """Which rotation axes are allowed and whether the per-group axis
    assignment is redrawn for every ensemble member."""

    allowed_axes: tuple[str, ...] = AXES
    resample_per_sample: bool = True

    def __post_init__(self):
        axes = tuple(dict.fromkeys(self.allowed_axes))
        if not axes or any(a not in AXES for a in axes):
            raise ValueError(f"allowed_axes must be a nonempty subset of {AXES}")
        object.__setattr__(self, "allowed_axes", axes)


@dataclass(frozen=True)
class AngleDistribution:
    """Angles are drawn uniformly from [base, base + 2*pi*range_fraction]
    per free parameter; base may be a scalar or one value per parameter."""

    base_point: "float | tuple[float, ...]" = 0.0
    range_fraction: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.range_fraction <= 1.0:
            raise ValueError("range_fraction must be in (0, 1]")
        base = self.base_point
        if isinstance(base, (tuple, list, np.ndarray)):
            object.__setattr__(self, "base_point", tuple(float(b) for b in base))
        else:
            object.__setattr__(self, "base_point", float(base))

    def base_array(self, n_free: int) -> np.ndarray:
        base = np.asarray(self.base_point, dtype=float)
        if base.ndim == 0:
            return np.full(n_free, float(base))
        if base.shape != (n_free,):
            raise ValueError(f"base_point has {base.shape[0]} entries, expected {n_free}")
        return base


@dataclass(frozen=True)
class AnsatzSpec:
    n_qubits: int
    depth: int
    scheme: CorrelationScheme = CorrelationScheme.INDEPENDENT
    axis_policy: AxisPolicy = AxisPolicy()
    angles: AngleDistribution = AngleDistribution()

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        if self.depth < 1:
            raise ValueError("depth must be positive")
        object.__setattr__(self, "scheme", CorrelationScheme(self.scheme))

    @property
    def n_free(self) -> int:
        return {
            CorrelationScheme.INDEPENDENT: self.n_qubits * self.depth,
            CorrelationScheme.QUBITS: self.depth,
            CorrelationScheme.LAYERS: self.n_qubits,
            CorrelationScheme.ALL: 1,
        }[self.scheme]

    @property
    def gate_counts(self) -> tuple[int, int]:
        """(rotation count, elementary C-Phase count) = (n*D, (n-1)*D)."""
        return self.n_qubits * self.depth, (self.n_qubits - 1) * self.depth

    def group_index(self, layer: int, qubit: int) -> int:
        """Free-parameter id owning slot (layer, qubit)."""
        if not (0 <= layer < self.depth and 0 <= qubit < self.n_qubits):
            raise IndexError(f"slot ({layer}, {qubit}) out of range")
        if self.scheme is CorrelationScheme.INDEPENDENT:
            return layer * self.n_qubits + qubit
        if self.scheme is CorrelationScheme.QUBITS:
            return layer
        if self.scheme is CorrelationScheme.LAYERS:
            return qubit
        return 0

    def slots_of_group(self, group: int) -> tuple[tuple[int, int], ...]:
        return tuple(
            (l, q)
            for l in range(self.depth)
            for q in range(self.n_qubits)
            if self.group_index(l, q) == group
        )

    def group_table(self) -> np.ndarray:
        """(depth, n) array of free-parameter ids."""
        table = np.empty((self.depth, self.n_qubits), dtype=int)
        for l in range(self.depth):
            for q in range(self.n_qubits):
                table[l, q] = self.group_index(l, q)
        return table


@dataclass(eq=False)
class ParameterAssignment:
    """One sampled set of free angles and per-group axes for a spec."""

    spec: AnsatzSpec
    free_values: np.ndarray       # (n_free,) radians
    group_axes: np.ndarray        # (n_free,) of 'x'/'y'/'z'

    def __post_init__(self):
        self.free_values = np.asarray(self.free_values, dtype=float)
        self.group_axes = np.asarray(self.group_axes, dtype="<U1")
        if self.free_values.shape != (self.spec.n_free,):
            raise ValueError(
                f"free_values must have shape ({self.spec.n_free},), got {self.free_values.shape}"
            )
        if self.group_axes.shape != (self.spec.n_free,):
            raise ValueError(
                f"group_axes must have shape ({self.spec.n_free},), got {self.group_axes.shape}"
            )
        if any(a not in self.spec.axis_policy.allowed_axes for a in self.group_axes):
            raise ValueError("an assigned axis falls outside the allowed set")

    def angle_of(self, layer: int, qubit: int) -> float:
        return float(self.free_values[self.spec.group_index(layer, qubit)])

    def axis_of(self, layer: int, qubit: int) -> str:
        return str(self.group_axes[self.spec.group_index(layer, qubit)])

    def slot_angles(self) -> np.ndarray:
        """(depth, n) array of realized angles."""
        return self.free_values[self.spec.group_table()]

    def slot_axes(self) -> np.ndarray:
        """(depth, n) array of realized axes."""
        return self.group_axes[self.spec.group_table()]


def sample_axes(spec: AnsatzSpec, rng: np.random.Generator) -> np.ndarray:
    """One axis per free-parameter group, uniform over the allowed set."""
    allowed = np.array(spec.axis_policy.allowed_axes, dtype="<U1")
    return allowed[rng.integers(0, len(allowed), size=spec.n_free)]


def sample_assignment(
    spec: AnsatzSpec,
    rng: np.random.Generator,
    axes: "np.ndarray | None" = None,
) -> ParameterAssignment:
    """Draw one ensemble member.

    Angles are drawn first, then axes; fixed-layout ensembles pass the
    pre-drawn `axes` so the angle stream is unaffected.
    """
    base = spec.angles.base_array(spec.n_free)
    free = base + 2.0 * np.pi * spec.angles.range_fraction * rng.random(spec.n_free)
    if axes is None:
        axes = sample_axes(spec, rng)
    return ParameterAssignment(spec, free, axes)


def realize_circuit(spec: AnsatzSpec, assignment: ParameterAssignment) -> list:
    """Deterministic gate list: per layer, rotations by ascending qubit
    index then the entangling ladder (absent for a single qubit)."""
    if assignment.spec != spec:
        raise ValueError("assignment was sampled for a different spec")
    gates: list = []
    angles = assignment.slot_angles()
    axes = assignment.slot_axes()
    for l in range(spec.depth):
        for q in range(spec.n_qubits):
            gates.append(Rotation(q, str(axes[l, q]), float(angles[l, q])))
        if spec.n_qubits >= 2:
            gates.append(CPhaseLadder())
    return gates


def stacked_slot_arrays(
    spec: AnsatzSpec, rngs, fixed_axes: "np.ndarray | None" = None
) -> tuple[np.ndarray, np.ndarray]:
    """Slot angles and axis codes for one draw per generator in `rngs`.

    Returns float angles (k, depth, n) and uint8 axis codes (k, depth, n);
    each draw consumes its generator exactly like `sample_assignment`.
    """
    from .states import axis_codes

    k = len(rngs)
    angles = np.empty((k, spec.depth, spec.n_qubits))
    codes = np.empty((k, spec.depth, spec.n_qubits), dtype=np.uint8)
    for i, rng in enumerate(rngs):
        assignment = sample_assignment(spec, rng, axes=fixed_axes)
        angles[i] = assignment.slot_angles()
        codes[i] = axis_codes(assignment.slot_axes())
    return angles, codes


def target_gate_index(spec: AnsatzSpec, layer: int, qubit: int) -> int:
    """Position of slot (layer, qubit)'s rotation in the realized gate list."""
    if not (0 <= layer < spec.depth and 0 <= qubit < spec.n_qubits):
        raise IndexError(f"target slot ({layer}, {qubit}) out of range")
    per_layer = spec.n_qubits + (1 if spec.n_qubits >= 2 else 0)
    return layer * per_layer + qubit


@dataclass
class SplitCircuit:
    """Bipartite cut U = U_left . U_right with the target rotation as the
    final element of the right segment, and its generator as a Pauli."""

    right: list
    generator: PauliTerm
    left: list


def split_at(
    spec: AnsatzSpec, assignment: ParameterAssignment, target: tuple[int, int]
) -> SplitCircuit:
    layer, qubit = target
    gates = realize_circuit(spec, assignment)
    pos = target_gate_index(spec, layer, qubit)
    generator = PauliTerm(1.0, ((qubit, assignment.axis_of(layer, qubit)),))
    return SplitCircuit(right=gates[: pos + 1], generator=generator, left=gates[pos + 1 :])

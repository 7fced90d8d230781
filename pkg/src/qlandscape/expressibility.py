"""Frame potentials, expressibility measures, and Haar-integration oracles.

The operator-dependent frame potential of an ensemble is
F^(X) = E_{U,V} Tr[X U^dag V X V^dag U]^2 over independent pairs.  For a
pure-state X each pair term collapses to |<psi_U|psi_V>|^4 and is computed
with O(2^n) statevector contractions, which keeps n ~ 12 feasible; for
operator-valued X (Pauli sums or dense matrices) pair terms go through the
dense path, guarded by the qubit cap.

The expressibility of an ensemble with respect to X is
eps = || A(X kron X) ||_2 = sqrt(F_ensemble - F_Haar); sampling noise can
push the difference slightly negative for near-2-design ensembles, in
which case eps clamps to zero with a flag rather than erroring.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ansatz import AnsatzSpec, stacked_slot_arrays, target_gate_index
from .dense import (
    DEFAULT_DENSE_CAP,
    DenseOperator,
    ResourceGuardError,
    haar_unitaries,
    swap_operator,
)
from .paulis import Observable
from .rng import stream
from .states import (
    InitialStateSpec,
    StateVector,
    apply_one_qubit_batch,
    ladder_phases,
    rotation_matrices,
)

_CHUNK = 2048


@dataclass
class HaarSampler:
    """Haar-random unitaries on n qubits."""

    n_qubits: int

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def _stack(self, rngs) -> np.ndarray:
        dim = self.dim
        z = np.stack(
            [
                r.standard_normal((dim, dim)) + 1j * r.standard_normal((dim, dim))
                for r in rngs
            ]
        )
        q, r_ = np.linalg.qr(z / math.sqrt(2.0))
        diag = r_[..., np.arange(dim), np.arange(dim)]
        q *= (diag / np.abs(diag))[..., None, :]
        return q

    def draw_states(self, rngs, psi0: np.ndarray) -> np.ndarray:
        return np.einsum("kij,j->ki", self._stack(rngs), psi0)

    def draw_denses(self, rngs, n_cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
        if self.n_qubits > n_cap:
            raise ResourceGuardError(f"dense Haar draw for n={self.n_qubits} above cap {n_cap}")
        return self._stack(rngs)


@dataclass
class FixedSampler:
    """Uniform draws (with replacement) from a stored list of unitaries."""

    unitaries: np.ndarray

    def __post_init__(self):
        self.unitaries = np.asarray(self.unitaries, dtype=complex)
        if self.unitaries.ndim != 3 or self.unitaries.shape[1] != self.unitaries.shape[2]:
            raise ValueError("unitaries must be a (count, dim, dim) stack")

    @property
    def dim(self) -> int:
        return self.unitaries.shape[1]

    def _indices(self, rngs) -> np.ndarray:
        count = self.unitaries.shape[0]
        return np.array([int(r.integers(0, count)) for r in rngs])

    def draw_states(self, rngs, psi0: np.ndarray) -> np.ndarray:
        return np.einsum("kij,j->ki", self.unitaries[self._indices(rngs)], psi0)

    def draw_denses(self, rngs, n_cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
        return self.unitaries[self._indices(rngs)]


@dataclass
class AnsatzSampler:
    """Circuit ensemble of an :class:`AnsatzSpec`, or one side of its
    bipartite cut (`segment` in {"full", "left", "right"}, where "right"
    includes the target rotation)."""

    spec: AnsatzSpec
    segment: str = "full"
    target: "tuple[int, int] | None" = None
    fixed_axes: "np.ndarray | None" = None

    def __post_init__(self):
        if self.segment not in ("full", "left", "right"):
            raise ValueError(f"unknown segment {self.segment!r}")
        if self.segment != "full" and self.target is None:
            raise ValueError("segment cuts need a target slot")

    @property
    def dim(self) -> int:
        return 1 << self.spec.n_qubits

    @property
    def n_qubits(self) -> int:
        return self.spec.n_qubits

    def _bounds(self) -> tuple[int, int]:
        """Flat gate positions [start, stop) covered by the segment."""
        spec = self.spec
        per_layer = spec.n_qubits + (1 if spec.n_qubits >= 2 else 0)
        total = spec.depth * per_layer
        if self.segment == "full":
            return 0, total
        pos = target_gate_index(spec, *self.target)
        return (0, pos + 1) if self.segment == "right" else (pos + 1, total)

    def _evolve(self, amps: np.ndarray, angles: np.ndarray, codes: np.ndarray) -> np.ndarray:
        spec = self.spec
        n = spec.n_qubits
        start, stop = self._bounds()
        phases = ladder_phases(n) if n >= 2 else None
        per_layer = n + (1 if n >= 2 else 0)
        flat = 0
        for l in range(spec.depth):
            for q in range(n):
                if start <= flat < stop:
                    mats = rotation_matrices(codes[:, l, q], angles[:, l, q])
                    amps = apply_one_qubit_batch(amps, mats, q, n)
                flat += 1
            if phases is not None:
                if start <= flat < stop:
                    amps = amps * phases
                flat += 1
        return amps

    def _draws(self, rngs):
        return stacked_slot_arrays(self.spec, rngs, self.fixed_axes)

    def draw_states(self, rngs, psi0: np.ndarray) -> np.ndarray:
        angles, codes = self._draws(rngs)
        amps = np.broadcast_to(psi0, (len(rngs), self.dim)).copy()
        return self._evolve(amps, angles, codes)

    def draw_denses(self, rngs, n_cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
        if self.spec.n_qubits > n_cap:
            raise ResourceGuardError(
                f"dense ansatz draw for n={self.spec.n_qubits} above cap {n_cap}"
            )
        angles, codes = self._draws(rngs)
        dim = self.dim
        rows = np.broadcast_to(np.eye(dim, dtype=complex), (len(rngs), dim, dim)).copy()
        rows = self._evolve(rows, angles, codes)
        return rows.transpose(0, 2, 1)

    def draw_denses_with_generators(self, rngs, n_cap: int = DEFAULT_DENSE_CAP):
        """Segment unitaries plus the per-draw axis code of the target slot."""
        if self.target is None:
            raise ValueError("generators are defined only for segment samplers")
        if self.spec.n_qubits > n_cap:
            raise ResourceGuardError(
                f"dense ansatz draw for n={self.spec.n_qubits} above cap {n_cap}"
            )
        angles, codes = self._draws(rngs)
        dim = self.dim
        rows = np.broadcast_to(np.eye(dim, dtype=complex), (len(rngs), dim, dim)).copy()
        rows = self._evolve(rows, angles, codes)
        lt, qt = self.target
        return rows.transpose(0, 2, 1), codes[:, lt, qt]

    def draw_states_with_generators(self, rngs, psi0: np.ndarray):
        angles, codes = self._draws(rngs)
        if self.target is None:
            raise ValueError("generators are defined only for segment samplers")
        amps = np.broadcast_to(psi0, (len(rngs), self.dim)).copy()
        amps = self._evolve(amps, angles, codes)
        lt, qt = self.target
        return amps, codes[:, lt, qt]


EnsembleSampler = "HaarSampler | FixedSampler | AnsatzSampler"


@dataclass
class FramePotentialEstimate:
    value: float
    stderr: float
    n_pairs: int


@dataclass
class ExpressibilityReport:
    frame_potential: FramePotentialEstimate
    haar_value: float
    epsilon: float
    ratio: float
    clamped_flag: bool

    @property
    def delta(self) -> float:
        """Unclamped F_ensemble - F_Haar."""
        return self.frame_potential.value - self.haar_value

    def epsilon_stderr(self) -> float:
        """Delta-method error bar on epsilon = sqrt(max(0, delta))."""
        sigma_f = self.frame_potential.stderr
        if self.epsilon ** 2 > sigma_f:
            return sigma_f / (2.0 * self.epsilon)
        return math.sqrt(sigma_f)


def _operand(x):
    """Classify X as ("state", amplitudes) or ("dense", matrix, n)."""
    if isinstance(x, StateVector):
        return "state", x.amplitudes
    if isinstance(x, InitialStateSpec):
        return "state", x.realize().amplitudes
    if isinstance(x, Observable):
        return "dense", x
    if isinstance(x, DenseOperator):
        x = x.entries
    if isinstance(x, np.ndarray):
        if np.max(np.abs(x - x.conj().T)) > 1e-10:
            raise ValueError("frame potentials are defined here for Hermitian X only")
        return "dense", x
    raise TypeError(f"unsupported frame-potential operand {type(x)!r}")


def _dense_matrix(x, n_cap: int) -> np.ndarray:
    if isinstance(x, Observable):
        if x.n_qubits > n_cap:
            raise ResourceGuardError(
                f"dense frame-potential path for n={x.n_qubits} above cap {n_cap}"
            )
        return x.to_dense()
    return x


def frame_potential(
    x,
    sampler,
    n_pairs: int,
    seed,
    *,
    n_cap: int = DEFAULT_DENSE_CAP,
) -> FramePotentialEstimate:
    """Monte-Carlo frame potential over independent (U, V) pairs.

    Pair i draws U from stream(seed, i, 0) and V from stream(seed, i, 1),
    so estimates are reproducible and chunk-size independent.
    """
    if n_pairs < 2:
        raise ValueError("n_pairs must be >= 2")
    kind, payload = _operand(x)
    if kind == "dense":
        matrix = _dense_matrix(payload, n_cap)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_pairs:
        k = min(_CHUNK, n_pairs - done)
        rngs_u = [stream(seed, done + i, 0) for i in range(k)]
        rngs_v = [stream(seed, done + i, 1) for i in range(k)]
        if kind == "state":
            su = sampler.draw_states(rngs_u, payload)
            sv = sampler.draw_states(rngs_v, payload)
            overlap = np.einsum("ki,ki->k", su.conj(), sv)
            terms = np.abs(overlap) ** 4
        else:
            us = sampler.draw_denses(rngs_u, n_cap=n_cap)
            vs = sampler.draw_denses(rngs_v, n_cap=n_cap)
            m = us.conj().transpose(0, 2, 1) @ vs
            # Tr[X M X M^dag] = Tr[(X M)(X M^dag)]
            xm = matrix @ m
            xmh = matrix @ m.conj().transpose(0, 2, 1)
            tr = np.einsum("kij,kji->k", xm, xmh)
            terms = tr.real ** 2
        total += float(np.sum(terms))
        total_sq += float(np.sum(terms * terms))
        done += k
    value = total / n_pairs
    var = max(total_sq / n_pairs - value * value, 0.0)
    stderr = math.sqrt(var / n_pairs)
    return FramePotentialEstimate(value=value, stderr=stderr, n_pairs=n_pairs)


def haar_frame_potential(x) -> float:
    """Closed-form Haar frame potential from Tr[X] and Tr[X^2]."""
    kind, payload = _operand(x)
    if kind == "state":
        dim = payload.shape[0]
        tr, tr2 = 1.0, 1.0
    elif isinstance(payload, Observable):
        dim = payload.dim
        tr, tr2 = payload.trace(), payload.trace_square()
    else:
        dim = payload.shape[0]
        tr = float(np.trace(payload).real)
        tr2 = float(np.trace(payload @ payload).real)
    d2 = float(dim) * float(dim)
    value = (tr ** 4 + tr2 ** 2) / (d2 - 1.0) - 2.0 * tr2 * tr ** 2 / (dim * (d2 - 1.0))
    if kind == "state":
        # specialized fiducial-state value; must agree with the general form
        special = 1.0 / ((dim + 1.0) * (dim / 2.0))
        assert abs(value - special) < 1e-12 * max(1.0, special)
        return special
    return value


def expressibility_report(
    x,
    sampler,
    n_pairs: int,
    seed,
    *,
    n_cap: int = DEFAULT_DENSE_CAP,
) -> ExpressibilityReport:
    estimate = frame_potential(x, sampler, n_pairs, seed, n_cap=n_cap)
    haar_value = haar_frame_potential(x)
    delta = estimate.value - haar_value
    clamped = delta < 0.0
    return ExpressibilityReport(
        frame_potential=estimate,
        haar_value=haar_value,
        epsilon=math.sqrt(max(delta, 0.0)),
        ratio=estimate.value / haar_value,
        clamped_flag=clamped,
    )


def dense_haar_twirl(x2) -> DenseOperator:
    """Second-moment Haar twirl of an operator on a d^2-dimensional space.

    The twirl projects onto span{I, W}: alpha*I + beta*W with coefficients
    solved from Tr[X2] and Tr[X2 W].
    """
    if isinstance(x2, DenseOperator):
        x2 = x2.entries
    x2 = np.asarray(x2, dtype=complex)
    dim2 = x2.shape[0]
    d = math.isqrt(dim2)
    if d * d != dim2 or x2.shape != (dim2, dim2):
        raise ValueError("twirl input must be square on a d^2-dimensional space")
    w = swap_operator(d).entries
    tr = complex(np.trace(x2))
    tr_w = complex(np.einsum("ij,ji->", x2, w))
    denom = d * d - 1.0
    alpha = (tr - tr_w / d) / denom
    beta = (tr_w - tr / d) / denom
    return DenseOperator(alpha * np.eye(dim2) + beta * w)


def dense_epsilon_oracle(
    x,
    sampler,
    n_ensemble: "int | None",
    seed,
    *,
    n_cap: int = 3,
) -> float:
    """Direct Hilbert-Schmidt norm of the second-moment deviation map.

    Builds A(X kron X) = HaarTwirl(X kron X) - mean_k U_k^(kron 2)
    (X kron X) U_k^(dag kron 2) over `n_ensemble` draws and returns its
    Frobenius norm.  This is the 16^n-scaling oracle that cross-validates
    sqrt(F_ensemble - F_Haar).

    With a :class:`FixedSampler` and n_ensemble None, the mean runs over
    every stored member exactly once (the stored-ensemble mode); the
    result then satisfies oracle^2 = F_list - F_Haar up to roundoff.
    """
    kind, payload = _operand(x)
    if kind == "state":
        matrix = np.outer(payload, payload.conj())
        n_qubits = payload.shape[0].bit_length() - 1
    else:
        matrix = _dense_matrix(payload, n_cap)
        n_qubits = matrix.shape[0].bit_length() - 1
    if n_qubits > n_cap:
        raise ResourceGuardError(f"dense epsilon oracle for n={n_qubits} above cap {n_cap}")
    d = matrix.shape[0]
    x2 = np.kron(matrix, matrix)
    acc = np.zeros((d * d, d * d), dtype=complex)

    def accumulate(us: np.ndarray) -> None:
        u2 = np.einsum("kab,kcd->kacbd", us, us).reshape(us.shape[0], d * d, d * d)
        acc[:] += np.tensordot(u2 @ x2, u2.conj(), axes=([0, 2], [0, 2]))

    if n_ensemble is None:
        if not isinstance(sampler, FixedSampler):
            raise ValueError("exhaustive averaging needs a FixedSampler")
        total = sampler.unitaries.shape[0]
        for start in range(0, total, _CHUNK):
            accumulate(sampler.unitaries[start : start + _CHUNK])
    else:
        total = n_ensemble
        done = 0
        while done < n_ensemble:
            k = min(_CHUNK, n_ensemble - done)
            rngs = [stream(seed, done + i) for i in range(k)]
            accumulate(sampler.draw_denses(rngs, n_cap=n_cap))
            done += k
    mean_action = acc / total
    twirl = dense_haar_twirl(x2).entries
    return float(np.linalg.norm(twirl - mean_action))


@dataclass
class IdentityCheck:
    """One Haar-integration identity versus its Monte-Carlo average."""

    name: str
    analytic: complex
    estimate: complex
    stderr: float
    n_samples: int

    @property
    def abs_error(self) -> float:
        return abs(self.estimate - self.analytic)

    @property
    def z_score(self) -> float:
        return self.abs_error / self.stderr if self.stderr > 0 else math.inf

    @property
    def rel_error(self) -> float:
        scale = abs(self.analytic)
        return self.abs_error / scale if scale > 0 else math.inf

    def passed(self, max_z: float = 5.0, max_rel: float = 0.01) -> bool:
        return self.z_score <= max_z and self.rel_error <= max_rel


def _complex_mean_stderr(samples: np.ndarray) -> tuple[complex, float]:
    n = samples.size
    mean = complex(np.mean(samples))
    var = float(np.var(samples.real) + np.var(samples.imag))
    return mean, math.sqrt(var / n)


def haar_moment_identity1(a, b, d: int) -> complex:
    """Closed form of the first-moment average E Tr[W A W^dag B]."""
    return complex(np.trace(a) * np.trace(b) / d)


def haar_moment_identity2(a, b, c, e, d: int) -> complex:
    """Closed form of E Tr[W A W^dag B W C W^dag E]."""
    tr = np.trace
    d2m1 = d * d - 1.0
    return complex(
        (tr(a) * tr(c) * tr(b @ e) + tr(a @ c) * tr(b) * tr(e)) / d2m1
        - (tr(a @ c) * tr(b @ e) + tr(a) * tr(b) * tr(c) * tr(e)) / (d * d2m1)
    )


def haar_moment_identity3(a, b, c, e, d: int) -> complex:
    """Closed form of E Tr[W A W^dag B] Tr[W C W^dag E]."""
    tr = np.trace
    d2m1 = d * d - 1.0
    return complex(
        (tr(a) * tr(b) * tr(c) * tr(e) + tr(a @ c) * tr(b @ e)) / d2m1
        - (tr(a @ c) * tr(b) * tr(e) + tr(a) * tr(c) * tr(b @ e)) / (d * d2m1)
    )


def haar_two_copy_integral(a2, b2, d: int) -> complex:
    """Closed form of E Tr[A2 U^(kron 2) B2 U^(dag kron 2)] via the swap
    operator on the d^2-dimensional doubled space."""
    tr = np.trace
    w = swap_operator(d).entries
    d2m1 = d * d - 1.0
    return complex(
        (tr(a2) * tr(b2) + tr(a2 @ w) * tr(b2 @ w)) / d2m1
        - (tr(a2 @ w) * tr(b2) + tr(a2) * tr(b2 @ w)) / (d * d2m1)
    )


def verify_haar_identities(
    d: int, n_samples: int, seed, operator_kind: str = "ginibre"
) -> list[IdentityCheck]:
    """Monte-Carlo check of the four first/second-moment Haar identities.

    Fixed random operators A, B, C, D on the d-dim space (and A2, B2 on
    the d^2-dim space for the two-copy integral) are drawn once per run;
    the identities' closed forms are compared against averages over
    `n_samples` Haar unitaries.

    `operator_kind` "ginibre" draws plain complex Gaussian matrices.
    Their closed-form values often sit close to zero relative to the
    integrand spread, which makes *relative* error targets meaningless at
    any realistic sample count; "positive" draws G G^dag / d instead
    (Gaussian-derived positive operators), whose identity values are well
    separated from zero so both z-score and relative-error tolerances are
    statistically meaningful.
    """
    if operator_kind not in ("ginibre", "positive"):
        raise ValueError(f"unknown operator kind {operator_kind!r}")
    op_rng = stream(seed, "operators")

    def gauss(dim):
        g = op_rng.standard_normal((dim, dim)) + 1j * op_rng.standard_normal((dim, dim))
        if operator_kind == "positive":
            return g @ g.conj().T / dim
        return g

    a, b, c, e = gauss(d), gauss(d), gauss(d), gauss(d)
    a2, b2 = gauss(d * d), gauss(d * d)

    analytic1 = haar_moment_identity1(a, b, d)
    analytic2 = haar_moment_identity2(a, b, c, e, d)
    analytic3 = haar_moment_identity3(a, b, c, e, d)
    analytic_int = haar_two_copy_integral(a2, b2, d)

    haar_rng = stream(seed, "haar")
    s1 = np.empty(n_samples, dtype=complex)
    s2 = np.empty(n_samples, dtype=complex)
    s3 = np.empty(n_samples, dtype=complex)
    s_int = np.empty(n_samples, dtype=complex)
    done = 0
    while done < n_samples:
        k = min(_CHUNK, n_samples - done)
        u = haar_unitaries(d, k, haar_rng)
        uh = u.conj().transpose(0, 2, 1)
        m_a = u @ a @ uh
        m_c = u @ c @ uh
        sl = slice(done, done + k)
        s1[sl] = np.einsum("kij,ji->k", m_a, b)
        s2[sl] = np.einsum("kij,ji->k", m_a @ b @ m_c, e)
        s3[sl] = s1[sl] * np.einsum("kij,ji->k", m_c, e)
        u2 = np.einsum("kab,kcd->kacbd", u, u).reshape(k, d * d, d * d)
        # Tr[A2 U2 B2 U2^dag] = Tr[(A2 U2)(B2 U2^dag)]
        s_int[sl] = np.einsum("kij,kji->k", a2 @ u2, b2 @ u2.conj().transpose(0, 2, 1))
        done += k

    checks = []
    for name, analytic, samples in (
        ("identity1", analytic1, s1),
        ("identity2", analytic2, s2),
        ("identity3", analytic3, s3),
        ("two-copy-integral", analytic_int, s_int),
    ):
        estimate, stderr = _complex_mean_stderr(samples)
        checks.append(
            IdentityCheck(
                name=name,
                analytic=complex(analytic),
                estimate=estimate,
                stderr=stderr,
                n_samples=n_samples,
            )
        )
    return checks

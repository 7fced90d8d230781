"""Experiment configuration: TOML files describing sweep grids.

A config names one experiment kind, one cost, sampling sizes, a seed, and
a grid; the sweep runs every cell of the Cartesian product
n x depth x scheme x axes x r x target and writes one CSV row per cell.

Targets are written 1-based in configs and CSV (layer 1, qubit 1 is the
first rotation of the circuit, matching the usual "theta_1^1" notation);
the strings "mid" and "last" select the middle/final layer on qubit 1.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from ..ansatz import AngleDistribution, AnsatzSpec, AxisPolicy, CorrelationScheme
from ..gradients import CostSpec
from ..paulis import Observable, PauliTerm, global_z, local_z
from ..rng import stream
from ..states import AXES, InitialStateSpec

EXPERIMENT_KINDS = (
    "variance-vs-n",
    "variance-vs-depth",
    "correlation-schemes",
    "axis-restriction",
    "angle-restriction",
    "expressibility-correlation",
    "bound-verification",
    "haar-identity-check",
)

SCHEME_NAMES = tuple(s.value for s in CorrelationScheme)


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""

    def __init__(self, path: str, message: str):
        self.field_path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class Cell:
    """One grid point, with 1-based target coordinates."""

    index: int
    n: int
    depth: int
    scheme: str
    axes: str
    r: float
    target_layer: int
    target_qubit: int

    @property
    def target0(self) -> tuple[int, int]:
        """0-based (layer, qubit) slot."""
        return self.target_layer - 1, self.target_qubit - 1


def _expect(table: dict, key: str, kind, path: str, default=None, required=False):
    if key not in table:
        if required:
            raise ConfigError(f"{path}.{key}", "missing required key")
        return default
    value = table[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ConfigError(f"{path}.{key}", f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def _int_list(table: dict, key: str, path: str, default):
    raw = table.get(key, default)
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{path}.{key}", "expected a nonempty list of integers")
    out = []
    for i, v in enumerate(raw):
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ConfigError(f"{path}.{key}[{i}]", "expected a positive integer")
        out.append(v)
    return out


@dataclass
class ExperimentConfig:
    kind: str
    cost: str = "global"
    cost_k: int = 2
    custom_terms: "tuple | None" = None
    state: str = "tilted"
    tilt_angle: float = math.pi / 8
    grid_n: tuple = (4,)
    grid_depth: tuple = (20,)
    grid_scheme: tuple = ("independent",)
    grid_axes: tuple = ("xyz",)
    grid_r: tuple = (1.0,)
    grid_target: tuple = ((1, 1),)
    axes_resample: bool = True
    base_point: str = "zero"
    n_samples: int = 1000
    n_pairs: int = 5000
    inner_samples: int = 1000
    seed: int = 0
    dense_cap: int = 6
    method: str = "commutator"
    chain_rule_for_correlated: bool = True
    output: Path = Path("sweep.csv")

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError("experiment.kind", f"unknown kind {self.kind!r}")
        if self.cost not in ("global", "local", "custom"):
            raise ConfigError("experiment.cost", f"unknown cost {self.cost!r}")
        if self.state not in ("tilted", "zero"):
            raise ConfigError("experiment.state", f"unknown state {self.state!r}")
        if self.base_point not in ("zero", "random"):
            raise ConfigError("angles.base_point", f"unknown base point {self.base_point!r}")
        for name in self.grid_scheme:
            if name not in SCHEME_NAMES:
                raise ConfigError("grid.scheme", f"unknown scheme {name!r}")
        for axes in self.grid_axes:
            if not axes or any(a not in AXES for a in axes):
                raise ConfigError("grid.axes", f"axes {axes!r} must be a nonempty subset of xyz")
        for r in self.grid_r:
            if not 0.0 < r <= 1.0:
                raise ConfigError("grid.r", f"r={r} must be in (0, 1]")
        self.output = Path(self.output)

    # -- construction -------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict, base_dir: "Path | None" = None) -> "ExperimentConfig":
        exp = data.get("experiment")
        if not isinstance(exp, dict):
            raise ConfigError("experiment", "missing [experiment] table")
        grid = data.get("grid", {})
        if not isinstance(grid, dict):
            raise ConfigError("grid", "expected a [grid] table")
        angles = data.get("angles", {})
        if not isinstance(angles, dict):
            raise ConfigError("angles", "expected an [angles] table")

        kind = _expect(exp, "kind", str, "experiment", required=True)
        raw_targets = grid.get("target", [[1, 1]])
        if not isinstance(raw_targets, list) or not raw_targets:
            raise ConfigError("grid.target", "expected a nonempty list")
        targets = []
        for i, t in enumerate(raw_targets):
            if isinstance(t, str):
                if t not in ("mid", "last", "first"):
                    raise ConfigError(f"grid.target[{i}]", f"unknown target keyword {t!r}")
                targets.append(t)
            elif isinstance(t, list) and len(t) == 2 and all(isinstance(v, int) for v in t):
                if t[0] < 1 or t[1] < 1:
                    raise ConfigError(f"grid.target[{i}]", "target coordinates are 1-based")
                targets.append((t[0], t[1]))
            else:
                raise ConfigError(f"grid.target[{i}]", "expected [layer, qubit] or a keyword")

        raw_r = grid.get("r", [1.0])
        if not isinstance(raw_r, list) or not raw_r:
            raise ConfigError("grid.r", "expected a nonempty list")
        rs = []
        for i, v in enumerate(raw_r):
            if isinstance(v, int) and not isinstance(v, bool):
                v = float(v)
            if not isinstance(v, float):
                raise ConfigError(f"grid.r[{i}]", "expected a number")
            rs.append(v)

        schemes = grid.get("scheme", ["independent"])
        axes_list = grid.get("axes", ["xyz"])
        if not isinstance(schemes, list) or not isinstance(axes_list, list):
            raise ConfigError("grid", "scheme and axes must be lists")

        output = _expect(exp, "output", str, "experiment", default="sweep.csv")
        output_path = Path(output)
        if base_dir is not None and not output_path.is_absolute():
            output_path = base_dir / output_path

        return cls(
            kind=kind,
            cost=_expect(exp, "cost", str, "experiment", default="global"),
            cost_k=_expect(exp, "cost_k", int, "experiment", default=2),
            custom_terms=_parse_custom_terms(exp.get("cost_terms")),
            state=_expect(exp, "state", str, "experiment", default="tilted"),
            tilt_angle=_expect(exp, "tilt_angle", float, "experiment", default=math.pi / 8),
            grid_n=tuple(_int_list(grid, "n", "grid", [4])),
            grid_depth=tuple(_int_list(grid, "depth", "grid", [20])),
            grid_scheme=tuple(schemes),
            grid_axes=tuple(axes_list),
            grid_r=tuple(rs),
            grid_target=tuple(targets),
            axes_resample=_expect(exp, "axes_resample", bool, "experiment", default=True),
            base_point=_expect(angles, "base_point", str, "angles", default="zero"),
            n_samples=_expect(exp, "n_samples", int, "experiment", default=1000),
            n_pairs=_expect(exp, "n_pairs", int, "experiment", default=5000),
            inner_samples=_expect(exp, "inner_samples", int, "experiment", default=1000),
            seed=_expect(exp, "seed", int, "experiment", default=0),
            dense_cap=_expect(exp, "dense_cap", int, "experiment", default=6),
            method=_expect(exp, "method", str, "experiment", default="commutator"),
            output=output_path,
        )

    @classmethod
    def from_toml(cls, path: "str | Path") -> "ExperimentConfig":
        path = Path(path)
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
        return cls.from_dict(data, base_dir=path.parent)

    # -- grid ----------------------------------------------------------

    def cells(self) -> list[Cell]:
        out = []
        index = 0
        for n in self.grid_n:
            for depth in self.grid_depth:
                for scheme in self.grid_scheme:
                    for axes in self.grid_axes:
                        for r in self.grid_r:
                            for target in self.grid_target:
                                layer, qubit = _resolve_target(target, depth, n)
                                out.append(
                                    Cell(index, n, depth, scheme, axes, float(r), layer, qubit)
                                )
                                index += 1
        return out

    # -- realized objects ----------------------------------------------

    def state_spec(self, n: int) -> InitialStateSpec:
        if self.state == "zero":
            return InitialStateSpec("all-zero", n)
        return InitialStateSpec("tilted-product", n, self.tilt_angle)

    def observable(self, n: int) -> Observable:
        if self.cost == "global":
            return global_z(n)
        if self.cost == "local":
            return local_z(n, self.cost_k)
        return _custom_observable(self.custom_terms, n)

    def cost_spec(self, n: int) -> CostSpec:
        if self.cost == "custom" and self.custom_terms is not None:
            terms = []
            for term in self.custom_terms:
                terms.append((_custom_state(term, n, self), _custom_observable([term], n)))
            return CostSpec(tuple(terms))
        return CostSpec.single(self.state_spec(n), self.observable(n))

    def ansatz_spec(self, cell: Cell) -> AnsatzSpec:
        base: "float | tuple" = 0.0
        scheme = CorrelationScheme(cell.scheme)
        if self.base_point == "random":
            probe = AnsatzSpec(cell.n, cell.depth, scheme=scheme)
            rng = stream(
                self.seed, "basepoint", cell.n, cell.depth, cell.scheme, cell.axes,
                cell.target_layer, cell.target_qubit,
            )
            base = tuple(rng.uniform(0.0, 2.0 * math.pi, probe.n_free))
        return AnsatzSpec(
            cell.n,
            cell.depth,
            scheme=scheme,
            axis_policy=AxisPolicy(tuple(cell.axes), resample_per_sample=self.axes_resample),
            angles=AngleDistribution(base_point=base, range_fraction=cell.r),
        )

    def config_hash(self) -> str:
        payload = {
            k: (str(v) if isinstance(v, Path) else v)
            for k, v in sorted(self.__dict__.items())
            if k != "output"
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True, default=str).encode()).hexdigest()[:16]


def _resolve_target(target, depth: int, n: int) -> tuple[int, int]:
    if target == "first":
        return 1, 1
    if target == "mid":
        return depth // 2 + 1, 1
    if target == "last":
        return depth, 1
    layer, qubit = target
    if layer > depth or qubit > n:
        raise ConfigError("grid.target", f"target {target} outside a depth-{depth}, {n}-qubit circuit")
    return layer, qubit


def _parse_custom_terms(raw):
    if raw is None:
        return None
    if not isinstance(raw, list) or not raw:
        raise ConfigError("experiment.cost_terms", "expected a nonempty list of tables")
    terms = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise ConfigError(f"experiment.cost_terms[{i}]", "expected a table")
        paulis = entry.get("paulis")
        if not isinstance(paulis, list) or not paulis:
            raise ConfigError(f"experiment.cost_terms[{i}].paulis", "expected a nonempty list")
        parsed = []
        for j, p in enumerate(paulis):
            coeff = p.get("coeff", 1.0)
            ops = p.get("ops", "")
            if not isinstance(ops, str):
                raise ConfigError(f"experiment.cost_terms[{i}].paulis[{j}].ops", "expected a string")
            factors = []
            for token in ops.split():
                axis, idx = token[0], token[1:]
                if axis not in AXES or not idx.isdigit():
                    raise ConfigError(
                        f"experiment.cost_terms[{i}].paulis[{j}].ops",
                        f"bad token {token!r}; use e.g. 'z0 z1'",
                    )
                factors.append((int(idx), axis))
            parsed.append((float(coeff), tuple(factors)))
        terms.append({"state": entry.get("state", "tilted"), "paulis": tuple(parsed)})
    return tuple(terms)


def _custom_observable(terms, n: int) -> Observable:
    paulis = []
    for term in terms:
        for coeff, factors in term["paulis"]:
            paulis.append(PauliTerm(coeff, factors))
    return Observable(n, tuple(paulis))


def _custom_state(term, n: int, config: ExperimentConfig) -> InitialStateSpec:
    if term["state"] == "zero":
        return InitialStateSpec("all-zero", n)
    return InitialStateSpec("tilted-product", n, config.tilt_angle)

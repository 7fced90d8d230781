"""Sweep runner: evaluates every grid cell of a config and persists rows.

CSV layout: `#`-prefixed metadata comments (config hash, seed, versions,
timestamp), one header row, then one row per cell in cell-index order.
Floats are serialized with 17 significant digits so values round-trip
losslessly.  Two runs of the same config and seed produce identical rows
except for the wall_ms timing column (and the timestamped header comment).

A killed run leaves a prefix of the full row set; re-running skips cells
whose coordinates (plus seed) are already present and appends the rest,
reproducing the uninterrupted file.

Cells are independent tasks; the QLANDSCAPE_THREADS environment variable
sets the worker count (default 1).  Results are identical at any thread
count because every cell derives its own RNG streams from
(seed, "cell", cell_index).
"""
from __future__ import annotations

import concurrent.futures
import os
import time
from dataclasses import dataclass, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from ..ansatz import sample_axes
from ..bounds import (
    BoundReport,
    theorem_bounds,
    two_design_variance_l,
    two_design_variance_r,
    two_design_variance_rl,
)
from ..expressibility import AnsatzSampler, expressibility_report, verify_haar_identities
from ..gradients import AXES_STREAM_TAG, estimate_gradient_statistics
from ..rng import stream
from .config import Cell, ExperimentConfig

CSV_COLUMNS = (
    "experiment", "n", "depth", "scheme", "axes", "r",
    "target_layer", "target_qubit", "cost", "n_samples", "seed",
    "mean", "mean_stderr", "variance", "variance_stderr",
    "f_rho", "f_rho_stderr", "f_h", "f_h_stderr",
    "ratio_rho", "ratio_h", "eps_rho", "eps_h",
    "bound_r", "bound_l", "bound_rl", "slack_r", "slack_l", "slack_rl",
    "wall_ms",
)

_KEY_COLUMNS = CSV_COLUMNS[:11]


def format_float(x: float) -> str:
    return f"{x:.17g}"


@dataclass
class SweepRow:
    experiment: str
    n: int
    depth: int
    scheme: str
    axes: str
    r: float
    target_layer: int
    target_qubit: int
    cost: str
    n_samples: int
    seed: int
    mean: "float | None" = None
    mean_stderr: "float | None" = None
    variance: "float | None" = None
    variance_stderr: "float | None" = None
    f_rho: "float | None" = None
    f_rho_stderr: "float | None" = None
    f_h: "float | None" = None
    f_h_stderr: "float | None" = None
    ratio_rho: "float | None" = None
    ratio_h: "float | None" = None
    eps_rho: "float | None" = None
    eps_h: "float | None" = None
    bound_r: "float | None" = None
    bound_l: "float | None" = None
    bound_rl: "float | None" = None
    slack_r: "float | None" = None
    slack_l: "float | None" = None
    slack_rl: "float | None" = None
    wall_ms: int = 0

    def to_fields(self) -> list[str]:
        out = []
        for name in CSV_COLUMNS:
            value = getattr(self, name)
            if value is None:
                out.append("")
            elif isinstance(value, float):
                out.append(format_float(value))
            else:
                out.append(str(value))
        return out

    @classmethod
    def from_fields(cls, parts: list[str]) -> "SweepRow":
        if len(parts) != len(CSV_COLUMNS):
            raise ValueError(f"expected {len(CSV_COLUMNS)} fields, got {len(parts)}")
        kwargs = {}
        types = {f.name: f.type for f in fields(cls)}
        for name, raw in zip(CSV_COLUMNS, parts):
            if types[name] in ("int", int):
                kwargs[name] = int(raw)
            elif types[name] in ("str", str):
                kwargs[name] = raw
            elif types[name] in ("float", float):
                kwargs[name] = float(raw)
            else:
                kwargs[name] = float(raw) if raw else None
        return cls(**kwargs)

    def key(self) -> tuple:
        return tuple(
            format_float(v) if isinstance(v, float) else str(v)
            for v in (getattr(self, c) for c in _KEY_COLUMNS)
        )


def read_rows(path: "str | Path") -> list[SweepRow]:
    rows = []
    with open(path, "r", encoding="utf-8") as handle:
        header_seen = False
        for line in handle:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            if not header_seen:
                header_seen = True
                continue
            parts = line.split(",")
            try:
                rows.append(SweepRow.from_fields(parts))
            except (ValueError, IndexError):
                continue  # torn trailing line from an interrupted run
    return rows


def _repair_interrupted(path: Path) -> None:
    """Drop a torn trailing row left by a killed run, keeping the header
    block and every complete row byte-for-byte."""
    raw = path.read_text(encoding="utf-8")
    lines = raw.split("\n")
    if raw.endswith("\n"):
        lines = lines[:-1]
    keep: list[str] = []
    header_seen = False
    dirty = not raw.endswith("\n")
    for line in lines:
        if line.startswith("#") or (not header_seen and line):
            keep.append(line)
            if not line.startswith("#"):
                header_seen = True
            continue
        try:
            SweepRow.from_fields(line.split(","))
        except (ValueError, IndexError):
            dirty = True
            continue
        keep.append(line)
    if dirty:
        path.write_text("\n".join(keep) + "\n", encoding="utf-8")


def _write_header(handle, config: ExperimentConfig) -> None:
    handle.write("# qlandscape sweep v1\n")
    handle.write(f"# config-hash: {config.config_hash()}\n")
    handle.write(f"# seed: {config.seed}\n")
    handle.write(f"# numpy: {np.__version__}\n")
    handle.write(f"# generated: {datetime.now(timezone.utc).isoformat()}\n")
    handle.write(",".join(CSV_COLUMNS) + "\n")


def _cell_seed(config: ExperimentConfig, cell: Cell) -> tuple:
    return (config.seed, "cell", cell.index)


def _cost_label(config: ExperimentConfig) -> str:
    if config.cost == "local":
        return f"local{config.cost_k}"
    return config.cost


def _derivative_chain(config: ExperimentConfig, cell: Cell) -> bool:
    """Gate-level for independent angles, chain-rule for correlated ones.

    Under correlated sampling the gate-level slot derivative has a
    genuinely nonzero ensemble mean, so the free-parameter (chain)
    derivative is the quantity whose statistics match the unbiased-
    landscape analysis; for the independent scheme the two coincide.
    """
    if config.method != "commutator":
        return False
    return cell.scheme != "independent" and config.chain_rule_for_correlated


def _variance_stats(config: ExperimentConfig, cell: Cell):
    spec = config.ansatz_spec(cell)
    cost_spec = config.cost_spec(cell.n)
    return estimate_gradient_statistics(
        cost_spec,
        spec,
        cell.target0,
        config.n_samples,
        _cell_seed(config, cell),
        method=config.method,
        chain_rule=_derivative_chain(config, cell),
        keep_samples=False,
    )


def _segment_samplers(config: ExperimentConfig, cell: Cell):
    spec = config.ansatz_spec(cell)
    fixed_axes = None
    if not spec.axis_policy.resample_per_sample:
        fixed_axes = sample_axes(spec, stream(_cell_seed(config, cell), AXES_STREAM_TAG))
    right = AnsatzSampler(spec, "right", cell.target0, fixed_axes=fixed_axes)
    left = AnsatzSampler(spec, "left", cell.target0, fixed_axes=fixed_axes)
    return right, left


def _expressibility_fields(config: ExperimentConfig, cell: Cell, row: SweepRow) -> None:
    right, left = _segment_samplers(config, cell)
    seed = _cell_seed(config, cell)
    rho = config.state_spec(cell.n)
    rep_rho = expressibility_report(rho, right, config.n_pairs, (seed, "fp-rho"))
    row.f_rho = rep_rho.frame_potential.value
    row.f_rho_stderr = rep_rho.frame_potential.stderr
    row.ratio_rho = rep_rho.ratio
    row.eps_rho = rep_rho.epsilon
    if cell.n <= config.dense_cap:
        obs = config.observable(cell.n)
        rep_h = expressibility_report(
            obs, left, config.n_pairs, (seed, "fp-h"), n_cap=config.dense_cap
        )
        row.f_h = rep_h.frame_potential.value
        row.f_h_stderr = rep_h.frame_potential.stderr
        row.ratio_h = rep_h.ratio
        row.eps_h = rep_h.epsilon


def evaluate_bound_cell(config: ExperimentConfig, cell: Cell) -> tuple[SweepRow, BoundReport]:
    """Bound-verification measurement for one cell (independent scheme)."""
    row = _base_row(config, cell)
    stats = _variance_stats(config, cell)
    row.mean, row.mean_stderr = stats.mean, stats.mean_stderr
    row.variance, row.variance_stderr = stats.variance, stats.variance_stderr

    right, left = _segment_samplers(config, cell)
    seed = _cell_seed(config, cell)
    rho = config.state_spec(cell.n)
    obs = config.observable(cell.n)
    rep_rho = expressibility_report(rho, right, config.n_pairs, (seed, "fp-rho"))
    rep_h = expressibility_report(obs, left, config.n_pairs, (seed, "fp-h"), n_cap=config.dense_cap)
    var_r = two_design_variance_r(
        obs, rho, left, config.inner_samples, (seed, "var-r"), n_cap=config.dense_cap
    )
    var_l = two_design_variance_l(obs, rho, right, config.inner_samples, (seed, "var-l"))
    d = 1 << cell.n
    var_rl = two_design_variance_rl(cell.n, 0.0, float(d), obs.trace(), obs.trace_square(), 1.0)
    report = theorem_bounds(
        n_qubits=cell.n,
        measured_variance=stats.variance,
        measured_stderr=stats.variance_stderr,
        eps_r_rho=rep_rho.epsilon,
        eps_r_rho_stderr=rep_rho.epsilon_stderr(),
        eps_l_h=rep_h.epsilon,
        eps_l_h_stderr=rep_h.epsilon_stderr(),
        var_r=var_r,
        var_l=var_l,
        var_rl=var_rl,
        h2norm_sq=obs.hs_norm_sq(),
        rho2norm_sq=1.0,
    )
    row.f_rho, row.f_rho_stderr = rep_rho.frame_potential.value, rep_rho.frame_potential.stderr
    row.f_h, row.f_h_stderr = rep_h.frame_potential.value, rep_h.frame_potential.stderr
    row.ratio_rho, row.ratio_h = rep_rho.ratio, rep_h.ratio
    row.eps_rho, row.eps_h = rep_rho.epsilon, rep_h.epsilon
    row.bound_r, row.bound_l, row.bound_rl = report.bound_r, report.bound_l, report.bound_rl
    row.slack_r, row.slack_l, row.slack_rl = report.slack_r, report.slack_l, report.slack_rl
    return row, report


def _base_row(config: ExperimentConfig, cell: Cell) -> SweepRow:
    return SweepRow(
        experiment=config.kind,
        n=cell.n,
        depth=cell.depth,
        scheme=cell.scheme,
        axes=cell.axes,
        r=cell.r,
        target_layer=cell.target_layer,
        target_qubit=cell.target_qubit,
        cost=_cost_label(config),
        n_samples=config.n_samples,
        seed=config.seed,
    )


def compute_cell(config: ExperimentConfig, cell: Cell) -> SweepRow:
    started = time.perf_counter()
    if config.kind == "haar-identity-check":
        row = _base_row(config, cell)
        checks = verify_haar_identities(
            1 << cell.n, config.n_samples, _cell_seed(config, cell), operator_kind="positive"
        )
        # summary diagnostics: worst z-score and worst relative error
        row.mean = max(c.z_score for c in checks)
        row.mean_stderr = max(c.stderr for c in checks)
        row.variance = max(c.rel_error for c in checks)
    elif config.kind == "bound-verification":
        row, _ = evaluate_bound_cell(config, cell)
    else:
        row = _base_row(config, cell)
        stats = _variance_stats(config, cell)
        row.mean, row.mean_stderr = stats.mean, stats.mean_stderr
        row.variance, row.variance_stderr = stats.variance, stats.variance_stderr
        if config.kind == "expressibility-correlation":
            _expressibility_fields(config, cell, row)
    row.wall_ms = int(round(1000.0 * (time.perf_counter() - started)))
    return row


def run_experiment(config: ExperimentConfig, progress: bool = False) -> list[SweepRow]:
    """Run every missing cell and append rows to the config's CSV.

    Returns the complete, ordered row list (existing plus new).
    """
    cells = config.cells()
    out_path = Path(config.output)
    existing: dict[tuple, SweepRow] = {}
    if out_path.exists():
        _repair_interrupted(out_path)
        for row in read_rows(out_path):
            existing[row.key()] = row
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fresh = not out_path.exists()
    # open before any simulation so an unwritable target fails immediately
    handle = open(out_path, "a", encoding="utf-8", newline="")
    try:
        if fresh:
            _write_header(handle, config)
            handle.flush()
        pending = [cell for cell in cells if _base_row(config, cell).key() not in existing]
        computed: dict[int, SweepRow] = {}
        flushed = 0

        def flush_ready():
            # write new rows strictly in cell order so an interrupted file
            # is always a prefix of the uninterrupted one
            nonlocal flushed
            while flushed < len(pending) and pending[flushed].index in computed:
                row = computed[pending[flushed].index]
                handle.write(",".join(row.to_fields()) + "\n")
                handle.flush()
                flushed += 1

        workers = max(1, int(os.environ.get("QLANDSCAPE_THREADS", "1")))
        if workers > 1 and len(pending) > 1:
            with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
                futures = {pool.submit(compute_cell, config, cell): cell for cell in pending}
                for future in concurrent.futures.as_completed(futures):
                    cell = futures[future]
                    computed[cell.index] = future.result()
                    flush_ready()
                    if progress:
                        print(f"cell {cell.index + 1}/{len(cells)} done", flush=True)
        else:
            for cell in pending:
                computed[cell.index] = compute_cell(config, cell)
                flush_ready()
                if progress:
                    print(f"cell {cell.index + 1}/{len(cells)} done", flush=True)
        ordered: list[SweepRow] = []
        for cell in cells:
            key = _base_row(config, cell).key()
            ordered.append(existing.get(key) or computed[cell.index])
        return ordered
    finally:
        handle.close()

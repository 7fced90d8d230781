"""Exponential-decay fits of variance-versus-qubit-count curves."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .sweep import SweepRow


@dataclass
class DecayFit:
    """Ordinary least squares of ln(variance) = intercept - rate * n."""

    rate: float
    intercept: float
    r_squared: float
    n_points: int


def fit_exponential_decay(ns, variances) -> DecayFit:
    """Fit ln Var = intercept - rate * n; rows with Var <= 0 are dropped
    with a warning, and fewer than 3 usable points is an error."""
    ns = np.asarray(ns, dtype=float)
    variances = np.asarray(variances, dtype=float)
    keep = variances > 0.0
    if not np.all(keep):
        warnings.warn(
            f"dropping {int(np.sum(~keep))} non-positive variance point(s) from the fit",
            stacklevel=2,
        )
    ns, variances = ns[keep], variances[keep]
    if ns.size < 3:
        raise ValueError("an exponential fit needs at least 3 points with positive variance")
    y = np.log(variances)
    design = np.vstack([np.ones_like(ns), ns]).T
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    intercept, slope = float(coef[0]), float(coef[1])
    predicted = design @ coef
    ss_res = float(np.sum((y - predicted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return DecayFit(rate=-slope, intercept=intercept, r_squared=r_squared, n_points=int(ns.size))


def fit_rows(rows: list[SweepRow], x_column: str = "n") -> DecayFit:
    xs = [getattr(row, x_column) for row in rows]
    vs = [row.variance if row.variance is not None else -1.0 for row in rows]
    return fit_exponential_decay(xs, vs)


def filter_rows(rows: list[SweepRow], curve: str) -> list[SweepRow]:
    """Select rows matching a filter like 'cost=global,scheme=independent,depth=150'."""
    clauses = []
    for part in curve.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"bad filter clause {part!r}; use column=value")
        key, value = part.split("=", 1)
        clauses.append((key.strip(), value.strip()))
    out = []
    for row in rows:
        ok = True
        for key, value in clauses:
            if not hasattr(row, key):
                raise ValueError(f"unknown column {key!r} in curve filter")
            actual = getattr(row, key)
            if isinstance(actual, float):
                ok = ok and math.isclose(actual, float(value), rel_tol=1e-12)
            else:
                ok = ok and str(actual) == value
        if ok:
            out.append(row)
    return out

"""Per-parameter error statistics, boxplot summaries, and impact fields."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .interpolation import ImpactField, interpolate
from .reduction import PcaBasis
from .regressors import Regressor, predict_batch

_WHISKER_REACH = 1.5  # Tukey fence multiplier


@dataclass(frozen=True)
class BoxplotStats:
    """Five-number boxplot summary with Tukey whiskers clamped to data points."""

    q1: float
    median: float
    q3: float
    whisker_lo: float
    whisker_hi: float
    outliers: tuple[float, ...]
    count: int


@dataclass(frozen=True)
class ErrorSummary:
    """Boxplot rows for every parameter of one model's prediction errors."""

    model_id: str
    relative: bool
    names: tuple[str, ...]
    rows: tuple[BoxplotStats, ...]


def _quantile_type7(sorted_values: np.ndarray, q: float) -> float:
    # linear interpolation between order statistics; mirrors numpy's lerp,
    # which switches formula at t >= 0.5 for accuracy
    n = sorted_values.size
    position = q * (n - 1)
    lo = math.floor(position)
    t = position - lo
    if lo + 1 >= n:
        return float(sorted_values[-1])
    a = sorted_values[lo]
    b = sorted_values[lo + 1]
    d = b - a
    return float(a + t * d) if t < 0.5 else float(b - d * (1.0 - t))


def boxplot_stats(values) -> BoxplotStats:
    """Quartiles (type-7), 1.5*IQR whiskers at actual data points, outliers."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("boxplot needs at least one value")
    xs = np.sort(arr)

    q1 = _quantile_type7(xs, 0.25)
    median = _quantile_type7(xs, 0.50)
    q3 = _quantile_type7(xs, 0.75)
    iqr = q3 - q1
    lo_fence = q1 - _WHISKER_REACH * iqr
    hi_fence = q3 + _WHISKER_REACH * iqr

    inside = xs[(xs >= lo_fence) & (xs <= hi_fence)]
    whisker_lo = float(inside[0])
    whisker_hi = float(inside[-1])
    outliers = tuple(float(x) for x in xs[(xs < lo_fence) | (xs > hi_fence)])
    return BoxplotStats(q1, median, q3, whisker_lo, whisker_hi, outliers, int(xs.size))


def prediction_errors(model: Regressor, test_ensemble) -> np.ndarray:
    """Signed prediction error matrix: entry (s, j) = predicted_j - true_j."""
    params = [p for p, _ in test_ensemble]
    fields = [f for _, f in test_ensemble]
    predictions = predict_batch(model, fields)
    truth = np.stack([p.values for p in params])
    predicted = np.stack([p.values for p in predictions])
    return predicted - truth


def relative_errors(matrix: np.ndarray, bounds) -> np.ndarray:
    """Scale each error column by its parameter range width."""
    matrix = np.asarray(matrix, dtype=np.float64)
    b = np.asarray(bounds, dtype=np.float64)
    if b.shape == (2,):
        b = np.tile(b, (matrix.shape[1], 1))
    if b.shape != (matrix.shape[1], 2):
        raise ValueError("bounds must be (lo, hi) or one pair per column")
    widths = b[:, 1] - b[:, 0]
    if np.any(widths <= 0):
        raise ValueError("parameter bounds have zero or negative width")
    return matrix / widths


def summarize_errors(
    matrix: np.ndarray,
    names: tuple[str, ...],
    model_id: str,
    relative: bool = False,
) -> ErrorSummary:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape[1] != len(names):
        raise ValueError("column count does not match parameter names")
    rows = tuple(boxplot_stats(matrix[:, j]) for j in range(matrix.shape[1]))
    return ErrorSummary(model_id, relative, tuple(names), rows)


def _span_impact(basis: PcaBasis, lo: float, hi: float, j: int) -> np.ndarray:
    center = basis.mean_params
    step = np.zeros_like(center)
    step[j] = 1.0
    upper = interpolate(basis, center + hi * step).values
    lower = interpolate(basis, center + lo * step).values
    return np.abs(upper - lower)


def whisker_impact_field(basis: PcaBasis, summary: ErrorSummary, param_index: int) -> ImpactField:
    """Field change induced by sweeping parameter j across its whisker span."""
    if len(summary.names) != basis.mean_params.size:
        raise ValueError("summary parameter count does not match basis")
    row = summary.rows[param_index]
    values = _span_impact(basis, row.whisker_lo, row.whisker_hi, param_index)
    return ImpactField(
        basis.mesh_id,
        values,
        metadata={
            "model_id": summary.model_id,
            "parameter": summary.names[param_index],
            "span": [row.whisker_lo, row.whisker_hi],
            "kind": "whisker",
        },
    )


def outlier_impact_field(basis: PcaBasis, summary: ErrorSummary, param_index: int) -> ImpactField:
    """Same construction over the full error span, outliers included.

    Without outliers the full span collapses to the whisker span and the two
    impact fields coincide.
    """
    if len(summary.names) != basis.mean_params.size:
        raise ValueError("summary parameter count does not match basis")
    row = summary.rows[param_index]
    lo = min((row.whisker_lo, *row.outliers))
    hi = max((row.whisker_hi, *row.outliers))
    values = _span_impact(basis, lo, hi, param_index)
    return ImpactField(
        basis.mesh_id,
        values,
        metadata={
            "model_id": summary.model_id,
            "parameter": summary.names[param_index],
            "span": [lo, hi],
            "kind": "full_span",
            "outlier_count": len(row.outliers),
        },
    )


def compare_models(summaries: list[ErrorSummary]) -> dict:
    """Align per-parameter boxplot rows of several models into one report."""
    if not summaries:
        raise ValueError("need at least one summary to compare")
    names = summaries[0].names
    for s in summaries[1:]:
        if s.names != names:
            raise ValueError("summaries disagree on parameter names")
    return {
        "parameters": list(names),
        "models": [
            {
                "model_id": s.model_id,
                "relative": s.relative,
                "stats": {
                    name: {
                        "q1": row.q1,
                        "median": row.median,
                        "q3": row.q3,
                        "whisker_lo": row.whisker_lo,
                        "whisker_hi": row.whisker_hi,
                        "outliers": list(row.outliers),
                        "count": row.count,
                    }
                    for name, row in zip(s.names, s.rows)
                },
            }
            for s in summaries
        ],
    }

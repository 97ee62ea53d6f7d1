"""Least-squares field interpolation over the PCA basis and its error algebra.

A target parameter set is matched in parameter space against the basis
parameter sets (minimum-norm least squares), and the resulting coefficients
transfer directly to the basis fields. The difference of two interpolated
fields is the impact a parameter-space deviation induces on the geometry.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .ensemble import ParameterVector, VectorField
from .geometry import SurfaceMesh, _frozen
from .reduction import PcaBasis, ScalarField, condense_signed_magnitude

_PINV_RCOND = 1e-10


@dataclass(frozen=True)
class ImpactField:
    """Per-vertex field change induced by a parameter-space difference."""

    mesh_id: str
    values: np.ndarray  # (n_vertices,)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if not np.all(np.isfinite(values)):
            raise ValueError("impact field contains non-finite entries")
        object.__setattr__(self, "values", _frozen(values))


@dataclass(frozen=True)
class InterpolationReport:
    """Aggregate validation errors of the interpolant against true fields."""

    max_abs_error: float
    rms_error: float
    per_sample_max: tuple[float, ...]
    elapsed_s: float = 0.0


def _target_values(basis: PcaBasis, target) -> np.ndarray:
    values = target.values if isinstance(target, ParameterVector) else np.asarray(target, dtype=np.float64)
    if values.size != basis.mean_params.size:
        raise ValueError("target parameter count does not match basis")
    return values.ravel()


def llsf_solve(basis: PcaBasis, target, rcond: float = _PINV_RCOND, return_rank: bool = False):
    """Minimum-norm least-squares coefficients for a target parameter set.

    Solves min ||P c - (target - mean_params)|| with P the (n_params, k)
    matrix of basis parameter sets, via an SVD pseudoinverse that drops
    singular values below rcond * sigma_max.
    """
    if basis.k == 0:
        raise ValueError("basis is empty")
    if not basis.has_parameter_sets:
        raise ValueError("basis has no parameter sets attached")
    p_matrix = basis.basis_params.T  # (n_params, k)
    rhs = _target_values(basis, target) - basis.mean_params

    left, sing, right = np.linalg.svd(p_matrix, full_matrices=False)
    cutoff = rcond * sing[0] if sing.size else 0.0
    rank = int(np.sum(sing > cutoff))
    coeffs = right[:rank].T @ ((left[:, :rank].T @ rhs) / sing[:rank])
    if return_rank:
        return coeffs, rank
    return coeffs


def interpolate(basis: PcaBasis, target) -> ScalarField:
    """Reconstruct the scalar field for a parameter set: mean + sum c_j B_j."""
    coeffs = llsf_solve(basis, target)
    return ScalarField(basis.mesh_id, basis.mean_field + coeffs @ basis.basis_fields)


def delta_field(basis: PcaBasis, a_pred: ParameterVector, a_true: ParameterVector) -> ImpactField:
    """Signed nodewise difference between two interpolations (predicted - true)."""
    diff = interpolate(basis, a_pred).values - interpolate(basis, a_true).values
    return ImpactField(
        basis.mesh_id,
        diff,
        metadata={
            "a_pred": [float(x) for x in _target_values(basis, a_pred)],
            "a_true": [float(x) for x in _target_values(basis, a_true)],
            "signed": True,
        },
    )


def validate_interpolation(
    basis: PcaBasis,
    test_ensemble: list[tuple[ParameterVector, VectorField]],
    mesh: SurfaceMesh,
) -> InterpolationReport:
    """Compare interpolation against condensed true fields over a test set."""
    if not test_ensemble:
        raise ValueError("test ensemble is empty")
    if basis.mesh_id != mesh.id:
        raise ValueError("basis and mesh do not match")

    start = time.perf_counter()
    per_sample = []
    squared_sum = 0.0
    node_count = 0
    for params, true_field in test_ensemble:
        predicted = interpolate(basis, params).values
        truth = condense_signed_magnitude(true_field, mesh).values
        diff = predicted - truth
        per_sample.append(float(np.max(np.abs(diff))))
        squared_sum += float(np.sum(diff**2))
        node_count += diff.size
    elapsed = time.perf_counter() - start

    return InterpolationReport(
        max_abs_error=max(per_sample),
        rms_error=float(np.sqrt(squared_sum / node_count)),
        per_sample_max=tuple(per_sample),
        elapsed_s=elapsed,
    )

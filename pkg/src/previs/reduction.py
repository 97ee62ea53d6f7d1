"""Signed-magnitude condensation and the PCA basis with parameter-space images.

The basis construction mirrors the field/parameter duality at the core of the
interpolator: each retained principal direction B_j is an explicit linear
combination of the centered training fields, and applying the identical
combination weights to the centered training parameters yields the basis
parameter set p_j. For a linear generator this makes M @ p_j == B_j exactly,
which is what later lets the least-squares fit in parameter space reconstruct
fields without error.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .ensemble import EnsembleDesign, ParameterVector, VectorField
from .geometry import SurfaceMesh, _frozen

# Relative singular-value cutoff: components below it carry no data variance,
# only float noise, and their combination weights would divide by ~0. They are
# dropped, so the retained count can be smaller than requested.
_RANK_RCOND = 1e-12


@dataclass(frozen=True)
class ScalarField:
    """Per-vertex scalar field in mm."""

    mesh_id: str
    values: np.ndarray  # (n_vertices,)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if not np.all(np.isfinite(values)):
            raise ValueError("scalar field contains non-finite entries")
        object.__setattr__(self, "values", _frozen(values))


@dataclass(frozen=True)
class PcaBasis:
    """Mean field plus k orthonormal basis fields and their parameter images."""

    mesh_id: str
    mean_field: np.ndarray                # (n_vertices,)
    basis_fields: np.ndarray              # (k, n_vertices), orthonormal rows
    explained_variance_ratio: np.ndarray  # (k,), non-increasing
    k: int
    basis_params: np.ndarray | None = None  # (k, n_params)
    mean_params: np.ndarray | None = None   # (n_params,)
    names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "mean_field", _frozen(np.asarray(self.mean_field, dtype=np.float64)))
        object.__setattr__(self, "basis_fields", _frozen(np.asarray(self.basis_fields, dtype=np.float64)))
        object.__setattr__(
            self, "explained_variance_ratio", _frozen(np.asarray(self.explained_variance_ratio, dtype=np.float64))
        )
        if self.basis_params is not None:
            object.__setattr__(self, "basis_params", _frozen(np.asarray(self.basis_params, dtype=np.float64)))
        if self.mean_params is not None:
            object.__setattr__(self, "mean_params", _frozen(np.asarray(self.mean_params, dtype=np.float64)))

    @property
    def has_parameter_sets(self) -> bool:
        return self.basis_params is not None and self.mean_params is not None


def condense_signed_magnitude(v: VectorField, mesh: SurfaceMesh) -> ScalarField:
    """Project each displacement onto the vertex unit normal (sign-carrying)."""
    if v.mesh_id != mesh.id:
        raise ValueError("vector field belongs to a different mesh")
    if v.values.shape[0] != mesh.vertex_count:
        raise ValueError("vector field length does not match mesh")
    return ScalarField(mesh.id, np.einsum("ij,ij->i", v.values, mesh.normals))


def _field_matrix(fields) -> tuple[np.ndarray, str]:
    if isinstance(fields, np.ndarray):
        return np.asarray(fields, dtype=np.float64), ""
    mesh_ids = {f.mesh_id for f in fields}
    if len(mesh_ids) > 1:
        raise ValueError("fields live on different meshes")
    return np.vstack([f.values for f in fields]), next(iter(mesh_ids))


def fit_pca(fields, k: int) -> tuple[PcaBasis, np.ndarray]:
    """Fit a mean-centered PCA basis of (at most) k components.

    Returns the basis and the reconstruction scores: centered_field_i is
    sum_j scores[i, j] * basis_fields[j] whenever k covers the data rank.
    Components whose singular value falls below the rank cutoff are dropped
    (zero-variance input therefore yields an empty basis).
    """
    matrix, mesh_id = _field_matrix(fields)
    n_fields, n_vertices = matrix.shape
    if n_fields < 2:
        raise ValueError("PCA needs at least 2 fields")
    if not 1 <= k <= min(n_fields, n_vertices):
        raise ValueError(f"k must be in [1, {min(n_fields, n_vertices)}], got {k}")

    mean = matrix.mean(axis=0)
    centered = matrix - mean
    left, sing, right = np.linalg.svd(centered, full_matrices=False)

    scale = max(1.0, float(np.abs(matrix).max()))
    effective = int(np.sum(sing > _RANK_RCOND * max(sing[0], scale)))
    k_eff = min(k, effective)

    total = float(np.sum(sing**2))
    basis_fields = right[:k_eff].copy()
    scores = left[:, :k_eff] * sing[:k_eff]

    # deterministic orientation: largest-magnitude entry of each PC positive
    for j in range(k_eff):
        peak = np.argmax(np.abs(basis_fields[j]))
        if basis_fields[j, peak] < 0:
            basis_fields[j] = -basis_fields[j]
            scores[:, j] = -scores[:, j]

    ratios = (sing[:k_eff] ** 2 / total) if total > 0 else np.zeros(k_eff)
    basis = PcaBasis(
        mesh_id=mesh_id,
        mean_field=mean,
        basis_fields=basis_fields,
        explained_variance_ratio=ratios,
        k=k_eff,
    )
    return basis, scores


def basis_parameter_sets(scores: np.ndarray, design: EnsembleDesign) -> tuple[np.ndarray, np.ndarray]:
    """Parameter-space images of the PCs, built with the PC combination weights.

    B_j = sum_i w_ij * centered_field_i with w_ij = scores_ij / sum_i scores_ij^2,
    so p_j = sum_i w_ij * (a_i - a_mean) uses the identical weights.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape[0] != design.n_samples:
        raise ValueError("scores row count does not match design")
    mean_params = design.rows.mean(axis=0)
    centered = design.rows - mean_params

    norms = np.sum(scores**2, axis=0)  # per-component: equals sigma_j^2
    weights = np.zeros_like(scores)
    nonzero = norms > 0
    weights[:, nonzero] = scores[:, nonzero] / norms[nonzero]
    params = weights.T @ centered  # (k, n_params)
    return params, mean_params


def attach_parameter_sets(basis: PcaBasis, scores: np.ndarray, design: EnsembleDesign) -> PcaBasis:
    params, mean_params = basis_parameter_sets(scores, design)
    return replace(basis, basis_params=params, mean_params=mean_params, names=design.names)


def build_pca_basis(
    mesh: SurfaceMesh,
    design: EnsembleDesign,
    ensemble: list[tuple[ParameterVector, VectorField]],
    k: int = 10,
) -> tuple[PcaBasis, np.ndarray]:
    """Condense an ensemble and fit the complete basis in one step."""
    if len(ensemble) != design.n_samples:
        raise ValueError("ensemble size does not match design")
    condensed = [condense_signed_magnitude(field, mesh) for _, field in ensemble]
    basis, scores = fit_pca(condensed, k)
    return attach_parameter_sets(basis, scores, design), scores


def explained_variance(basis: PcaBasis) -> float:
    """Total variance fraction captured by the retained components."""
    return float(np.sum(basis.explained_variance_ratio))


def explained_variance_curve(basis: PcaBasis) -> np.ndarray:
    """Cumulative (prefix-sum) explained variance, one entry per component."""
    return np.cumsum(basis.explained_variance_ratio)

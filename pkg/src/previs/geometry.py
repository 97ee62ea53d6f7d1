"""Plate meshes, vertex-graph Laplacians, and truncated spectral bases."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

# Above this size the dense symmetric eigensolver gets slow; fall back to
# shift-inverted Lanczos with a fixed start vector to stay deterministic.
_DENSE_EIG_LIMIT = 4096


class EigensolverError(RuntimeError):
    """Raised when the spectral decomposition fails its residual check."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SurfaceMesh:
    """Triangulated surface with per-vertex unit normals.

    Coordinates are in mm. `id` is a content hash over vertices, triangles
    and normals, so equal geometry always gets the same id.
    """

    vertices: np.ndarray   # (n, 3) float64
    triangles: np.ndarray  # (t, 3) int64
    normals: np.ndarray    # (n, 3) float64, unit length
    id: str

    @property
    def vertex_count(self) -> int:
        return self.vertices.shape[0]

    @property
    def triangle_count(self) -> int:
        return self.triangles.shape[0]


@dataclass(frozen=True)
class SpectralOperator:
    """First `mu` eigenpairs of a normalized graph Laplacian.

    `rescaled_eigenvalues` maps [0, lambda_mu] affinely onto [-1, 1] so the
    largest retained frequency sits exactly at +1; Chebyshev filters rely on
    that pin to vanish there by construction.
    """

    mu: int
    eigenvalues: np.ndarray           # (mu,) ascending, in [0, 2]
    eigenvectors: np.ndarray          # (n, mu), orthonormal columns
    rescaled_eigenvalues: np.ndarray  # (mu,), in [-1, 1], last entry == 1.0


def _content_id(vertices: np.ndarray, triangles: np.ndarray, normals: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(vertices.astype("<f8").tobytes())
    h.update(triangles.astype("<i8").tobytes())
    h.update(normals.astype("<f8").tobytes())
    return h.hexdigest()[:16]


def _vertex_normals(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Area-weighted average of incident face normals, normalized per vertex."""
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    face = np.cross(b - a, c - a)  # magnitude = 2 * area
    normals = np.zeros_like(vertices)
    for j in range(3):
        np.add.at(normals, triangles[:, j], face)
    norms = np.linalg.norm(normals, axis=1)
    if np.any(norms <= 0.0):
        raise ValueError("degenerate vertex normal (zero incident area)")
    return normals / norms[:, None]


def make_mesh(
    vertices: np.ndarray,
    triangles: np.ndarray,
    normals: np.ndarray | None = None,
) -> SurfaceMesh:
    """Build a validated SurfaceMesh; computes vertex normals when omitted."""
    vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
    triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
    n = vertices.shape[0]

    if triangles.size and (triangles.min() < 0 or triangles.max() >= n):
        raise ValueError("triangle index out of range")
    degenerate = (
        (triangles[:, 0] == triangles[:, 1])
        | (triangles[:, 1] == triangles[:, 2])
        | (triangles[:, 0] == triangles[:, 2])
    )
    if np.any(degenerate):
        raise ValueError("degenerate triangle (repeated vertex index)")

    if normals is None:
        normals = _vertex_normals(vertices, triangles)
    else:
        normals = np.asarray(normals, dtype=np.float64).reshape(-1, 3)
        if normals.shape[0] != n:
            raise ValueError("normals length must equal vertex count")
        lengths = np.linalg.norm(normals, axis=1)
        if np.any(np.abs(lengths - 1.0) > 1e-12):
            raise ValueError("normals must have unit length")

    adj = vertex_adjacency_from_triangles(n, triangles)
    n_comp, _ = connected_components(adj, directed=False)
    if n_comp != 1:
        raise ValueError(f"mesh graph is not connected ({n_comp} components)")

    return SurfaceMesh(
        vertices=_frozen(vertices),
        triangles=_frozen(triangles),
        normals=_frozen(normals),
        id=_content_id(vertices, triangles, normals),
    )


def build_plate_mesh(nx: int, ny: int, width: float, height: float) -> SurfaceMesh:
    """Regular triangulated grid of nx*ny vertices in the z=0 plane.

    nx counts columns (x direction, spanning `width`), ny counts rows.
    Every cell is split along the same diagonal, giving 2*(nx-1)*(ny-1)
    triangles. All normals are (0, 0, 1).
    """
    if nx < 2 or ny < 2:
        raise ValueError("plate needs nx >= 2 and ny >= 2")
    if width <= 0 or height <= 0:
        raise ValueError("plate needs positive width and height")

    xs = np.linspace(0.0, float(width), nx)
    ys = np.linspace(0.0, float(height), ny)
    gx, gy = np.meshgrid(xs, ys)  # row-major: vertex v = iy * nx + ix
    vertices = np.column_stack([gx.ravel(), gy.ravel(), np.zeros(nx * ny)])

    triangles = _plate_triangles(nx, ny)
    normals = np.tile(np.array([0.0, 0.0, 1.0]), (nx * ny, 1))
    return make_mesh(vertices, triangles, normals)


def _plate_triangles(nx: int, ny: int) -> np.ndarray:
    tris = np.empty((2 * (nx - 1) * (ny - 1), 3), dtype=np.int64)
    t = 0
    for iy in range(ny - 1):
        for ix in range(nx - 1):
            v00 = iy * nx + ix
            v10 = v00 + 1
            v01 = v00 + nx
            v11 = v01 + 1
            tris[t] = (v00, v10, v11)
            tris[t + 1] = (v00, v11, v01)
            t += 2
    return tris


def vertex_adjacency_from_triangles(n_vertices: int, triangles: np.ndarray) -> sp.csr_matrix:
    """Unweighted 1-ring vertex adjacency of a triangulation."""
    i = np.concatenate([triangles[:, 0], triangles[:, 1], triangles[:, 2]])
    j = np.concatenate([triangles[:, 1], triangles[:, 2], triangles[:, 0]])
    data = np.ones(i.size)
    adj = sp.coo_matrix((data, (i, j)), shape=(n_vertices, n_vertices)).tocsr()
    adj = adj + adj.T
    adj.data[:] = 1.0  # collapse duplicate edges to weight 1
    adj.setdiag(0.0)
    adj.eliminate_zeros()
    return adj


def vertex_adjacency(mesh: SurfaceMesh) -> sp.csr_matrix:
    return vertex_adjacency_from_triangles(mesh.vertex_count, mesh.triangles)


def laplacian_from_adjacency(adj: sp.spmatrix) -> sp.csr_matrix:
    """Normalized Laplacian I - D^{-1/2} A D^{-1/2} of an undirected graph."""
    adj = sp.csr_matrix(adj)
    degrees = np.asarray(adj.sum(axis=1)).ravel()
    if np.any(degrees <= 0):
        raise ValueError("graph has an isolated vertex (degree 0)")
    inv_sqrt = 1.0 / np.sqrt(degrees)
    d_half = sp.diags(inv_sqrt)
    lap = sp.identity(adj.shape[0], format="csr") - d_half @ adj @ d_half
    # symmetrize away the last-bit asymmetry of the sparse products
    return ((lap + lap.T) * 0.5).tocsr()


def normalized_laplacian(mesh: SurfaceMesh) -> sp.csr_matrix:
    return laplacian_from_adjacency(vertex_adjacency(mesh))


def _fix_eigenvector_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its first non-negligible component is positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        scale = np.abs(col).max()
        nz = np.nonzero(np.abs(col) > 1e-9 * scale)[0]
        if nz.size and col[nz[0]] < 0:
            out[:, j] = -col
    return out


def spectral_basis(laplacian: sp.spmatrix, mu: int) -> SpectralOperator:
    """First `mu` eigenpairs (ascending) of a normalized Laplacian.

    Rescales eigenvalues via lam_tilde = 2*lam/lam_mu - 1 so the mu-th
    retained frequency lands exactly at +1.
    """
    n = laplacian.shape[0]
    if not 1 <= mu <= n:
        raise ValueError(f"mu must be in [1, {n}], got {mu}")

    if n <= _DENSE_EIG_LIMIT:
        dense = laplacian.toarray()
        values, vectors = eigh(dense, subset_by_index=(0, mu - 1))
    else:
        # shift so the factorized operator is positive definite
        v0 = np.full(n, 1.0 / np.sqrt(n))
        try:
            values, vectors = eigsh(laplacian.tocsc(), k=mu, sigma=-0.1, which="LM", v0=v0)
        except ArpackNoConvergence as exc:
            residual = float(np.linalg.norm(exc.eigenvalues)) if exc.eigenvalues is not None else float("nan")
            raise EigensolverError("Lanczos iteration did not converge", residual) from exc
        order = np.argsort(values)
        values = values[order]
        vectors = vectors[:, order]

    residuals = laplacian @ vectors - vectors * values[None, :]
    worst = float(
        np.max(np.linalg.norm(residuals, axis=0) / np.linalg.norm(vectors, axis=0))
    )
    if worst > 1e-8:
        raise EigensolverError("eigenpair residual exceeds tolerance", worst)

    vectors = _fix_eigenvector_signs(vectors)

    lam_mu = values[-1]
    if lam_mu <= 1e-12:
        rescaled = np.ones(mu)  # degenerate: only the zero frequency retained
    else:
        rescaled = 2.0 * (values / lam_mu) - 1.0
        rescaled[-1] = 1.0
    return SpectralOperator(
        mu=mu,
        eigenvalues=_frozen(values),
        eigenvectors=_frozen(vectors),
        rescaled_eigenvalues=_frozen(rescaled),
    )


def save_mesh(directory: str | Path, mesh: SurfaceMesh, nx: int, ny: int) -> None:
    """Write manifest.json plus little-endian float64 vertex/normal blobs."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "id": mesh.id,
        "nx": int(nx),
        "ny": int(ny),
        "vertex_count": mesh.vertex_count,
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, sort_keys=True) + "\n")
    (directory / "vertices.bin").write_bytes(mesh.vertices.astype("<f8").tobytes())
    (directory / "normals.bin").write_bytes(mesh.normals.astype("<f8").tobytes())


def load_mesh(directory: str | Path) -> SurfaceMesh:
    """Load a plate mesh saved by save_mesh, verifying the content id."""
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    nx, ny = manifest["nx"], manifest["ny"]
    vertices = np.frombuffer((directory / "vertices.bin").read_bytes(), dtype="<f8").reshape(-1, 3)
    normals = np.frombuffer((directory / "normals.bin").read_bytes(), dtype="<f8").reshape(-1, 3)
    if vertices.shape[0] != manifest["vertex_count"]:
        raise ValueError("vertex blob does not match manifest vertex_count")
    mesh = make_mesh(vertices, _plate_triangles(nx, ny), normals)
    if mesh.id != manifest["id"]:
        raise ValueError("mesh content hash mismatch (corrupt or edited blobs)")
    return mesh

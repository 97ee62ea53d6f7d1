"""Sampling designs and the synthetic displacement-field generator."""
from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field

import numpy as np

from .geometry import SurfaceMesh, _frozen

DEFAULT_PARAM_NAMES = ("Hinge_X", "Hinge_Y", "Lock_L", "Lock_R", "Buffer_L", "Buffer_R")

# Hinge_Y (index 1) dominates on purpose: one boundary has to drive the field
# noticeably harder than the rest so sensitivity ordering is observable.
DEFAULT_MODE_AMPLITUDES = (1.0, 2.5, 0.8, 0.8, 0.4, 0.4)

# Bump centers in relative plate coordinates and the (unnormalized) direction
# each boundary pushes the skin; z dominates so the normal projection keeps
# most of each mode.
_MODE_CENTERS = ((0.15, 0.30), (0.15, 0.70), (0.85, 0.25), (0.85, 0.75), (0.50, 0.08), (0.50, 0.92))
_MODE_DIRECTIONS = (
    (0.30, 0.00, 1.0),
    (0.00, 0.25, 1.0),
    (-0.20, 0.10, 1.0),
    (0.20, 0.10, 1.0),
    (0.10, -0.20, 1.0),
    (-0.10, 0.20, 1.0),
)


def default_names(n_params: int) -> tuple[str, ...]:
    if n_params == len(DEFAULT_PARAM_NAMES):
        return DEFAULT_PARAM_NAMES
    return tuple(f"P{i + 1}" for i in range(n_params))


def _as_bounds(bounds, n_params: int) -> np.ndarray:
    """Normalize (lo, hi) or per-parameter pairs to an (n, 2) array."""
    arr = np.asarray(bounds, dtype=np.float64)
    if arr.shape == (2,):
        arr = np.tile(arr, (n_params, 1))
    if arr.shape != (n_params, 2):
        raise ValueError(f"bounds must be (lo, hi) or shape ({n_params}, 2)")
    if not np.all(np.isfinite(arr)) or np.any(arr[:, 0] >= arr[:, 1]):
        raise ValueError("bounds must be finite with lo < hi")
    return arr


@dataclass(frozen=True)
class ParameterVector:
    """A point in the boundary-adjustment space, values in mm."""

    values: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self):
        values = _frozen(np.asarray(self.values, dtype=np.float64).ravel())
        object.__setattr__(self, "values", values)
        names = self.names or default_names(values.size)
        if len(names) != values.size:
            raise ValueError("parameter names/values length mismatch")
        object.__setattr__(self, "names", tuple(names))

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class EnsembleDesign:
    """A matrix of parameter samples, one row per planned run."""

    rows: np.ndarray        # (n_samples, n_params)
    kind: str               # "lhs" | "factorial3"
    bounds: np.ndarray      # (n_params, 2)
    names: tuple[str, ...]
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "rows", _frozen(np.asarray(self.rows, dtype=np.float64)))
        object.__setattr__(self, "bounds", _frozen(np.asarray(self.bounds, dtype=np.float64)))

    @property
    def n_samples(self) -> int:
        return self.rows.shape[0]

    @property
    def n_params(self) -> int:
        return self.rows.shape[1]

    def parameter_vectors(self) -> list[ParameterVector]:
        return [ParameterVector(row, self.names) for row in self.rows]


@dataclass(frozen=True)
class VectorField:
    """Per-vertex 3-vector displacement field in mm."""

    mesh_id: str
    values: np.ndarray  # (n_vertices, 3)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != 3:
            raise ValueError("vector field values must have shape (n, 3)")
        if not np.all(np.isfinite(values)):
            raise ValueError("vector field contains non-finite entries")
        object.__setattr__(self, "values", _frozen(values))


@dataclass(frozen=True)
class GeneratorConfig:
    """Analytic surrogate for the per-run simulation.

    U(a) = baseline + sum_i a_i * mode_i
                    + gamma * sum_{i<=j} a_i a_j * pair_ij
                    + gaussian noise(sigma),
    with pair fields derived from elementwise mode products. gamma = 0 makes
    the map exactly linear in a.
    """

    mode_fields: np.ndarray     # (n_params, n_vertices, 3), mm per mm
    baseline_field: np.ndarray  # (n_vertices, 3), mm
    gamma: float = 0.0
    sigma: float = 0.0
    seed: int = 0
    bounds: np.ndarray = field(default=None)  # (n_params, 2)

    def __post_init__(self):
        modes = np.asarray(self.mode_fields, dtype=np.float64)
        base = np.asarray(self.baseline_field, dtype=np.float64)
        if modes.ndim != 3 or modes.shape[2] != 3:
            raise ValueError("mode_fields must have shape (n_params, n_vertices, 3)")
        if base.shape != modes.shape[1:]:
            raise ValueError("baseline_field shape must match mode fields")
        if self.gamma < 0 or self.sigma < 0:
            raise ValueError("gamma and sigma must be non-negative")
        bounds = self.bounds if self.bounds is not None else (-1.0, 1.0)
        object.__setattr__(self, "mode_fields", _frozen(modes))
        object.__setattr__(self, "baseline_field", _frozen(base))
        object.__setattr__(self, "bounds", _frozen(_as_bounds(bounds, modes.shape[0])))

    @property
    def n_params(self) -> int:
        return self.mode_fields.shape[0]


def latin_hypercube(
    n_samples: int,
    n_params: int,
    bounds=(-1.0, 1.0),
    seed: int = 0,
    names: tuple[str, ...] | None = None,
) -> EnsembleDesign:
    """Stratified random design: one sample per equal-width stratum per column."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if n_params < 1:
        raise ValueError("n_params must be >= 1")
    b = _as_bounds(bounds, n_params)
    rng = np.random.default_rng(seed)
    rows = np.empty((n_samples, n_params))
    for j in range(n_params):
        strata = rng.permutation(n_samples)
        jitter = rng.random(n_samples)
        unit = (strata + jitter) / n_samples
        rows[:, j] = b[j, 0] + unit * (b[j, 1] - b[j, 0])
    return EnsembleDesign(rows, "lhs", b, names or default_names(n_params), seed)


def three_level_factorial(
    n_params: int,
    bounds=(-1.0, 1.0),
    names: tuple[str, ...] | None = None,
) -> EnsembleDesign:
    """Full 3^n factorial over {lo, mid, hi} per parameter, lexicographic rows."""
    if n_params < 1:
        raise ValueError("n_params must be >= 1")
    b = _as_bounds(bounds, n_params)
    levels = [(b[j, 0], 0.5 * (b[j, 0] + b[j, 1]), b[j, 1]) for j in range(n_params)]
    rows = np.array(list(itertools.product(*levels)))
    return EnsembleDesign(rows, "factorial3", b, names or default_names(n_params))


def default_generator_config(
    mesh: SurfaceMesh,
    n_params: int = 6,
    amplitudes=DEFAULT_MODE_AMPLITUDES,
    gamma: float = 0.0,
    sigma: float = 0.0,
    seed: int = 0,
    bounds=(-1.0, 1.0),
    baseline_magnitude: float = 1.0,
) -> GeneratorConfig:
    """Smooth radial-bump modes plus a sag baseline, laid out on the plate."""
    amplitudes = tuple(amplitudes)
    if len(amplitudes) < n_params:
        raise ValueError("need one amplitude per parameter")
    xy = mesh.vertices[:, :2]
    lo = xy.min(axis=0)
    span = xy.max(axis=0) - lo
    span[span <= 0] = 1.0
    rel = (xy - lo) / span
    diag = float(np.hypot(*span))
    width = 0.18 * diag

    modes = np.empty((n_params, mesh.vertex_count, 3))
    for i in range(n_params):
        cx, cy = _MODE_CENTERS[i % len(_MODE_CENTERS)]
        direction = np.asarray(_MODE_DIRECTIONS[i % len(_MODE_DIRECTIONS)])
        direction = direction / np.linalg.norm(direction)
        d2 = ((xy[:, 0] - (lo[0] + cx * span[0])) ** 2 + (xy[:, 1] - (lo[1] + cy * span[1])) ** 2)
        bump = amplitudes[i] * np.exp(-d2 / (2.0 * width**2))
        modes[i] = bump[:, None] * direction

    sag = np.sin(np.pi * rel[:, 0]) * np.sin(np.pi * rel[:, 1])
    baseline = np.zeros((mesh.vertex_count, 3))
    baseline[:, 2] = -baseline_magnitude * sag

    return GeneratorConfig(modes, baseline, gamma=gamma, sigma=sigma, seed=seed, bounds=bounds)


def _pair_fields(modes: np.ndarray) -> list[tuple[int, int, np.ndarray]]:
    """Elementwise mode products, renormalized to unit peak vector magnitude."""
    n = modes.shape[0]
    pairs = []
    for i in range(n):
        for j in range(i, n):
            prod = modes[i] * modes[j]
            peak = np.linalg.norm(prod, axis=1).max()
            if peak > 1e-30:
                prod = prod / peak
            pairs.append((i, j, prod))
    return pairs


def _noise_rng(cfg: GeneratorConfig, a: np.ndarray) -> np.random.Generator:
    digest = hashlib.sha256(np.ascontiguousarray(a, dtype="<f8").tobytes()).digest()
    return np.random.default_rng([cfg.seed, int.from_bytes(digest[:8], "little")])


def synthesize_field(mesh: SurfaceMesh, params: ParameterVector, cfg: GeneratorConfig) -> VectorField:
    """Evaluate the surrogate at one parameter point; deterministic per (a, cfg)."""
    if cfg.mode_fields.shape[1] != mesh.vertex_count:
        raise ValueError("generator config does not match mesh vertex count")
    a = params.values
    if a.size != cfg.n_params:
        raise ValueError("parameter count does not match generator config")
    if np.any(a < cfg.bounds[:, 0] - 1e-12) or np.any(a > cfg.bounds[:, 1] + 1e-12):
        raise ValueError("parameters outside generator bounds")

    values = cfg.baseline_field.copy()
    for i in range(cfg.n_params):
        values += a[i] * cfg.mode_fields[i]
    if cfg.gamma > 0:
        for i, j, pair in _pair_fields(cfg.mode_fields):
            values += cfg.gamma * a[i] * a[j] * pair
    if cfg.sigma > 0:
        values += _noise_rng(cfg, a).normal(0.0, cfg.sigma, values.shape)
    return VectorField(mesh.id, values)


def generate_ensemble(
    mesh: SurfaceMesh,
    design: EnsembleDesign,
    cfg: GeneratorConfig,
) -> list[tuple[ParameterVector, VectorField]]:
    """Run the generator over every design row, preserving row order."""
    out = []
    for row in design.rows:
        pv = ParameterVector(row, design.names)
        out.append((pv, synthesize_field(mesh, pv, cfg)))
    return out

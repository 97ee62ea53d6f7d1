"""Field-to-parameter regressors with hand-written training loops.

Two architectures invert a displacement field back to the boundary
parameters that produced it:

* ``olff`` - one hidden layer (default 75 rectifier units) over the flattened
  3-component field, trained with Nesterov-momentum SGD.
* ``gcn`` - spectral graph convolution: the field's three channels are
  projected onto the first mu Laplacian eigenvectors, filtered by a trainable
  Chebyshev-parameterized response per (filter, channel), flattened and fed
  through a rectifier FC layer to the output. No inverse spectral transform
  is applied. Trained with AdaGrad.

Chebyshev responses are shifted by their value at +1, so every filter
vanishes exactly at the largest retained frequency.

All weights live in one flat float64 array with named segments; gradients are
computed analytically and verified against central finite differences.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path
from typing import Union

import numpy as np

from .ensemble import ParameterVector, VectorField, default_names
from .geometry import SpectralOperator, _frozen

# Features whose training variation is below this (relative to the largest
# feature deviation) are treated as constant instead of z-scored.
_STD_FLOOR_REL = 1e-12


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite; carries the epoch at which it happened."""

    def __init__(self, epoch: int, loss: float):
        super().__init__(f"training diverged at epoch {epoch} (loss={loss!r})")
        self.epoch = epoch


@dataclass(frozen=True)
class OlffConfig:
    input_dim: int
    hidden: int = 75
    output: int = 6


@dataclass(frozen=True)
class GcnConfig:
    mu: int
    filters: int = 25
    cheb_order: int = 15
    fc: int = 2048
    output: int = 6
    channels: int = 3


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str  # "sgd_nesterov" | "adagrad"
    lr: float
    epochs: int
    momentum: float = 0.9
    eps: float = 1e-8
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("sgd_nesterov", "adagrad"):
            raise ValueError(f"unknown optimizer kind {self.kind!r}")
        if self.lr < 0:
            raise ValueError("learning rate must be >= 0")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must be in [0, 1)")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def olff_default_optimizer(epochs: int = 2000, **overrides) -> OptimizerConfig:
    args = dict(kind="sgd_nesterov", lr=1e-3, momentum=0.9, epochs=epochs, batch_size=32)
    args.update(overrides)
    return OptimizerConfig(**args)


def gcn_default_optimizer(epochs: int = 300, **overrides) -> OptimizerConfig:
    args = dict(kind="adagrad", lr=1e-2, eps=1e-8, epochs=epochs, batch_size=32)
    args.update(overrides)
    return OptimizerConfig(**args)


@dataclass
class Regressor:
    kind: str  # "olff" | "gcn"
    config: Union[OlffConfig, GcnConfig]
    weights: np.ndarray
    segments: dict[str, tuple[int, tuple[int, ...]]]
    seed: int
    training_log: list[float] = dataclass_field(default_factory=list)
    input_mean: np.ndarray | None = None
    input_std: np.ndarray | None = None
    spectral: SpectralOperator | None = None
    mesh_id: str | None = None
    names: tuple[str, ...] = ()

    @property
    def weight_count(self) -> int:
        return self.weights.size

    @property
    def trained(self) -> bool:
        return len(self.training_log) > 0


# ---------------------------------------------------------------------------
# architecture arithmetic


def olff_weight_count(input_dim: int, hidden: int, output: int) -> int:
    return input_dim * hidden + hidden + hidden * output + output


def gcn_conv_weight_count(filters: int, channels: int, cheb_order: int) -> int:
    return filters * channels * cheb_order


def gcn_weight_count(cfg: GcnConfig) -> int:
    flat = cfg.mu * cfg.filters
    return (
        gcn_conv_weight_count(cfg.filters, cfg.channels, cfg.cheb_order)
        + flat * cfg.fc
        + cfg.fc
        + cfg.fc * cfg.output
        + cfg.output
    )


def _segment_layout(shapes: dict[str, tuple[int, ...]]) -> tuple[dict[str, tuple[int, tuple[int, ...]]], int]:
    segments = {}
    offset = 0
    for name, shape in shapes.items():
        segments[name] = (offset, shape)
        offset += int(np.prod(shape))
    return segments, offset


def _views(weights: np.ndarray, segments) -> dict[str, np.ndarray]:
    out = {}
    for name, (offset, shape) in segments.items():
        size = int(np.prod(shape))
        out[name] = weights[offset : offset + size].reshape(shape)
    return out


# ---------------------------------------------------------------------------
# initialization


def init_olff(
    input_dim: int,
    hidden: int = 75,
    output: int = 6,
    seed: int = 0,
    mesh_id: str | None = None,
) -> Regressor:
    """Fully connected input -> hidden (rectifier) -> output network."""
    if min(input_dim, hidden, output) < 1:
        raise ValueError("all layer dimensions must be >= 1")
    cfg = OlffConfig(input_dim, hidden, output)
    segments, total = _segment_layout(
        {"w1": (input_dim, hidden), "b1": (hidden,), "w2": (hidden, output), "b2": (output,)}
    )
    assert total == olff_weight_count(input_dim, hidden, output)

    rng = np.random.default_rng(seed)
    weights = np.zeros(total)
    views = _views(weights, segments)
    views["w1"][...] = rng.uniform(-1.0, 1.0, views["w1"].shape) / np.sqrt(input_dim)
    views["w2"][...] = rng.uniform(-1.0, 1.0, views["w2"].shape) / np.sqrt(hidden)
    return Regressor("olff", cfg, weights, segments, seed, mesh_id=mesh_id, names=default_names(output))


def init_gcn(
    spectral: SpectralOperator,
    filters: int = 25,
    cheb_order: int = 15,
    fc: int = 2048,
    output: int = 6,
    seed: int = 0,
    channels: int = 3,
    mesh_id: str | None = None,
) -> Regressor:
    """Spectral projection -> Chebyshev filter bank -> FC (rectifier) -> output."""
    if spectral.mu < 1:
        raise ValueError("spectral operator must retain at least one frequency")
    if min(filters, cheb_order, fc, output, channels) < 1:
        raise ValueError("all architecture dimensions must be >= 1")
    cfg = GcnConfig(spectral.mu, filters, cheb_order, fc, output, channels)
    flat = cfg.mu * filters
    segments, total = _segment_layout(
        {
            "theta": (filters, channels, cheb_order),
            "w1": (flat, fc),
            "b1": (fc,),
            "w2": (fc, output),
            "b2": (output,),
        }
    )
    assert total == gcn_weight_count(cfg)

    rng = np.random.default_rng(seed)
    weights = np.zeros(total)
    views = _views(weights, segments)
    views["theta"][...] = rng.uniform(-1.0, 1.0, views["theta"].shape) / np.sqrt(channels * cheb_order)
    views["w1"][...] = rng.uniform(-1.0, 1.0, views["w1"].shape) / np.sqrt(flat)
    views["w2"][...] = rng.uniform(-1.0, 1.0, views["w2"].shape) / np.sqrt(fc)
    return Regressor("gcn", cfg, weights, segments, seed, spectral=spectral, mesh_id=mesh_id, names=default_names(output))


# ---------------------------------------------------------------------------
# Chebyshev filter responses


def cheb_response(theta: np.ndarray, lambda_tilde: float) -> float:
    """Filter response sum_k theta_k * (T_k(x) - T_k(1)) at x = lambda_tilde.

    The subtraction pins the response to exactly zero at x = 1, i.e. at the
    largest retained frequency of the rescaled spectrum.
    """
    if abs(lambda_tilde) > 1 + 1e-12:
        raise ValueError("lambda_tilde must lie in [-1, 1]")
    theta = np.asarray(theta, dtype=np.float64).ravel()
    at_x = _cheb_values(theta.size, float(lambda_tilde))
    at_one = _cheb_values(theta.size, 1.0)
    return float(np.dot(theta, at_x) - np.dot(theta, at_one))


def _cheb_values(order: int, x: float) -> np.ndarray:
    out = np.empty(order)
    for k in range(order):
        if k == 0:
            out[k] = 1.0
        elif k == 1:
            out[k] = x
        else:
            out[k] = 2.0 * x * out[k - 1] - out[k - 2]
    return out


def cheb_feature_basis(order: int, lambda_tilde: np.ndarray) -> np.ndarray:
    """Matrix T[k, i] = T_k(lam_i) - T_k(1); exactly zero wherever lam_i == 1."""
    lam = np.asarray(lambda_tilde, dtype=np.float64).ravel()
    basis = np.empty((order, lam.size))
    for k in range(order):
        if k == 0:
            basis[k] = 1.0
        elif k == 1:
            basis[k] = lam
        else:
            basis[k] = 2.0 * lam * basis[k - 1] - basis[k - 2]
    return basis - 1.0  # T_k(1) == 1 exactly under this recurrence


# ---------------------------------------------------------------------------
# forward / backward passes (batched; single samples use batch of one)


def _standardize(model: Regressor, raw: np.ndarray) -> np.ndarray:
    if model.input_mean is None:
        return raw
    return (raw - model.input_mean) / model.input_std


def _olff_inputs(model: Regressor, fields: list[VectorField]) -> np.ndarray:
    cfg = model.config
    raw = np.stack([f.values.reshape(-1) for f in fields])
    if raw.shape[1] != cfg.input_dim:
        raise ValueError(f"field size {raw.shape[1]} does not match input_dim {cfg.input_dim}")
    return _standardize(model, raw)


def _gcn_inputs(model: Regressor, fields: list[VectorField]) -> np.ndarray:
    spectral = model.spectral
    raw = np.stack([f.values for f in fields])  # (B, n_vertices, 3)
    if raw.shape[1] != spectral.eigenvectors.shape[0]:
        raise ValueError("field vertex count does not match spectral operator")
    z = _standardize(model, raw)
    # project every channel onto the retained eigenvectors: (B, mu, channels)
    return np.einsum("vm,bvc->bmc", spectral.eigenvectors, z)


def _check_mesh(model: Regressor, f: VectorField) -> None:
    if model.mesh_id is not None and f.mesh_id != model.mesh_id:
        raise ValueError("field belongs to a different mesh than the model")


def _olff_forward_batch(weights: np.ndarray, model: Regressor, z: np.ndarray):
    v = _views(weights, model.segments)
    hidden = np.maximum(z @ v["w1"] + v["b1"], 0.0)
    return hidden @ v["w2"] + v["b2"], hidden


def _olff_loss(weights: np.ndarray, model: Regressor, z: np.ndarray, targets: np.ndarray) -> float:
    out, _ = _olff_forward_batch(weights, model, z)
    return float(np.sum((out - targets) ** 2))


def _olff_loss_grad(
    weights: np.ndarray, model: Regressor, z: np.ndarray, targets: np.ndarray, out_grad: np.ndarray | None = None
):
    # every gradient segment is fully overwritten, so the buffer can be
    # reused across batches without zeroing (matters on slow memory)
    v = _views(weights, model.segments)
    out, hidden = _olff_forward_batch(weights, model, z)
    residual = out - targets
    sse = float(np.sum(residual**2))

    d_out = (2.0 / residual.size) * residual
    grad = np.empty_like(weights) if out_grad is None else out_grad
    g = _views(grad, model.segments)
    np.matmul(hidden.T, d_out, out=g["w2"])
    np.sum(d_out, axis=0, out=g["b2"])
    d_hidden = (d_out @ v["w2"].T) * (hidden > 0)
    np.matmul(z.T, d_hidden, out=g["w1"])
    np.sum(d_hidden, axis=0, out=g["b1"])
    return sse, grad


def _gcn_forward_batch(weights: np.ndarray, model: Regressor, shat: np.ndarray, basis: np.ndarray):
    cfg = model.config
    v = _views(weights, model.segments)
    responses = np.tensordot(v["theta"], basis, axes=([2], [0]))  # (F, C, mu)
    features = np.einsum("fci,bic->bfi", responses, shat)         # (B, F, mu)
    flat = features.reshape(shat.shape[0], cfg.filters * cfg.mu)
    hidden = np.maximum(flat @ v["w1"] + v["b1"], 0.0)
    return hidden @ v["w2"] + v["b2"], hidden, flat


def _gcn_loss(weights: np.ndarray, model: Regressor, shat: np.ndarray, targets: np.ndarray, basis: np.ndarray) -> float:
    out, _, _ = _gcn_forward_batch(weights, model, shat, basis)
    return float(np.sum((out - targets) ** 2))


def _gcn_loss_grad(
    weights: np.ndarray,
    model: Regressor,
    shat: np.ndarray,
    targets: np.ndarray,
    basis: np.ndarray,
    out_grad: np.ndarray | None = None,
):
    cfg = model.config
    v = _views(weights, model.segments)
    out, hidden, flat = _gcn_forward_batch(weights, model, shat, basis)
    residual = out - targets
    sse = float(np.sum(residual**2))

    d_out = (2.0 / residual.size) * residual
    grad = np.empty_like(weights) if out_grad is None else out_grad
    g = _views(grad, model.segments)
    np.matmul(hidden.T, d_out, out=g["w2"])
    np.sum(d_out, axis=0, out=g["b2"])
    d_hidden = (d_out @ v["w2"].T) * (hidden > 0)
    np.matmul(flat.T, d_hidden, out=g["w1"])
    np.sum(d_hidden, axis=0, out=g["b1"])
    d_features = (d_hidden @ v["w1"].T).reshape(shat.shape[0], cfg.filters, cfg.mu)
    d_responses = np.einsum("bfi,bic->fci", d_features, shat)
    g["theta"][...] = np.tensordot(d_responses, basis, axes=([2], [1]))
    return sse, grad


def olff_forward(model: Regressor, field: VectorField) -> ParameterVector:
    _check_mesh(model, field)
    z = _olff_inputs(model, [field])
    out, _ = _olff_forward_batch(model.weights, model, z)
    return ParameterVector(out[0], model.names)


def gcn_forward(model: Regressor, field: VectorField) -> ParameterVector:
    _check_mesh(model, field)
    shat = _gcn_inputs(model, [field])
    basis = cheb_feature_basis(model.config.cheb_order, model.spectral.rescaled_eigenvalues)
    out, _, _ = _gcn_forward_batch(model.weights, model, shat, basis)
    return ParameterVector(out[0], model.names)


def predict(model: Regressor, field: VectorField) -> ParameterVector:
    if model.kind == "olff":
        return olff_forward(model, field)
    if model.kind == "gcn":
        return gcn_forward(model, field)
    raise ValueError(f"unknown regressor kind {model.kind!r}")


def predict_batch(model: Regressor, fields: list[VectorField]) -> list[ParameterVector]:
    """Order-preserving batch prediction using one vectorized forward pass."""
    if not fields:
        return []
    for f in fields:
        _check_mesh(model, f)
    if model.kind == "olff":
        out, _ = _olff_forward_batch(model.weights, model, _olff_inputs(model, fields))
    elif model.kind == "gcn":
        basis = cheb_feature_basis(model.config.cheb_order, model.spectral.rescaled_eigenvalues)
        out, _, _ = _gcn_forward_batch(model.weights, model, _gcn_inputs(model, fields), basis)
    else:
        raise ValueError(f"unknown regressor kind {model.kind!r}")
    return [ParameterVector(row, model.names) for row in out]


# ---------------------------------------------------------------------------
# training


def _fit_standardizer(raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = raw.mean(axis=0)
    std = raw.std(axis=0)
    floor = _STD_FLOOR_REL * max(float(std.max()), 1.0)
    std = np.where(std <= floor, 1.0, std)
    return mean, std


def with_input_standardizer(model: Regressor, fields: list[VectorField]) -> Regressor:
    """Copy of `model` with per-feature z-scoring statistics fitted on `fields`.

    train() does this automatically; use it directly to put an untrained model
    into the same input configuration a trained one would have.
    """
    if model.kind == "olff":
        raw = np.stack([f.values.reshape(-1) for f in fields])
    else:
        raw = np.stack([f.values for f in fields])
    mean, std = _fit_standardizer(raw)
    copy = Regressor(
        kind=model.kind,
        config=model.config,
        weights=model.weights.copy(),
        segments=model.segments,
        seed=model.seed,
        training_log=list(model.training_log),
        spectral=model.spectral,
        mesh_id=model.mesh_id,
        names=model.names,
    )
    copy.input_mean, copy.input_std = mean, std
    return copy


def train(model: Regressor, train_set, opt: OptimizerConfig, progress=None) -> Regressor:
    """Train a copy of `model` on (VectorField, ParameterVector) pairs.

    Minimizes mean squared error on the parameter targets with seeded
    mini-batch shuffling. OLFF uses the Nesterov lookahead update (the
    gradient is evaluated at w + momentum * velocity); the GCN accumulates
    squared gradients AdaGrad-style. Raises TrainingDivergedError as soon as
    an epoch loss stops being finite. `progress`, when given, is called with
    (epoch, total_epochs, loss) after every epoch.
    """
    if not train_set:
        raise ValueError("training set is empty")
    fields = [f for f, _ in train_set]
    targets = np.stack([p.values for _, p in train_set])
    names = train_set[0][1].names
    cfg = model.config
    if targets.shape[1] != cfg.output:
        raise ValueError(f"targets have {targets.shape[1]} parameters, model outputs {cfg.output}")

    trained = Regressor(
        kind=model.kind,
        config=cfg,
        weights=model.weights.copy(),
        segments=model.segments,
        seed=model.seed,
        spectral=model.spectral,
        mesh_id=model.mesh_id or fields[0].mesh_id,
        names=names,
    )

    if model.kind == "olff":
        if fields[0].values.size != cfg.input_dim:
            raise ValueError("training fields do not match model input_dim")
    elif fields[0].values.shape[0] != model.spectral.eigenvectors.shape[0]:
        raise ValueError("training fields do not match spectral operator")
    standardized = with_input_standardizer(model, fields)
    trained.input_mean, trained.input_std = standardized.input_mean, standardized.input_std

    if model.kind == "olff":
        inputs = _olff_inputs(trained, fields)
        loss_grad = lambda w, idx, buf: _olff_loss_grad(w, trained, inputs[idx], targets[idx], buf)
    else:
        inputs = _gcn_inputs(trained, fields)
        basis = cheb_feature_basis(cfg.cheb_order, model.spectral.rescaled_eigenvalues)
        loss_grad = lambda w, idx, buf: _gcn_loss_grad(w, trained, inputs[idx], targets[idx], basis, buf)

    weights = trained.weights
    state = np.zeros_like(weights)  # velocity (nesterov) or accumulator (adagrad)
    grad = np.empty_like(weights)
    scratch = np.empty_like(weights)
    rng = np.random.default_rng(opt.seed)
    n_samples = len(fields)
    log: list[float] = []

    # overflow on the way to divergence is expected; the finite check below
    # turns it into a diagnostic error instead of a warning stream
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(opt.epochs):
            perm = rng.permutation(n_samples)
            sse_total = 0.0
            for start in range(0, n_samples, opt.batch_size):
                idx = perm[start : start + opt.batch_size]
                if opt.kind == "sgd_nesterov":
                    # gradient at the lookahead point w + momentum * velocity
                    np.multiply(state, opt.momentum, out=scratch)
                    scratch += weights
                    sse, _ = loss_grad(scratch, idx, grad)
                    state *= opt.momentum
                    grad *= opt.lr
                    state -= grad
                    weights += state
                else:
                    sse, _ = loss_grad(weights, idx, grad)
                    np.multiply(grad, grad, out=scratch)
                    state += scratch
                    np.sqrt(state, out=scratch)
                    scratch += opt.eps
                    np.divide(grad, scratch, out=scratch)
                    scratch *= opt.lr
                    weights -= scratch
                sse_total += sse
            epoch_loss = sse_total / (n_samples * cfg.output)
            if not np.isfinite(epoch_loss) or not np.all(np.isfinite(weights)):
                raise TrainingDivergedError(epoch, epoch_loss)
            log.append(epoch_loss)
            if progress is not None:
                progress(epoch, opt.epochs, epoch_loss)

    trained.training_log = log
    return trained


def gradient_check(
    model: Regressor,
    sample: tuple[VectorField, ParameterVector],
    h: float = 1e-5,
    n_weights: int = 200,
    seed: int = 0,
) -> float:
    """Max relative error of analytic vs central-difference gradients.

    Probes `n_weights` randomly chosen weights at step `h` on the given
    single-sample loss.
    """
    field, params = sample
    targets = params.values.reshape(1, -1)
    if model.kind == "olff":
        inputs = _olff_inputs(model, [field])
        loss_grad = lambda w: _olff_loss_grad(w, model, inputs, targets)
        loss_only = lambda w: _olff_loss(w, model, inputs, targets)
    else:
        basis = cheb_feature_basis(model.config.cheb_order, model.spectral.rescaled_eigenvalues)
        inputs = _gcn_inputs(model, [field])
        loss_grad = lambda w: _gcn_loss_grad(w, model, inputs, targets, basis)
        loss_only = lambda w: _gcn_loss(w, model, inputs, targets, basis)

    _, analytic = loss_grad(model.weights)
    denom = float(targets.size)  # sse -> mse

    rng = np.random.default_rng(seed)
    count = min(n_weights, model.weights.size)
    indices = rng.choice(model.weights.size, size=count, replace=False)

    worst = 0.0
    probe = model.weights.copy()
    for i in indices:
        original = probe[i]
        probe[i] = original + h
        loss_plus = loss_only(probe) / denom
        probe[i] = original - h
        loss_minus = loss_only(probe) / denom
        probe[i] = original
        fd = (loss_plus - loss_minus) / (2.0 * h)
        err = abs(analytic[i] - fd) / max(abs(analytic[i]) + abs(fd), 1e-8)
        worst = max(worst, err)
    return worst


# ---------------------------------------------------------------------------
# checkpoint format: manifest.json + little-endian float64 blobs


def save_model(directory: str | Path, model: Regressor) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    config = {k: getattr(model.config, k) for k in model.config.__dataclass_fields__}
    manifest = {
        "kind": model.kind,
        "config": config,
        "seed": model.seed,
        "training_log": model.training_log,
        "names": list(model.names),
        "mesh_id": model.mesh_id,
        "segments": {name: [off, list(shape)] for name, (off, shape) in model.segments.items()},
        "standardized": model.input_mean is not None,
        "input_shape": list(model.input_mean.shape) if model.input_mean is not None else None,
        "has_spectral": model.spectral is not None,
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, sort_keys=True) + "\n")
    (directory / "weights.bin").write_bytes(model.weights.astype("<f8").tobytes())
    if model.input_mean is not None:
        (directory / "input_mean.bin").write_bytes(model.input_mean.astype("<f8").tobytes())
        (directory / "input_std.bin").write_bytes(model.input_std.astype("<f8").tobytes())
    if model.spectral is not None:
        sp = model.spectral
        (directory / "spectral_eigenvalues.bin").write_bytes(sp.eigenvalues.astype("<f8").tobytes())
        (directory / "spectral_eigenvectors.bin").write_bytes(sp.eigenvectors.astype("<f8").tobytes())
        (directory / "spectral_rescaled.bin").write_bytes(sp.rescaled_eigenvalues.astype("<f8").tobytes())


def load_model(directory: str | Path) -> Regressor:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    kind = manifest["kind"]
    cfg = OlffConfig(**manifest["config"]) if kind == "olff" else GcnConfig(**manifest["config"])
    weights = np.frombuffer((directory / "weights.bin").read_bytes(), dtype="<f8").copy()
    segments = {name: (off, tuple(shape)) for name, (off, shape) in manifest["segments"].items()}

    spectral = None
    if manifest["has_spectral"]:
        mu = cfg.mu
        values = np.frombuffer((directory / "spectral_eigenvalues.bin").read_bytes(), dtype="<f8")
        vectors = np.frombuffer((directory / "spectral_eigenvectors.bin").read_bytes(), dtype="<f8").reshape(-1, mu)
        rescaled = np.frombuffer((directory / "spectral_rescaled.bin").read_bytes(), dtype="<f8")
        spectral = SpectralOperator(mu, _frozen(values.copy()), _frozen(vectors.copy()), _frozen(rescaled.copy()))

    model = Regressor(
        kind=kind,
        config=cfg,
        weights=weights,
        segments=segments,
        seed=manifest["seed"],
        training_log=list(manifest["training_log"]),
        spectral=spectral,
        mesh_id=manifest["mesh_id"],
        names=tuple(manifest["names"]),
    )
    if manifest["standardized"]:
        shape = tuple(manifest["input_shape"])
        model.input_mean = np.frombuffer((directory / "input_mean.bin").read_bytes(), dtype="<f8").reshape(shape).copy()
        model.input_std = np.frombuffer((directory / "input_std.bin").read_bytes(), dtype="<f8").reshape(shape).copy()
    return model

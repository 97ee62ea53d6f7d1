"""HTTP/JSON facade over the pipeline with on-disk artifact persistence.

Endpoints:
    POST /meshes                 build and persist a plate mesh
    POST /ensembles              sample a design and generate its fields
    POST /bases                  condense an ensemble and fit the PCA basis
    POST /models/train           queue a training job (one runs at a time)
    GET  /models/{id}            model manifest / job status
    GET  /models/{id}/progress   epoch-by-epoch training progress
    POST /interpolate            parameter set -> scalar field (+ timing)
    POST /compare                full error analysis for several models
    GET  /fields/{id}            impact-field blob (binary or JSON)
    GET  /artifacts              store index + session state

Bodies and responses are JSON; field payloads are float64 arrays, served as
JSON number arrays inline and as little-endian binaries from /fields.
"""
from __future__ import annotations

import queue
import threading
import time
from dataclasses import asdict, dataclass, field as dataclass_field
from typing import Literal, Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel

from . import analysis, interpolation, reduction, regressors
from .ensemble import (
    default_generator_config,
    generate_ensemble,
    latin_hypercube,
    three_level_factorial,
)
from .geometry import build_plate_mesh, normalized_laplacian, spectral_basis
from .store import ArtifactIntegrityError, ArtifactStore, UnknownArtifactError


class MeshRequest(BaseModel):
    nx: int = 40
    ny: int = 25
    width: float = 1200.0
    height: float = 700.0


class DesignSpec(BaseModel):
    kind: Literal["factorial3", "lhs"]
    n_samples: Optional[int] = None
    seed: int = 0


class GeneratorSpec(BaseModel):
    n_params: int = 6
    gamma: float = 0.0
    sigma: float = 0.0
    seed: int = 0
    amplitudes: Optional[list[float]] = None


class EnsembleRequest(BaseModel):
    mesh_id: str
    design: DesignSpec
    generator: GeneratorSpec = GeneratorSpec()


class BasisRequest(BaseModel):
    ensemble_id: str
    k: int = 10


class OptimizerSpec(BaseModel):
    lr: Optional[float] = None
    momentum: float = 0.9
    eps: float = 1e-8
    epochs: Optional[int] = None
    batch_size: int = 32
    seed: int = 0


class TrainRequest(BaseModel):
    ensemble_id: str
    kind: Literal["olff", "gcn"]
    optimizer: OptimizerSpec = OptimizerSpec()
    seed: int = 0
    hidden: int = 75
    mu: int = 100
    filters: int = 25
    cheb_order: int = 15
    fc: int = 2048


class InterpolateRequest(BaseModel):
    basis_id: str
    params: list[float]


class CompareRequest(BaseModel):
    model_ids: list[str]
    test_ensemble_id: str


@dataclass
class JobState:
    model_id: str
    status: str = "queued"  # queued | running | done | failed
    epoch: int = 0
    epochs: int = 0
    loss: Optional[float] = None
    error: Optional[str] = None


@dataclass
class SessionState:
    active_mesh_id: Optional[str] = None
    active_basis_id: Optional[str] = None
    active_model_ids: list[str] = dataclass_field(default_factory=list)
    last_interpolation: Optional[dict] = None


def default_optimizer_for(kind: str, spec: OptimizerSpec) -> regressors.OptimizerConfig:
    if kind == "olff":
        base = regressors.olff_default_optimizer()
    else:
        base = regressors.gcn_default_optimizer()
    return regressors.OptimizerConfig(
        kind=base.kind,
        lr=spec.lr if spec.lr is not None else base.lr,
        epochs=spec.epochs if spec.epochs is not None else base.epochs,
        momentum=spec.momentum,
        eps=spec.eps,
        batch_size=spec.batch_size,
        seed=spec.seed,
    )


def build_model_for_ensemble(store: ArtifactStore, request: TrainRequest) -> tuple:
    payload = store.load_ensemble(request.ensemble_id)
    mesh = payload["mesh"]
    pairs = payload["pairs"]
    n_params = payload["design"].n_params
    train_set = [(f, p) for p, f in pairs]
    if request.kind == "olff":
        model = regressors.init_olff(
            3 * mesh.vertex_count, hidden=request.hidden, output=n_params, seed=request.seed, mesh_id=mesh.id
        )
    else:
        mu = min(request.mu, mesh.vertex_count)
        spectral = spectral_basis(normalized_laplacian(mesh), mu)
        model = regressors.init_gcn(
            spectral,
            filters=request.filters,
            cheb_order=request.cheb_order,
            fc=request.fc,
            output=n_params,
            seed=request.seed,
            mesh_id=mesh.id,
        )
    return model, train_set


def run_comparison(store: ArtifactStore, model_ids: list[str], test_ensemble_id: str) -> tuple[str, dict]:
    """Prediction errors -> relative boxplots -> impact fields, persisted.

    Boxplot statistics are computed on relative errors (error / range width);
    impact fields are built from the mm-valued summaries so the field stays
    in physical units. Returns (report_id, report manifest).
    """
    if not model_ids:
        raise ValueError("need at least one model id")
    payload = store.load_ensemble(test_ensemble_id)
    mesh = payload["mesh"]
    design = payload["design"]
    pairs = payload["pairs"]

    cfg, _ = store.generator_config(test_ensemble_id)
    training_design = three_level_factorial(design.n_params, design.bounds, design.names)
    training = generate_ensemble(mesh, training_design, cfg)
    basis, _ = reduction.build_pca_basis(mesh, training_design, training, k=10 if design.n_params <= 10 else design.n_params)

    summaries = []
    impact_fields = []
    for model_id in model_ids:
        model = store.load_model(model_id)
        if model.mesh_id is not None and model.mesh_id != mesh.id:
            raise ValueError(f"model {model_id} was trained on a different mesh")
        errors = analysis.prediction_errors(model, pairs)
        relative = analysis.relative_errors(errors, design.bounds)
        summaries.append(analysis.summarize_errors(relative, design.names, model_id, relative=True))
        mm_summary = analysis.summarize_errors(errors, design.names, model_id, relative=False)
        for j in range(design.n_params):
            whisker = analysis.whisker_impact_field(basis, mm_summary, j)
            impact_fields.append(
                {
                    "model_id": model_id,
                    "parameter": design.names[j],
                    "kind": "whisker",
                    "span": whisker.metadata["span"],
                    "values": whisker.values,
                }
            )
            full = analysis.outlier_impact_field(basis, mm_summary, j)
            impact_fields.append(
                {
                    "model_id": model_id,
                    "parameter": design.names[j],
                    "kind": "full_span",
                    "span": full.metadata["span"],
                    "values": full.values,
                }
            )

    report = analysis.compare_models(summaries)
    report["test_ensemble_id"] = test_ensemble_id
    report["mesh_vertex_count"] = mesh.vertex_count
    report_id = store.save_report(report, impact_fields)
    return report_id, store.load_report(report_id)


def create_app(store_root) -> FastAPI:
    store = ArtifactStore(store_root)
    app = FastAPI(title="previs service")

    jobs: dict[str, JobState] = {}
    job_queue: queue.Queue = queue.Queue()
    session = SessionState()
    state_lock = threading.Lock()
    basis_cache: dict[str, object] = {}

    def worker():
        while True:
            item = job_queue.get()
            if item is None:
                return
            job, request = item
            with state_lock:
                job.status = "running"
            try:
                model, train_set = build_model_for_ensemble(store, request)
                opt = default_optimizer_for(request.kind, request.optimizer)
                with state_lock:
                    job.epochs = opt.epochs

                def report(epoch, epochs, loss):
                    with state_lock:
                        job.epoch = epoch + 1
                        job.loss = loss

                trained = regressors.train(model, train_set, opt, progress=report)
                store.save_model(trained, artifact_id=job.model_id)
                with state_lock:
                    job.status = "done"
            except Exception as exc:  # surfaced through the progress endpoint
                with state_lock:
                    job.status = "failed"
                    job.error = str(exc)
            finally:
                job_queue.task_done()

    threading.Thread(target=worker, daemon=True).start()

    def fail_unknown(exc: Exception):
        raise HTTPException(status_code=404, detail=str(exc))

    @app.post("/meshes")
    def post_mesh(request: MeshRequest):
        try:
            mesh = build_plate_mesh(request.nx, request.ny, request.width, request.height)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        artifact_id = store.save_mesh(mesh, request.nx, request.ny)
        with state_lock:
            session.active_mesh_id = artifact_id
        return {
            "id": artifact_id,
            "mesh_id": mesh.id,
            "vertex_count": mesh.vertex_count,
            "triangle_count": mesh.triangle_count,
        }

    @app.post("/ensembles")
    def post_ensemble(request: EnsembleRequest):
        try:
            mesh, _ = store.load_mesh(request.mesh_id)
        except UnknownArtifactError as exc:
            fail_unknown(exc)
        spec = request.design
        if spec.kind == "factorial3":
            design = three_level_factorial(request.generator.n_params)
        else:
            if spec.n_samples is None:
                raise HTTPException(status_code=400, detail="lhs design needs n_samples")
            design = latin_hypercube(spec.n_samples, request.generator.n_params, seed=spec.seed)
        generator_meta = {k: v for k, v in request.generator.model_dump().items() if v is not None}
        try:
            cfg = default_generator_config(mesh, **generator_meta)
            pairs = generate_ensemble(mesh, design, cfg)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        artifact_id = store.save_ensemble(request.mesh_id, design, pairs, generator_meta)
        return {"id": artifact_id, "rows": design.n_samples, "kind": design.kind}

    @app.post("/bases")
    def post_basis(request: BasisRequest):
        try:
            payload = store.load_ensemble(request.ensemble_id)
        except UnknownArtifactError as exc:
            fail_unknown(exc)
        try:
            basis, _ = reduction.build_pca_basis(
                payload["mesh"], payload["design"], payload["pairs"], k=request.k
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        artifact_id = store.save_basis(basis)
        with state_lock:
            session.active_basis_id = artifact_id
        return {
            "id": artifact_id,
            "k": basis.k,
            "explained_variance": reduction.explained_variance(basis),
        }

    @app.post("/models/train")
    def post_train(request: TrainRequest):
        if not store.exists(request.ensemble_id):
            raise HTTPException(status_code=404, detail=f"unknown ensemble {request.ensemble_id}")
        model_id = store.new_model_id(request.model_dump_json().encode())
        job = JobState(model_id=model_id)
        with state_lock:
            jobs[model_id] = job
        job_queue.put((job, request))
        return {"model_id": model_id, "status": "queued"}

    @app.get("/models/{model_id}")
    def get_model(model_id: str):
        if store.exists(model_id):
            manifest = store.model_manifest(model_id)
            return {
                "id": model_id,
                "status": "done",
                "kind": manifest["kind"],
                "config": manifest["config"],
                "seed": manifest["seed"],
                "epochs": len(manifest["training_log"]),
                "training_log": manifest["training_log"],
            }
        with state_lock:
            job = jobs.get(model_id)
            if job is not None:
                return {"id": model_id, "status": job.status, "error": job.error}
        raise HTTPException(status_code=404, detail=f"unknown model {model_id}")

    @app.get("/models/{model_id}/progress")
    def get_progress(model_id: str):
        with state_lock:
            job = jobs.get(model_id)
            if job is not None:
                return asdict(job)
        if store.exists(model_id):
            manifest = store.model_manifest(model_id)
            log = manifest["training_log"]
            return {
                "model_id": model_id,
                "status": "done",
                "epoch": len(log),
                "epochs": len(log),
                "loss": log[-1] if log else None,
                "error": None,
            }
        raise HTTPException(status_code=404, detail=f"unknown model {model_id}")

    def cached_basis(basis_id: str):
        basis = basis_cache.get(basis_id)
        if basis is None:
            basis = store.load_basis(basis_id)
            basis_cache[basis_id] = basis
        return basis

    @app.post("/interpolate")
    def post_interpolate(request: InterpolateRequest):
        try:
            basis = cached_basis(request.basis_id)
        except UnknownArtifactError as exc:
            fail_unknown(exc)
        except ArtifactIntegrityError as exc:
            raise HTTPException(status_code=500, detail=str(exc))
        params = np.asarray(request.params, dtype=np.float64)
        if params.size != basis.mean_params.size:
            raise HTTPException(status_code=400, detail="parameter count mismatch")
        within = bool(np.all(np.abs(params) <= 1.0 + 1e-12))
        start = time.perf_counter()
        fld = interpolation.interpolate(basis, params)
        elapsed_ms = (time.perf_counter() - start) * 1e3
        with state_lock:
            session.last_interpolation = {
                "basis_id": request.basis_id,
                "params": [float(x) for x in params],
                "elapsed_ms": elapsed_ms,
            }
        return {
            "field": fld.values.tolist(),
            "elapsed_ms": elapsed_ms,
            "within_bounds": within,
        }

    @app.post("/compare")
    def post_compare(request: CompareRequest):
        if not request.model_ids:
            raise HTTPException(status_code=400, detail="model_ids must not be empty")
        try:
            report_id, manifest = run_comparison(store, request.model_ids, request.test_ensemble_id)
        except (UnknownArtifactError, ArtifactIntegrityError) as exc:
            fail_unknown(exc)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        with state_lock:
            session.active_model_ids = list(request.model_ids)
        slim = lambda entry: {k: entry[k] for k in ("field_id", "model_id", "parameter", "kind", "span")}
        return {
            "report_id": report_id,
            "comparison": manifest["report"],
            "impact_fields": [slim(e) for e in manifest["impact_fields"] if e["kind"] == "whisker"],
            "full_span_fields": [slim(e) for e in manifest["impact_fields"] if e["kind"] == "full_span"],
        }

    @app.get("/fields/{field_id}")
    def get_field(field_id: str, format: str = "binary"):
        try:
            values, entry = store.load_report_field(field_id)
        except (UnknownArtifactError, ArtifactIntegrityError) as exc:
            fail_unknown(exc)
        if format == "json":
            return {"field_id": field_id, "values": values.tolist(), **{k: entry[k] for k in ("model_id", "parameter", "kind", "span")}}
        return Response(
            content=values.astype("<f8").tobytes(),
            media_type="application/octet-stream",
            headers={"X-Field-Length": str(values.size)},
        )

    @app.get("/artifacts")
    def get_artifacts():
        with state_lock:
            session_view = asdict(session)
        return {"artifacts": store.index(), "session": session_view}

    app.state.store = store
    return app

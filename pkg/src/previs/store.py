"""On-disk artifact store: manifest.json + binary blobs per artifact.

Layout is root/{kind}/{id}/ with an index at root/index.json recording the
sha256 of every file. Loads re-hash the files, so any byte flip surfaces as
ArtifactIntegrityError instead of silently corrupt numerics. Saving identical
payloads is idempotent and returns the existing id.
"""
from __future__ import annotations

import hashlib
import json
import threading
import time
from pathlib import Path

import numpy as np

from . import geometry, regressors
from .ensemble import EnsembleDesign, ParameterVector, VectorField, default_generator_config
from .geometry import SurfaceMesh
from .reduction import PcaBasis

KINDS = ("mesh", "ensemble", "basis", "model", "report")


class UnknownArtifactError(KeyError):
    def __init__(self, artifact_id: str):
        super().__init__(f"unknown artifact: {artifact_id}")

    def __str__(self) -> str:  # KeyError would repr-quote the message
        return self.args[0]


class ArtifactIntegrityError(RuntimeError):
    pass


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True) + "\n")


def _write_f8(path: Path, array: np.ndarray) -> None:
    path.write_bytes(np.ascontiguousarray(array).astype("<f8").tobytes())


def _read_f8(path: Path, shape=None) -> np.ndarray:
    array = np.frombuffer(path.read_bytes(), dtype="<f8").copy()
    return array.reshape(shape) if shape is not None else array


class ArtifactStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.RLock()
        self._index_path = self.root / "index.json"
        if not self._index_path.exists():
            self._write_index({})

    # -- index ------------------------------------------------------------

    def _write_index(self, index: dict) -> None:
        # atomic replace: concurrent readers never see a partial index
        tmp = self._index_path.with_suffix(".json.tmp")
        _write_json(tmp, index)
        tmp.replace(self._index_path)

    def _read_index(self) -> dict:
        return json.loads(self._index_path.read_text())

    def index(self) -> list[dict]:
        index = self._read_index()
        return [
            {
                "id": artifact_id,
                "kind": entry["kind"],
                "created_at": entry["created_at"],
                "meta": entry.get("meta", {}),
            }
            for artifact_id, entry in sorted(index.items(), key=lambda kv: kv[1]["created_at"])
        ]

    def exists(self, artifact_id: str) -> bool:
        return artifact_id in self._read_index()

    def kind_of(self, artifact_id: str) -> str:
        entry = self._read_index().get(artifact_id)
        if entry is None:
            raise UnknownArtifactError(artifact_id)
        return entry["kind"]

    def _dir(self, kind: str, artifact_id: str) -> Path:
        return self.root / kind / artifact_id

    def _register(self, kind: str, artifact_id: str, directory: Path, meta: dict | None = None) -> None:
        files = {p.name: _sha256(p) for p in sorted(directory.iterdir()) if p.is_file()}
        with self._lock:
            index = self._read_index()
            index[artifact_id] = {
                "kind": kind,
                "created_at": time.time(),
                "files": files,
                "meta": meta or {},
            }
            self._write_index(index)

    def _verified_dir(self, artifact_id: str, kind: str | None = None) -> Path:
        entry = self._read_index().get(artifact_id)
        if entry is None or (kind is not None and entry["kind"] != kind):
            raise UnknownArtifactError(artifact_id)
        directory = self._dir(entry["kind"], artifact_id)
        for name, digest in entry["files"].items():
            path = directory / name
            if not path.exists():
                raise ArtifactIntegrityError(f"{artifact_id}: missing file {name}")
            if _sha256(path) != digest:
                raise ArtifactIntegrityError(f"{artifact_id}: hash mismatch on {name}")
        return directory

    def _content_id(self, kind: str, *chunks: bytes) -> str:
        h = hashlib.sha256()
        for chunk in chunks:
            h.update(chunk)
        return f"{kind}-{h.hexdigest()[:12]}"

    # -- mesh ---------------------------------------------------------------

    def save_mesh(self, mesh: SurfaceMesh, nx: int, ny: int) -> str:
        artifact_id = self._content_id("mesh", mesh.id.encode())
        directory = self._dir("mesh", artifact_id)
        with self._lock:
            if self.exists(artifact_id):
                return artifact_id
            directory.mkdir(parents=True, exist_ok=True)
            geometry.save_mesh(directory, mesh, nx, ny)
            self._register(
                "mesh", artifact_id, directory,
                meta={"nx": int(nx), "ny": int(ny), "vertex_count": mesh.vertex_count, "mesh_id": mesh.id},
            )
        return artifact_id

    def load_mesh(self, artifact_id: str) -> tuple[SurfaceMesh, dict]:
        directory = self._verified_dir(artifact_id, "mesh")
        manifest = json.loads((directory / "manifest.json").read_text())
        return geometry.load_mesh(directory), manifest

    # -- ensemble -------------------------------------------------------------

    def save_ensemble(
        self,
        mesh_artifact_id: str,
        design: EnsembleDesign,
        pairs: list[tuple[ParameterVector, VectorField]],
        generator_meta: dict,
    ) -> str:
        rows = design.rows
        fields = np.stack([f.values for _, f in pairs]) if pairs else np.zeros((0, 0, 3))
        manifest = {
            "mesh_artifact_id": mesh_artifact_id,
            "design_kind": design.kind,
            "seed": design.seed,
            "names": list(design.names),
            "bounds": design.bounds.tolist(),
            "rows": rows.shape[0],
            "n_params": rows.shape[1],
            "vertex_count": fields.shape[1],
            "generator": generator_meta,
        }
        blob = json.dumps(manifest, sort_keys=True).encode()
        artifact_id = self._content_id("ensemble", blob, rows.tobytes(), fields.tobytes())
        directory = self._dir("ensemble", artifact_id)
        with self._lock:
            if self.exists(artifact_id):
                return artifact_id
            directory.mkdir(parents=True, exist_ok=True)
            _write_json(directory / "manifest.json", manifest)
            _write_f8(directory / "design.bin", rows)
            _write_f8(directory / "fields.bin", fields)
            self._register(
                "ensemble", artifact_id, directory,
                meta={
                    "rows": rows.shape[0],
                    "n_params": rows.shape[1],
                    "design_kind": design.kind,
                    "mesh_artifact_id": mesh_artifact_id,
                },
            )
        return artifact_id

    def load_ensemble(self, artifact_id: str) -> dict:
        directory = self._verified_dir(artifact_id, "ensemble")
        manifest = json.loads((directory / "manifest.json").read_text())
        rows = _read_f8(directory / "design.bin", (manifest["rows"], manifest["n_params"]))
        fields = _read_f8(directory / "fields.bin", (manifest["rows"], manifest["vertex_count"], 3))
        mesh, _ = self.load_mesh(manifest["mesh_artifact_id"])
        design = EnsembleDesign(
            rows,
            manifest["design_kind"],
            np.asarray(manifest["bounds"]),
            tuple(manifest["names"]),
            manifest["seed"],
        )
        pairs = [
            (ParameterVector(rows[i], design.names), VectorField(mesh.id, fields[i]))
            for i in range(rows.shape[0])
        ]
        return {
            "design": design,
            "pairs": pairs,
            "mesh": mesh,
            "mesh_artifact_id": manifest["mesh_artifact_id"],
            "generator": manifest["generator"],
        }

    def generator_config(self, ensemble_artifact_id: str):
        """Rebuild the generator config an ensemble artifact was created with."""
        payload = self.load_ensemble(ensemble_artifact_id)
        meta = dict(payload["generator"])
        return default_generator_config(payload["mesh"], **meta), payload

    # -- basis ----------------------------------------------------------------

    def save_basis(self, basis: PcaBasis) -> str:
        if not basis.has_parameter_sets:
            raise ValueError("only complete bases (with parameter sets) are persisted")
        manifest = {
            "mesh_id": basis.mesh_id,
            "k": basis.k,
            "names": list(basis.names),
            "explained_variance_ratio": basis.explained_variance_ratio.tolist(),
            "vertex_count": basis.mean_field.size,
            "n_params": basis.mean_params.size,
        }
        blob = json.dumps(manifest, sort_keys=True).encode()
        artifact_id = self._content_id(
            "basis", blob, basis.mean_field.tobytes(), basis.basis_fields.tobytes(), basis.basis_params.tobytes()
        )
        directory = self._dir("basis", artifact_id)
        with self._lock:
            if self.exists(artifact_id):
                return artifact_id
            directory.mkdir(parents=True, exist_ok=True)
            _write_json(directory / "manifest.json", manifest)
            _write_f8(directory / "mean_field.bin", basis.mean_field)
            _write_f8(directory / "basis_fields.bin", basis.basis_fields)
            _write_f8(directory / "basis_params.bin", basis.basis_params)
            _write_f8(directory / "mean_params.bin", basis.mean_params)
            self._register(
                "basis", artifact_id, directory,
                meta={"k": basis.k, "mesh_id": basis.mesh_id, "names": list(basis.names)},
            )
        return artifact_id

    def load_basis(self, artifact_id: str) -> PcaBasis:
        directory = self._verified_dir(artifact_id, "basis")
        manifest = json.loads((directory / "manifest.json").read_text())
        k, m, n = manifest["k"], manifest["vertex_count"], manifest["n_params"]
        return PcaBasis(
            mesh_id=manifest["mesh_id"],
            mean_field=_read_f8(directory / "mean_field.bin", (m,)),
            basis_fields=_read_f8(directory / "basis_fields.bin", (k, m)),
            explained_variance_ratio=np.asarray(manifest["explained_variance_ratio"]),
            k=k,
            basis_params=_read_f8(directory / "basis_params.bin", (k, n)),
            mean_params=_read_f8(directory / "mean_params.bin", (n,)),
            names=tuple(manifest["names"]),
        )

    # -- model ------------------------------------------------------------------

    def new_model_id(self, request_fingerprint: bytes) -> str:
        """Unique, submission-order-dependent id so duplicate requests differ."""
        with self._lock:
            count = sum(1 for e in self._read_index().values() if e["kind"] == "model")
            return self._content_id("model", request_fingerprint, str(count).encode(), str(time.time_ns()).encode())

    def save_model(self, model: regressors.Regressor, artifact_id: str | None = None) -> str:
        if artifact_id is None:
            artifact_id = self._content_id(
                "model", model.kind.encode(), model.weights.tobytes(), str(model.seed).encode()
            )
        directory = self._dir("model", artifact_id)
        with self._lock:
            if self.exists(artifact_id):
                return artifact_id
            directory.mkdir(parents=True, exist_ok=True)
            regressors.save_model(directory, model)
            self._register(
                "model", artifact_id, directory,
                meta={"kind": model.kind, "mesh_id": model.mesh_id, "epochs": len(model.training_log)},
            )
        return artifact_id

    def load_model(self, artifact_id: str) -> regressors.Regressor:
        return regressors.load_model(self._verified_dir(artifact_id, "model"))

    def model_manifest(self, artifact_id: str) -> dict:
        directory = self._verified_dir(artifact_id, "model")
        return json.loads((directory / "manifest.json").read_text())

    # -- report -------------------------------------------------------------------

    def save_report(self, report: dict, impact_fields: list[dict]) -> str:
        """Persist a comparison report plus one blob per impact field.

        Each impact_fields item is {"model_id", "parameter", "kind", "span",
        "values": ndarray}; field ids become "<report_id>-fNN".
        """
        blob = json.dumps(report, sort_keys=True).encode()
        field_bytes = b"".join(np.ascontiguousarray(f["values"]).astype("<f8").tobytes() for f in impact_fields)
        artifact_id = self._content_id("report", blob, field_bytes)
        directory = self._dir("report", artifact_id)
        with self._lock:
            if self.exists(artifact_id):
                return artifact_id
            directory.mkdir(parents=True, exist_ok=True)
            entries = []
            for i, f in enumerate(impact_fields):
                file_name = f"field_{i:02d}.bin"
                _write_f8(directory / file_name, f["values"])
                entries.append(
                    {
                        "field_id": f"{artifact_id}-f{i:02d}",
                        "model_id": f["model_id"],
                        "parameter": f["parameter"],
                        "kind": f["kind"],
                        "span": f["span"],
                        "file": file_name,
                        "length": int(np.asarray(f["values"]).size),
                    }
                )
            _write_json(directory / "manifest.json", {"report": report, "impact_fields": entries})
            self._register(
                "report", artifact_id, directory,
                meta={
                    "models": [m["model_id"] for m in report.get("models", [])],
                    "parameters": report.get("parameters", []),
                },
            )
        return artifact_id

    def load_report(self, artifact_id: str) -> dict:
        directory = self._verified_dir(artifact_id, "report")
        return json.loads((directory / "manifest.json").read_text())

    def load_report_field(self, field_id: str) -> tuple[np.ndarray, dict]:
        report_id, _, suffix = field_id.rpartition("-f")
        if not report_id or not suffix.isdigit():
            raise UnknownArtifactError(field_id)
        manifest = self.load_report(report_id)
        for entry in manifest["impact_fields"]:
            if entry["field_id"] == field_id:
                directory = self._dir("report", report_id)
                return _read_f8(directory / entry["file"], (entry["length"],)), entry
        raise UnknownArtifactError(field_id)

from __future__ import annotations

import numpy as np
import pytest

from previs import ensemble, geometry, interpolation, reduction, regressors
from previs.store import ArtifactIntegrityError, ArtifactStore, UnknownArtifactError


@pytest.fixture()
def store(tmp_path):
    return ArtifactStore(tmp_path / "store")


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    mesh = geometry.build_plate_mesh(6, 5, 120.0, 70.0)
    cfg = ensemble.default_generator_config(mesh)
    design = ensemble.latin_hypercube(20, 6, seed=1)
    pairs = ensemble.generate_ensemble(mesh, design, cfg)
    basis, _ = reduction.build_pca_basis(mesh, ensemble.three_level_factorial(6),
                                         ensemble.generate_ensemble(mesh, ensemble.three_level_factorial(6), cfg),
                                         k=10)
    return mesh, cfg, design, pairs, basis


class TestMeshArtifacts:
    def test_round_trip_bit_identical(self, store, pipeline):
        mesh = pipeline[0]
        artifact_id = store.save_mesh(mesh, 6, 5)
        loaded, manifest = store.load_mesh(artifact_id)
        assert loaded.id == mesh.id
        assert np.array_equal(loaded.vertices, mesh.vertices)
        assert manifest["nx"] == 6 and manifest["ny"] == 5

    def test_identical_payload_is_idempotent(self, store, pipeline):
        mesh = pipeline[0]
        first = store.save_mesh(mesh, 6, 5)
        second = store.save_mesh(mesh, 6, 5)
        assert first == second
        assert len(store.index()) == 1

    def test_distinct_payloads_get_distinct_ids(self, store, pipeline):
        mesh = pipeline[0]
        other = geometry.build_plate_mesh(4, 4, 50.0, 50.0)
        assert store.save_mesh(mesh, 6, 5) != store.save_mesh(other, 4, 4)
        assert len(store.index()) == 2

    def test_unknown_id(self, store):
        with pytest.raises(UnknownArtifactError):
            store.load_mesh("mesh-doesnotexist")

    def test_corruption_detected(self, store, pipeline):
        mesh = pipeline[0]
        artifact_id = store.save_mesh(mesh, 6, 5)
        blob_path = store.root / "mesh" / artifact_id / "vertices.bin"
        blob = bytearray(blob_path.read_bytes())
        blob[5] ^= 0x01
        blob_path.write_bytes(bytes(blob))
        with pytest.raises(ArtifactIntegrityError, match="hash mismatch"):
            store.load_mesh(artifact_id)


class TestEnsembleArtifacts:
    def test_round_trip(self, store, pipeline):
        mesh, cfg, design, pairs, _ = pipeline
        mesh_id = store.save_mesh(mesh, 6, 5)
        meta = {"n_params": 6, "gamma": 0.0, "sigma": 0.0, "seed": 0}
        artifact_id = store.save_ensemble(mesh_id, design, pairs, meta)
        payload = store.load_ensemble(artifact_id)
        assert np.array_equal(payload["design"].rows, design.rows)
        assert payload["design"].names == design.names
        assert len(payload["pairs"]) == len(pairs)
        for (pv_a, f_a), (pv_b, f_b) in zip(payload["pairs"], pairs):
            assert np.array_equal(pv_a.values, pv_b.values)
            assert np.array_equal(f_a.values, f_b.values)

    def test_generator_config_reconstruction(self, store, pipeline):
        mesh, cfg, design, pairs, _ = pipeline
        mesh_id = store.save_mesh(mesh, 6, 5)
        meta = {"n_params": 6, "gamma": 0.0, "sigma": 0.0, "seed": 0}
        artifact_id = store.save_ensemble(mesh_id, design, pairs, meta)
        rebuilt, _ = store.generator_config(artifact_id)
        assert np.array_equal(rebuilt.mode_fields, cfg.mode_fields)
        assert np.array_equal(rebuilt.baseline_field, cfg.baseline_field)


class TestBasisArtifacts:
    def test_round_trip_preserves_interpolation(self, store, pipeline):
        _, _, _, _, basis = pipeline
        artifact_id = store.save_basis(basis)
        loaded = store.load_basis(artifact_id)
        assert np.array_equal(loaded.basis_fields, basis.basis_fields)
        assert np.array_equal(loaded.basis_params, basis.basis_params)
        target = np.array([0.2, -0.4, 0.1, 0.0, 0.6, -0.2])
        assert np.array_equal(
            interpolation.interpolate(loaded, target).values,
            interpolation.interpolate(basis, target).values,
        )

    def test_rejects_incomplete_basis(self, store, pipeline):
        mesh = pipeline[0]
        fields = [
            reduction.ScalarField(mesh.id, np.random.default_rng(i).normal(size=mesh.vertex_count))
            for i in range(4)
        ]
        incomplete, _ = reduction.fit_pca(fields, k=2)
        with pytest.raises(ValueError):
            store.save_basis(incomplete)


class TestModelArtifacts:
    def test_round_trip(self, store, pipeline):
        mesh, _, _, pairs, _ = pipeline
        model = regressors.init_olff(3 * mesh.vertex_count, hidden=5, output=6, seed=0, mesh_id=mesh.id)
        trained = regressors.train(
            model, [(f, p) for p, f in pairs], regressors.olff_default_optimizer(epochs=3)
        )
        artifact_id = store.save_model(trained)
        loaded = store.load_model(artifact_id)
        assert np.array_equal(loaded.weights, trained.weights)
        assert loaded.training_log == trained.training_log

    def test_caller_assigned_id(self, store, pipeline):
        mesh = pipeline[0]
        model = regressors.init_olff(3 * mesh.vertex_count, hidden=4, output=6, seed=1)
        artifact_id = store.save_model(model, artifact_id="model-custom0001")
        assert artifact_id == "model-custom0001"
        assert store.kind_of("model-custom0001") == "model"

    def test_new_model_ids_are_unique(self, store):
        a = store.new_model_id(b"payload")
        b = store.new_model_id(b"payload")
        assert a != b


class TestReportArtifacts:
    def test_round_trip_with_fields(self, store):
        report = {"parameters": ["a", "b"], "models": []}
        fields = [
            {"model_id": "m1", "parameter": "a", "kind": "whisker", "span": [-0.1, 0.1], "values": np.arange(5.0)},
            {"model_id": "m1", "parameter": "b", "kind": "full_span", "span": [-1, 1], "values": np.ones(5)},
        ]
        report_id = store.save_report(report, fields)
        manifest = store.load_report(report_id)
        assert manifest["report"]["parameters"] == ["a", "b"]
        assert len(manifest["impact_fields"]) == 2

        field_id = manifest["impact_fields"][0]["field_id"]
        values, entry = store.load_report_field(field_id)
        assert np.array_equal(values, np.arange(5.0))
        assert entry["parameter"] == "a"

    def test_unknown_field_id(self, store):
        with pytest.raises(UnknownArtifactError):
            store.load_report_field("report-nope-f00")


class TestIndex:
    def test_lists_all_kinds(self, store, pipeline):
        mesh, _, design, pairs, basis = pipeline
        mesh_id = store.save_mesh(mesh, 6, 5)
        store.save_ensemble(mesh_id, design, pairs, {"n_params": 6})
        store.save_basis(basis)
        kinds = {entry["kind"] for entry in store.index()}
        assert kinds == {"mesh", "ensemble", "basis"}
        assert all("created_at" in entry for entry in store.index())

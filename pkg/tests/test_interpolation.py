from __future__ import annotations

import numpy as np
import pytest

from previs import ensemble, interpolation, reduction
from previs.reduction import PcaBasis


def synthetic_basis(params: np.ndarray, mean_params=None) -> PcaBasis:
    """Minimal basis carrying only the parameter-space data llsf_solve uses."""
    k, n = params.shape
    fields = np.eye(k, k + 3)  # orthonormal placeholder rows
    return PcaBasis(
        mesh_id="synthetic",
        mean_field=np.zeros(k + 3),
        basis_fields=fields,
        explained_variance_ratio=np.full(k, 1.0 / k),
        k=k,
        basis_params=params,
        mean_params=np.zeros(n) if mean_params is None else mean_params,
    )


class TestLlsfSolve:
    def test_mean_target_is_zero(self, small_basis):
        basis, _ = small_basis
        coeffs = interpolation.llsf_solve(basis, basis.mean_params)
        assert np.array_equal(coeffs, np.zeros(basis.k))

    def test_basis_parameter_set_targets_unit_coefficient(self, small_basis):
        basis, _ = small_basis
        assert basis.k == 6  # full column rank case: solution is exact
        for j in range(basis.k):
            target = basis.mean_params + basis.basis_params[j]
            coeffs = interpolation.llsf_solve(basis, target)
            expected = np.zeros(basis.k)
            expected[j] = 1.0
            assert np.max(np.abs(coeffs - expected)) <= 1e-8

    def test_matches_dense_pseudoinverse_oracle(self):
        rng = np.random.default_rng(42)
        for trial in range(100):
            n = rng.integers(2, 8)
            k = rng.integers(1, 12)
            params = rng.normal(size=(k, n))
            if trial % 3 == 0 and k >= 2:
                params[1:] = params[0] * rng.normal(size=(k - 1, 1))  # rank deficient
            basis = synthetic_basis(params)
            target = rng.normal(size=n)
            coeffs = interpolation.llsf_solve(basis, target)
            oracle = np.linalg.lstsq(params.T, target, rcond=1e-10)[0]
            assert np.max(np.abs(coeffs - oracle)) <= 1e-10

    def test_reports_effective_rank(self):
        params = np.vstack([np.eye(2), np.eye(2)])  # k=4 copies of 2 directions
        basis = synthetic_basis(params)
        _, rank = interpolation.llsf_solve(basis, np.ones(2), return_rank=True)
        assert rank == 2

    def test_rejects_empty_basis(self, small_mesh):
        field = reduction.ScalarField(small_mesh.id, np.ones(small_mesh.vertex_count))
        empty, _ = reduction.fit_pca([field] * 3, k=2)
        with pytest.raises(ValueError, match="empty"):
            interpolation.llsf_solve(empty, np.zeros(6))


class TestInterpolate:
    def test_mean_target_returns_mean_field(self, small_basis):
        basis, _ = small_basis
        field = interpolation.interpolate(basis, basis.mean_params)
        assert np.array_equal(field.values, basis.mean_field)

    def test_exact_on_training_rows(self, small_mesh, small_training, small_basis):
        design, fields = small_training
        basis, _ = small_basis
        for i in range(0, design.n_samples, 73):
            predicted = interpolation.interpolate(basis, design.rows[i]).values
            truth = reduction.condense_signed_magnitude(fields[i][1], small_mesh).values
            assert np.max(np.abs(predicted - truth)) <= 1e-8

    def test_exact_on_held_out_samples(self, small_mesh, small_cfg, small_basis):
        basis, _ = small_basis
        test = ensemble.latin_hypercube(25, 6, seed=99)
        for pv, field in ensemble.generate_ensemble(small_mesh, test, small_cfg):
            predicted = interpolation.interpolate(basis, pv).values
            truth = reduction.condense_signed_magnitude(field, small_mesh).values
            assert np.max(np.abs(predicted - truth)) <= 1e-8

    def test_affine_in_target(self, small_basis):
        basis, _ = small_basis
        rng = np.random.default_rng(5)
        for _ in range(10):
            a = rng.uniform(-1, 1, 6)
            b = rng.uniform(-1, 1, 6)
            alpha = rng.random()
            mixed = interpolation.interpolate(basis, alpha * a + (1 - alpha) * b).values
            combo = alpha * interpolation.interpolate(basis, a).values + (
                1 - alpha
            ) * interpolation.interpolate(basis, b).values
            assert np.max(np.abs(mixed - combo)) <= 1e-10

    def test_linear_case_has_no_null_space(self, small_basis):
        # with a linear generator the basis collapses to rank n, so the
        # parameter matrix has full column rank and null(P) is trivial
        basis, _ = small_basis
        _, rank = interpolation.llsf_solve(basis, np.zeros(6), return_rank=True)
        assert rank == basis.k == 6


class TestDeltaField:
    def test_identical_parameters_give_zero(self, small_basis):
        basis, _ = small_basis
        pv = ensemble.ParameterVector(np.full(6, 0.25))
        delta = interpolation.delta_field(basis, pv, pv)
        assert np.max(np.abs(delta.values)) <= 1e-12
        assert delta.metadata["a_pred"] == delta.metadata["a_true"]

    def test_matches_generator_difference(self, small_mesh, small_cfg, small_basis):
        # vanishing-interpolation-error case: delta of interpolants equals
        # the condensed difference of true fields
        basis, _ = small_basis
        rng = np.random.default_rng(17)
        for _ in range(10):
            a = ensemble.ParameterVector(rng.uniform(-1, 1, 6))
            a_bar = ensemble.ParameterVector(rng.uniform(-1, 1, 6))
            delta = interpolation.delta_field(basis, a, a_bar).values
            ua = reduction.condense_signed_magnitude(
                ensemble.synthesize_field(small_mesh, a, small_cfg), small_mesh
            ).values
            ub = reduction.condense_signed_magnitude(
                ensemble.synthesize_field(small_mesh, a_bar, small_cfg), small_mesh
            ).values
            assert np.max(np.abs(delta - (ua - ub))) <= 1e-8

    def test_difference_depends_only_on_offset(self, small_basis):
        basis, _ = small_basis
        offset = np.array([0.2, -0.1, 0.05, 0.0, 0.3, -0.25])
        deltas = []
        for shift in (np.zeros(6), np.full(6, 0.4), np.full(6, -0.3)):
            delta = interpolation.delta_field(
                basis,
                ensemble.ParameterVector(shift + offset),
                ensemble.ParameterVector(shift),
            )
            deltas.append(delta.values)
        assert np.max(np.abs(deltas[0] - deltas[1])) <= 1e-10
        assert np.max(np.abs(deltas[0] - deltas[2])) <= 1e-10


class TestValidateInterpolation:
    def test_training_set_is_exact_in_linear_mode(self, small_mesh, small_training, small_basis):
        _, fields = small_training
        basis, _ = small_basis
        report = interpolation.validate_interpolation(basis, fields[::9], small_mesh)
        assert report.max_abs_error <= 1e-8

    def test_report_invariants(self, small_mesh, small_cfg, small_basis):
        basis, _ = small_basis
        test = ensemble.generate_ensemble(
            small_mesh, ensemble.latin_hypercube(30, 6, seed=2), small_cfg
        )
        report = interpolation.validate_interpolation(basis, test, small_mesh)
        assert report.max_abs_error >= report.rms_error >= 0
        assert report.max_abs_error == max(report.per_sample_max)
        assert len(report.per_sample_max) == 30

    def test_nonlinear_generator_degrades_accuracy(self, small_mesh):
        design = ensemble.three_level_factorial(6)
        test = ensemble.latin_hypercube(40, 6, seed=3)
        reports = {}
        for gamma in (0.0, 0.2):
            cfg = ensemble.default_generator_config(small_mesh, gamma=gamma)
            training = ensemble.generate_ensemble(small_mesh, design, cfg)
            basis, _ = reduction.build_pca_basis(small_mesh, design, training, k=10)
            fields = ensemble.generate_ensemble(small_mesh, test, cfg)
            reports[gamma] = interpolation.validate_interpolation(basis, fields, small_mesh)
        assert np.isfinite(reports[0.2].max_abs_error)
        assert reports[0.2].max_abs_error > reports[0.0].max_abs_error

    def test_rejects_empty_test_set(self, small_mesh, small_basis):
        basis, _ = small_basis
        with pytest.raises(ValueError):
            interpolation.validate_interpolation(basis, [], small_mesh)

from __future__ import annotations

import numpy as np
import pytest

from previs import ensemble, geometry, reduction

ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): named acceptance criterion, reported in the summary"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and report.when == "call":
        ACCEPTANCE_RESULTS[marker.args[0]] = (report.passed, item.name)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS):
        passed, _ = ACCEPTANCE_RESULTS[name]
        terminalreporter.write_line(f"ACCEPTANCE {name}: {'PASS' if passed else 'FAIL'}")

# Sized so module tests stay fast; the acceptance suite uses the full
# 40x25 desk mesh with the 729/1400 ensembles.
SMALL_NX, SMALL_NY = 10, 8


@pytest.fixture(scope="session")
def small_mesh():
    return geometry.build_plate_mesh(SMALL_NX, SMALL_NY, 1200.0, 700.0)


@pytest.fixture(scope="session")
def small_cfg(small_mesh):
    return ensemble.default_generator_config(small_mesh)


@pytest.fixture(scope="session")
def small_training(small_mesh, small_cfg):
    design = ensemble.three_level_factorial(6)
    fields = ensemble.generate_ensemble(small_mesh, design, small_cfg)
    return design, fields


@pytest.fixture(scope="session")
def small_basis(small_mesh, small_training):
    design, fields = small_training
    basis, scores = reduction.build_pca_basis(small_mesh, design, fields, k=10)
    return basis, scores


def condensed_mode_matrix(mesh, cfg) -> np.ndarray:
    """Columns are the normal-projected generator modes: the linear map a -> field."""
    return np.stack(
        [np.einsum("ij,ij->i", cfg.mode_fields[i], mesh.normals) for i in range(cfg.n_params)],
        axis=1,
    )

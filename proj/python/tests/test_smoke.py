import math
import os
from pathlib import Path

import numpy as np
import pytest

import hyfl

DATA = Path(__file__).resolve().parents[2] / "tests" / "data" / "mnist_subset.libsvm.gz"


@pytest.fixture(scope="module")
def synth():
    return hyfl.synth_dataset(seed=7, n_samples=200, n_features=20, margin=0.1)


def test_dense_round_trip():
    X = np.array([[0.0, 1.5], [2.0, 0.0]])
    d = hyfl.Dataset(X, [1, -1])
    assert d.n_samples == 2 and d.n_features == 2 and d.nonzeros == 2
    np.testing.assert_array_equal(d.to_dense(), X)
    with pytest.raises(ValueError):
        hyfl.Dataset(X, [1])


def test_hyfdca_matches_central_optimum(synth):
    part = hyfl.partition_nonzero_split(synth, 2, 2, seed=7)
    params = hyfl.HyfdcaParams(inner_iterations=20)
    h = hyfl.run_hyfdca(synth, part, params, lambda_=0.01, iterations=500)
    central = hyfl.run_sdca_central(synth, 0.01, gap_target=1e-9)
    assert len(h) == 500
    assert h.primal[-1] - h.dual[-1] <= 1e-3
    assert abs(h.primal[-1] - central.P_star) / central.P_star <= 1e-2
    assert np.all(np.diff(h.dual) >= -1e-12)
    meta = hyfl.metadata(h)
    assert meta["privacy_audit"]["violations"] == 0
    assert meta["rtc_per_iteration"] == 4.5


def test_fedavg_runs_without_dual(synth):
    part = hyfl.partition_horizontal(synth, 4)
    h = hyfl.run_fedavg(synth, part, hyfl.FedAvgParams(inner_iterations=10), hyfl.Schedule.random_fraction(0.5, 1),
                        lambda_=0.01, iterations=50, seed=3)
    assert np.all(np.isnan(h.dual))
    assert np.isfinite(h.primal).all()
    assert h.final_w.shape == (20,)


def test_objectives_and_steps(synth):
    w = np.zeros(synth.n_features)
    assert hyfl.primal_objective(w, synth, 0.1) == pytest.approx(1.0)
    assert hyfl.dual_objective(np.zeros(synth.n_samples), synth, 0.1) == 0.0
    assert hyfl.closed_form_dual_step(1, 0.0, 0.5, 0.5, 2) == 0.5
    assert hyfl.accuracy(w, synth) >= 0.0


def test_timing_and_gra():
    expected = 100 * 0.018882 + 100 * 0.018865 + 50 * 0.000054 + 4.5 * 0.2575
    assert hyfl.iteration_charge(0.0, 100, 100, 50, 0.2575) == expected
    best, grades = hyfl.gra_select([[1.0, 0.0], [0.0, 1.0]], [True, True])
    assert best == 0 and grades[0] == pytest.approx(2 / 3) and grades[0] == grades[1]
    assert hyfl.inner_iterations(0.1, 1000, 10) == 10


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        hyfl.HyfdcaParams(gamma="sometimes")
    with pytest.raises(ValueError):
        hyfl.Schedule.random_fraction(0.0)
    with pytest.raises(hyfl.Error):
        hyfl.load_libsvm("/nonexistent/file.libsvm")


@pytest.mark.skipif(not DATA.exists(), reason="mnist subset not present")
def test_mnist_quadrant():
    images = hyfl.load_libsvm(DATA, label_threshold=4.5, n_features=784)
    assert images.n_samples == 2500
    data, part = hyfl.partition_quadrant(images, 8)
    assert data.n_features == 785 and part.n_clients == 8
    part.check_coverage(data)

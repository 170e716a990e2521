import warnings

import numpy as np
import pytest
from scipy.special import softmax

from oracles import central_difference
from priorshift.calibration import (CalibrationParams, T_MAX,
                                    apply_calibration, calibration_nll,
                                    calibration_nll_grad, fit_bcts,
                                    fit_temperature)
from priorshift.core import DomainError, PriorShiftWarning
from priorshift.synth import (CALIBRATED, OVERCONFIDENT, GaussianPair,
                              classifier_predictions, generate_dataset)


@pytest.fixture(scope="module")
def testbed():
    x, y = generate_dataset(GaussianPair(), [0.5, 0.5], 50_000, seed=11)
    return x, y


@pytest.mark.parametrize("params, row, expected", [
    (CalibrationParams(1.0, [0.0, 0.0]), [0.0, 0.0], [0.5, 0.5]),
    (CalibrationParams(2.0, [0.0, 0.0]), [np.log(9), 0.0], [0.75, 0.25]),
    (CalibrationParams(1.0, [np.log(2), 0.0]), [0.0, 0.0], [2 / 3, 1 / 3]),
])
def test_apply_examples(params, row, expected):
    np.testing.assert_allclose(apply_calibration([row], params)[0], expected, atol=1e-15)


def test_identity_is_softmax():
    z = np.random.default_rng(0).normal(scale=5, size=(100, 6))
    out = apply_calibration(z, CalibrationParams.identity(6))
    assert np.max(np.abs(out - softmax(z, axis=1))) < 1e-12


def test_row_shift_invariance():
    rng = np.random.default_rng(1)
    z = rng.normal(size=(50, 4))
    params = CalibrationParams(1.7, [0.3, -0.2, 0.1, 0.0])
    shifted = z + rng.normal(scale=10, size=(50, 1))
    np.testing.assert_allclose(apply_calibration(shifted, params), apply_calibration(z, params), atol=1e-12)


def test_invalid_params():
    with pytest.raises(DomainError):
        CalibrationParams(0.0)
    with pytest.raises(DomainError):
        CalibrationParams(1.0, [np.nan])


@pytest.mark.parametrize("seed", range(5))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    k = rng.integers(2, 6)
    z = rng.normal(scale=3, size=(40, k))
    y = rng.integers(0, k, size=40)
    t, b = rng.uniform(0.5, 3), rng.normal(size=k)
    d_t, d_b = calibration_nll_grad(z, y, t, b)
    h = 1e-5
    fd_t = (calibration_nll(z, y, t + h, b) - calibration_nll(z, y, t - h, b)) / (2 * h)
    fd_b = central_difference(lambda bb: calibration_nll(z, y, t, bb), b, h)
    assert abs(d_t - fd_t) <= 1e-4 * max(abs(fd_t), 1e-8)
    np.testing.assert_allclose(d_b, fd_b, rtol=1e-4, atol=1e-10)


def test_separated_logits_sharpen():
    rng = np.random.default_rng(3)
    y = rng.integers(0, 3, size=300)
    z = 4.0 * np.eye(3)[y] + rng.normal(scale=0.1, size=(300, 3))
    params = fit_temperature(z, y)
    assert params.temperature <= 1.0
    assert calibration_nll(z, y, params.temperature) <= calibration_nll(z, y, 1.0)


def test_overconfident_temperature(testbed):
    x, y = testbed
    _, z = classifier_predictions(OVERCONFIDENT, x)
    params = fit_temperature(z, y)
    assert abs(params.temperature - 2.0) <= 0.1
    np.testing.assert_array_equal(params.bias_vector(2), 0.0)


def test_bcts_on_calibrated_is_identity(testbed):
    x, y = testbed
    _, z = classifier_predictions(CALIBRATED, x)
    params = fit_bcts(z, y)
    assert abs(params.temperature - 1.0) <= 0.1
    assert np.all(np.abs(params.biases) <= 0.1)
    assert params.biases[-1] == 0.0
    assert calibration_nll(z, y, params.temperature, params.biases) <= calibration_nll(z, y, 1.0)


def test_bcts_permuted_labels_no_better_than_uniform(testbed):
    x, y = testbed
    _, z = classifier_predictions(CALIBRATED, x)
    yp = np.random.default_rng(5).permutation(y)
    params = fit_bcts(z, yp)
    assert calibration_nll(z, yp, params.temperature, params.biases) >= np.log(2) - 0.05


def test_bias_cancels_constant_logit_shift(testbed):
    x, y = testbed
    _, z = classifier_predictions(CALIBRATED, x)
    c = 1.5
    shifted = z.copy()
    shifted[:, 0] += c
    base = fit_bcts(z, y, fixed_temperature=1.0)
    moved = fit_bcts(shifted, y, fixed_temperature=1.0)
    assert moved.temperature == 1.0
    assert abs(moved.biases[0] - (base.biases[0] - c)) < 1e-4
    assert abs(moved.biases[0] + c) < 0.1


def test_degenerate_labels_clamp_temperature():
    v = np.random.default_rng(2).normal(size=100)
    s = np.concatenate([v, -v])
    z = np.column_stack([np.zeros_like(s), s])
    with pytest.warns(PriorShiftWarning, match="clamped"):
        params = fit_temperature(z, np.zeros(s.size, dtype=int))
    assert params.temperature == pytest.approx(T_MAX)


def test_bcts_needs_enough_rows():
    with pytest.raises(DomainError):
        fit_bcts(np.zeros((2, 2)), [0, 1])


def test_fit_never_worsens_initial_nll():
    rng = np.random.default_rng(9)
    for _ in range(5):
        z = rng.normal(scale=2, size=(60, 3))
        y = rng.integers(0, 3, size=60)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PriorShiftWarning)
            for fit in (fit_temperature, fit_bcts):
                p = fit(z, y)
                assert calibration_nll(z, y, p.temperature, p.bias_vector(3)) <= calibration_nll(z, y, 1.0)

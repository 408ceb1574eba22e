import numpy as np
import pytest

from conftest import BINOM
from minmarkov.exceptions import InputError, UnobservedStateError
from minmarkov.expfam import mean_map
from minmarkov.inference import ParametricModel, fit, sample_targets, window_index
from minmarkov.mininfo import MinInfoSpec, construct, inar1_dependence, inar2_dependence
from minmarkov.sampling import TimeSeries, empirical_marginal, sample_path
from minmarkov.statespace import StateSpace

BASE = StateSpace.integers(5)
XY = inar1_dependence(5, 1.0)


def test_window_index():
    x = np.array([0, 1, 2, 1])
    np.testing.assert_array_equal(window_index(x, 3, 1), [1, 5, 7])
    np.testing.assert_array_equal(window_index(x, 3, 2), [5, 16])


def test_independence_truth_gives_small_theta():
    truth = construct(MinInfoSpec(BASE, np.zeros((6, 6)), BINOM))
    model = ParametricModel(BASE, [XY])
    hits = sum(abs(fit(model, sample_path(truth, 10_000, seed=s)).theta_hat[0]) <= 0.1 for s in range(20))
    assert hits >= 18


def test_inar1_round_trip(inar1):
    model = ParametricModel(BASE, [XY])
    est = np.array([fit(model, sample_path(inar1, 10_000, seed=s)).theta_hat[0] for s in range(30)])
    assert np.mean(np.abs(est + 1) <= 0.15) >= 0.9


def test_fitted_moments_match_sample_targets(inar1):
    ts = sample_path(inar1, 5000, seed=3)
    fr = fit(ParametricModel(BASE, [XY]), ts)
    mu_h, freq, n_win = sample_targets(ParametricModel(BASE, [XY]), ts)
    assert n_win == 4999
    assert fr.result.pair().reshape(-1) @ XY.reshape(-1) == pytest.approx(mu_h[0], abs=1e-8)
    np.testing.assert_allclose(fr.result.stationary_1, freq, atol=1e-8)


def test_marginal_only_model_recovers_frequencies(inar1):
    ts = sample_path(inar1, 3000, seed=5)
    fr = fit(ParametricModel(BASE, []), ts)
    assert fr.theta_hat.shape == (0,)
    freq = np.bincount(ts.values[1:], minlength=6) / (len(ts) - 1)
    np.testing.assert_allclose(fr.result.stationary_1, freq, atol=1e-8)
    np.testing.assert_allclose(fr.kernel_hat, np.tile(freq, (6, 1)), atol=1e-8)
    np.testing.assert_allclose(fr.delta_hat, -np.log(freq), atol=1e-7)


def test_missing_state_is_reported():
    x = np.array([0, 1, 2, 3, 4, 3, 2, 1, 0] * 20)
    with pytest.raises(UnobservedStateError) as ei:
        fit(ParametricModel(BASE, [XY]), TimeSeries(BASE, x))
    assert ei.value.missing == ["5"]
    assert "5" in str(ei.value)


def test_smoothing_allows_missing_state():
    x = np.array([0, 1, 2, 3, 4, 3, 2, 1, 0] * 20)
    fr = fit(ParametricModel(BASE, [XY]), TimeSeries(BASE, x), smoothing=0.5)
    assert fr.marginal[5] > 0
    assert np.all(fr.result.kernel > 0)


def test_negative_smoothing_rejected():
    with pytest.raises(InputError):
        sample_targets(ParametricModel(BASE, [XY]), TimeSeries(BASE, np.arange(6)), smoothing=-1)


def test_second_order_fit(inar2):
    h1 = inar2_dependence(5, (1.0, 0.0))
    h2 = inar2_dependence(5, (0.0, 1.0))
    ts = sample_path(inar2, 20_000, seed=1)
    fr = fit(ParametricModel(BASE, [h1, h2], order=2), ts)
    np.testing.assert_allclose(fr.theta_hat, [0.6, -0.3], atol=0.15)
    assert fr.n_windows == 19_998


def test_offset_table_is_held_fixed(inar1):
    # h0 carries the whole dependence: the marginal-only fit keeps alpha = -1
    ts = sample_path(inar1, 5000, seed=2)
    fr = fit(ParametricModel(BASE, [], h0=-XY), ts)
    np.testing.assert_allclose(fr.result.H, -XY)
    np.testing.assert_allclose(fr.result.stationary_1, np.bincount(ts.values[1:], minlength=6) / 4999, atol=1e-8)


def test_model_validation():
    with pytest.raises(InputError):
        ParametricModel(BASE, [np.zeros((6, 5))])
    with pytest.raises(InputError):
        ParametricModel(BASE, [XY], order=0)
    with pytest.raises(InputError):
        ParametricModel(BASE, [np.full((6, 6), np.inf)])


def test_short_series_rejected():
    with pytest.raises(InputError):
        fit(ParametricModel(BASE, [XY]), TimeSeries(BASE, [1]))


def test_state_space_mismatch_rejected():
    with pytest.raises(InputError):
        fit(ParametricModel(BASE, [XY]), TimeSeries(StateSpace.integers(2), [0, 1, 2, 0]))


@pytest.mark.slow
def test_consistency_trend(inar1):
    model = ParametricModel(BASE, [XY])
    medians = []
    for n in (500, 1000, 2000, 4000):
        errs = []
        for s in range(50):
            try:
                errs.append(abs(fit(model, sample_path(inar1, n, seed=1000 + s)).theta_hat[0] + 1))
            except UnobservedStateError:
                errs.append(np.inf)
        medians.append(np.median(errs))
    assert all(a > b for a, b in zip(medians, medians[1:]))

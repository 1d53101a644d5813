import numpy as np
import pytest

from pipeline.normalization import apply_normalization, fit_normalization
from pipeline.recordings import Recording
from utils.error_handler import DataError
from tests.helpers import make_recording, make_set


def _constant_channel_set():
    samples = np.column_stack([np.array([1.0, 2.0, 3.0]), np.full(3, 4.0)])
    return make_set(Recording("1", 30.0, ["a", "b"], samples, np.zeros(3, dtype=np.int64)))


def test_population_std():
    stats = fit_normalization(_constant_channel_set())
    np.testing.assert_allclose(stats.mean, [2.0, 4.0])
    np.testing.assert_allclose(stats.std, [np.sqrt(2.0 / 3.0), 0.0])


def test_constant_channel_maps_to_zero():
    rs = _constant_channel_set()
    out = apply_normalization(rs, fit_normalization(rs))
    np.testing.assert_array_equal(out.recordings[0].samples[:, 1], np.zeros(3))


@pytest.mark.parametrize("value, n", [(0.1, 3), (0.3, 1000), (-7.7, 17)])
def test_inexact_constant_channel_maps_to_exact_zero(value, n):
    samples = np.column_stack([np.linspace(-1.0, 1.0, n), np.full(n, value)])
    rs = make_set(Recording("1", 30.0, ["a", "b"], samples, np.zeros(n, dtype=np.int64)))
    stats = fit_normalization(rs)
    assert stats.std[1] == 0.0
    assert stats.mean[1] == value
    out = apply_normalization(rs, stats)
    np.testing.assert_array_equal(out.recordings[0].samples[:, 1], np.zeros(n))


def test_stats_cover_the_union_of_recordings():
    a = Recording("1", 30.0, ["a"], np.array([[0.0], [0.0]]), np.zeros(2, dtype=np.int64))
    b = Recording("2", 30.0, ["a"], np.array([[3.0], [3.0], [3.0], [3.0]]), np.zeros(4, dtype=np.int64))
    stats = fit_normalization(make_set(a, b))
    # the mean of per-recording means would be 1.5
    assert stats.mean[0] == pytest.approx(2.0)


def test_fitting_split_gets_zero_mean_unit_std():
    rs = make_set(*(make_recording(str(i), n=200, channels=4, seed=i) for i in range(3)))
    out = apply_normalization(rs, fit_normalization(rs))
    stacked = np.concatenate([r.samples for r in out])
    assert np.abs(stacked.mean(axis=0)).max() < 1e-6
    assert np.abs(stacked.std(axis=0) - 1.0).max() < 1e-6


def test_other_splits_are_not_renormalized():
    train = make_set(make_recording("1", n=100, seed=1))
    shifted = make_recording("2", n=100, seed=2)
    shifted.samples = shifted.samples + 10.0
    out = apply_normalization(make_set(shifted), fit_normalization(train))
    assert out.recordings[0].samples.mean() > 5.0


def test_channel_mismatch():
    stats = fit_normalization(make_set(make_recording(channels=2)))
    with pytest.raises(DataError, match="Channel mismatch"):
        apply_normalization(make_set(make_recording(channels=3)), stats)


def test_stats_serialize():
    d = fit_normalization(_constant_channel_set()).to_dict()
    assert d["channels"] == ["a", "b"]
    assert d["source_split"] == "train"

import numpy as np
import pytest

from evaluation.metrics import compute_metrics, f1_from_precision_recall
from utils.error_handler import DataError


def _brute_force_mean_f1(y_true, y_pred, num_classes):
    total = 0.0
    for c in range(num_classes):
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == c and p == c)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != c and p == c)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == c and p != c)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        total += 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return total / num_classes


def test_perfect_predictions():
    y = [0, 0, 0, 1, 2, 2]
    report = compute_metrics(y, y, 3)
    assert report.mean_f1 == 1.0
    assert [c.support for c in report.per_class] == [3, 1, 2]


def test_constant_predictor_on_two_balanced_classes():
    report = compute_metrics([0, 0, 1, 1], [0, 0, 0, 0], 2)
    assert report.per_class[0].precision == 0.5
    assert report.per_class[0].recall == 1.0
    assert report.per_class[0].f1 == pytest.approx(2 / 3)
    assert report.per_class[1].f1 == 0.0
    assert report.mean_f1 == pytest.approx(1 / 3)


def test_absent_classes_count_as_zero():
    report = compute_metrics([0, 1], [0, 1], 4)
    assert report.mean_f1 == pytest.approx(0.5)


def test_matches_brute_force_on_random_vectors():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        c = int(rng.integers(2, 7))
        n = int(rng.integers(1, 40))
        y_true = rng.integers(0, c, n)
        y_pred = rng.integers(0, c, n)
        assert compute_metrics(y_true, y_pred, c).mean_f1 == pytest.approx(
            _brute_force_mean_f1(y_true, y_pred, c), abs=1e-12
        )


def test_confusion_rows_sum_to_support():
    rng = np.random.default_rng(1)
    y_true, y_pred = rng.integers(0, 5, 200), rng.integers(0, 5, 200)
    report = compute_metrics(y_true, y_pred, 5)
    np.testing.assert_array_equal(report.confusion.sum(axis=1), [c.support for c in report.per_class])
    assert report.confusion.sum() == 200


def test_sample_order_does_not_matter():
    rng = np.random.default_rng(2)
    y_true, y_pred = rng.integers(0, 4, 100), rng.integers(0, 4, 100)
    perm = rng.permutation(100)
    a, b = compute_metrics(y_true, y_pred, 4), compute_metrics(y_true[perm], y_pred[perm], 4)
    assert a.mean_f1 == b.mean_f1
    np.testing.assert_array_equal(a.confusion, b.confusion)


def test_confusion_is_additive_over_disjoint_sets():
    rng = np.random.default_rng(3)
    y_true, y_pred = rng.integers(0, 3, 90), rng.integers(0, 3, 90)
    whole = compute_metrics(y_true, y_pred, 3).confusion
    parts = compute_metrics(y_true[:40], y_pred[:40], 3).confusion + compute_metrics(y_true[40:], y_pred[40:], 3).confusion
    np.testing.assert_array_equal(whole, parts)


def test_uniform_random_predictor_on_balanced_data():
    rng = np.random.default_rng(4)
    classes = 4
    y_true = np.repeat(np.arange(classes), 250)
    scores = [compute_metrics(y_true, rng.integers(0, classes, y_true.size), classes).mean_f1 for _ in range(200)]
    assert np.mean(scores) == pytest.approx(1 / classes, abs=0.02)


@pytest.mark.parametrize("y_true, y_pred, message", [
    ([], [], "empty"),
    ([0, 1], [0], "differ in length"),
    ([0, 3], [0, 1], "true labels"),
    ([0, 1], [0, -1], "predicted labels"),
])
def test_invalid_inputs(y_true, y_pred, message):
    with pytest.raises(DataError, match=message):
        compute_metrics(y_true, y_pred, 3)


def test_f1_of_zero_precision_and_recall():
    assert f1_from_precision_recall(0.0, 0.0) == 0.0


def test_report_serializes():
    d = compute_metrics([0, 1, 1], [0, 1, 0], 2).to_dict()
    assert d["confusion"] == [[1, 0], [1, 1]]
    assert d["per_class"][1]["support"] == 2
    assert d["pretext_step_accuracy"] is None

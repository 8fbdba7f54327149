import numpy as np
import pytest

from sesa.errors import UndefinedMetricError
from sesa.linalg import SeededRng
from sesa.metrics import Metrics, evaluate, roc_auc, tied_ranks


def brute_force_auc(scores, labels):
    """All-pairs oracle: P(pos > neg) + half credit for ties."""
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    total = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                total += 1.0
            elif p == n:
                total += 0.5
    return total / (len(pos) * len(neg))


class TestRocAuc:
    def test_perfect_separation(self):
        assert roc_auc([0.9, 0.1], [1, 0]) == 1.0

    def test_all_ties(self):
        assert roc_auc([0.5] * 6, [1, 0, 1, 0, 0, 0]) == 0.5

    def test_reversed(self):
        assert roc_auc([0.1, 0.9], [1, 0]) == 0.0

    def test_matches_brute_force_with_ties(self):
        rng = SeededRng(42)
        for trial in range(10):
            n = 200
            # Quantized scores force plenty of ties.
            scores = np.round(rng.uniform(0, 1, n), 1)
            labels = (rng.random(n) < 0.3).astype(float)
            if labels.min() == labels.max():
                labels[0] = 1.0 - labels[0]
            fast = roc_auc(scores, labels)
            slow = brute_force_auc(scores.tolist(), labels.tolist())
            assert abs(fast - slow) < 1e-12, f"trial {trial}"

    def test_single_class_rejected(self):
        with pytest.raises(UndefinedMetricError):
            roc_auc([0.2, 0.4], [1, 1])

    def test_monotone_transform_invariance(self):
        rng = SeededRng(5)
        scores = rng.uniform(-2, 2, 150)  # continuous draws: tie-free
        labels = (rng.random(150) < 0.4).astype(float)
        base = roc_auc(scores, labels)
        assert roc_auc(2.0 * scores + 1.0, labels) == base
        assert roc_auc(scores**3, labels) == base

    def test_complement_identity_with_ties(self):
        rng = SeededRng(6)
        scores = np.round(rng.uniform(0, 1, 120), 1)
        labels = (rng.random(120) < 0.5).astype(float)
        assert roc_auc(scores, labels) + roc_auc(-scores, labels) == pytest.approx(1.0, abs=0)


class TestTiedRanks:
    def test_simple(self):
        np.testing.assert_array_equal(tied_ranks(np.array([10.0, 20.0, 30.0])), [1.0, 2.0, 3.0])

    def test_tie_group_average(self):
        np.testing.assert_array_equal(
            tied_ranks(np.array([5.0, 1.0, 5.0, 0.5])), [3.5, 2.0, 3.5, 1.0]
        )


class _Item:
    def __init__(self, score, label):
        self.score = score
        self.label = label


class TestEvaluate:
    def test_oracle_scorer(self):
        items = [_Item(0.0, l) for l in (1, 0, 1, 0, 0)]
        metrics = evaluate(lambda it: float(it.label), items)
        assert metrics.auc == 1.0
        assert metrics.n_pos == 2 and metrics.n_neg == 3

    def test_constant_scorer(self):
        items = [_Item(0.0, l) for l in (1, 0, 1, 0)]
        assert evaluate(lambda it: 0.7, items).auc == 0.5

    def test_order_independent(self):
        rng = SeededRng(3)
        items = [_Item(float(s), int(l)) for s, l in zip(rng.uniform(0, 1, 50), rng.random(50) < 0.4)]
        if not any(i.label for i in items):
            items[0].label = 1
        if all(i.label for i in items):
            items[0].label = 0
        forward_metrics = evaluate(lambda it: it.score, items)
        reversed_metrics = evaluate(lambda it: it.score, list(reversed(items)))
        assert forward_metrics == reversed_metrics

    def test_mse_field(self):
        items = [_Item(0.5, 1), _Item(0.0, 0)]
        metrics = evaluate(lambda it: it.score, items)
        assert metrics.mse == pytest.approx(0.125)

    def test_single_class_propagates(self):
        with pytest.raises(UndefinedMetricError):
            evaluate(lambda it: it.score, [_Item(0.1, 1), _Item(0.2, 1)])

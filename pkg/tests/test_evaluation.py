import numpy as np
import pytest

import oracles
from difem import (
    ClassifierConfig,
    ConfusionMatrix,
    ContractViolation,
    Dataset,
    StratificationError,
    confusion,
    evaluate_model,
    kfold_cv,
    metrics,
    stratified_fold_assignment,
    train_tree,
)
from helpers import blob_dataset


class TestConfusion:
    def test_all_correct(self):
        cm = confusion([0, 1, 0, 1], [0, 1, 0, 1])
        assert (cm.fp, cm.fn) == (0, 0)
        assert (cm.tn, cm.tp) == (2, 2)

    def test_always_positive_predictor(self):
        preds = [1] * 8
        truths = [0] * 4 + [1] * 4
        cm = confusion(preds, truths)
        assert (cm.fp, cm.tp) == (4, 4)
        assert (cm.tn, cm.fn) == (0, 0)

    def test_hand_count(self):
        cm = confusion([1, 0, 1, 1], [1, 0, 0, 1])
        assert (cm.tn, cm.fp, cm.fn, cm.tp) == (1, 1, 0, 2)

    def test_contracts(self):
        with pytest.raises(ContractViolation):
            confusion([0, 1], [0])
        with pytest.raises(ContractViolation):
            confusion([], [])


class TestMetrics:
    def test_hand_computed_fixture(self):
        report = metrics(ConfusionMatrix(tn=8, fp=2, fn=1, tp=9))
        assert report.accuracy == 17 / 20
        fight = report.per_class["Fight"]
        assert fight.precision == 9 / 11
        assert fight.recall == 9 / 10
        assert fight.f1 == pytest.approx(2 * (9 / 11) * 0.9 / (9 / 11 + 0.9))
        nonfight = report.per_class["NonFight"]
        assert nonfight.precision == 8 / 9
        assert nonfight.recall == 8 / 10

    def test_perfect_matrix(self):
        report = metrics(ConfusionMatrix(tn=5, fp=0, fn=0, tp=5))
        assert report.accuracy == 1.0
        for label in ("NonFight", "Fight"):
            m = report.per_class[label]
            assert (m.precision, m.recall, m.f1) == (1.0, 1.0, 1.0)

    def test_degenerate_zero_over_zero_is_zero(self):
        # No positive predictions and no positive truths.
        report = metrics(confusion([0, 0, 0], [0, 0, 0]))
        fight = report.per_class["Fight"]
        assert (fight.precision, fight.recall, fight.f1) == (0.0, 0.0, 0.0)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(307)
        preds = rng.integers(0, 2, size=50)
        truths = rng.integers(0, 2, size=50)
        base = metrics(confusion(preds, truths))
        for _ in range(5):
            order = rng.permutation(50)
            permuted = metrics(confusion(preds[order], truths[order]))
            assert permuted == base

    def test_f1_is_harmonic_mean_of_own_precision_recall(self):
        rng = np.random.default_rng(311)
        for _ in range(20):
            preds = rng.integers(0, 2, size=30)
            truths = rng.integers(0, 2, size=30)
            report = metrics(confusion(preds, truths))
            for m in report.per_class.values():
                if m.precision + m.recall:
                    assert m.f1 == pytest.approx(
                        2 * m.precision * m.recall / (m.precision + m.recall)
                    )
                else:
                    assert m.f1 == 0.0


class TestFoldAssignment:
    @pytest.mark.parametrize("n", [10, 11, 1000])
    def test_partition_exactness(self, n):
        rng = np.random.default_rng(313)
        labels = rng.integers(0, 2, size=n)
        while labels.sum() < 5 or labels.sum() > n - 5:
            labels = rng.integers(0, 2, size=n)
        fold = stratified_fold_assignment(labels, k=5, seed=77)
        assert fold.shape == (n,)
        assert set(fold) == set(range(5))  # every row in exactly one fold
        for cls in (0, 1):
            sizes = [int(((fold == f) & (labels == cls)).sum()) for f in range(5)]
            assert max(sizes) - min(sizes) <= 1

    def test_deterministic_in_seed(self):
        labels = np.array([0, 1] * 20)
        a = stratified_fold_assignment(labels, k=5, seed=3)
        b = stratified_fold_assignment(labels, k=5, seed=3)
        assert (a == b).all()
        c = stratified_fold_assignment(labels, k=5, seed=4)
        assert (a != c).any()

    def test_tiny_class_raises_stratification_error(self):
        labels = np.array([0] * 9 + [1])
        with pytest.raises(StratificationError):
            stratified_fold_assignment(labels, k=5, seed=0)

    def test_preconditions(self):
        with pytest.raises(ContractViolation):
            stratified_fold_assignment(np.array([0, 1, 0]), k=5, seed=0)
        with pytest.raises(ContractViolation):
            stratified_fold_assignment(np.zeros(10, dtype=int), k=5, seed=0)


class TestKfoldCv:
    def test_identical_rows_fall_to_tie_rule(self):
        # Five identical rows per class: trees cannot split, leaves tie to
        # class 0, so every fold scores exactly the constant-classifier 0.5.
        X = np.ones((10, 2))
        y = np.array([0, 1] * 5)
        cv = kfold_cv(Dataset(X, y), ClassifierConfig("decision_tree"), k=5, seed=1)
        for report in cv.per_fold:
            assert report.accuracy == 0.5
        assert cv.averaged.accuracy == 0.5

    def test_deterministic_in_seed(self):
        rng = np.random.default_rng(317)
        X, y = blob_dataset(rng, 60, separation=1.5)
        config = ClassifierConfig("random_forest", n_trees=10, seed=5)
        a = kfold_cv(Dataset(X, y), config, k=5, seed=11)
        b = kfold_cv(Dataset(X, y), config, k=5, seed=11)
        assert a == b

    def test_separable_thousand_rows(self):
        rng = np.random.default_rng(331)
        X, y = blob_dataset(rng, 1000)
        # Nearest-centroid oracle confirms the generator separates cleanly.
        assert oracles.nearest_centroid_accuracy(X[:800], y[:800], X[800:], y[800:]) >= 0.95
        config = ClassifierConfig("random_forest", n_trees=100, seed=42)
        cv = kfold_cv(Dataset(X, y), config, k=5, seed=42)
        assert cv.averaged.accuracy >= 0.95

    def test_averaged_metrics_are_fold_means_and_counts_are_summed(self):
        rng = np.random.default_rng(337)
        X, y = blob_dataset(rng, 60, separation=0.5)  # noisy on purpose
        cv = kfold_cv(Dataset(X, y), ClassifierConfig("knn", k=5), k=5, seed=2)
        assert cv.k == 5
        assert cv.averaged.accuracy == pytest.approx(
            np.mean([r.accuracy for r in cv.per_fold])
        )
        assert cv.averaged.confusion.total == 60
        assert cv.averaged.confusion.tp == sum(r.confusion.tp for r in cv.per_fold)
        fight = cv.averaged.per_class["Fight"]
        assert fight.precision == pytest.approx(
            np.mean([r.per_class["Fight"].precision for r in cv.per_fold])
        )

    def test_micro_accuracy_matches_pooled_confusion(self):
        rng = np.random.default_rng(347)
        X, y = blob_dataset(rng, 80, separation=0.8)
        cv = kfold_cv(Dataset(X, y), ClassifierConfig("decision_tree"), k=5, seed=3)
        pooled = cv.averaged.confusion
        micro = (pooled.tp + pooled.tn) / pooled.total
        correct = sum(r.confusion.tp + r.confusion.tn for r in cv.per_fold)
        assert micro == correct / sum(r.confusion.total for r in cv.per_fold)
        assert metrics(pooled).accuracy == micro


def test_evaluate_model_wraps_predictions():
    rng = np.random.default_rng(353)
    X, y = blob_dataset(rng, 40)
    data = Dataset(X, y)
    model = train_tree(data)
    report = evaluate_model(model, data)
    assert report.accuracy == 1.0  # unlimited depth on consistent data

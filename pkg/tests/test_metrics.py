import pytest

from respira.metrics import (
    ConfusionMatrix,
    UndefinedMetricError,
    accuracy,
    confusion,
    f1,
    precision,
    recall,
    write_confusion_csv,
    write_metrics_csv,
)

FINAL_MODEL = ConfusionMatrix(tp=17, tn=22, fp=1, fn=1)


class TestConfusion:
    def test_perfect_predictions(self):
        labels = ["abnormal"] * 5 + ["normal"] * 5
        cm = confusion(labels, labels)
        assert (cm.tp, cm.tn, cm.fp, cm.fn) == (5, 5, 0, 0)

    def test_all_normal_predictions_count_false_negatives(self):
        predictions = ["normal"] * 5
        actuals = ["abnormal"] * 3 + ["normal"] * 2
        cm = confusion(predictions, actuals)
        assert cm.fn == 3
        assert cm.tn == 2

    def test_final_model_counts(self):
        predictions = (["abnormal"] * 17 + ["normal"] * 22
                       + ["abnormal"] * 1 + ["normal"] * 1)
        actuals = (["abnormal"] * 17 + ["normal"] * 22
                   + ["normal"] * 1 + ["abnormal"] * 1)
        assert confusion(predictions, actuals) == FINAL_MODEL

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            confusion(["normal"], ["normal", "abnormal"])

    def test_empty_input(self):
        with pytest.raises(ValueError):
            confusion([], [])

    def test_counts_sum_to_pairs(self):
        cm = confusion(["normal", "abnormal", "normal"], ["abnormal"] * 3)
        assert cm.total == 3


class TestScores:
    def test_final_model_accuracy(self):
        assert accuracy(FINAL_MODEL) == pytest.approx(39 / 41, abs=1e-12)
        assert round(100 * accuracy(FINAL_MODEL)) == 95

    def test_final_model_precision_recall(self):
        assert precision(FINAL_MODEL) == pytest.approx(17 / 18, abs=1e-12)
        assert recall(FINAL_MODEL) == pytest.approx(17 / 18, abs=1e-12)
        assert round(100 * precision(FINAL_MODEL)) == 94

    def test_final_model_f1(self):
        assert f1(FINAL_MODEL) == pytest.approx(17 / 18, abs=1e-12)

    def test_degenerate_single_true_positive(self):
        cm = ConfusionMatrix(tp=1, tn=0, fp=0, fn=0)
        assert accuracy(cm) == precision(cm) == recall(cm) == f1(cm) == 1.0

    def test_undefined_precision(self):
        cm = ConfusionMatrix(tp=0, tn=3, fp=0, fn=2)
        with pytest.raises(UndefinedMetricError, match="precision"):
            precision(cm)

    def test_undefined_recall(self):
        cm = ConfusionMatrix(tp=0, tn=3, fp=2, fn=0)
        with pytest.raises(UndefinedMetricError, match="recall"):
            recall(cm)

    def test_undefined_f1(self):
        cm = ConfusionMatrix(tp=0, tn=1, fp=2, fn=2)
        with pytest.raises(UndefinedMetricError):
            f1(cm)

    def test_scores_bounded(self):
        cm = ConfusionMatrix(tp=3, tn=4, fp=2, fn=5)
        for score in (accuracy, precision, recall, f1):
            assert 0.0 <= score(cm) <= 1.0

    def test_f1_between_precision_and_recall(self):
        cm = ConfusionMatrix(tp=6, tn=1, fp=4, fn=2)
        p, r = precision(cm), recall(cm)
        assert min(p, r) <= f1(cm) <= max(p, r)

    def test_swapping_positive_class(self):
        cm = ConfusionMatrix(tp=3, tn=7, fp=2, fn=4)
        swapped = ConfusionMatrix(tp=cm.tn, tn=cm.tp, fp=cm.fn, fn=cm.fp)
        assert accuracy(cm) == accuracy(swapped)
        assert precision(swapped) == pytest.approx(7 / 11, abs=1e-12)


class TestValidation:
    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            ConfusionMatrix(tp=-1, tn=0, fp=0, fn=0)

    def test_non_integer_counts_rejected(self):
        with pytest.raises(ValueError):
            ConfusionMatrix(tp=1.5, tn=0, fp=0, fn=0)

    def test_bad_labels_rejected(self):
        with pytest.raises(ValueError):
            confusion(["maybe"], ["normal"])

    def test_empty_matrix_scores_are_undefined(self):
        cm = ConfusionMatrix(tp=0, tn=0, fp=0, fn=0)
        with pytest.raises(UndefinedMetricError):
            accuracy(cm)


class TestReports:
    def test_metrics_csv_columns(self, tmp_path):
        path = tmp_path / "metrics.csv"
        write_metrics_csv(path, [("quadratic", 39 / 41, 17 / 18, 17 / 18, 17 / 18, 28)])
        lines = path.read_text().splitlines()
        assert lines[0] == "kernel,accuracy,precision,recall,f1,support_vectors"
        cells = lines[1].split(",")
        assert cells[0] == "quadratic"
        assert float(cells[1]) == 39 / 41
        assert cells[5] == "28"

    def test_confusion_csv(self, tmp_path):
        path = tmp_path / "confusion.csv"
        write_confusion_csv(path, FINAL_MODEL)
        assert path.read_text() == "tp,tn,fp,fn\n17,22,1,1\n"

import itertools

import numpy as np
import pandas as pd
import pytest

from edbench.config import BootstrapConfig
from edbench.errors import DataError, InvalidCodeError, ShapeError, UndefinedMetricError
from edbench.evaluation import (
    AurocAnalysis,
    EvalReport,
    auroc,
    auroc_matrix,
    bootstrap_ci,
    chapter_report,
    comparison_table,
    deterioration_report,
    icd_chapter,
    improvement_table,
    macro_auroc,
    per_label_report,
    relative_improvement,
)
from edbench.labels import MASKED, LabelSpace, load_deterioration_spec


def _pairwise_auroc(scores, labels):
    positives = [s for s, y in zip(scores, labels) if y == 1]
    negatives = [s for s, y in zip(scores, labels) if y == 0]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p, n in itertools.product(positives, negatives))
    return wins / (len(positives) * len(negatives))


def _random_task(rng, n_rows=120, n_labels=4, masked=0.1):
    labels = (rng.random((n_rows, n_labels)) < 0.3).astype(np.int8)
    scores = rng.normal(size=(n_rows, n_labels)) + labels
    labels[rng.random((n_rows, n_labels)) < masked] = MASKED
    # coarse scores produce ties
    return np.round(scores, 1), labels


class TestAuroc:
    def test_worked_examples(self):
        assert auroc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75
        assert auroc([0.5, 0.5], [0, 1]) == 0.5
        assert auroc([0.9, 0.1, 0.2, 0.3], [MASKED, 0, 1, 1]) == 1.0

    def test_single_class_is_undefined(self):
        with pytest.raises(UndefinedMetricError):
            auroc([0.1, 0.2], [1, 1])
        with pytest.raises(UndefinedMetricError):
            auroc([0.1, 0.2, 0.3], [0, 0, MASKED])
        with pytest.raises(ShapeError):
            auroc([0.1, 0.2], [0, 1, 1])

    def test_matches_pairwise_counting(self, rng):
        scores, labels = _random_task(rng)
        per_label = auroc_matrix(scores, labels)
        for k in range(labels.shape[1]):
            keep = labels[:, k] != MASKED
            expected = _pairwise_auroc(scores[keep, k], labels[keep, k])
            assert per_label[k] == pytest.approx(expected, abs=1e-12)
            assert auroc(scores[:, k], labels[:, k]) == pytest.approx(expected, abs=1e-12)

    def test_complement_and_monotone_invariance(self, rng):
        scores, labels = _random_task(rng, n_labels=1)
        s, y = scores[:, 0], labels[:, 0]
        flipped = np.where(y == MASKED, MASKED, 1 - y)
        assert auroc(-s, y) == pytest.approx(1 - auroc(s, y))
        assert auroc(s, flipped) == pytest.approx(1 - auroc(s, y))
        assert auroc(np.exp(3 * s) + 7, y) == pytest.approx(auroc(s, y))

    def test_macro_skips_undefined_labels(self):
        scores = np.array([[0.1, 0.3], [0.9, 0.2], [0.4, 0.1]])
        labels = np.array([[0, 1], [1, 1], [0, MASKED]])
        assert np.isnan(auroc_matrix(scores, labels)[1])
        assert macro_auroc(scores, labels) == 1.0
        with pytest.raises(UndefinedMetricError):
            macro_auroc(scores[:, 1:], labels[:, 1:])


class TestBootstrap:
    def test_interval_contains_the_point_and_repeats(self, rng):
        scores, labels = _random_task(rng, n_labels=1)
        first = bootstrap_ci(auroc, scores[:, 0], labels[:, 0], n_iter=200, seed=5)
        again = bootstrap_ci(auroc, scores[:, 0], labels[:, 0], n_iter=200, seed=5)
        assert first == again
        point, lo, hi = first
        assert lo <= point <= hi
        assert point == auroc(scores[:, 0], labels[:, 0])

    def test_interval_narrows_with_more_rows(self, rng):
        widths = []
        for n_rows in (80, 2000):
            labels = (rng.random(n_rows) < 0.4).astype(np.int8)
            scores = rng.normal(size=n_rows) + labels
            _, lo, hi = bootstrap_ci(auroc, scores, labels, n_iter=200, seed=0)
            widths.append(hi - lo)
        assert widths[1] < widths[0] / 2

    def test_constant_metric_has_zero_width(self):
        assert bootstrap_ci(lambda a: 0.7, np.arange(10), n_iter=50) == (0.7, 0.7, 0.7)

    def test_empty_and_misaligned_inputs(self):
        with pytest.raises(DataError):
            bootstrap_ci(lambda a: 0.0, np.array([]))
        with pytest.raises(ShapeError):
            bootstrap_ci(lambda a, b: 0.0, np.arange(3), np.arange(4))


@pytest.mark.parametrize(
    "a, b, expected",
    [
        (0.8761, 0.8050, 8.83), (0.8672, 0.8101, 7.05), (0.8479, 0.7712, 9.95), (0.8346, 0.7769, 7.43),
        (0.8336, 0.7920, 5.25), (0.8335, 0.8143, 2.36), (0.8270, 0.7604, 8.76), (0.8253, 0.7766, 6.27),
        (0.8226, 0.7643, 7.63), (0.8111, 0.7619, 6.46), (0.8087, 0.7153, 13.06), (0.7955, 0.7183, 10.75),
        (0.7813, 0.7168, 9.00), (0.7405, 0.6930, 6.85), (0.9070, 0.8294, 9.36), (0.9063, 0.8865, 2.23),
        (0.9168, 0.8920, 2.78), (0.6980, 0.5055, 38.08), (0.9355, 0.8991, 4.05), (0.9239, 0.8551, 8.05),
        (0.9400, 0.8064, 16.57), (0.9590, 0.9418, 1.83), (0.9859, 0.9682, 1.83), (0.9147, 0.8928, 2.45),
        (0.8979, 0.8801, 2.02), (0.9423, 0.8736, 7.86), (0.9600, 0.9304, 3.18), (0.9429, 0.9286, 1.54),
        (0.9115, 0.8946, 1.89), (0.8952, 0.8792, 1.82), (0.8894, 0.8727, 1.91), (0.8768, 0.8646, 1.41),
    ],
)
def test_relative_improvement_of_published_pairs(a, b, expected):
    assert relative_improvement(a, b) == pytest.approx(expected, abs=0.01)


def test_relative_improvement_needs_positive_reference():
    with pytest.raises(UndefinedMetricError):
        relative_improvement(0.8, 0.0)


class TestGroups:
    AUROCS = {
        "severe_hypoxemia": 0.6980, "ecmo": 0.9355, "vasopressors": 0.9239, "inotropes": 0.9400,
        "mechanical_ventilation": 0.9590, "ihca": 0.9859, "icu_24h": 0.9147, "icu_overall": 0.8979,
        "mortality_in_hospital": 0.9423, "mortality_24h": 0.9600, "mortality_7d": 0.9429, "mortality_28d": 0.9115,
        "mortality_90d": 0.8952, "mortality_180d": 0.8894, "mortality_365d": 0.8768,
    }

    def test_category_means(self):
        means = deterioration_report(self.AUROCS)
        assert means["clinical_deterioration"] == pytest.approx(0.90705, abs=1e-5)
        assert means["icu_admission"] == pytest.approx(0.9063, abs=1e-5)
        assert means["mortality"] == pytest.approx(0.916871, abs=2e-4)

    def test_strict_report_requires_every_target(self):
        partial = {k: v for k, v in self.AUROCS.items() if k != "ecmo"}
        with pytest.raises(DataError, match="ecmo"):
            deterioration_report(partial)
        relaxed = deterioration_report(partial, strict=False)
        assert relaxed["clinical_deterioration"] == pytest.approx((0.6980 + 0.9239 + 0.9400 + 0.9590 + 0.9859) / 5)

    def test_chapters(self):
        assert icd_chapter("I2109") == "IX"
        assert icd_chapter("N170") == "XIV"
        assert icd_chapter("S72.001A") == "XIX"
        with pytest.raises(InvalidCodeError):
            icd_chapter("I2")

    def test_chapter_means(self):
        table = chapter_report(
            {"I21": 0.9, "I48": 0.7, "N17": 0.8},
            lower_bounds={"I21": 0.85, "I48": 0.6, "N17": 0.75},
        )
        assert table["chapter"].tolist() == ["IX", "XIV"]
        assert table["mean_auroc"].tolist() == pytest.approx([0.8, 0.8])
        assert table["n_above"].tolist() == [1, 0]
        # only code labels are persisted, so anything else is a caller error
        with pytest.raises(InvalidCodeError):
            chapter_report({"I21": 0.9, "no-diagnoses": 0.5})


class TestReports:
    @pytest.fixture
    def report(self, rng):
        scores, labels = _random_task(rng, n_labels=3)
        labels[:, 2] = np.where(labels[:, 2] == MASKED, MASKED, 0)
        space = LabelSpace(task="diagnoses", labels=("I21", "N17", "E87"))
        return per_label_report(scores, labels, space, "routine_tree", BootstrapConfig(n_iter=100, seed=1)), scores, labels

    def test_undefined_label_is_reported_not_averaged(self, report):
        report, scores, labels = report
        assert [r.undefined for r in report.labels] == [False, False, True]
        assert report.macro[0] == pytest.approx(macro_auroc(scores, labels))
        for r in report.labels[:2]:
            assert r.ci_lo <= r.auroc <= r.ci_hi
        assert report.labels[2].n_pos == 0
        assert set(report.groups) == {"IX", "XIV"}

    def test_json_and_text_carry_the_same_numbers(self, report, tmp_path):
        report, _, _ = report
        restored = EvalReport.from_json(report.to_json(tmp_path / "eval_report.json"))
        assert restored == report
        text = report.to_text()
        point, lo, hi = report.macro
        assert f"{point:.4f} [{lo:.4f}, {hi:.4f}]" in text
        for r in report.labels[:2]:
            assert f"{r.auroc:.4f}" in text
        assert "undef" in text

    def test_comparison_and_improvement(self, report):
        report, _, _ = report
        better = EvalReport.from_dict({**report.to_dict(), "scenario": "wave_routine_deep"})
        better.macro = (report.macro[0] * 1.1, report.macro[1], report.macro[2])
        table = comparison_table({"wave_routine_deep": better, "routine_tree": report})
        assert table.index.tolist() == ["wave_routine_deep", "routine_tree"]
        improvements = improvement_table(better, report).set_index("name")["improvement"]
        assert improvements["macro"] == pytest.approx(10.0, abs=0.01)
        assert improvements["I21"] == 0.0

    def test_deterioration_report_has_category_means(self, rng):
        spec = load_deterioration_spec()
        scores, labels = _random_task(rng, n_rows=200, n_labels=15, masked=0.0)
        report = per_label_report(scores, labels, spec.label_space(), "routine_tree", BootstrapConfig(n_iter=20))
        assert set(report.groups) == {"clinical_deterioration", "icu_admission", "mortality"}


def test_auroc_analysis_keeps_first_of_visit_rows(rng, tmp_path):
    scores, labels = _random_task(rng, n_rows=200, n_labels=2, masked=0.0)
    first = rng.random(200) < 0.7
    space = LabelSpace(task="diagnoses", labels=("I21", "N17"))
    analysis = AurocAnalysis(space, "routine_tree", BootstrapConfig(n_iter=30, seed=2))
    analysis.add_results({"scores": scores[:100], "labels": labels[:100], "first_of_visit": first[:100]})
    analysis.add_results({"scores": scores[100:], "labels": labels[100:], "first_of_visit": first[100:]})

    result = analysis.analyze()
    assert result["n_rows"] == int(first.sum())
    assert result["macro_auroc"] == pytest.approx(macro_auroc(scores[first], labels[first]))
    assert result["ci_lo"] <= result["macro_auroc"] <= result["ci_hi"]
    assert len(analysis.get_results()) == 200

    exported = pd.read_csv(analysis.export_results(tmp_path / "scores.csv"))
    assert list(exported.columns) == ["sample_id", "split", "first_of_visit", "score_I21", "score_N17", "label_I21", "label_N17"]
    np.testing.assert_allclose(exported["score_N17"], scores[:, 1])

    analysis.clear_results()
    with pytest.raises(ValueError):
        analysis.analyze()

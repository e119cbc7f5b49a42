import numpy as np
import pytest

from edbench.cohort import link_ecg_to_stays
from edbench.errors import DataError, InvalidCodeError
from edbench.ingest import load_sources
from edbench.ingest.records import SECONDS_PER_DAY, SECONDS_PER_HOUR, CodedEventRecord, MedicationRecord, OutcomeRecord
from edbench.labels import (
    CATEGORIES,
    MASKED,
    NO_DIAGNOSES,
    build_deterioration_matrix,
    build_diagnosis_matrix,
    build_vocab,
    coded_event_labels,
    diagnosis_labels,
    hypoxemia_label,
    icu_labels,
    load_deterioration_spec,
    load_icd9_map,
    medication_labels,
    mortality_labels,
    normalize_icd,
    read_label_triplets,
    truncate_and_propagate,
    write_label_triplets,
)
from edbench.synth import PLANTED_CODES

SPEC = load_deterioration_spec()


def _midnight(timestamp):
    return timestamp - timestamp % SECONDS_PER_DAY


class TestCodes:
    def test_truncation_and_propagation(self):
        assert truncate_and_propagate("I2109") == {"I21", "I210", "I2109"}
        assert truncate_and_propagate("i21.09") == {"I21", "I210", "I2109"}
        assert truncate_and_propagate("S72001A") == {"S72", "S720", "S7200"}
        assert truncate_and_propagate("I10") == {"I10"}
        with pytest.raises(InvalidCodeError):
            truncate_and_propagate("I2")

    def test_propagation_is_closed_under_prefixes(self, rng):
        alphabet = list("ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789")
        for _ in range(200):
            code = alphabet[int(rng.integers(26))] + "".join(rng.choice(alphabet, size=int(rng.integers(2, 7))))
            codes = truncate_and_propagate(code)
            assert code[:5] in codes
            assert {len(c) for c in codes} == set(range(3, min(len(code), 5) + 1))
            for member in codes:
                assert code.startswith(member)
                assert truncate_and_propagate(member) <= codes

    def test_icd9_codes_map_to_every_equivalent(self):
        mapping = load_icd9_map()
        assert mapping["4254"] == ["I421", "I422", "I425", "I428"]
        assert normalize_icd("4019", 9, mapping) == ["I10"]
        assert normalize_icd("E119", 10, mapping) == ["E119"]
        assert normalize_icd("V9999", 9, mapping) == []

    def test_vocabulary_threshold_is_inclusive(self):
        vocab = build_vocab([{"A01", "B02"}, {"A01"}, {"A01", "C03"}, {"B02"}], min_count=2)
        assert vocab.codes == ("A01", "B02")
        assert vocab.counts == (3, 2)
        assert build_vocab({"Z99": 10, "Y98": 9}, min_count=10).codes == ("Z99",)
        with pytest.raises(DataError):
            build_vocab({"Z99": 1}, min_count=10)

    def test_sample_without_diagnoses_is_all_zero_and_flagged(self):
        vocab = build_vocab({"I21": 10, "I48": 10}, min_count=10)
        vector = diagnosis_labels([], vocab)
        assert vector.values.tolist() == [0, 0]
        assert vector.flags == (NO_DIAGNOSES,)
        assert diagnosis_labels({"I48", "X00"}, vocab).values.tolist() == [0, 1]


class TestTargetDefinitions:
    def test_fifteen_targets_in_three_categories(self):
        assert len(SPEC.targets) == 15
        assert {t.category for t in SPEC.targets} == set(CATEGORIES)
        assert len(SPEC.of_kind("mortality")) == 7

    def test_code_and_drug_lists_are_verbatim(self):
        targets = {t.name: t for t in SPEC.targets}
        assert targets["ecmo"].codes == [
            "3961", "3965", "3966", "5A1221Z", "5A1522G", "5A1522H", "5A15223", "5A1522F", "5A15A2F", "5A15A2G", "5A15A2H"
        ]
        assert targets["mechanical_ventilation"].codes == ["9670", "9671", "9672", "5A1935Z", "5A1945Z", "5A1955Z"]
        assert targets["ihca"].codes == ["I469", "4275", "I462", "V1253", "I468"]
        assert targets["inotropes"].drugs == ["epinephrine", "dobutamine", "dopamine"]
        assert targets["severe_hypoxemia"].threshold == 85
        assert targets["mortality_365d"].horizon_seconds == 365 * SECONDS_PER_DAY


class TestHypoxemia:
    def test_reading_inside_window_masks(self, make_sample, arrival):
        sample = make_sample()
        assert hypoxemia_label(sample, [(arrival + 3600, 82.0)]) == MASKED
        assert hypoxemia_label(sample, [(sample.window_end, 85.0)]) == MASKED

    def test_reading_after_window_within_horizon_is_positive(self, make_sample, arrival):
        sample = make_sample()
        assert hypoxemia_label(sample, [(sample.window_end + 1, 85.0)]) == 1
        assert hypoxemia_label(sample, [(arrival + 24 * SECONDS_PER_HOUR, 80.0)]) == 1

    def test_late_or_normal_readings_are_negative(self, make_sample, arrival):
        sample = make_sample()
        assert hypoxemia_label(sample, [(arrival + 25 * SECONDS_PER_HOUR, 80.0)]) == 0
        assert hypoxemia_label(sample, [(arrival + 7200, 85.1), (arrival + 7300, None)]) == 0
        assert hypoxemia_label(sample, []) == 0

    def test_random_readings_match_a_time_ordered_scan(self, make_sample, arrival, rng):
        sample = make_sample()
        horizon = arrival + 24 * SECONDS_PER_HOUR
        for _ in range(300):
            n = int(rng.integers(0, 6))
            times = arrival + rng.integers(-SECONDS_PER_HOUR, 30 * SECONDS_PER_HOUR, size=n)
            values = rng.uniform(75.0, 100.0, size=n)
            readings = [(int(t), float(v)) for t, v in zip(times, values)]

            expected = 0
            for t, v in sorted(readings):
                if v > 85.0:
                    continue
                if t <= sample.window_end:
                    expected = MASKED
                    break
                if t <= horizon:
                    expected = 1
            assert hypoxemia_label(sample, readings) == expected, readings


class TestMedications:
    def _labels(self, sample, *administrations):
        meds = [MedicationRecord(subject_id=sample.subject_id, stay_id=sample.stay_id, charttime=t, name=n) for t, n in administrations]
        return medication_labels(sample, meds, SPEC.of_kind("medication"))

    def test_norepinephrine_is_no_inotrope(self, make_sample, arrival):
        labels = self._labels(make_sample(), (arrival + 7200, "Norepinephrine 4 mg/250 mL"))
        assert labels == {"vasopressors": 1, "inotropes": 0}

    def test_names_match_case_insensitively(self, make_sample, arrival):
        assert self._labels(make_sample(), (arrival + 7200, "DOBUTamine"))["inotropes"] == 1
        assert self._labels(make_sample(), (arrival + 7200, "Epinephrine 1mg/10mL"))["inotropes"] == 1

    def test_administration_in_window_masks(self, make_sample, arrival):
        labels = self._labels(make_sample(), (arrival + 1800, "norepinephrine"), (arrival + 7200, "norepinephrine"))
        assert labels["vasopressors"] == MASKED
        assert labels["inotropes"] == 0


class TestIcu:
    def _outcome(self, sample, *intimes, discharge_after=5 * SECONDS_PER_DAY):
        return OutcomeRecord(
            subject_id=sample.subject_id,
            hadm_id=sample.hadm_id,
            admittime=sample.arrival + 3600,
            dischtime=sample.arrival + discharge_after,
            icu_intervals=tuple((t, t + 7200) for t in intimes),
        )

    def test_horizons(self, make_sample, arrival):
        sample = make_sample()
        targets = SPEC.of_kind("icu")
        assert icu_labels(sample, self._outcome(sample, arrival + 3600), targets) == {"icu_24h": MASKED, "icu_overall": MASKED}
        assert icu_labels(sample, self._outcome(sample, arrival + 5 * 3600), targets) == {"icu_24h": 1, "icu_overall": 1}
        assert icu_labels(sample, self._outcome(sample, arrival + 30 * 3600), targets) == {"icu_24h": 0, "icu_overall": 1}
        assert icu_labels(sample, None, targets) == {"icu_24h": 0, "icu_overall": 0}


class TestCodedEvents:
    def _procedure(self, code, event_date=None):
        return CodedEventRecord(subject_id="10000001", hadm_id="20000001", icd_code=code, icd_version=10, event_date=event_date)

    def test_same_and_next_day_count(self, make_sample, arrival):
        sample, targets = make_sample(), SPEC.of_kind("coded_event")
        day0 = _midnight(arrival)
        for offset, expected in ((0, 1), (1, 1), (2, 0)):
            labels = coded_event_labels(sample, [self._procedure("5A1945Z", day0 + offset * SECONDS_PER_DAY)], [], targets)
            assert labels["mechanical_ventilation"] == expected, offset
            assert labels["ecmo"] == 0

    def test_undated_records_use_admission_time(self, make_sample, arrival):
        sample, targets = make_sample(), SPEC.of_kind("coded_event")
        undated = [self._procedure("9671")]
        assert coded_event_labels(sample, undated, [], targets, admittime=arrival + 3600)["mechanical_ventilation"] == 1
        late = arrival + 3 * SECONDS_PER_DAY
        assert coded_event_labels(sample, undated, [], targets, admittime=late)["mechanical_ventilation"] == 0

    def test_ed_diagnosis_of_the_stay_is_dated_at_arrival(self, make_sample):
        sample = make_sample()
        diagnosis = CodedEventRecord(subject_id=sample.subject_id, stay_id=sample.stay_id, icd_code="I469", icd_version=10)
        labels = coded_event_labels(sample, [], [diagnosis], SPEC.of_kind("coded_event"))
        assert labels["ihca"] == 1
        assert MASKED not in labels.values()


class TestMortality:
    def _outcome(self, sample, discharge_after):
        return OutcomeRecord(
            subject_id=sample.subject_id, hadm_id=sample.hadm_id, admittime=sample.arrival, dischtime=sample.arrival + discharge_after
        )

    def test_death_on_arrival_day_counts_for_every_horizon(self, make_sample, arrival):
        sample = make_sample()
        labels = mortality_labels(sample, self._outcome(sample, SECONDS_PER_DAY), SPEC.of_kind("mortality"), dod=_midnight(arrival))
        assert set(labels.values()) == {1}

    def test_horizons_are_monotone(self, make_sample, arrival):
        sample = make_sample()
        targets = SPEC.of_kind("mortality")
        dod = _midnight(arrival) + 3 * SECONDS_PER_DAY
        labels = mortality_labels(sample, self._outcome(sample, SECONDS_PER_DAY), targets, dod=dod)
        assert labels["mortality_in_hospital"] == 0
        assert labels["mortality_24h"] == 0
        fixed = [labels[t.name] for t in targets if t.horizon_seconds is not None]
        assert fixed == sorted(fixed)
        assert labels["mortality_7d"] == labels["mortality_365d"] == 1

    def test_survivors_are_negative(self, make_sample):
        sample = make_sample()
        labels = mortality_labels(sample, self._outcome(sample, SECONDS_PER_DAY), SPEC.of_kind("mortality"))
        assert set(labels.values()) == {0}

    def test_death_before_arrival_is_a_data_error(self, make_sample, arrival):
        with pytest.raises(DataError):
            mortality_labels(make_sample(), None, SPEC.of_kind("mortality"), dod=_midnight(arrival) - SECONDS_PER_DAY)


@pytest.fixture(scope="module")
def fixture_labels(fixture_root):
    sources = load_sources(fixture_root)
    samples = link_ecg_to_stays(sources.stays, sources.ecg_manifest)
    return samples, build_diagnosis_matrix(samples, sources, min_count=10), build_deterioration_matrix(samples, sources)


def test_fixture_labels_are_ternary_and_complete(fixture_labels):
    samples, (diagnoses, vocab), deterioration = fixture_labels
    assert diagnoses.values.shape == (len(samples), len(vocab))
    assert set(np.unique(diagnoses.values)) <= {0, 1}
    assert set(np.unique(deterioration.values)) <= {MASKED, 0, 1}
    for code in PLANTED_CODES.values():
        assert code in vocab

    coded = [deterioration.space.index(t.name) for t in SPEC.targets if t.kind in ("coded_event", "mortality")]
    assert not (deterioration.values[:, coded] == MASKED).any()


def test_label_triplets_reproduce_the_matrix(fixture_labels, tmp_path):
    _, _, deterioration = fixture_labels
    path = write_label_triplets(deterioration, tmp_path / "labels.csv")
    n_lines = len(path.read_text(encoding="utf-8").splitlines())
    assert n_lines == 1 + int((deterioration.values != 0).sum())

    restored = read_label_triplets(path, deterioration.space, deterioration.sample_ids)
    np.testing.assert_array_equal(restored.values, deterioration.values)

import dataclasses

import numpy as np
import pandas as pd
import pytest
import statsmodels.api as sm

from edbench.cohort import link_ecg_to_stays
from edbench.errors import AssemblyError
from edbench.features import (
    STATS,
    CategoryVocab,
    aggregate_trend_frame,
    aggregate_trends,
    assemble_features,
    build_feature_matrix,
    canonicalize_frame,
    convert_units,
    convert_value,
    extract_ecg_features,
    filter_outliers,
    match_biometrics,
    read_feature_matrix,
    write_feature_matrix,
)
from edbench.features.biometrics import biometric_name, result_name_unit
from edbench.ingest import VariableRegistry, WaveformStore, load_sources
from edbench.ingest.records import SECONDS_PER_DAY, BiometricRecord, EventRecord

REGISTRY = VariableRegistry.load()


def _event(variable, value, unit="", charttime=0):
    return EventRecord(subject_id="1", stay_id="10", variable_id=variable, value=value, unit=unit, charttime=charttime)


class TestTrends:
    def test_three_point_series(self):
        trend = aggregate_trends([(0, 100.0), (30, 110.0), (60, 120.0)])
        assert trend.mean == trend.median == 110.0
        assert (trend.min, trend.max, trend.first, trend.last) == (100.0, 120.0, 100.0, 120.0)
        assert trend.std == pytest.approx(8.1650, abs=1e-4)
        assert trend.rate_of_change == pytest.approx(1 / 3)
        assert trend.slope == pytest.approx(1 / 3)

    def test_short_series_have_no_rate(self):
        single = aggregate_trends([(12.0, 5.0)])
        assert single.std == 0.0
        assert single.rate_of_change is None and single.slope is None
        assert aggregate_trends([(3.0, 1.0), (3.0, 2.0)]).slope is None
        assert np.isnan(aggregate_trends([]).as_array()).all()

    def test_slope_matches_least_squares(self, rng):
        times = np.sort(rng.uniform(0, 90, 12))
        values = 70 + 0.4 * times + rng.normal(0, 3, 12)
        fitted = sm.OLS(values, sm.add_constant(times)).fit()
        trend = aggregate_trends(list(zip(times, values)))
        assert trend.slope == pytest.approx(fitted.params[1], rel=1e-9)

    def test_frame_aggregation_agrees_with_series(self, rng):
        rows = []
        for sample_id in range(4):
            for minute in np.sort(rng.uniform(0, 90, sample_id + 1)):
                rows.append((sample_id, "heartrate", minute, rng.normal(80, 10)))
        rows.append((3, "heartrate", 45.0, np.nan))
        frame = pd.DataFrame(rows, columns=["sample_id", "variable_id", "minutes", "value"])

        stats = aggregate_trend_frame(frame)
        for sample_id in range(4):
            group = frame[(frame["sample_id"] == sample_id) & frame["value"].notna()].sort_values("minutes")
            expected = aggregate_trends(list(zip(group["minutes"], group["value"]))).as_array()
            got = stats.loc[(sample_id, "heartrate"), list(STATS)].to_numpy(dtype=float)
            np.testing.assert_allclose(got, expected, rtol=1e-9, equal_nan=True)


class TestUnitsAndOutliers:
    def test_conversions(self):
        assert convert_value(98.6, "degF", "degC") == pytest.approx(37.0)
        assert convert_value(154.3237, "lb", "kg") == pytest.approx(70.0, abs=1e-4)
        assert convert_value(70.0, "in", "cm") == pytest.approx(177.8)
        assert convert_value(37.0, "", "degC") == 37.0
        with pytest.raises(KeyError):
            convert_value(1.0, "furlong", "cm")

    def test_unknown_unit_becomes_missing(self):
        assert convert_units(_event("temperature", 300.0, "K"), REGISTRY).value is None
        converted = convert_units(_event("temperature", 98.6, "degF"), REGISTRY)
        assert converted.unit == "degC"
        assert converted.value == pytest.approx(37.0)

    @pytest.mark.parametrize(
        "variable, kept, removed",
        [("heartrate", 700.0, 700.01), ("o2sat", 100.0, 100.5), ("glucose", 2000.0, 2000.01)],
    )
    def test_bounds_are_closed(self, variable, kept, removed):
        events = filter_outliers([_event(variable, kept), _event(variable, removed)], REGISTRY.outlier_rules())
        assert [e.value for e in events] == [kept, None]

    def test_weight_bound_and_fahrenheit_rule_on_celsius(self):
        rules = REGISTRY.outlier_rules()
        weights = [BiometricRecord(subject_id="1", charttime=0, result_name="Weight", value=v, unit="kg") for v in (20.0, 19.9)]
        assert [r.value for r in filter_outliers(weights, rules, name="weight")] == [20.0, None]
        temps = filter_outliers([_event("temperature", 10.0, "degC"), _event("temperature", 9.0, "degC")], rules)
        assert [e.value for e in temps] == [10.0, None]

    def test_frame_path_matches_record_path(self):
        events = [
            _event("temperature", 99.1, "degF"),
            _event("temperature", 36.4, "degC"),
            _event("heartrate", 701.0),
            _event("heartrate", 88.0),
            _event("temperature", 20.0, "K"),
        ]
        frame = pd.DataFrame([e.model_dump() for e in events])
        canonical = canonicalize_frame(frame, REGISTRY)
        expected = [convert_units(e, REGISTRY).value for e in filter_outliers(events, REGISTRY.outlier_rules())]
        expected = [np.nan if v is None else v for v in expected]
        np.testing.assert_allclose(canonical["value"].to_numpy(dtype=float), expected, equal_nan=True)
        assert canonical["unit"].tolist()[:2] == ["degC", "degC"]


class TestBiometrics:
    def test_result_names(self):
        assert biometric_name("Weight (Lbs)", REGISTRY) == "weight"
        assert biometric_name("BMI (kg/m2)", REGISTRY) == "bmi"
        assert biometric_name("Height (Inches)", REGISTRY) == "height"
        assert biometric_name("Blood Pressure", REGISTRY) is None

    def test_closest_record_within_thirty_days(self, make_sample, arrival):
        def weight(days, value, unit="kg"):
            return BiometricRecord(subject_id="1", charttime=arrival + days * SECONDS_PER_DAY, result_name="Weight", value=value, unit=unit)

        sample = make_sample()
        values = match_biometrics(sample, [weight(-10, 80.0), weight(4, 154.3237, "lb"), weight(-4, 90.0), weight(31, 50.0)], REGISTRY)
        # -4 and +4 days tie; the earlier record wins
        assert values["weight"] == 90.0
        assert values["height"] is None
        assert match_biometrics(sample, [weight(-31, 80.0)], REGISTRY)["weight"] is None
        assert match_biometrics(sample, [weight(2, 154.3237, "lb")], REGISTRY)["weight"] == pytest.approx(70.0, abs=1e-4)

    def test_unit_from_result_name_suffix(self, make_sample, arrival):
        assert result_name_unit("Weight (Lbs)") == "lb"
        assert result_name_unit("Height (Inches)") == "in"
        assert result_name_unit("BMI (kg/m2)") == "kg/m2"
        assert result_name_unit("Weight") == ""

        records = [
            BiometricRecord(subject_id="1", charttime=arrival, result_name="Weight (Lbs)", value=180.0),
            BiometricRecord(subject_id="1", charttime=arrival, result_name="Height (Inches)", value=70.0),
        ]
        values = match_biometrics(make_sample(), records, REGISTRY)
        assert values["weight"] == pytest.approx(180.0 * 0.45359237)
        assert values["height"] == pytest.approx(177.8)
        # an explicit unit wins over the suffix
        explicit = BiometricRecord(subject_id="1", charttime=arrival, result_name="Weight (Lbs)", value=80.0, unit="kg")
        assert match_biometrics(make_sample(), [explicit], REGISTRY)["weight"] == 80.0


def test_categorical_vocabulary_reserves_unknown():
    vocab = CategoryVocab.fit("race", ["WHITE", "BLACK/AFRICAN AMERICAN", "WHITE - RUSSIAN", None])
    assert vocab.values == ("Black", "White")
    assert vocab.size == 3
    assert vocab.encode("WHITE - BRAZILIAN") == 2
    assert vocab.encode("ASIAN - CHINESE") == 0
    assert vocab.encode_many([None, "BLACK/CAPE VERDEAN"]).tolist() == [0, 1]
    assert CategoryVocab.fit("acuity", [3.0, "2", None]).values == ("2", "3")


def test_ecg_features_missing_keys_are_none():
    features = extract_ecg_features({"machine_features": {"rr_interval": 800, "qrs_axis": -15}})
    assert features["rr_interval"] == 800.0
    assert features["qrs_axis"] == -15.0
    assert features["t_axis"] is None


def test_events_outside_window_are_ignored(make_sample, arrival):
    sample = make_sample()
    events = [
        _event("heartrate", 200.0, charttime=arrival - 1),
        _event("heartrate", 80.0, charttime=arrival),
        _event("heartrate", 90.0, charttime=sample.window_end),
        _event("heartrate", 300.0, charttime=sample.window_end + 1),
    ]
    vector = assemble_features(sample, events, [], {}, REGISTRY)
    columns = REGISTRY.numeric_columns()
    assert vector.numeric[columns.index("heartrate_mean")] == 85.0
    assert vector.numeric[columns.index("heartrate_first")] == 80.0
    assert np.isnan(vector.numeric[columns.index("lactate_mean")])
    assert vector.missing_mask.sum() == np.isnan(vector.numeric).sum() + np.isnan(vector.ecg_features).sum()
    assert vector.categorical == {"gender": "F", "race": "White", "acuity": "3"}


def test_unknown_statistic_is_rejected(make_sample):
    registry = dataclasses.replace(REGISTRY, stats=REGISTRY.stats + ["kurtosis"])
    with pytest.raises(AssemblyError):
        assemble_features(make_sample(), [], [], {}, registry)


@pytest.fixture(scope="module")
def fixture_features(fixture_root):
    sources = load_sources(fixture_root)
    samples = link_ecg_to_stays(sources.stays, sources.ecg_manifest)
    store = WaveformStore(fixture_root, sources.ecg_manifest)
    return sources, samples, store, build_feature_matrix(samples, sources, REGISTRY, store)


def test_matrix_rows_agree_with_per_sample_assembly(fixture_features):
    sources, samples, store, matrix = fixture_features
    assert list(matrix.numeric.columns) == REGISTRY.numeric_columns()
    assert list(matrix.ecg.columns) == REGISTRY.ecg_columns()
    for sample in samples[:15]:
        events = [e for e in sources.vitals if e.stay_id == sample.stay_id]
        events += [e for e in sources.labs if e.subject_id == sample.subject_id]
        biometrics = [b for b in sources.biometrics if b.subject_id == sample.subject_id]
        vector = assemble_features(sample, events, biometrics, store.read_sidecar(sample.record_id), REGISTRY)
        np.testing.assert_allclose(matrix.numeric.loc[sample.sample_id].to_numpy(dtype=float), vector.numeric, rtol=1e-9, equal_nan=True)
        np.testing.assert_allclose(matrix.ecg.loc[sample.sample_id].to_numpy(dtype=float), vector.ecg_features, rtol=1e-9, equal_nan=True)


def test_feature_file_keeps_values_and_header(fixture_features, tmp_path):
    matrix = fixture_features[3]
    path = write_feature_matrix(matrix, tmp_path / "features.csv")
    restored = read_feature_matrix(path)
    assert restored.registry_hash == REGISTRY.hash
    pd.testing.assert_frame_equal(restored.numeric, matrix.numeric, check_exact=False, rtol=1e-12)
    assert restored.categorical.to_dict() == matrix.categorical.to_dict()
    masks = [c["mask"] for c in matrix.header()["columns"] if c["group"] == "numeric"]
    assert masks[0] == "age_missing"

import numpy as np
import pytest

from edbench.errors import DataError, RowError, SchemaError, WaveformFormatError
from edbench.ingest import (
    TABLE_KINDS,
    EventRecord,
    StayRecord,
    VariableRegistry,
    WaveformRecord,
    WaveformStore,
    load_sources,
    load_table,
    load_waveform,
    parse_timestamp,
    quantize,
    resample_waveform,
    write_table,
    write_waveform,
)
from edbench.ingest.records import format_timestamp


def test_timestamps_are_integer_seconds():
    assert parse_timestamp("1970-01-01 00:01:00") == 60
    assert parse_timestamp("1970-01-02") == 86400
    assert format_timestamp(parse_timestamp("2150-03-04 05:06:07")) == "2150-03-04 05:06:07"
    with pytest.raises(ValueError):
        parse_timestamp("yesterday")


def test_table_written_by_the_writer_reads_back(tmp_path):
    stays = [
        StayRecord(
            subject_id="1", stay_id="10", hadm_id=None, intime=1000, outtime=5000, gender="F", race="WHITE", age=44
        ),
        StayRecord(subject_id="2", stay_id="20", hadm_id="200", intime=2000, outtime=9000, gender="M", race="ASIAN", age=70, acuity=2),
    ]
    path = write_table(stays, tmp_path / "edstays.csv", "edstays")
    table = load_table(path, "edstays")
    assert table.records == stays
    assert table.diagnostics == []


def test_bad_rows_become_diagnostics(tmp_path):
    path = tmp_path / "edstays.csv"
    path.write_text(
        "subject_id,stay_id,intime,outtime,gender,race,age,hadm_id,acuity\n"
        "1,10,2150-01-01 10:00:00,2150-01-01 12:00:00,F,WHITE,50,,\n"
        "2,20,2150-01-01 10:00:00,2150-01-01 09:00:00,F,WHITE,50,,\n"
        "3,30,not a time,2150-01-01 12:00:00,M,WHITE,50,,\n",
        encoding="utf-8",
    )
    table = load_table(path, "edstays")
    assert len(table.records) == 1
    assert [d.row for d in table.diagnostics] == [2, 3]
    assert table.n_input_rows == len(table.records) + len(table.diagnostics)
    with pytest.raises(RowError) as excinfo:
        load_table(path, "edstays", strict=True)
    assert excinfo.value.row == 2


def test_missing_required_column_names_it(tmp_path):
    path = tmp_path / "vitalsign.csv"
    path.write_text("subject_id,stay_id,charttime,value\n1,10,2150-01-01 10:00:00,80\n", encoding="utf-8")
    with pytest.raises(SchemaError) as excinfo:
        load_table(path, "vitalsign")
    assert excinfo.value.column == "variable_id"


def test_unknown_lab_variable_is_skipped_with_a_warning(tmp_path):
    events = [
        EventRecord(subject_id="1", variable_id="lactate", value=2.0, charttime=100),
        EventRecord(subject_id="1", variable_id="unobtainium", value=1.0, charttime=100),
    ]
    path = write_table(events, tmp_path / "labevents.csv", "labevents")
    table = load_table(path, "labevents", registry=VariableRegistry.load())
    assert [e.variable_id for e in table.records] == ["lactate"]
    assert [d.level for d in table.diagnostics] == ["warning"]
    assert table.errors == []


def test_generated_fixture_passes_ingest_without_diagnostics(fixture_root):
    registry = VariableRegistry.load()
    for kind in TABLE_KINDS:
        table = load_table(fixture_root / f"{kind}.csv", kind, registry=registry)
        assert table.diagnostics == [], kind
        assert len(table.records) == table.n_input_rows


def test_sources_merge_triage_acuity_and_build_outcomes(fixture_root):
    sources = load_sources(fixture_root)
    assert all(s.acuity is not None for s in sources.stays)
    assert len(sources.outcomes) == len(sources.admissions)
    icu_by_hadm = {}
    for icu in sources.icustays:
        icu_by_hadm.setdefault(icu.hadm_id, []).append((icu.intime, icu.outtime))
    for outcome in sources.outcomes:
        assert list(outcome.icu_intervals) == icu_by_hadm.get(outcome.hadm_id, [])


def test_missing_table_is_named(copy_root):
    (copy_root / "labevents.csv").unlink()
    with pytest.raises(DataError, match="labevents"):
        load_sources(copy_root)


def test_waveform_store_reproduces_quantized_samples(tmp_path, rng):
    samples = rng.normal(0, 0.5, (12, 1000))
    record = WaveformRecord("rec1", "1", 1234, 100, samples, {"rr_interval": 800.0, "qrs_axis": -10.0})
    entry = write_waveform(record, tmp_path / "waveforms")
    assert entry.signal_path == "waveforms/rec1.dat"

    loaded = load_waveform("rec1", WaveformStore(tmp_path, [entry]))
    np.testing.assert_allclose(loaded.samples, quantize(samples), atol=1e-12)
    assert loaded.machine_features == {"rr_interval": 800.0, "qrs_axis": -10.0}
    assert loaded.ecg_time == 1234
    assert np.abs(loaded.samples - samples).max() <= 0.5 / 1000 + 1e-12


def test_waveform_shape_is_checked():
    with pytest.raises(WaveformFormatError):
        WaveformRecord("bad", "1", 0, 100, np.zeros((11, 1000)))
    with pytest.raises(WaveformFormatError):
        WaveformRecord("bad", "1", 0, 500, np.zeros((12, 1000)))


def test_truncated_signal_file_is_rejected(tmp_path):
    record = WaveformRecord("rec1", "1", 0, 100, np.zeros((12, 1000)))
    entry = write_waveform(record, tmp_path / "waveforms")
    signal = tmp_path / entry.signal_path
    signal.write_bytes(signal.read_bytes()[:-2])
    with pytest.raises(WaveformFormatError):
        load_waveform("rec1", WaveformStore(tmp_path, [entry]))


def test_resampling_to_100_hz_keeps_low_frequencies():
    t = np.arange(5000) / 500
    samples = np.tile(np.sin(2 * np.pi * 2.0 * t), (12, 1))
    out = resample_waveform(samples, 500, 100)
    assert out.shape == (12, 1000)
    expected = np.sin(2 * np.pi * 2.0 * np.arange(1000) / 100)
    # edges suffer from the filter transient
    np.testing.assert_allclose(out[:, 50:-50], np.tile(expected, (12, 1))[:, 50:-50], atol=1e-2)

import json
from pathlib import Path

import numpy as np
import pytest

from edbench.config import PlantedEffect, SynthConfig
from edbench.ingest import WaveformStore, load_sources
from edbench.synth import PLANTED_CODES, WAVE_FREQUENCY, generate_fixture, generate_waveform


def _files(root):
    return {path.relative_to(root): path.read_bytes() for path in sorted(root.rglob("*")) if path.is_file()}


def test_same_config_writes_identical_files(tmp_path):
    config = SynthConfig(n_patients=6, seed=3)
    first = _files(generate_fixture(config, tmp_path / "a"))
    second = _files(generate_fixture(config, tmp_path / "b"))
    assert first.keys() == second.keys()
    assert first == second

    other = _files(generate_fixture(SynthConfig(n_patients=6, seed=4), tmp_path / "c"))
    assert other[Path("edstays.csv")] != first[Path("edstays.csv")]


def test_fixture_records_its_settings(tmp_path):
    config = SynthConfig(n_patients=3, seed=11, effects=[PlantedEffect(label="L_wave", modality="waveform", effect_size=2.0)])
    root = generate_fixture(config, tmp_path / "data")
    recorded = json.loads((root / "synth_config.json").read_text(encoding="utf-8"))
    assert SynthConfig(**recorded) == config
    assert (root / "icd9_to_icd10.csv").read_text(encoding="utf-8").startswith("icd9,icd10\n")


def test_noise_free_waveform_is_periodic():
    signal = generate_waveform(heart_rate=1.0, noise_level=0.0)
    assert signal.shape == (12, 1000)
    np.testing.assert_allclose(signal[:, :900], signal[:, 100:], atol=1e-9)


def test_planted_component_sits_in_its_bin():
    plain = np.abs(np.fft.rfft(generate_waveform(noise_level=0.0)[0]))
    planted = np.abs(np.fft.rfft(generate_waveform(planted_amplitude=0.5, noise_level=0.0)[0]))
    bin_25hz = int(WAVE_FREQUENCY * 1000 / 100)
    assert bin_25hz == 250
    assert plain[bin_25hz] < 1e-6
    assert planted[bin_25hz] == pytest.approx(0.5 * 1000 / 2, rel=1e-6)


def test_noise_follows_the_seed():
    np.testing.assert_array_equal(generate_waveform(seed=5), generate_waveform(seed=5))
    assert not np.array_equal(generate_waveform(seed=5), generate_waveform(seed=6))


def test_waveform_positives_carry_the_planted_frequency(fixture_root):
    sources = load_sources(fixture_root)
    store = WaveformStore(fixture_root, sources.ecg_manifest)
    positive_stays = {d.stay_id for d in sources.diagnoses_ed if d.icd_code == PLANTED_CODES["L_wave"]}
    stay_of = {}
    for stay in sources.stays:
        stay_of.setdefault(stay.subject_id, []).append(stay)

    power = {True: [], False: []}
    for entry in sources.ecg_manifest:
        record = store.load(entry.record_id)
        stay = next(s for s in stay_of[entry.subject_id] if s.intime <= entry.ecg_time <= s.outtime)
        spectrum = np.abs(np.fft.rfft(record.samples[0]))
        power[stay.stay_id in positive_stays].append(spectrum[int(WAVE_FREQUENCY * record.samples.shape[1] / record.sampling_rate)])
    assert power[True] and power[False]
    assert min(power[True]) > max(power[False])

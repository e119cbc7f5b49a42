"""
Seed-deterministic synthetic source tables and ECG waveforms with planted signal.

Four diagnosis labels carry a known cue:

* ``L_wave``: a 25 Hz component added to every lead
* ``L_tab``: a rising lactate trend inside the feature window
* ``L_both``: the sum of a weak waveform cue (15 Hz amplitude) and a weak lab cue (creatinine level)
* ``L_miss``: troponin is measured less often for positives, its value carries nothing

Deterioration events (low SpO2, vasopressors, ICU transfers, coded procedures, deaths)
are placed on both sides of the 90-minute window end.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from ..config import SynthConfig
from ..ingest.records import (
    MACHINE_FEATURES,
    N_LEADS,
    RECORD_SECONDS,
    SECONDS_PER_DAY,
    SECONDS_PER_HOUR,
    SECONDS_PER_MINUTE,
    AdmissionRecord,
    BiometricRecord,
    CodedEventRecord,
    EventRecord,
    IcuStayRecord,
    MedicationRecord,
    StayRecord,
    TriageRecord,
    WaveformRecord,
    parse_timestamp,
)
from ..ingest.tables import TABLE_KINDS, write_table
from ..ingest.waveforms import write_waveform

logger = logging.getLogger(__name__)

PLANTED_CODES = {"L_wave": "I48", "L_tab": "N17", "L_both": "I21", "L_miss": "E87"}
BACKGROUND_CODES = (
    "I10", "E11", "J18", "K35", "R07", "S72", "F32", "N39", "A41", "C34", "G40", "M54", "L03", "D64", "J44", "R55",
)
ICD9_DIAGNOSES = {"4019": "I10", "4280": "I509"}

WAVE_FREQUENCY = 25.0
BOTH_FREQUENCY = 15.0
HEART_RATES = (0.8, 1.0, 1.25)
LEAD_GAINS = np.linspace(0.6, 1.4, N_LEADS)

TAB_LAB = "lactate"
BOTH_LAB = "creatinine"
MISS_LAB = "troponin_t"
ROUTINE_LABS = {
    "glucose": (110.0, 20.0),
    "sodium": (139.0, 3.0),
    "potassium": (4.2, 0.4),
    "hemoglobin": (13.5, 1.5),
    "white_blood_cells": (8.0, 2.5),
    "urea_nitrogen": (16.0, 5.0),
}
RACES = ("WHITE", "BLACK/AFRICAN AMERICAN", "HISPANIC/LATINO - PUERTO RICAN", "ASIAN - CHINESE", "OTHER", "UNKNOWN")
START = parse_timestamp("2150-01-01 00:00:00")


def generate_waveform(
    heart_rate: float = 1.0,
    planted_amplitude: float = 0.0,
    planted_frequency: float = WAVE_FREQUENCY,
    noise_level: float = 0.05,
    seed: int = 0,
    sampling_rate: int = 100,
    components: Sequence[Tuple[float, float]] = (),
) -> np.ndarray:
    """
    A 10 s, 12-lead periodic signal with optional sinusoidal components and white noise.

    Args:
        heart_rate (float): Fundamental frequency of the base template in Hz
        planted_amplitude (float): Amplitude of the planted component, in mV
        planted_frequency (float): Frequency of the planted component in Hz
        noise_level (float): Standard deviation of the white noise
        seed (int): Noise seed
        sampling_rate (int): Samples per second
        components (Sequence[Tuple[float, float]]): Further ``(frequency, amplitude)`` components

    Returns:
        np.ndarray: 12 x (10 * sampling_rate) samples
    """
    t = np.arange(RECORD_SECONDS * sampling_rate) / sampling_rate
    phases = np.arange(N_LEADS)[:, None] * np.pi / N_LEADS
    w = 2 * np.pi * heart_rate * t[None, :]
    signal = LEAD_GAINS[:, None] * (np.sin(w + phases) + 0.4 * np.sin(2 * w + 2 * phases) + 0.2 * np.sin(3 * w))
    for frequency, amplitude in [(planted_frequency, planted_amplitude), *components]:
        if amplitude:
            signal = signal + amplitude * np.sin(2 * np.pi * frequency * t)[None, :]
    if noise_level > 0:
        signal = signal + np.random.default_rng(seed).normal(0.0, noise_level, signal.shape)
    return signal


@dataclass
class _Tables:
    rows: Dict[str, list] = field(default_factory=lambda: {kind: [] for kind in TABLE_KINDS})

    def add(self, kind: str, record):
        self.rows[kind].append(record)


def _midnight(seconds: int) -> int:
    return seconds - seconds % SECONDS_PER_DAY


class _FixtureBuilder:
    def __init__(self, config: SynthConfig, out_dir: Path):
        self.config = config
        self.out_dir = out_dir
        self.rng = np.random.default_rng(config.seed)
        self.tables = _Tables()
        self.effects = {label: config.effect(label) for label in PLANTED_CODES}

    def _minutes(self, arrival: int, minutes: float) -> int:
        return arrival + int(round(minutes * SECONDS_PER_MINUTE))

    def patient(self, p: int):
        rng = self.rng
        subject = str(10000000 + p)
        gender = str(rng.choice(["F", "M"]))
        race = str(rng.choice(RACES))
        age = int(rng.integers(16, 18)) if rng.random() < 0.03 else int(rng.integers(18, 95))
        heart_rate = float(rng.choice(HEART_RATES))
        lo, hi = self.config.visits_per_patient
        n_visits = int(rng.integers(lo, hi + 1))
        dies = rng.random() < 0.1
        arrival = START + int(rng.integers(0, 365)) * SECONDS_PER_DAY + int(rng.integers(0, SECONDS_PER_DAY))

        self.biometrics(subject, arrival)
        for v in range(n_visits):
            self.visit(subject, p, v, arrival, gender, race, age, heart_rate, dies and v == n_visits - 1)
            arrival += int(rng.integers(20, 120)) * SECONDS_PER_DAY + int(rng.integers(0, SECONDS_PER_DAY))

    def biometrics(self, subject: str, arrival: int):
        rng = self.rng
        when = arrival - int(rng.integers(1, 20)) * SECONDS_PER_DAY
        weight_kg = float(np.clip(rng.normal(78, 15), 40, 180))
        height_cm = float(np.clip(rng.normal(170, 10), 140, 205))
        if rng.random() < 0.5:
            self.tables.add("omr", BiometricRecord(subject_id=subject, charttime=when, result_name="Weight (Lbs)", value=round(weight_kg / 0.45359237, 1)))
        else:
            self.tables.add("omr", BiometricRecord(subject_id=subject, charttime=when, result_name="Weight", value=round(weight_kg, 1), unit="kg"))
        self.tables.add("omr", BiometricRecord(subject_id=subject, charttime=when, result_name="Height (Inches)", value=round(height_cm / 2.54, 1)))
        bmi = weight_kg / (height_cm / 100.0) ** 2
        self.tables.add("omr", BiometricRecord(subject_id=subject, charttime=when, result_name="BMI (kg/m2)", value=round(bmi, 1), unit="kg/m2"))

    def visit(self, subject, p, v, arrival, gender, race, age, heart_rate, dies):
        rng = self.rng
        stay_id = f"3{p:06d}{v}"
        admitted = dies or rng.random() < 0.5
        hadm_id = f"2{p:06d}{v}" if admitted else None
        outtime = arrival + int(rng.integers(4, 12)) * SECONDS_PER_HOUR

        wave_pos = rng.random() < 0.3
        tab_pos = rng.random() < 0.3
        u, w = rng.normal(size=2)
        both_pos = u + w > 0.8
        miss_pos = rng.random() < 0.3

        self.tables.add(
            "edstays",
            StayRecord(subject_id=subject, stay_id=stay_id, hadm_id=hadm_id, intime=arrival, outtime=outtime, gender=gender, race=race, age=age),
        )
        self.tables.add("triage", TriageRecord(subject_id=subject, stay_id=stay_id, acuity=int(rng.integers(1, 6))))

        planted = {"L_wave": wave_pos, "L_tab": tab_pos, "L_both": both_pos, "L_miss": miss_pos}
        codes = [PLANTED_CODES[label] for label, positive in planted.items() if positive]
        codes += [code for code in BACKGROUND_CODES[: self.config.background_codes] if rng.random() < 0.15]
        for code in codes:
            self.tables.add("diagnoses_ed", CodedEventRecord(subject_id=subject, stay_id=stay_id, icd_code=code, icd_version=10))

        self.ecgs(subject, p, v, arrival, heart_rate, wave_pos, u)
        self.vitals(subject, stay_id, arrival, heart_rate)
        self.labs(subject, hadm_id, arrival, tab_pos, w, miss_pos)
        self.medications(subject, stay_id, arrival)
        if admitted:
            self.admission(subject, p, v, stay_id, hadm_id, arrival, dies)

    def ecgs(self, subject, p, v, arrival, heart_rate, wave_pos, u):
        rng, cfg = self.rng, self.config
        lo, hi = cfg.ecgs_per_visit
        offsets = sorted(float(rng.uniform(0, 90)) for _ in range(int(rng.integers(lo, hi + 1))))
        if rng.random() < 0.1:
            offsets.append(float(rng.uniform(120, 240)))
        wave_amplitude = 0.1 * self.effects["L_wave"] if wave_pos else 0.0
        both_amplitude = 0.02 * self.effects["L_both"] * float(np.clip(u + 3.0, 0.0, 6.0))
        for k, minutes in enumerate(offsets):
            record_id = f"{subject}_{v}_{k}"
            samples = generate_waveform(
                heart_rate=heart_rate,
                planted_amplitude=wave_amplitude,
                noise_level=cfg.noise_level,
                seed=int(rng.integers(0, 2**31 - 1)),
                sampling_rate=cfg.sampling_rate,
                components=[(BOTH_FREQUENCY, both_amplitude)],
            )
            rr = 1000.0 / heart_rate
            machine = {
                "rr_interval": round(rr + float(rng.normal(0, 15)), 1),
                "p_onset": round(float(rng.normal(40, 5)), 1),
                "qrs_onset": round(float(rng.normal(200, 8)), 1),
                "qrs_end": round(float(rng.normal(295, 10)), 1),
                "t_end": round(float(rng.normal(600, 25)), 1),
                "p_axis": round(float(rng.normal(50, 20)), 1),
                "qrs_axis": round(float(rng.normal(30, 30)), 1),
                "t_axis": round(float(rng.normal(40, 25)), 1),
            }
            record = WaveformRecord(
                record_id=record_id,
                subject_id=subject,
                ecg_time=self._minutes(arrival, minutes),
                sampling_rate=cfg.sampling_rate,
                samples=samples,
                machine_features={name: machine[name] for name in MACHINE_FEATURES},
            )
            self.tables.add("ecg_manifest", write_waveform(record, self.out_dir / "waveforms", relative_to=self.out_dir))

    def vitals(self, subject, stay_id, arrival, heart_rate):
        rng = self.rng

        def add(variable, minutes, value, unit=""):
            self.tables.add(
                "vitalsign",
                EventRecord(subject_id=subject, stay_id=stay_id, charttime=self._minutes(arrival, minutes), variable_id=variable, value=value, unit=unit),
            )

        for minutes in (5.0, 35.0, 70.0, 180.0):
            hr = 60.0 * heart_rate + float(rng.normal(0, 6))
            add("heartrate", minutes, 800.0 if rng.random() < 0.01 else round(hr, 1))
            add("o2sat", minutes, round(float(np.clip(rng.normal(97, 1.5), 88, 100)), 1))
            add("sbp", minutes, round(float(rng.normal(125, 15)), 1))
            add("dbp", minutes, round(float(rng.normal(75, 10)), 1))
            add("resprate", minutes, round(float(np.clip(rng.normal(16, 3), 6, 40)), 1))
            if rng.random() < 0.5:
                add("temperature", minutes, round(float(rng.normal(98.6, 0.8)), 1), "degF")
            else:
                add("temperature", minutes, round(float(rng.normal(37.0, 0.4)), 2), "degC")
        # severe hypoxemia inside the window (masked) or after it (positive)
        if rng.random() < 0.08:
            add("o2sat", 60.0, 82.0)
        if rng.random() < 0.1:
            add("o2sat", float(rng.uniform(120, 1200)), 80.0)

    def labs(self, subject, hadm_id, arrival, tab_pos, w, miss_pos):
        rng, cfg = self.rng, self.config

        def add(variable, minutes, value):
            self.tables.add(
                "labevents",
                EventRecord(subject_id=subject, hadm_id=hadm_id, charttime=self._minutes(arrival, minutes), variable_id=variable, value=round(value, 4)),
            )

        slope = 0.02 * self.effects["L_tab"] if tab_pos else 0.0
        for minutes in (10.0, 40.0, 80.0):
            add(TAB_LAB, minutes, max(0.2, 1.5 + slope * minutes + float(rng.normal(0, 0.05))))

        level = 1.0 + 0.25 * self.effects["L_both"] * w
        for minutes in (15.0, 75.0)[: int(rng.integers(1, 3))]:
            add(BOTH_LAB, minutes, max(0.1, level + float(rng.normal(0, 0.05))))

        measure = cfg.measure_prob
        if cfg.missingness == "informative" and miss_pos:
            measure = max(0.05, cfg.measure_prob - 0.6 * min(self.effects["L_miss"], 1.0))
        if rng.random() < measure:
            add(MISS_LAB, float(rng.uniform(10, 85)), 0.01 + abs(float(rng.normal(0, 0.01))))

        for name, (mean, sd) in ROUTINE_LABS.items():
            if rng.random() < cfg.measure_prob:
                add(name, float(rng.uniform(10, 85)), max(0.1, float(rng.normal(mean, sd))))
        if rng.random() < 0.01:
            add("glucose", 30.0, 2000.5)

    def medications(self, subject, stay_id, arrival):
        rng = self.rng

        def add(name, minutes):
            self.tables.add(
                "pyxis", MedicationRecord(subject_id=subject, stay_id=stay_id, charttime=self._minutes(arrival, minutes), name=name)
            )

        if rng.random() < 0.3:
            add(str(rng.choice(["Acetaminophen", "Ondansetron", "Aspirin 81mg"])), float(rng.uniform(5, 300)))
        if rng.random() < 0.06:
            add("Norepinephrine", 30.0)
        if rng.random() < 0.08:
            add("Norepinephrine 4mg/250mL", float(rng.uniform(120, 1200)))
        if rng.random() < 0.05:
            add("DOBUTamine", float(rng.uniform(120, 1200)))

    def admission(self, subject, p, v, stay_id, hadm_id, arrival, dies):
        rng = self.rng
        admittime = arrival + 2 * SECONDS_PER_HOUR
        dischtime = admittime + int(rng.integers(2, 10)) * SECONDS_PER_DAY
        dod = None
        if dies:
            dod = _midnight(arrival) + int(rng.choice([0, 3, 20, 60, 150, 300])) * SECONDS_PER_DAY
            if dod <= dischtime:
                dischtime = max(admittime + SECONDS_PER_HOUR, dod + 12 * SECONDS_PER_HOUR)
        self.tables.add("admissions", AdmissionRecord(subject_id=subject, hadm_id=hadm_id, admittime=admittime, dischtime=dischtime, dod=dod))

        draw = rng.random()
        icu_start = None
        if draw < 0.08:
            icu_start = arrival + 60 * SECONDS_PER_MINUTE
        elif draw < 0.18:
            icu_start = arrival + int(rng.integers(3, 20)) * SECONDS_PER_HOUR
        elif draw < 0.23:
            icu_start = arrival + int(rng.integers(30, 44)) * SECONDS_PER_HOUR
        if icu_start is not None and icu_start < dischtime:
            self.tables.add(
                "icustays",
                IcuStayRecord(subject_id=subject, hadm_id=hadm_id, stay_id=f"4{p:06d}{v}", intime=icu_start, outtime=min(icu_start + 2 * SECONDS_PER_DAY, dischtime)),
            )

        if rng.random() < 0.06:
            self.tables.add("procedures", CodedEventRecord(subject_id=subject, hadm_id=hadm_id, icd_code="5A1945Z", icd_version=10, event_date=_midnight(arrival)))
        if rng.random() < 0.03:
            self.tables.add("procedures", CodedEventRecord(subject_id=subject, hadm_id=hadm_id, icd_code="9671", icd_version=9))
        if rng.random() < 0.02:
            self.tables.add("procedures", CodedEventRecord(subject_id=subject, hadm_id=hadm_id, icd_code="5A1522F", icd_version=10, event_date=_midnight(arrival) + SECONDS_PER_DAY))
        if rng.random() < 0.03:
            self.tables.add("diagnoses_hosp", CodedEventRecord(subject_id=subject, hadm_id=hadm_id, icd_code="I469", icd_version=10))
        if rng.random() < 0.2:
            code = str(rng.choice(sorted(ICD9_DIAGNOSES)))
            self.tables.add("diagnoses_hosp", CodedEventRecord(subject_id=subject, hadm_id=hadm_id, icd_code=code, icd_version=9))

    def write(self) -> Dict[str, int]:
        counts = {}
        for kind in TABLE_KINDS:
            write_table(self.tables.rows[kind], self.out_dir / f"{kind}.csv", kind)
            counts[kind] = len(self.tables.rows[kind])
        with open(self.out_dir / "icd9_to_icd10.csv", "w", encoding="utf-8", newline="\n") as handle:
            handle.write("icd9,icd10\n")
            for icd9, icd10 in sorted(ICD9_DIAGNOSES.items()):
                handle.write(f"{icd9},{icd10}\n")
        with open(self.out_dir / "synth_config.json", "w", encoding="utf-8") as handle:
            json.dump(json.loads(self.config.model_dump_json()), handle, indent=2, sort_keys=True)
        return counts


def generate_fixture(config: Optional[SynthConfig], out_dir: Path) -> Path:
    """
    Write a complete synthetic data root.

    The directory receives one CSV per source table, ``waveforms/`` with the binary
    records and sidecars, ``icd9_to_icd10.csv`` and ``synth_config.json``. The same
    config always produces byte-identical files.

    Args:
        config (SynthConfig, optional): Generator settings; defaults when omitted
        out_dir (Path): Data root to create

    Returns:
        Path: ``out_dir``
    """
    config = config or SynthConfig()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    builder = _FixtureBuilder(config, out_dir)
    for p in range(config.n_patients):
        builder.patient(p)
    counts = builder.write()
    logger.info(
        f"Synthetic fixture in {out_dir}: {config.n_patients} patients, {counts['edstays']} stays, "
        f"{counts['ecg_manifest']} ECGs (seed {config.seed})"
    )
    return out_dir

"""
Typed records for the MIMIC-style source tables.

All timestamps are stored as integer seconds since 1970-01-01 (timezone-naive);
dates are stored as the timestamp of their midnight.
"""

import calendar
import datetime
from dataclasses import dataclass, field
from typing import Annotated, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, field_validator, model_validator

from ..errors import WaveformFormatError

SECONDS_PER_MINUTE = 60
SECONDS_PER_HOUR = 3600
SECONDS_PER_DAY = 86400

N_LEADS = 12
RECORD_SECONDS = 10
MACHINE_FEATURES = ("rr_interval", "p_onset", "qrs_onset", "qrs_end", "t_end", "p_axis", "qrs_axis", "t_axis")

TIMESTAMP_FORMAT = "%Y-%m-%d %H:%M:%S"
DATE_FORMAT = "%Y-%m-%d"


def parse_timestamp(value) -> int:
    """
    Parse an ISO-8601 timestamp (or date) into integer seconds since the epoch.

    Args:
        value: ISO string, integer seconds, or ``datetime``

    Returns:
        int: Seconds since 1970-01-01 00:00:00
    """
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return int(value)
    if isinstance(value, datetime.datetime):
        parsed = value
    elif isinstance(value, datetime.date):
        parsed = datetime.datetime(value.year, value.month, value.day)
    elif isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty timestamp")
        try:
            parsed = datetime.datetime.fromisoformat(text)
        except ValueError as exc:
            raise ValueError(f"unparseable timestamp '{text}'") from exc
    else:
        raise ValueError(f"unparseable timestamp {value!r}")
    if parsed.tzinfo is not None:
        raise ValueError(f"timestamp must be timezone-naive: {value}")
    return calendar.timegm(parsed.timetuple())


def format_timestamp(seconds: int) -> str:
    return datetime.datetime.fromtimestamp(int(seconds), tz=datetime.timezone.utc).strftime(TIMESTAMP_FORMAT)


def format_date(seconds: int) -> str:
    return datetime.datetime.fromtimestamp(int(seconds), tz=datetime.timezone.utc).strftime(DATE_FORMAT)


def day_of(seconds: int) -> int:
    """Calendar day index (days since the epoch) of a timestamp."""
    return int(seconds) // SECONDS_PER_DAY


def _optional_timestamp(value):
    return None if value is None else parse_timestamp(value)


def _acuity_level(value):
    if value is None:
        return None
    level = int(float(value))
    if level not in (1, 2, 3, 4, 5):
        raise ValueError(f"acuity {value} outside 1..5")
    return level


Timestamp = Annotated[int, BeforeValidator(parse_timestamp)]
OptionalTimestamp = Annotated[Optional[int], BeforeValidator(_optional_timestamp)]
Acuity = Annotated[Optional[int], BeforeValidator(_acuity_level)]


class SourceRecord(BaseModel):
    """Base for one parsed source row. Empty strings are treated as missing."""

    model_config = ConfigDict(frozen=True, extra="ignore")

    @model_validator(mode="before")
    @classmethod
    def _blank_to_none(cls, data):
        if isinstance(data, dict):
            return {k: (None if isinstance(v, str) and v.strip() == "" else v) for k, v in data.items()}
        return data


class StayRecord(SourceRecord):
    subject_id: str
    stay_id: str
    hadm_id: Optional[str] = None
    intime: Timestamp
    outtime: Timestamp
    gender: str
    race: str
    age: int
    acuity: Acuity = None

    @field_validator("age")
    @classmethod
    def _age(cls, value: int) -> int:
        if value < 0:
            raise ValueError("age must be non-negative")
        return value

    @model_validator(mode="after")
    def _ordered(self):
        if not self.intime < self.outtime:
            raise ValueError("intime must precede outtime")
        return self


class TriageRecord(SourceRecord):
    subject_id: str
    stay_id: str
    acuity: Acuity = None


class EventRecord(SourceRecord):
    """One vital-sign or laboratory measurement in long format."""

    subject_id: str
    stay_id: Optional[str] = None
    hadm_id: Optional[str] = None
    variable_id: str
    value: Optional[float] = None
    unit: str = ""
    charttime: Timestamp

    @field_validator("unit", mode="before")
    @classmethod
    def _unit(cls, value):
        return "" if value is None else str(value).strip()


class MedicationRecord(SourceRecord):
    subject_id: str
    stay_id: str
    charttime: Timestamp
    name: str

    @field_validator("name")
    @classmethod
    def _normalize(cls, value: str) -> str:
        return value.strip().lower()


class CodedEventRecord(SourceRecord):
    """A procedure or diagnosis code; ``event_date`` is absent for discharge-assigned diagnoses."""

    subject_id: str
    hadm_id: Optional[str] = None
    stay_id: Optional[str] = None
    icd_code: str
    icd_version: int
    event_date: OptionalTimestamp = None

    @field_validator("icd_code")
    @classmethod
    def _code(cls, value: str) -> str:
        code = value.replace(".", "").strip().upper()
        if not code:
            raise ValueError("icd_code must be non-empty")
        return code

    @field_validator("icd_version", mode="before")
    @classmethod
    def _version(cls, value):
        version = int(float(value))
        if version not in (9, 10):
            raise ValueError(f"icd_version {value} must be 9 or 10")
        return version


class AdmissionRecord(SourceRecord):
    subject_id: str
    hadm_id: str
    admittime: Timestamp
    dischtime: Timestamp
    dod: OptionalTimestamp = None

    @model_validator(mode="after")
    def _ordered(self):
        if not self.admittime < self.dischtime:
            raise ValueError("admittime must precede dischtime")
        return self


class IcuStayRecord(SourceRecord):
    subject_id: str
    hadm_id: str
    stay_id: str
    intime: Timestamp
    outtime: Timestamp

    @model_validator(mode="after")
    def _ordered(self):
        if not self.intime <= self.outtime:
            raise ValueError("ICU intime must not follow outtime")
        return self


class BiometricRecord(SourceRecord):
    """Online medical record entry (height, weight or BMI)."""

    subject_id: str
    charttime: Timestamp
    result_name: str
    value: Optional[float] = None
    unit: str = ""

    @field_validator("result_name")
    @classmethod
    def _name(cls, value: str) -> str:
        return value.strip().lower()

    @field_validator("unit", mode="before")
    @classmethod
    def _unit(cls, value):
        return "" if value is None else str(value).strip()


class EcgManifestRecord(SourceRecord):
    record_id: str
    subject_id: str
    ecg_time: Timestamp
    signal_path: str
    sidecar_path: str


class OutcomeRecord(BaseModel):
    """Admission outcome assembled from the admissions and ICU-stay tables."""

    model_config = ConfigDict(frozen=True)

    subject_id: str
    hadm_id: str
    admittime: int
    dischtime: int
    dod: Optional[int] = None
    icu_intervals: Tuple[Tuple[int, int], ...] = ()

    @model_validator(mode="after")
    def _ordered(self):
        if not self.admittime < self.dischtime:
            raise ValueError("admittime must precede dischtime")
        for start, end in self.icu_intervals:
            if start > end:
                raise ValueError("ICU interval is not well-ordered")
        return self


@dataclass(eq=False)
class WaveformRecord:
    """A 10 s, 12-lead ECG in physical units plus its machine measurements."""

    record_id: str
    subject_id: str
    ecg_time: int
    sampling_rate: int
    samples: np.ndarray
    machine_features: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 2 or self.samples.shape[0] != N_LEADS:
            raise WaveformFormatError(f"record {self.record_id}: expected {N_LEADS} leads, got shape {self.samples.shape}")
        expected = self.sampling_rate * RECORD_SECONDS
        if self.samples.shape[1] != expected:
            raise WaveformFormatError(
                f"record {self.record_id}: expected {expected} samples per lead, got {self.samples.shape[1]}"
            )
        unknown = set(self.machine_features) - set(MACHINE_FEATURES)
        if unknown:
            raise WaveformFormatError(f"record {self.record_id}: unknown machine features {sorted(unknown)}")

    @property
    def leads(self) -> int:
        return self.samples.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, WaveformRecord):
            return NotImplemented
        return (
            self.record_id == other.record_id
            and self.subject_id == other.subject_id
            and self.ecg_time == other.ecg_time
            and self.sampling_rate == other.sampling_rate
            and self.machine_features == other.machine_features
            and np.array_equal(self.samples, other.samples)
        )


def outcome_records(admissions: List[AdmissionRecord], icustays: List[IcuStayRecord]) -> List[OutcomeRecord]:
    """Join admissions with their ICU intervals."""
    intervals: Dict[str, List[Tuple[int, int]]] = {}
    for icu in icustays:
        intervals.setdefault(icu.hadm_id, []).append((icu.intime, icu.outtime))
    return [
        OutcomeRecord(
            subject_id=adm.subject_id,
            hadm_id=adm.hadm_id,
            admittime=adm.admittime,
            dischtime=adm.dischtime,
            dod=adm.dod,
            icu_intervals=tuple(sorted(intervals.get(adm.hadm_id, []))),
        )
        for adm in admissions
    ]

"""
The 15 deterioration targets.

Events inside the feature window (at or before ``window_end``) turn a time-resolved target
into MASKED; date-granular coded events are never masked.
"""

import json
import logging
import re
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, field_validator, model_validator

from ..cohort.samples import Sample
from ..errors import DataError
from ..ingest.records import (
    SECONDS_PER_DAY,
    SECONDS_PER_HOUR,
    CodedEventRecord,
    EventRecord,
    MedicationRecord,
    OutcomeRecord,
    day_of,
)
from ..ingest.registry import VariableRegistry
from ..ingest.tables import SourceTables
from .codes import clean_code
from .space import LABEL_DTYPE, MASKED, LabelMatrix, LabelSpace

logger = logging.getLogger(__name__)

N_TARGETS = 15
DEFAULT_SPEC = "deterioration.json"
CATEGORIES = ("clinical_deterioration", "icu_admission", "mortality")


class DeteriorationTarget(BaseModel):
    name: str
    category: Literal["clinical_deterioration", "icu_admission", "mortality"]
    kind: Literal["vital_threshold", "coded_event", "medication", "icu", "mortality"]
    source: str
    horizon_hours: Optional[float] = None
    horizon_days: Optional[int] = None
    until: Optional[Literal["discharge"]] = None
    codes: List[str] = []
    drugs: List[str] = []
    variable: Optional[str] = None
    threshold: Optional[float] = None

    @field_validator("horizon_hours", "horizon_days")
    @classmethod
    def _positive(cls, value):
        if value is not None and value <= 0:
            raise ValueError("horizons must be positive")
        return value

    @field_validator("codes")
    @classmethod
    def _clean(cls, value: List[str]) -> List[str]:
        return [clean_code(code) for code in value]

    @field_validator("drugs")
    @classmethod
    def _lower(cls, value: List[str]) -> List[str]:
        return [drug.strip().lower() for drug in value]

    @model_validator(mode="after")
    def _one_horizon(self):
        given = [v for v in (self.horizon_hours, self.horizon_days, self.until) if v is not None]
        if len(given) != 1:
            raise ValueError(f"target {self.name}: exactly one of horizon_hours, horizon_days, until required")
        if self.kind == "coded_event" and (not self.codes or self.horizon_days is None):
            raise ValueError(f"target {self.name}: coded events need codes and horizon_days")
        if self.kind == "medication" and not self.drugs:
            raise ValueError(f"target {self.name}: medication targets need drugs")
        if self.kind == "vital_threshold" and (self.variable is None or self.threshold is None):
            raise ValueError(f"target {self.name}: vital thresholds need variable and threshold")
        return self

    @property
    def horizon_seconds(self) -> Optional[int]:
        if self.horizon_hours is not None:
            return int(round(self.horizon_hours * SECONDS_PER_HOUR))
        if self.horizon_days is not None:
            return self.horizon_days * SECONDS_PER_DAY
        return None


class DeteriorationSpec(BaseModel):
    targets: List[DeteriorationTarget]

    @model_validator(mode="after")
    def _check(self):
        if len(self.targets) != N_TARGETS:
            raise ValueError(f"expected {N_TARGETS} deterioration targets, got {len(self.targets)}")
        names = [t.name for t in self.targets]
        if len(set(names)) != len(names):
            raise ValueError("deterioration target names must be unique")
        return self

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(t.name for t in self.targets)

    def of_kind(self, kind: str) -> List[DeteriorationTarget]:
        return [t for t in self.targets if t.kind == kind]

    def label_space(self) -> LabelSpace:
        return LabelSpace(task="deterioration", labels=self.names, groups=tuple((t.name, t.category) for t in self.targets))


def load_deterioration_spec(path: Optional[Path] = None) -> DeteriorationSpec:
    """
    Load the target definitions (drug lists, code lists, horizons).

    Args:
        path (Path, optional): Spec JSON; the packaged definitions when omitted

    Returns:
        DeteriorationSpec: Validated targets
    """
    if path is None:
        raw = resources.files("edbench.data").joinpath(DEFAULT_SPEC).read_text(encoding="utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    return DeteriorationSpec(targets=json.loads(raw)["targets"])


def _window_label(sample: Sample, event_times: Iterable[int], end: int) -> int:
    times = list(event_times)
    if any(t <= sample.window_end for t in times):
        return MASKED
    if any(sample.window_end < t <= end for t in times):
        return 1
    return 0


def hypoxemia_label(
    sample: Sample, readings: Iterable[Tuple[int, Optional[float]]], threshold: float = 85.0, horizon_hours: float = 24
) -> int:
    """
    Severe hypoxemia: an SpO2 reading at or below ``threshold`` after the window, within the horizon.

    Args:
        sample (Sample): The sample
        readings (Iterable[Tuple[int, float]]): Outlier-filtered ``(charttime, spo2)`` pairs of the stay
        threshold (float): SpO2 threshold in percent
        horizon_hours (float): Horizon counted from arrival

    Returns:
        int: 1, 0 or MASKED
    """
    times = [t for t, value in readings if value is not None and value <= threshold]
    return _window_label(sample, times, sample.arrival + int(horizon_hours * SECONDS_PER_HOUR))


def _drug_pattern(drug: str) -> "re.Pattern":
    # letters may not continue the name on either side, so "epinephrine" does not match "norepinephrine"
    return re.compile(rf"(?<![a-z]){re.escape(drug)}(?![a-z])")


def medication_labels(
    sample: Sample, medications: Iterable[MedicationRecord], targets: Sequence[DeteriorationTarget]
) -> Dict[str, int]:
    """
    Vasopressor / inotrope style targets from medication administrations of the stay.

    Args:
        sample (Sample): The sample
        medications (Iterable[MedicationRecord]): Administrations with lowercase names
        targets (Sequence[DeteriorationTarget]): Medication targets

    Returns:
        Dict[str, int]: Target name -> 1, 0 or MASKED
    """
    medications = list(medications)
    labels = {}
    for target in targets:
        patterns = [_drug_pattern(drug) for drug in target.drugs]
        times = [m.charttime for m in medications if any(p.search(m.name.lower()) for p in patterns)]
        labels[target.name] = _window_label(sample, times, sample.arrival + target.horizon_seconds)
    return labels


def icu_labels(
    sample: Sample, outcome: Optional[OutcomeRecord], targets: Sequence[DeteriorationTarget]
) -> Dict[str, int]:
    """
    ICU admission within a horizon or until discharge of the linked admission.

    Args:
        sample (Sample): The sample
        outcome (OutcomeRecord, optional): Linked admission with its ICU intervals
        targets (Sequence[DeteriorationTarget]): ICU targets

    Returns:
        Dict[str, int]: Target name -> 1, 0 or MASKED
    """
    if outcome is None:
        return {target.name: 0 for target in targets}
    intimes = [start for start, _ in outcome.icu_intervals]
    labels = {}
    for target in targets:
        end = outcome.dischtime if target.until == "discharge" else sample.arrival + target.horizon_seconds
        labels[target.name] = _window_label(sample, intimes, end)
    return labels


def coded_event_labels(
    sample: Sample,
    procedures: Iterable[CodedEventRecord],
    diagnoses: Iterable[CodedEventRecord],
    targets: Sequence[DeteriorationTarget],
    admittime: Optional[int] = None,
) -> Dict[str, int]:
    """
    Date-granular coded events: 1 when a listed code is dated within ``horizon_days`` calendar days
    of arrival (the same day counts as day 0). Never MASKED.

    Records without an event date are dated at ``admittime`` when it is known, otherwise at
    arrival; ED diagnoses of the sample's own stay are dated at arrival.

    Args:
        sample (Sample): The sample
        procedures (Iterable[CodedEventRecord]): Procedures of the linked admission
        diagnoses (Iterable[CodedEventRecord]): ED and hospital diagnoses of the sample
        targets (Sequence[DeteriorationTarget]): Coded-event targets
        admittime (int, optional): Admission time of the linked admission

    Returns:
        Dict[str, int]: Target name -> 1 or 0
    """
    sources = {"procedures": list(procedures), "diagnoses": list(diagnoses)}
    arrival_day = day_of(sample.arrival)
    labels = {}
    for target in targets:
        codes = set(target.codes)
        label = 0
        for record in sources.get(target.source, []):
            if record.icd_code not in codes:
                continue
            if record.event_date is not None:
                when = record.event_date
            elif record.stay_id == sample.stay_id or admittime is None:
                when = sample.arrival
            else:
                when = admittime
            if 0 <= day_of(when) - arrival_day <= target.horizon_days:
                label = 1
                break
        labels[target.name] = label
    return labels


def mortality_labels(
    sample: Sample,
    outcome: Optional[OutcomeRecord],
    targets: Sequence[DeteriorationTarget],
    dod: Optional[int] = None,
) -> Dict[str, int]:
    """
    Mortality at fixed horizons and before discharge of the linked admission. Never MASKED.

    A date of death is placed at the later of its midnight and the arrival time.

    Args:
        sample (Sample): The sample
        outcome (OutcomeRecord, optional): Linked admission
        targets (Sequence[DeteriorationTarget]): Mortality targets
        dod (int, optional): Date of death of the patient; ``outcome.dod`` when omitted

    Returns:
        Dict[str, int]: Target name -> 1 or 0
    """
    if dod is None and outcome is not None:
        dod = outcome.dod
    if dod is None:
        return {target.name: 0 for target in targets}
    if day_of(dod) < day_of(sample.arrival):
        raise DataError(f"subject {sample.subject_id}: date of death precedes ED arrival of stay {sample.stay_id}")
    death = max(dod, sample.arrival)
    labels = {}
    for target in targets:
        if target.until == "discharge":
            labels[target.name] = int(outcome is not None and day_of(dod) <= day_of(outcome.dischtime))
        else:
            labels[target.name] = int(death - sample.arrival <= target.horizon_seconds)
    return labels


def _group(records, key: str) -> Dict[str, list]:
    index: Dict[str, list] = {}
    for record in records:
        value = getattr(record, key)
        if value is not None:
            index.setdefault(value, []).append(record)
    return index


def subject_dates_of_death(sources: SourceTables) -> Dict[str, int]:
    dates: Dict[str, int] = {}
    for admission in sources.admissions:
        if admission.dod is None:
            continue
        known = dates.setdefault(admission.subject_id, admission.dod)
        if known != admission.dod:
            raise DataError(f"subject {admission.subject_id} has conflicting dates of death")
    return dates


def _spo2_readings(events: List[EventRecord], variable: str, registry: VariableRegistry) -> List[Tuple[int, float]]:
    rule = registry.outlier_rules().get(variable)
    return [
        (e.charttime, e.value)
        for e in events
        if e.variable_id == variable and e.value is not None and (rule is None or rule.admits(e.value))
    ]


def build_deterioration_matrix(
    samples: List[Sample],
    sources: SourceTables,
    spec: Optional[DeteriorationSpec] = None,
    registry: Optional[VariableRegistry] = None,
) -> LabelMatrix:
    """
    Deterioration labels for every sample, columns in spec order.

    Args:
        samples (List[Sample]): Cohort samples
        sources (SourceTables): Loaded source tables
        spec (DeteriorationSpec, optional): Target definitions; packaged ones by default
        registry (VariableRegistry, optional): Supplies the outlier rule of the vital-threshold variable

    Returns:
        LabelMatrix: Ternary labels
    """
    spec = spec or load_deterioration_spec()
    registry = registry or VariableRegistry.load()
    space = spec.label_space()

    vitals = _group(sources.vitals, "stay_id")
    meds = _group(sources.medications, "stay_id")
    procedures = _group(sources.procedures, "hadm_id")
    diag_hosp = _group(sources.diagnoses_hosp, "hadm_id")
    diag_ed = _group(sources.diagnoses_ed, "stay_id")
    outcomes = sources.outcome_by_hadm()
    deaths = subject_dates_of_death(sources)

    values = np.zeros((len(samples), len(space)), dtype=LABEL_DTYPE)
    for i, sample in enumerate(samples):
        outcome = outcomes.get(sample.hadm_id) if sample.hadm_id else None
        labels: Dict[str, int] = {}
        for target in spec.of_kind("vital_threshold"):
            readings = _spo2_readings(vitals.get(sample.stay_id, []), target.variable, registry)
            labels[target.name] = hypoxemia_label(sample, readings, target.threshold, target.horizon_hours)
        labels.update(medication_labels(sample, meds.get(sample.stay_id, []), spec.of_kind("medication")))
        labels.update(icu_labels(sample, outcome, spec.of_kind("icu")))
        labels.update(
            coded_event_labels(
                sample,
                procedures.get(sample.hadm_id, []) if sample.hadm_id else [],
                diag_ed.get(sample.stay_id, []) + (diag_hosp.get(sample.hadm_id, []) if sample.hadm_id else []),
                spec.of_kind("coded_event"),
                admittime=outcome.admittime if outcome else None,
            )
        )
        labels.update(mortality_labels(sample, outcome, spec.of_kind("mortality"), dod=deaths.get(sample.subject_id)))
        values[i] = [labels[name] for name in space.labels]

    masked = int((values == MASKED).sum())
    logger.info(f"Deterioration labels: {len(samples)} samples, {masked} masked entries")
    return LabelMatrix(space=space, sample_ids=[s.sample_id for s in samples], values=values)

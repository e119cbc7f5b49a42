"""
Sample index: one (patient, ED visit, ECG) unit per row.
"""

import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional

import pandas as pd

from ..ingest.records import (
    SECONDS_PER_MINUTE,
    EcgManifestRecord,
    StayRecord,
    format_timestamp,
    parse_timestamp,
)

logger = logging.getLogger(__name__)

WINDOW_MINUTES = 90
WINDOW_SECONDS = WINDOW_MINUTES * SECONDS_PER_MINUTE
MIN_AGE = 18

INDEX_COLUMNS = [
    "sample_id",
    "subject_id",
    "stay_id",
    "hadm_id",
    "record_id",
    "ecg_time",
    "arrival",
    "window_end",
    "is_first_of_visit",
    "gender",
    "race",
    "age",
    "acuity",
]
_TIME_COLUMNS = ("ecg_time", "arrival", "window_end")


@dataclass(frozen=True)
class Sample:
    sample_id: int
    subject_id: str
    stay_id: str
    hadm_id: Optional[str]
    record_id: str
    ecg_time: int
    arrival: int
    window_end: int
    is_first_of_visit: bool
    gender: str = ""
    race: str = ""
    age: int = 0
    acuity: Optional[int] = None

    def minutes_from_arrival(self, timestamp: int) -> float:
        return (timestamp - self.arrival) / SECONDS_PER_MINUTE


def link_ecg_to_stays(stays: Iterable[StayRecord], ecgs: Iterable[EcgManifestRecord]) -> List[Sample]:
    """
    Pair every ECG with the adult ED stay whose first 90 minutes contain it.

    The window is inclusive on both ends. An ECG inside the window of several stays goes to the
    stay with the earliest intime.

    Args:
        stays (Iterable[StayRecord]): ED stays
        ecgs (Iterable[EcgManifestRecord]): ECG manifest entries

    Returns:
        List[Sample]: Samples ordered by arrival, subject, stay and ECG time; ``sample_id`` is the position
    """
    by_subject: Dict[str, List[StayRecord]] = {}
    for stay in stays:
        if stay.age >= MIN_AGE:
            by_subject.setdefault(stay.subject_id, []).append(stay)
    for subject_stays in by_subject.values():
        subject_stays.sort(key=lambda s: (s.intime, s.stay_id))

    pairs = []
    for ecg in ecgs:
        matches = [
            stay
            for stay in by_subject.get(ecg.subject_id, [])
            if stay.intime <= ecg.ecg_time <= stay.intime + WINDOW_SECONDS
        ]
        if not matches:
            continue
        if len(matches) > 1:
            logger.warning(
                f"ECG {ecg.record_id} falls into {len(matches)} stays "
                f"({', '.join(s.stay_id for s in matches)}); assigned to {matches[0].stay_id}"
            )
        pairs.append((matches[0], ecg))

    pairs.sort(key=lambda p: (p[0].intime, p[0].subject_id, p[0].stay_id, p[1].ecg_time, p[1].record_id))
    first_seen = set()
    samples = []
    for sample_id, (stay, ecg) in enumerate(pairs):
        # pairs are time-ordered within a stay, so the first one seen is the earliest ECG
        is_first = stay.stay_id not in first_seen
        first_seen.add(stay.stay_id)
        samples.append(
            Sample(
                sample_id=sample_id,
                subject_id=stay.subject_id,
                stay_id=stay.stay_id,
                hadm_id=stay.hadm_id,
                record_id=ecg.record_id,
                ecg_time=ecg.ecg_time,
                arrival=stay.intime,
                window_end=stay.intime + WINDOW_SECONDS,
                is_first_of_visit=is_first,
                gender=stay.gender,
                race=stay.race,
                age=stay.age,
                acuity=stay.acuity,
            )
        )
    logger.info(f"Linked {len(samples)} ECGs to {len(first_seen)} ED visits")
    return samples


def samples_frame(samples: Iterable[Sample]) -> pd.DataFrame:
    return pd.DataFrame([asdict(s) for s in samples], columns=INDEX_COLUMNS)


def write_sample_index(samples: Iterable[Sample], path: Path, folds: Optional[Mapping[str, int]] = None) -> Path:
    """
    Persist the sample index as CSV, optionally with each sample's fold.

    Args:
        samples (Iterable[Sample]): Samples to write
        path (Path): Destination CSV
        folds (Mapping[str, int], optional): subject_id -> fold

    Returns:
        Path: The written file
    """
    frame = samples_frame(samples)
    for column in _TIME_COLUMNS:
        frame[column] = frame[column].map(format_timestamp)
    frame["is_first_of_visit"] = frame["is_first_of_visit"].astype(int)
    frame["acuity"] = frame["acuity"].astype("Int64")
    if folds is not None:
        frame["fold"] = frame["subject_id"].map(folds).astype("Int64")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def read_sample_index(path: Path) -> List[Sample]:
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    samples = []
    for row in frame.to_dict(orient="records"):
        samples.append(
            Sample(
                sample_id=int(row["sample_id"]),
                subject_id=row["subject_id"],
                stay_id=row["stay_id"],
                hadm_id=row["hadm_id"] or None,
                record_id=row["record_id"],
                ecg_time=parse_timestamp(row["ecg_time"]),
                arrival=parse_timestamp(row["arrival"]),
                window_end=parse_timestamp(row["window_end"]),
                is_first_of_visit=row["is_first_of_visit"] == "1",
                gender=row["gender"],
                race=row["race"],
                age=int(row["age"]),
                acuity=int(row["acuity"]) if row["acuity"] else None,
            )
        )
    return samples


def read_fold_column(path: Path) -> Dict[str, int]:
    """subject_id -> fold from a sample index written with folds."""
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    if "fold" not in frame.columns:
        return {}
    return {row["subject_id"]: int(row["fold"]) for row in frame.to_dict(orient="records") if row["fold"]}

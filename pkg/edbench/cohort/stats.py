from dataclasses import dataclass, field
from typing import Dict, Iterable, List

import numpy as np
import pandas as pd

from ..errors import EmptyCohortError
from .samples import Sample, samples_frame

AGE_BINS = (("18-49", 18, 49), ("50-64", 50, 64), ("65-77", 65, 77), ("78+", 78, None))
RACE_GROUPS = ("White", "Black", "Hispanic", "Asian", "Other")


def age_bin(age: int) -> str:
    for name, lower, upper in AGE_BINS:
        if age >= lower and (upper is None or age <= upper):
            return name
    return "under-18"


def group_race(race: str) -> str:
    """Collapse a free-text race/ethnicity value into one of ``RACE_GROUPS``."""
    text = (race or "").strip().upper()
    if text.startswith("WHITE"):
        return "White"
    if text.startswith("BLACK"):
        return "Black"
    if text.startswith("HISPANIC") or "LATINO" in text:
        return "Hispanic"
    if text.startswith("ASIAN"):
        return "Asian"
    return "Other"


@dataclass
class CohortStats:
    patients: int
    visits: int
    samples: int
    gender: Dict[str, float] = field(default_factory=dict)
    age_bins: Dict[str, float] = field(default_factory=dict)
    age_median: float = float("nan")
    age_sd: float = float("nan")
    race: Dict[str, float] = field(default_factory=dict)


def _percentages(values: pd.Series, order: Iterable[str]) -> Dict[str, float]:
    counts = values.value_counts()
    total = len(values)
    return {name: round(100.0 * counts.get(name, 0) / total, 2) for name in order}


def cohort_stats(samples: List[Sample]) -> CohortStats:
    """
    Count patients, visits and samples and break the samples down by demographics.

    Percentages are over samples. The age standard deviation is the population one.

    Args:
        samples (List[Sample]): Cohort samples

    Returns:
        CohortStats: Counts and percentage tables
    """
    if not samples:
        raise EmptyCohortError()
    frame = samples_frame(samples)
    genders = sorted(frame["gender"].unique())
    ages = frame["age"].to_numpy(dtype=float)
    return CohortStats(
        patients=frame["subject_id"].nunique(),
        visits=frame["stay_id"].nunique(),
        samples=len(frame),
        gender=_percentages(frame["gender"], genders),
        age_bins=_percentages(frame["age"].map(age_bin), [name for name, _, _ in AGE_BINS]),
        age_median=float(np.median(ages)),
        age_sd=float(np.std(ages)),
        race=_percentages(frame["race"].map(group_race), RACE_GROUPS),
    )


def format_cohort_stats(stats: CohortStats) -> str:
    lines = ["=" * 40, "Cohort", "=" * 40]
    lines.append(f"{'Patients':<20} {stats.patients:>10}")
    lines.append(f"{'Visits':<20} {stats.visits:>10}")
    lines.append(f"{'Samples':<20} {stats.samples:>10}")
    lines.append(f"{'Age median (sd)':<20} {stats.age_median:>6.1f} ({stats.age_sd:.1f})")
    for title, table in (("Gender", stats.gender), ("Age", stats.age_bins), ("Race", stats.race)):
        lines.append("-" * 40)
        lines.append(title)
        for name, pct in table.items():
            lines.append(f"  {name:<18} {pct:>9.2f}%")
    return "\n".join(lines)

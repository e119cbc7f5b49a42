from .samples import (
    MIN_AGE,
    WINDOW_MINUTES,
    WINDOW_SECONDS,
    Sample,
    link_ecg_to_stays,
    read_fold_column,
    read_sample_index,
    samples_frame,
    write_sample_index,
)
from .stats import AGE_BINS, RACE_GROUPS, CohortStats, age_bin, cohort_stats, format_cohort_stats, group_race

__all__ = [
    "MIN_AGE",
    "WINDOW_MINUTES",
    "WINDOW_SECONDS",
    "Sample",
    "link_ecg_to_stays",
    "read_fold_column",
    "read_sample_index",
    "samples_frame",
    "write_sample_index",
    "AGE_BINS",
    "RACE_GROUPS",
    "CohortStats",
    "age_bin",
    "cohort_stats",
    "format_cohort_stats",
    "group_race",
]

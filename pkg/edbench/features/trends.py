"""
Trend statistics of irregularly sampled series inside the feature window.

Times are minutes from arrival; rates and slopes are per minute.
"""

from dataclasses import asdict, dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

STATS = ("mean", "median", "min", "max", "std", "first", "last", "rate_of_change", "slope")


@dataclass(frozen=True)
class TrendAggregate:
    mean: Optional[float] = None
    median: Optional[float] = None
    min: Optional[float] = None
    max: Optional[float] = None
    std: Optional[float] = None
    first: Optional[float] = None
    last: Optional[float] = None
    rate_of_change: Optional[float] = None
    slope: Optional[float] = None

    def as_dict(self) -> Dict[str, Optional[float]]:
        return asdict(self)

    def as_array(self) -> np.ndarray:
        return np.array([np.nan if v is None else v for v in asdict(self).values()], dtype=np.float64)


def aggregate_trends(series: Sequence[Tuple[float, float]]) -> TrendAggregate:
    """
    Summarize a time-sorted series of ``(minutes_from_arrival, value)`` pairs.

    Args:
        series (Sequence[Tuple[float, float]]): Non-missing observations sorted by time

    Returns:
        TrendAggregate: The nine statistics; all missing for an empty series, rate and slope
        missing with fewer than two points or a zero time span
    """
    if len(series) == 0:
        return TrendAggregate()
    times = np.array([t for t, _ in series], dtype=np.float64)
    values = np.array([v for _, v in series], dtype=np.float64)

    rate = slope = None
    span = times[-1] - times[0]
    if len(values) >= 2 and span != 0:
        rate = float((values[-1] - values[0]) / span)
        centered = times - times.mean()
        denominator = float(np.dot(centered, centered))
        if denominator > 0:
            slope = float(np.dot(centered, values - values.mean()) / denominator)

    return TrendAggregate(
        mean=float(values.mean()),
        median=float(np.median(values)),
        min=float(values.min()),
        max=float(values.max()),
        std=float(values.std()),
        first=float(values[0]),
        last=float(values[-1]),
        rate_of_change=rate,
        slope=slope,
    )


def aggregate_trend_frame(events: pd.DataFrame, keys: Sequence[str] = ("sample_id", "variable_id")) -> pd.DataFrame:
    """
    ``aggregate_trends`` for every group of a long frame at once.

    Args:
        events (pd.DataFrame): Columns ``keys`` + ``minutes`` + ``value``; NaN values are ignored
        keys (Sequence[str]): Group columns

    Returns:
        pd.DataFrame: One row per group, indexed by ``keys``, one column per statistic
    """
    keys = list(keys)
    frame = events.loc[events["value"].notna(), keys + ["minutes", "value"]]
    if frame.empty:
        return pd.DataFrame(columns=list(STATS), index=pd.MultiIndex.from_tuples([], names=keys), dtype=float)
    frame = frame.sort_values(keys + ["minutes"], kind="mergesort")
    grouped = frame.groupby(keys, sort=True)

    stats = grouped["value"].agg(["mean", "median", "min", "max", "first", "last", "count"])
    stats["std"] = grouped["value"].std(ddof=0)
    t_first = grouped["minutes"].first()
    t_last = grouped["minutes"].last()
    span = t_last - t_first
    with np.errstate(divide="ignore", invalid="ignore"):
        stats["rate_of_change"] = ((stats["last"] - stats["first"]) / span).where((stats["count"] >= 2) & (span != 0))

    centered_t = frame["minutes"] - grouped["minutes"].transform("mean")
    centered_v = frame["value"] - grouped["value"].transform("mean")
    group_keys = [frame[k] for k in keys]
    covariance = (centered_t * centered_v).groupby(group_keys).sum()
    variance = (centered_t * centered_t).groupby(group_keys).sum()
    with np.errstate(divide="ignore", invalid="ignore"):
        stats["slope"] = (covariance / variance).where((stats["count"] >= 2) & (variance > 0))
    return stats[list(STATS)].astype(float)

"""
Assembly of the per-sample feature vector and of the whole feature matrix.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from ..cohort.samples import Sample, samples_frame
from ..errors import AssemblyError
from ..ingest.records import SECONDS_PER_MINUTE, EventRecord
from ..ingest.registry import VariableRegistry
from ..ingest.tables import SourceTables
from ..ingest.waveforms import WaveformStore
from .biometrics import match_biometrics
from .categorical import categorical_value
from .ecg import extract_ecg_features
from .trends import STATS, aggregate_trend_frame, aggregate_trends
from .units import canonicalize_frame, convert_units, filter_outliers

logger = logging.getLogger(__name__)

MASK_SUFFIX = "_missing"


def mask_column(name: str) -> str:
    return f"{name}{MASK_SUFFIX}"


@dataclass
class FeatureVector:
    numeric: np.ndarray
    categorical: Dict[str, Optional[str]]
    ecg_features: np.ndarray
    missing_mask: np.ndarray


def _check_registry(registry: VariableRegistry) -> None:
    unknown = [stat for stat in registry.stats if stat not in STATS]
    if unknown:
        raise AssemblyError(f"registry requests statistics that are not computed: {unknown}")


def _window_events(sample: Sample, events: Iterable[EventRecord]) -> List[EventRecord]:
    return [e for e in events if sample.arrival <= e.charttime <= sample.window_end]


def assemble_features(
    sample: Sample,
    events: Iterable[EventRecord],
    biometrics: Iterable,
    ecg_meta: Mapping,
    registry: VariableRegistry,
) -> FeatureVector:
    """
    Build one sample's feature vector in registry order.

    Args:
        sample (Sample): The sample
        events (Iterable[EventRecord]): Vitals of the stay and labs of the patient; only those inside
            the feature window are used
        biometrics (Iterable): The patient's OMR records
        ecg_meta (Mapping): Sidecar of the sample's ECG
        registry (VariableRegistry): Column layout

    Returns:
        FeatureVector: Numeric values (NaN when missing), categorical strings, ECG block and mask
    """
    _check_registry(registry)
    rules = registry.outlier_rules()
    inside = filter_outliers(_window_events(sample, events), rules)
    series: Dict[str, list] = {}
    for event in sorted(inside, key=lambda e: e.charttime):
        event = convert_units(event, registry)
        if event.value is not None:
            series.setdefault(event.variable_id, []).append((sample.minutes_from_arrival(event.charttime), event.value))

    values: Dict[str, Optional[float]] = {"age": float(sample.age)}
    values.update(match_biometrics(sample, biometrics, registry))
    for spec in registry.vitals + registry.labs:
        trend = aggregate_trends(series.get(spec.name, [])).as_dict()
        for stat in registry.stats:
            values[f"{spec.name}_{stat}"] = trend[stat]

    columns = registry.numeric_columns()
    missing = [c for c in columns if c not in values]
    if missing:
        raise AssemblyError(f"features missing for registry columns: {missing}")
    numeric = np.array([np.nan if values[c] is None else values[c] for c in columns], dtype=np.float64)
    ecg = extract_ecg_features(ecg_meta)
    ecg_values = np.array([np.nan if ecg[n] is None else ecg[n] for n in registry.ecg], dtype=np.float64)
    return FeatureVector(
        numeric=numeric,
        categorical={
            "gender": categorical_value("gender", sample.gender),
            "race": categorical_value("race", sample.race),
            "acuity": categorical_value("acuity", sample.acuity),
        },
        ecg_features=ecg_values,
        missing_mask=np.isnan(np.concatenate([numeric, ecg_values])),
    )


@dataclass
class FeatureMatrix:
    """Feature frames of all samples, indexed by sample_id."""

    numeric: pd.DataFrame
    categorical: pd.DataFrame
    ecg: pd.DataFrame
    registry_hash: str = ""
    meta: Dict[str, str] = field(default_factory=dict)

    @property
    def sample_ids(self) -> np.ndarray:
        return self.numeric.index.to_numpy()

    def subset(self, sample_ids: Sequence[int]) -> "FeatureMatrix":
        ids = list(sample_ids)
        return FeatureMatrix(
            numeric=self.numeric.loc[ids],
            categorical=self.categorical.loc[ids],
            ecg=self.ecg.loc[ids],
            registry_hash=self.registry_hash,
            meta=dict(self.meta),
        )

    def header(self) -> dict:
        columns = [{"name": c, "group": "numeric", "mask": mask_column(c)} for c in self.numeric.columns]
        columns += [{"name": c, "group": "ecg", "mask": mask_column(c)} for c in self.ecg.columns]
        columns += [{"name": c, "group": "categorical", "mask": None} for c in self.categorical.columns]
        return {"registry_hash": self.registry_hash, "columns": columns}


def _event_frame(records: List[EventRecord], key: str) -> pd.DataFrame:
    return pd.DataFrame(
        [(getattr(r, key), r.variable_id, r.charttime, r.value, r.unit) for r in records],
        columns=[key, "variable_id", "charttime", "value", "unit"],
    )


def build_feature_matrix(
    samples: List[Sample],
    sources: SourceTables,
    registry: Optional[VariableRegistry] = None,
    store: Optional[WaveformStore] = None,
) -> FeatureMatrix:
    """
    Feature matrix of all samples; agrees row by row with ``assemble_features``.

    Args:
        samples (List[Sample]): Cohort samples
        sources (SourceTables): Loaded source tables
        registry (VariableRegistry, optional): Column layout; the packaged registry by default
        store (WaveformStore, optional): Source of ECG sidecars; ECG features are missing without it

    Returns:
        FeatureMatrix: Numeric, categorical and ECG frames
    """
    registry = registry or VariableRegistry.load()
    _check_registry(registry)
    index = samples_frame(samples)
    sample_ids = index["sample_id"].to_numpy()
    windows = index[["sample_id", "subject_id", "stay_id", "arrival", "window_end"]]

    vitals = _event_frame(sources.vitals, "stay_id").merge(windows, on="stay_id", how="inner")
    labs = _event_frame(sources.labs, "subject_id").merge(windows, on="subject_id", how="inner")
    events = pd.concat([vitals, labs], ignore_index=True)
    events = events[(events["charttime"] >= events["arrival"]) & (events["charttime"] <= events["window_end"])]
    events = canonicalize_frame(events.reset_index(drop=True), registry)
    events["minutes"] = (events["charttime"] - events["arrival"]) / SECONDS_PER_MINUTE
    trends = aggregate_trend_frame(events)

    numeric = pd.DataFrame(np.nan, index=pd.Index(sample_ids, name="sample_id"), columns=registry.numeric_columns())
    numeric["age"] = index["age"].astype(float).to_numpy()
    if not trends.empty:
        wide = trends[list(registry.stats)].unstack("variable_id")
        wide.columns = [f"{variable}_{stat}" for stat, variable in wide.columns]
        wide = wide[[c for c in wide.columns if c in numeric.columns]]
        numeric.loc[wide.index, wide.columns] = wide

    by_subject: Dict[str, list] = {}
    for record in sources.biometrics:
        by_subject.setdefault(record.subject_id, []).append(record)
    for sample in samples:
        if sample.subject_id not in by_subject:
            continue
        for name, value in match_biometrics(sample, by_subject[sample.subject_id], registry).items():
            if value is not None:
                numeric.at[sample.sample_id, name] = value

    ecg_rows = []
    for sample in samples:
        meta = store.read_sidecar(sample.record_id) if store is not None and sample.record_id in store else {}
        ecg_rows.append(extract_ecg_features(meta))
    ecg = pd.DataFrame(ecg_rows, index=numeric.index).reindex(columns=registry.ecg).astype(float)
    ecg.columns = registry.ecg_columns()

    categorical = pd.DataFrame(
        {
            "gender": [categorical_value("gender", s.gender) for s in samples],
            "race": [categorical_value("race", s.race) for s in samples],
            "acuity": [categorical_value("acuity", s.acuity) for s in samples],
        },
        index=numeric.index,
    )
    logger.info(
        f"Feature matrix: {len(samples)} samples, {numeric.shape[1]} clinical-routine + {ecg.shape[1]} ECG columns, "
        f"{float(numeric.isna().to_numpy().mean()):.1%} missing"
    )
    return FeatureMatrix(numeric=numeric, categorical=categorical, ecg=ecg, registry_hash=registry.hash)


def write_feature_matrix(matrix: FeatureMatrix, path: Path) -> Path:
    """
    Write ``features.csv`` plus a JSON header naming every column and its mask column.

    Args:
        matrix (FeatureMatrix): Matrix to write
        path (Path): Destination CSV; the header goes next to it with a ``.json`` suffix

    Returns:
        Path: The CSV file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.concat([matrix.numeric, matrix.ecg, matrix.categorical], axis=1)
    frame.to_csv(path, index=True, lineterminator="\n")
    with open(path.with_suffix(".json"), "w", encoding="utf-8") as handle:
        json.dump(matrix.header(), handle, indent=2)
    return path


def read_feature_matrix(path: Path) -> FeatureMatrix:
    path = Path(path)
    with open(path.with_suffix(".json"), "r", encoding="utf-8") as handle:
        header = json.load(handle)
    groups: Dict[str, List[str]] = {"numeric": [], "ecg": [], "categorical": []}
    for column in header["columns"]:
        groups[column["group"]].append(column["name"])
    dtypes = {c: str for c in groups["categorical"]}
    frame = pd.read_csv(path, index_col="sample_id", dtype=dtypes, keep_default_na=True)
    categorical = frame[groups["categorical"]].astype(object)
    categorical = categorical.where(categorical.notna(), None)
    return FeatureMatrix(
        numeric=frame[groups["numeric"]].astype(float),
        categorical=categorical,
        ecg=frame[groups["ecg"]].astype(float),
        registry_hash=header.get("registry_hash", ""),
    )

"""
Model inputs: tabular, categorical and waveform arrays aligned with a label matrix.

Every statistic used to transform inputs (imputation medians, z-score moments,
category indices, per-lead waveform moments) is fitted on the training split only.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..cohort.samples import Sample
from ..errors import ShapeError
from ..features.assemble import FeatureMatrix
from ..features.categorical import CategoryVocab
from ..ingest.records import N_LEADS
from ..ingest.waveforms import WaveformStore, resample_waveform
from ..labels.space import LabelMatrix
from ..splits.impute import MedianImputer
from .scenarios import ScenarioSpec

logger = logging.getLogger(__name__)

CATEGORICAL_FIELDS = ("gender", "race", "acuity")


@dataclass
class ModelInputs:
    """Row-aligned arrays for one split."""

    sample_ids: np.ndarray
    labels: np.ndarray
    first_of_visit: np.ndarray
    tabular: Optional[np.ndarray] = None
    categorical: Optional[np.ndarray] = None
    waveforms: Optional[np.ndarray] = None
    columns: List[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.sample_ids)

    def take(self, index) -> "ModelInputs":
        def pick(array):
            return None if array is None else array[index]

        return replace(
            self,
            sample_ids=self.sample_ids[index],
            labels=self.labels[index],
            first_of_visit=self.first_of_visit[index],
            tabular=pick(self.tabular),
            categorical=pick(self.categorical),
            waveforms=pick(self.waveforms),
        )

    def first_only(self) -> "ModelInputs":
        return self.take(np.flatnonzero(self.first_of_visit))


class WaveformNormalizer:
    """Per-lead z-score with moments of the training waveforms."""

    def __init__(self):
        self.mean: Optional[np.ndarray] = None
        self.std: Optional[np.ndarray] = None

    def fit(self, waveforms: np.ndarray) -> "WaveformNormalizer":
        waveforms = np.asarray(waveforms, dtype=np.float64)
        if waveforms.ndim != 3 or waveforms.shape[1] != N_LEADS:
            raise ShapeError(f"expected batch x {N_LEADS} x length waveforms, got {waveforms.shape}")
        self.mean = waveforms.mean(axis=(0, 2))
        std = waveforms.std(axis=(0, 2))
        self.std = np.where(std > 0, std, 1.0)
        return self

    def transform(self, waveforms: np.ndarray) -> np.ndarray:
        return ((waveforms - self.mean[None, :, None]) / self.std[None, :, None]).astype(np.float32)

    def to_dict(self) -> Dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, data: Dict) -> "WaveformNormalizer":
        normalizer = cls()
        normalizer.mean = np.asarray(data["mean"], dtype=np.float64)
        normalizer.std = np.asarray(data["std"], dtype=np.float64)
        return normalizer


def load_waveform_array(samples: Sequence[Sample], store: WaveformStore, target_rate: int) -> np.ndarray:
    """
    Load and resample the ECG of every sample.

    Args:
        samples (Sequence[Sample]): Samples in row order
        store (WaveformStore): Waveform store
        target_rate (int): Sampling rate the model consumes

    Returns:
        np.ndarray: samples x 12 x L float32 array
    """
    arrays = []
    for sample in samples:
        record = store.load(sample.record_id)
        arrays.append(resample_waveform(record.samples, record.sampling_rate, target_rate))
    lengths = {a.shape[1] for a in arrays}
    if len(lengths) > 1:
        raise ShapeError(f"waveforms of unequal length after resampling to {target_rate} Hz: {sorted(lengths)}")
    if not arrays:
        return np.zeros((0, N_LEADS, 0), dtype=np.float32)
    return np.stack(arrays).astype(np.float32)


class InputPreprocessor:
    """
    Turns feature frames and waveforms into model arrays for one scenario.

    Tree models see raw numeric values (NaN kept) plus category indices as extra columns,
    unless ``impute`` is set. Deep models always see imputed, z-scored values with separate
    category indices for the embedding tables.
    """

    def __init__(self, scenario: ScenarioSpec, mask_columns: bool = True, impute: Optional[bool] = None):
        self.scenario = scenario
        self.mask_columns = mask_columns
        self.impute = scenario.family == "deep" if impute is None else impute
        self.standardize = scenario.family == "deep"
        self.imputer: Optional[MedianImputer] = None
        self.mean: Optional[pd.Series] = None
        self.std: Optional[pd.Series] = None
        self.vocabs: Dict[str, CategoryVocab] = {}
        self.waveform_normalizer: Optional[WaveformNormalizer] = None

    def _raw_frame(self, features: FeatureMatrix) -> pd.DataFrame:
        parts = []
        if self.scenario.routine:
            parts.append(features.numeric)
        if self.scenario.ecg_features:
            parts.append(features.ecg)
        return pd.concat(parts, axis=1) if parts else pd.DataFrame(index=features.numeric.index)

    def _numeric_frame(self, features: FeatureMatrix) -> pd.DataFrame:
        frame = self._raw_frame(features).astype(float)
        if not self.impute:
            return frame
        filled, mask = self.imputer.transform(frame)
        return pd.concat([filled, mask], axis=1) if mask is not None else filled

    def fit(self, features: FeatureMatrix, waveforms: Optional[np.ndarray] = None) -> "InputPreprocessor":
        """
        Fit on the training split.

        Args:
            features (FeatureMatrix): Training rows
            waveforms (np.ndarray, optional): Training waveforms, needed for waveform scenarios

        Returns:
            InputPreprocessor: self
        """
        if self.scenario.uses_tabular:
            raw = self._raw_frame(features)
            if self.impute:
                self.imputer = MedianImputer(mask_columns=self.mask_columns).fit(raw)
            if self.standardize:
                frame = self._numeric_frame(features)
                self.mean = frame.mean(axis=0).fillna(0.0)
                std = frame.std(axis=0, ddof=0).fillna(0.0)
                self.std = std.where(std > 0, 1.0)
        if self.scenario.routine:
            self.vocabs = {f: CategoryVocab.fit(f, features.categorical[f]) for f in CATEGORICAL_FIELDS}
        if self.scenario.waveform:
            if waveforms is None:
                raise ShapeError(f"scenario {self.scenario.name} needs training waveforms")
            self.waveform_normalizer = WaveformNormalizer().fit(waveforms)
        return self

    def transform(
        self,
        samples: Sequence[Sample],
        features: Optional[FeatureMatrix],
        labels: LabelMatrix,
        waveforms: Optional[np.ndarray] = None,
    ) -> ModelInputs:
        """
        Build the arrays of one split.

        Args:
            samples (Sequence[Sample]): Rows of the split
            features (FeatureMatrix, optional): Feature matrix containing those rows
            labels (LabelMatrix): Label matrix containing those rows
            waveforms (np.ndarray, optional): Waveforms in ``samples`` order

        Returns:
            ModelInputs: Arrays in ``samples`` order
        """
        ids = np.array([s.sample_id for s in samples], dtype=np.int64)
        inputs = ModelInputs(
            sample_ids=ids,
            labels=labels.rows(ids),
            first_of_visit=np.array([s.is_first_of_visit for s in samples], dtype=bool),
        )
        if self.scenario.uses_tabular:
            rows = features.subset(ids)
            frame = self._numeric_frame(rows)
            if self.standardize:
                frame = (frame - self.mean) / self.std
            codes = {f: vocab.encode_many(rows.categorical[f]) for f, vocab in self.vocabs.items()}
            if self.scenario.family == "tree" and codes:
                frame = frame.assign(**{f"{f}_index": c.astype(float) for f, c in codes.items()})
            elif codes:
                inputs.categorical = np.column_stack([codes[f] for f in CATEGORICAL_FIELDS])
            inputs.tabular = frame.to_numpy(dtype=np.float32)
            inputs.columns = list(frame.columns)
        if self.scenario.waveform:
            if waveforms is None or len(waveforms) != len(ids):
                raise ShapeError(f"scenario {self.scenario.name} needs one waveform per sample")
            inputs.waveforms = self.waveform_normalizer.transform(waveforms)
        return inputs

    def state_dict(self) -> Dict:
        return {
            "scenario": self.scenario.name,
            "mask_columns": self.mask_columns,
            "impute": self.impute,
            "imputer": self.imputer.to_dict() if self.imputer is not None else None,
            "mean": self.mean.to_dict() if self.mean is not None else None,
            "std": self.std.to_dict() if self.std is not None else None,
            "vocabs": {f: v.to_dict() for f, v in self.vocabs.items()},
            "waveform": self.waveform_normalizer.to_dict() if self.waveform_normalizer is not None else None,
        }

    @classmethod
    def from_state(cls, scenario: ScenarioSpec, state: Dict) -> "InputPreprocessor":
        pre = cls(scenario, mask_columns=state["mask_columns"], impute=state["impute"])
        if state["imputer"] is not None:
            pre.imputer = MedianImputer.from_dict(state["imputer"])
        if state["mean"] is not None:
            pre.mean = pd.Series(state["mean"], dtype=float)
            pre.std = pd.Series(state["std"], dtype=float)
        pre.vocabs = {f: CategoryVocab.from_dict(v) for f, v in state["vocabs"].items()}
        if state["waveform"] is not None:
            pre.waveform_normalizer = WaveformNormalizer.from_dict(state["waveform"])
        return pre

    def vocab_sizes(self) -> List[int]:
        return [self.vocabs[f].size for f in CATEGORICAL_FIELDS] if self.vocabs else []

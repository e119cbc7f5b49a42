"""
Label spaces and ternary label matrices.

Entries are 0, 1 or ``MASKED``; a masked entry takes part in neither loss nor metrics.
"""

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from ..errors import DataError

MASKED = -1
LABEL_DTYPE = np.int8
_MASK_TOKEN = "M"


@dataclass(frozen=True)
class LabelSpace:
    task: str
    labels: Tuple[str, ...]
    groups: Tuple[Tuple[str, str], ...] = ()

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    @property
    def group_of(self) -> Dict[str, str]:
        return dict(self.groups)

    @property
    def hash(self) -> str:
        payload = json.dumps({"task": self.task, "labels": list(self.labels)}, sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    def to_json(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(
                {"task": self.task, "labels": list(self.labels), "groups": dict(self.groups), "hash": self.hash},
                handle,
                indent=2,
            )
        return path

    @classmethod
    def from_json(cls, path: Path) -> "LabelSpace":
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
        groups = data.get("groups", {})
        labels = tuple(data["labels"])
        return cls(task=data["task"], labels=labels, groups=tuple((k, groups[k]) for k in labels if k in groups))


@dataclass
class LabelVector:
    values: np.ndarray
    flags: Tuple[str, ...] = ()


@dataclass
class LabelMatrix:
    """Samples x labels ternary matrix aligned with a label space."""

    space: LabelSpace
    sample_ids: np.ndarray
    values: np.ndarray
    flags: Dict[int, Tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        self.sample_ids = np.asarray(self.sample_ids, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=LABEL_DTYPE)
        if self.values.shape != (len(self.sample_ids), len(self.space)):
            raise DataError(
                f"label matrix shape {self.values.shape} does not match "
                f"{len(self.sample_ids)} samples x {len(self.space)} labels"
            )

    def rows(self, sample_ids: Sequence[int]) -> np.ndarray:
        position = {int(s): i for i, s in enumerate(self.sample_ids)}
        return self.values[[position[int(s)] for s in sample_ids]]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, index=pd.Index(self.sample_ids, name="sample_id"), columns=list(self.space.labels))


def write_label_triplets(matrix: LabelMatrix, path: Path) -> Path:
    """
    Write a label matrix as sparse ``(sample_id, label_id, value)`` triplets.

    Only 1 and MASKED (``M``) entries are written; absent pairs are 0.

    Args:
        matrix (LabelMatrix): Labels to write
        path (Path): Destination CSV

    Returns:
        Path: The written file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows, cols = np.nonzero(matrix.values != 0)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["sample_id", "label_id", "value"])
        for r, c in zip(rows, cols):
            value = matrix.values[r, c]
            writer.writerow([int(matrix.sample_ids[r]), matrix.space.labels[c], _MASK_TOKEN if value == MASKED else int(value)])
    return path


def read_label_triplets(path: Path, space: LabelSpace, sample_ids: Sequence[int]) -> LabelMatrix:
    sample_ids = np.asarray(sample_ids, dtype=np.int64)
    position = {int(s): i for i, s in enumerate(sample_ids)}
    values = np.zeros((len(sample_ids), len(space)), dtype=LABEL_DTYPE)
    label_position = {label: j for j, label in enumerate(space.labels)}
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    for row in frame.itertuples(index=False):
        try:
            i, j = position[int(row.sample_id)], label_position[row.label_id]
        except KeyError as exc:
            raise DataError(f"label triplet refers to unknown sample or label: {exc}") from exc
        values[i, j] = MASKED if row.value == _MASK_TOKEN else int(row.value)
    return LabelMatrix(space=space, sample_ids=sample_ids, values=values)


def valid_rows(labels: np.ndarray) -> np.ndarray:
    """Boolean mask of entries that are not MASKED."""
    return np.asarray(labels) != MASKED


def label_counts(values: np.ndarray) -> List[Tuple[int, int, int]]:
    """(positives, negatives, masked) per column."""
    values = np.asarray(values)
    return [
        (int((values[:, j] == 1).sum()), int((values[:, j] == 0).sum()), int((values[:, j] == MASKED).sum()))
        for j in range(values.shape[1])
    ]



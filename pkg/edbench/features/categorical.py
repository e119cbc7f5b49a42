from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from ..cohort.stats import group_race


def categorical_value(field: str, raw) -> Optional[str]:
    """Canonical string of a categorical field; race is collapsed into its group."""
    if raw is None or (isinstance(raw, float) and np.isnan(raw)) or raw == "":
        return None
    if field == "race":
        return group_race(str(raw))
    if field == "acuity":
        return str(int(float(raw)))
    return str(raw).strip().upper()


@dataclass(frozen=True)
class CategoryVocab:
    """Index of one categorical field; index 0 is reserved for unknown or unseen values."""

    field: str
    values: Tuple[str, ...]

    @classmethod
    def fit(cls, field: str, raw_values: Iterable) -> "CategoryVocab":
        seen = {categorical_value(field, v) for v in raw_values}
        return cls(field=field, values=tuple(sorted(v for v in seen if v is not None)))

    @property
    def size(self) -> int:
        return len(self.values) + 1

    def encode(self, raw) -> int:
        value = categorical_value(self.field, raw)
        try:
            return self.values.index(value) + 1
        except ValueError:
            return 0

    def encode_many(self, raw_values: Iterable) -> np.ndarray:
        lookup = {v: i + 1 for i, v in enumerate(self.values)}
        return np.array([lookup.get(categorical_value(self.field, v), 0) for v in raw_values], dtype=np.int64)

    def to_dict(self) -> Dict[str, List[str]]:
        return {"field": self.field, "values": list(self.values)}

    @classmethod
    def from_dict(cls, data: Dict) -> "CategoryVocab":
        return cls(field=data["field"], values=tuple(data["values"]))

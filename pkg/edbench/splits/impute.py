import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..errors import ImputerError

logger = logging.getLogger(__name__)

MISSING_SUFFIX = "_missing"


class MedianImputer:
    """
    Median imputation with training-set statistics and binary missingness columns.

    A column without any observed training value is imputed with 0.
    """

    def __init__(self, mask_columns: bool = True):
        self.mask_columns = mask_columns
        self.columns: List[str] = []
        self.medians: Optional[pd.Series] = None

    def fit(self, train: pd.DataFrame) -> "MedianImputer":
        self.columns = list(train.columns)
        medians = train.astype(float).median(axis=0, skipna=True)
        empty = medians.index[medians.isna()].tolist()
        if empty:
            logger.warning(f"{len(empty)} columns have no observed training value and are imputed with 0: {empty[:5]}")
        self.medians = medians.fillna(0.0)
        return self

    def transform(self, matrix: pd.DataFrame) -> Tuple[pd.DataFrame, Optional[pd.DataFrame]]:
        if self.medians is None:
            raise ImputerError("imputer is not fitted")
        if list(matrix.columns) != self.columns:
            extra = sorted(set(matrix.columns) - set(self.columns))
            absent = sorted(set(self.columns) - set(matrix.columns))
            raise ImputerError(f"column mismatch: unexpected {extra[:5]}, missing {absent[:5]}")
        values = matrix.astype(float)
        missing = values.isna()
        filled = values.fillna(self.medians)
        if not self.mask_columns:
            return filled, None
        mask = missing.astype(np.int8)
        mask.columns = [f"{c}{MISSING_SUFFIX}" for c in self.columns]
        return filled, mask

    def to_dict(self) -> Dict:
        return {"mask_columns": self.mask_columns, "columns": self.columns, "medians": self.medians.tolist()}

    @classmethod
    def from_dict(cls, data: Dict) -> "MedianImputer":
        imputer = cls(mask_columns=data["mask_columns"])
        imputer.columns = list(data["columns"])
        imputer.medians = pd.Series(data["medians"], index=imputer.columns, dtype=float)
        return imputer


def fit_imputer(train: pd.DataFrame, mask_columns: bool = True) -> MedianImputer:
    """
    Per-column median over the observed training values.

    Args:
        train (pd.DataFrame): Training rows only
        mask_columns (bool): Whether ``apply_imputer`` emits missingness columns

    Returns:
        MedianImputer: The fitted imputer
    """
    return MedianImputer(mask_columns=mask_columns).fit(train)


def apply_imputer(matrix: pd.DataFrame, imputer: MedianImputer) -> Tuple[pd.DataFrame, Optional[pd.DataFrame]]:
    """
    Fill missing entries with the training medians.

    Args:
        matrix (pd.DataFrame): Rows of any split, same columns as at fit time
        imputer (MedianImputer): Imputer fitted on the training split

    Returns:
        Tuple[pd.DataFrame, Optional[pd.DataFrame]]: Filled matrix and the ``<column>_missing`` mask
        (None when the imputer was built with ``mask_columns=False``)
    """
    return imputer.transform(matrix)

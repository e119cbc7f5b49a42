import logging
from typing import Any, Dict, Optional

import numpy as np
import xgboost as xgb

from ..config import TreeConfig
from ..errors import DataError
from ..labels.space import MASKED, LabelSpace
from .base_model import BaseModel
from .data import ModelInputs
from .scenarios import ScenarioSpec

logger = logging.getLogger(__name__)


class TreeBaseline(BaseModel):
    """
    One gradient-boosted tree classifier per label.

    Each classifier sees only the rows where its label is not MASKED. Missing feature
    values are left to the learner's native handling unless the inputs were imputed.
    """

    def __init__(self, scenario: ScenarioSpec, space: LabelSpace, config: Optional[TreeConfig] = None):
        super().__init__(scenario, space)
        self.config = config or TreeConfig()
        self.boosters: Dict[str, xgb.Booster] = {}
        self.skipped: Dict[str, str] = {}
        self.prevalence: Dict[str, float] = {}
        self.n_features = 0

    def _classifier(self) -> xgb.XGBClassifier:
        return xgb.XGBClassifier(
            objective="binary:logistic",
            n_estimators=self.config.n_estimators,
            max_depth=self.config.max_depth,
            learning_rate=self.config.learning_rate,
            random_state=self.config.seed,
            n_jobs=self.config.n_jobs,
            tree_method="hist",
            eval_metric="logloss",
        )

    def fit(self, train: ModelInputs, val: Optional[ModelInputs] = None) -> Dict[str, Any]:
        """
        Train one classifier per label on its non-masked rows.

        Labels with fewer than two classes among those rows are skipped and reported.

        Args:
            train (ModelInputs): Training rows
            val (ModelInputs, optional): Unused; trees train with library defaults

        Returns:
            dict: Trained and skipped labels
        """
        X = train.tabular
        self.n_features = X.shape[1]
        self.boosters, self.skipped, self.prevalence = {}, {}, {}
        for k, label in enumerate(self.space.labels):
            y = train.labels[:, k]
            rows = y != MASKED
            n_pos = int((y[rows] == 1).sum())
            n_rows = int(rows.sum())
            self.prevalence[label] = n_pos / n_rows if n_rows else 0.0
            if n_pos == 0 or n_pos == n_rows:
                self.skipped[label] = f"{n_pos} positives among {n_rows} non-masked rows"
                logger.warning(f"{self.name}: skipping label {label}: {self.skipped[label]}")
                continue
            classifier = self._classifier()
            classifier.fit(X[rows], y[rows].astype(int))
            self.boosters[label] = classifier.get_booster()

        if not self.boosters:
            raise DataError(f"{self.name}: every label lacks one class in the training rows")
        logger.info(f"{self.name}: trained {len(self.boosters)} labels, skipped {len(self.skipped)}")
        return {"trained_labels": list(self.boosters), "skipped_labels": dict(self.skipped)}

    def predict_proba(self, inputs: ModelInputs) -> np.ndarray:
        """
        Positive-class probabilities; a skipped label scores its training prevalence.

        Args:
            inputs (ModelInputs): Rows to score

        Returns:
            np.ndarray: rows x labels probabilities
        """
        matrix = xgb.DMatrix(inputs.tabular)
        scores = np.empty((len(inputs), len(self.space)), dtype=np.float64)
        for k, label in enumerate(self.space.labels):
            if label in self.boosters:
                scores[:, k] = self.boosters[label].predict(matrix)
            else:
                scores[:, k] = self.prevalence.get(label, 0.0)
        return scores

    def model_metrics(self) -> Dict[str, Any]:
        return {
            "family": "tree",
            "n_features": self.n_features,
            "n_models": len(self.boosters),
            "n_skipped": len(self.skipped),
            **self.config.model_dump(),
        }

    def state_dict(self) -> Dict[str, Any]:
        return {
            "boosters": {label: bytes(b.save_raw(raw_format="ubj")) for label, b in self.boosters.items()},
            "skipped": dict(self.skipped),
            "prevalence": dict(self.prevalence),
            "n_features": self.n_features,
        }

    def load_state_dict(self, state: Dict[str, Any]):
        self.boosters = {}
        for label, raw in state["boosters"].items():
            booster = xgb.Booster()
            booster.load_model(bytearray(raw))
            self.boosters[label] = booster
        self.skipped = dict(state["skipped"])
        self.prevalence = dict(state["prevalence"])
        self.n_features = state["n_features"]

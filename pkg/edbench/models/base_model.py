import logging
import time
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional

import numpy as np

from ..evaluation.analysis import Analysis
from ..labels.space import LabelSpace
from .data import ModelInputs
from .scenarios import ScenarioSpec

logger = logging.getLogger(__name__)


class BaseModel(ABC):
    """
    Base class for the benchmark's model families.

    Subclasses implement ``fit`` and ``predict_proba``; ``run_training`` wraps them with
    timing, hands predictions to the registered analyzers and returns a results dict.
    """

    def __init__(self, scenario: ScenarioSpec, space: LabelSpace, name: str = None):
        """
        Initialize the base model.

        Args:
            scenario (ScenarioSpec): Inputs and family of the model
            space (LabelSpace): Labels the model scores, in column order
            name (str): Name used in logs and reports
        """
        self.scenario = scenario
        self.space = space
        self.name = name or scenario.name
        self.analyzers: List[Analysis] = []

    def add_analyzer(self, analyzer: Analysis):
        """
        Add an analyzer that receives the predictions of every ``run_training`` call.

        Args:
            analyzer (Analysis): The analyzer to add
        """
        self.analyzers.append(analyzer)

    @abstractmethod
    def fit(self, train: ModelInputs, val: Optional[ModelInputs] = None) -> Dict[str, Any]:
        """Train on ``train``; return a summary of the fit."""

    @abstractmethod
    def predict_proba(self, inputs: ModelInputs) -> np.ndarray:
        """Scores in [0, 1], rows x labels in label-space order."""

    @abstractmethod
    def model_metrics(self) -> Dict[str, Any]:
        """Size and configuration of the fitted model."""

    def run_training(
        self, train: ModelInputs, val: Optional[ModelInputs] = None, test: Optional[ModelInputs] = None
    ) -> Dict[str, Any]:
        """
        Fit the model and score the held-out splits.

        Args:
            train (ModelInputs): Training rows
            val (ModelInputs, optional): Validation rows, used for model selection where supported
            test (ModelInputs, optional): Test rows

        Returns:
            dict: ``results_metrics`` (fit summary), ``model_metrics`` and ``timing_info``
        """
        start_time = time.time()
        start_timestamp = time.strftime("%Y-%m-%d %H:%M:%S", time.localtime(start_time))
        logger.info(f"Training {self.name} on {len(train)} rows, {len(self.space)} labels")

        fit_results = self.fit(train, val)
        fit_time = time.time() - start_time

        for split, inputs in (("val", val), ("test", test)):
            if inputs is None or not self.analyzers:
                continue
            scores = self.predict_proba(inputs)
            for analyzer in self.analyzers:
                analyzer.add_results(
                    {
                        "scores": scores,
                        "labels": inputs.labels,
                        "sample_ids": inputs.sample_ids,
                        "first_of_visit": inputs.first_of_visit,
                        "split": split,
                    }
                )

        end_time = time.time()
        end_timestamp = time.strftime("%Y-%m-%d %H:%M:%S", time.localtime(end_time))
        execution_time = end_time - start_time
        timing_info = {
            "start_time": start_timestamp,
            "end_time": end_timestamp,
            "execution_time": execution_time,
            "fit_time": fit_time,
            "n_train": len(train),
            "rows_per_second": len(train) / fit_time if fit_time > 0 else 0,
        }

        return {
            "results_metrics": fit_results,
            "model_metrics": self.model_metrics(),
            "timing_info": timing_info,
        }

    def run_analysis(self, **kwargs) -> Dict[str, Any]:
        """
        Run every registered analyzer.

        Returns:
            dict: ``analyzer_<i>`` -> analysis results
        """
        return {f"analyzer_{i}": analyzer.analyze(**kwargs) for i, analyzer in enumerate(self.analyzers)}

    def plot_analysis(self, **kwargs):
        for i, analyzer in enumerate(self.analyzers):
            print(f"\nAnalyzer {i}: {analyzer.__class__.__name__}")
            analyzer.plot(**kwargs)

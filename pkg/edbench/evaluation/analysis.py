from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, Union

import pandas as pd


class Analysis(ABC):
    """
    Base class for analyzers that collect prediction batches from a model run.

    Results accumulate in a DataFrame, one row per scored sample.
    """

    def __init__(self, results_df: pd.DataFrame = None):
        """
        Initialize the Analysis class.

        Args:
            results_df (pd.DataFrame, optional): Previously collected results
        """
        self.results_df = results_df if results_df is not None else pd.DataFrame()

    @abstractmethod
    def add_results(self, results: Dict[str, Any]):
        """
        Add one batch of results to the analysis.

        Args:
            results (dict): Batch produced by a model run
        """

    @abstractmethod
    def analyze(self, **kwargs) -> Dict[str, Any]:
        """
        Analyze the collected results.

        Returns:
            dict: Analysis results
        """

    @abstractmethod
    def plot(self, **kwargs):
        """Plot the analysis results."""

    def export_frame(self) -> pd.DataFrame:
        """Flat view of the collected results, one scalar per cell."""
        return self.results_df

    def export_results(self, filename: Union[str, Path]) -> Path:
        """
        Write the flat results to CSV.

        Args:
            filename: Destination file

        Returns:
            Path: The written file
        """
        if self.results_df.empty:
            raise ValueError("No results available to export")
        path = Path(filename)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.export_frame().to_csv(path, index=False)
        return path

    def get_results(self) -> pd.DataFrame:
        return self.results_df

    def clear_results(self):
        self.results_df = pd.DataFrame()

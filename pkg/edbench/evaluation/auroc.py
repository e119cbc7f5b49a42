from typing import Any, Dict, Optional

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from ..config import BootstrapConfig
from ..labels.space import LabelSpace
from .analysis import Analysis
from .metrics import bootstrap_auroc, macro_auroc
from .reports import EvalReport, per_label_report


class AurocAnalysis(Analysis):
    """
    Collects score/label batches of one split and reports bootstrapped AUROCs.
    """

    def __init__(
        self,
        space: LabelSpace,
        scenario: str = "",
        bootstrap: Optional[BootstrapConfig] = None,
        first_only: bool = True,
        results_df: pd.DataFrame = None,
    ):
        """
        Initialize the AurocAnalysis.

        Args:
            space (LabelSpace): Label space of the score columns
            scenario (str): Scenario name recorded in reports
            bootstrap (BootstrapConfig, optional): Resampling settings
            first_only (bool): Keep only rows flagged as the first ECG of their visit
            results_df (pd.DataFrame, optional): Previously collected results
        """
        super().__init__(results_df)
        self.space = space
        self.scenario = scenario
        self.bootstrap = bootstrap or BootstrapConfig()
        self.first_only = first_only

    def add_results(self, results: Dict[str, Any]):
        """
        Add one batch.

        Args:
            results (dict): ``scores`` and ``labels`` (rows x labels), optional ``sample_ids``,
                ``first_of_visit`` and ``split``
        """
        scores = np.asarray(results["scores"], dtype=np.float64)
        labels = np.asarray(results["labels"])
        n_rows = len(scores)
        batch = pd.DataFrame(
            {
                "sample_id": np.asarray(results.get("sample_ids", np.arange(n_rows))),
                "split": results.get("split", "test"),
                "first_of_visit": np.asarray(results.get("first_of_visit", np.ones(n_rows, dtype=bool)), dtype=bool),
                "scores": list(scores),
                "labels": list(labels),
            }
        )
        self.results_df = pd.concat([self.results_df, batch], ignore_index=True)

    def export_frame(self) -> pd.DataFrame:
        frame = self.results_df[["sample_id", "split", "first_of_visit"]].reset_index(drop=True)
        scores = pd.DataFrame(np.stack(self.results_df["scores"].to_list()), columns=[f"score_{name}" for name in self.space.labels])
        labels = pd.DataFrame(np.stack(self.results_df["labels"].to_list()), columns=[f"label_{name}" for name in self.space.labels])
        return pd.concat([frame, scores, labels], axis=1)

    def _arrays(self, split: Optional[str] = None):
        if self.results_df.empty:
            raise ValueError("No results available to analyze")
        frame = self.results_df
        if split is not None:
            frame = frame[frame["split"] == split]
        if self.first_only:
            frame = frame[frame["first_of_visit"]]
        return np.stack(frame["scores"].to_list()), np.stack(frame["labels"].to_list())

    def analyze(self, split: Optional[str] = "test") -> Dict[str, Any]:
        """
        Bootstrapped per-label and macro AUROC of the collected rows.

        Args:
            split (str, optional): Restrict to one split; all rows when None

        Returns:
            dict: macro point and interval, labels above 0.80, and the full report
        """
        scores, labels = self._arrays(split)
        report: EvalReport = per_label_report(scores, labels, self.space, self.scenario, self.bootstrap)
        point, lo, hi = report.macro
        return {
            "macro_auroc": point,
            "ci_lo": lo,
            "ci_hi": hi,
            "n_rows": report.n_rows,
            "n_above_080": report.count_above(),
            "report": report,
        }

    def plot(self, split: Optional[str] = "test", bins: int = 30):
        """
        Plot the bootstrap distribution of the macro AUROC.

        Args:
            split (str, optional): Restrict to one split
            bins (int): Histogram bins
        """
        scores, labels = self._arrays(split)
        point = macro_auroc(scores, labels)
        draws = bootstrap_auroc(scores, labels, n_iter=self.bootstrap.n_iter, seed=self.bootstrap.seed)
        usable = ~np.isnan(draws).all(axis=1)
        macro_draws = np.nanmean(draws[usable], axis=1)

        plt.figure(figsize=(10, 6))
        plt.hist(macro_draws, bins=bins, alpha=0.7)
        plt.axvline(x=point, color="r", linestyle="--", label=f"Point estimate ({point:.4f})")
        plt.title(f"Bootstrap distribution of macro AUROC ({self.scenario or self.space.task})")
        plt.xlabel("Macro AUROC")
        plt.ylabel("Count")
        plt.legend()
        plt.show()

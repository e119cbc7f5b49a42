"""
Evaluation reports: per-label AUROC with bootstrap intervals, ICD-chapter and
deterioration-category aggregates, and scenario comparison tables.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..config import BootstrapConfig
from ..errors import DataError, InvalidCodeError, UndefinedMetricError
from ..labels.codes import clean_code
from ..labels.deterioration import CATEGORIES, DeteriorationSpec, load_deterioration_spec
from ..labels.space import LabelSpace, label_counts
from .metrics import percentile_interval, auroc_matrix, bootstrap_auroc, relative_improvement

logger = logging.getLogger(__name__)

CHAPTER_FILE = "icd10_chapters.csv"
CI_THRESHOLD = 0.80


@dataclass
class LabelResult:
    label: str
    auroc: Optional[float]
    ci_lo: Optional[float]
    ci_hi: Optional[float]
    n_pos: int
    n_neg: int
    undefined: bool = False


@dataclass
class EvalReport:
    """Everything one evaluation run produces; serialises to JSON and aligned text."""

    task: str
    scenario: str
    labels: List[LabelResult]
    macro: Tuple[float, float, float]
    groups: Dict[str, float] = field(default_factory=dict)
    improvements: Dict[str, float] = field(default_factory=dict)
    n_rows: int = 0
    n_iter: int = 1000
    level: float = 0.95
    seed: int = 0
    label_space_hash: str = ""

    def label_aurocs(self) -> Dict[str, float]:
        return {r.label: r.auroc for r in self.labels if not r.undefined}

    def label_lower_bounds(self) -> Dict[str, float]:
        return {r.label: r.ci_lo for r in self.labels if not r.undefined}

    def count_above(self, threshold: float = CI_THRESHOLD) -> int:
        """Number of labels whose CI lower bound exceeds ``threshold``."""
        return sum(1 for r in self.labels if not r.undefined and r.ci_lo > threshold)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["macro"] = list(self.macro)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        data = dict(data)
        data["labels"] = [LabelResult(**r) for r in data["labels"]]
        data["macro"] = tuple(data["macro"])
        return cls(**data)

    def to_json(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_dict(), handle, indent=2)
        return path

    @classmethod
    def from_json(cls, path: Path) -> "EvalReport":
        with open(path, "r", encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))

    def label_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(r) for r in self.labels])

    def to_text(self) -> str:
        """Aligned text tables: macro line, group means, per-label rows."""
        point, lo, hi = self.macro
        lines = [
            "=" * 80,
            f"{self.task} / {self.scenario}: {self.n_rows} test rows, {self.n_iter} bootstrap iterations",
            "=" * 80,
            f"{'macro AUROC':<32} {point:.4f} [{lo:.4f}, {hi:.4f}]",
            f"{'labels with CI lower bound > 0.80':<32} {self.count_above()}",
        ]
        if self.groups:
            lines += ["", f"{'group':<32} {'AUROC':>8}", "-" * 42]
            lines += [f"{name:<32} {value:>8.4f}" for name, value in self.groups.items()]
        if self.improvements:
            lines += ["", f"{'improvement':<32} {'%':>8}", "-" * 42]
            lines += [f"{name:<32} {value:>8.2f}" for name, value in self.improvements.items()]
        lines += ["", f"{'label':<32} {'AUROC':>8} {'95% CI':>18} {'pos':>7} {'neg':>7}", "-" * 76]
        for r in self.labels:
            if r.undefined:
                lines.append(f"{r.label:<32} {'undef':>8} {'':>18} {r.n_pos:>7} {r.n_neg:>7}")
            else:
                interval = f"[{r.ci_lo:.4f}, {r.ci_hi:.4f}]"
                lines.append(f"{r.label:<32} {r.auroc:>8.4f} {interval:>18} {r.n_pos:>7} {r.n_neg:>7}")
        return "\n".join(lines) + "\n"


def load_chapter_map(path: Optional[Path] = None) -> pd.DataFrame:
    """ICD-10 chapter ranges as a frame with columns chapter, start, end, title."""
    if path is None:
        with resources.files("edbench.data").joinpath(CHAPTER_FILE).open("r", encoding="utf-8") as handle:
            return pd.read_csv(handle, dtype=str, keep_default_na=False)
    return pd.read_csv(path, dtype=str, keep_default_na=False)


def icd_chapter(code: str, chapters: Optional[pd.DataFrame] = None) -> str:
    """
    ICD-10 chapter of a code, by its 3-character category.

    Args:
        code (str): ICD-10 code, dots optional
        chapters (pd.DataFrame, optional): Chapter ranges; the packaged table by default

    Returns:
        str: Roman chapter numeral
    """
    chapters = load_chapter_map() if chapters is None else chapters
    category = clean_code(code)[:3]
    if len(category) < 3:
        raise InvalidCodeError(f"cannot map code to an ICD-10 chapter: {code}")
    hits = chapters[(chapters["start"] <= category) & (category <= chapters["end"])]
    if len(hits) != 1:
        raise InvalidCodeError(f"cannot map code to an ICD-10 chapter: {code}")
    return hits["chapter"].iloc[0]


def chapter_report(
    aurocs: Mapping[str, float],
    lower_bounds: Optional[Mapping[str, float]] = None,
    chapters: Optional[pd.DataFrame] = None,
    threshold: float = CI_THRESHOLD,
) -> pd.DataFrame:
    """
    Mean AUROC per ICD-10 chapter.

    Args:
        aurocs (Mapping[str, float]): AUROC per diagnosis label (defined labels only)
        lower_bounds (Mapping[str, float], optional): CI lower bound per label
        chapters (pd.DataFrame, optional): Chapter ranges
        threshold (float): Lower bound counted in ``n_above``

    Returns:
        pd.DataFrame: chapter, title, n_labels, mean_auroc, n_above; in chapter-table order
    """
    chapters = load_chapter_map() if chapters is None else chapters
    rows: Dict[str, List[str]] = {}
    for label in aurocs:
        rows.setdefault(icd_chapter(label, chapters), []).append(label)

    out = []
    for chapter in chapters.itertuples(index=False):
        members = rows.get(chapter.chapter)
        if not members:
            continue
        out.append(
            {
                "chapter": chapter.chapter,
                "title": chapter.title,
                "n_labels": len(members),
                "mean_auroc": float(np.mean([aurocs[m] for m in members])),
                "n_above": sum(1 for m in members if lower_bounds and lower_bounds.get(m, 0.0) > threshold),
            }
        )
    return pd.DataFrame(out, columns=["chapter", "title", "n_labels", "mean_auroc", "n_above"])


def deterioration_report(
    aurocs: Mapping[str, float], spec: Optional[DeteriorationSpec] = None, strict: bool = True
) -> Dict[str, float]:
    """
    Unweighted mean AUROC of each deterioration category.

    Args:
        aurocs (Mapping[str, float]): AUROC per deterioration target
        spec (DeteriorationSpec, optional): Target definitions; the packaged ones by default
        strict (bool): Require all 15 targets; otherwise average the ones present

    Returns:
        Dict[str, float]: Category name to mean AUROC
    """
    spec = spec or load_deterioration_spec()
    missing = [name for name in spec.names if name not in aurocs]
    if missing and strict:
        raise DataError(f"deterioration report missing labels: {', '.join(missing)}")
    if missing:
        logger.warning(f"Category means exclude undefined labels: {', '.join(missing)}")

    means = {}
    for category in CATEGORIES:
        values = [aurocs[t.name] for t in spec.targets if t.category == category and t.name in aurocs]
        if values:
            means[category] = float(np.mean(values))
    return means


def per_label_report(
    scores: np.ndarray,
    labels: np.ndarray,
    space: LabelSpace,
    scenario: str = "",
    bootstrap: Optional[BootstrapConfig] = None,
) -> EvalReport:
    """
    Per-label and macro AUROC with percentile bootstrap intervals.

    One set of row resamples serves every label and the macro average; a label
    undefined in a resample drops out of that resample's macro.

    Args:
        scores (np.ndarray): rows x labels scores
        labels (np.ndarray): rows x labels ternary labels
        space (LabelSpace): Label space the columns follow
        scenario (str): Scenario name recorded in the report
        bootstrap (BootstrapConfig, optional): Resampling settings

    Returns:
        EvalReport: Report with group aggregates filled in for the task
    """
    bootstrap = bootstrap or BootstrapConfig()
    points = auroc_matrix(scores, labels)
    defined = ~np.isnan(points)
    if not defined.any():
        raise UndefinedMetricError("no label has both classes among the test rows")

    draws = bootstrap_auroc(scores, labels, n_iter=bootstrap.n_iter, seed=bootstrap.seed)
    counts = label_counts(labels)
    results = []
    for k, label in enumerate(space.labels):
        n_pos, n_neg, _ = counts[k]
        if not defined[k]:
            results.append(LabelResult(label, None, None, None, n_pos, n_neg, undefined=True))
            continue
        lo, hi = percentile_interval(points[k], draws[:, k], bootstrap.level)
        results.append(LabelResult(label, float(points[k]), lo, hi, n_pos, n_neg))

    macro_point = float(points[defined].mean())
    n_defined = (~np.isnan(draws)).sum(axis=1)
    macro_draws = np.full(len(draws), np.nan)
    usable = n_defined > 0
    macro_draws[usable] = np.nansum(draws[usable], axis=1) / n_defined[usable]
    macro_lo, macro_hi = percentile_interval(macro_point, macro_draws, bootstrap.level)

    report = EvalReport(
        task=space.task,
        scenario=scenario,
        labels=results,
        macro=(macro_point, macro_lo, macro_hi),
        n_rows=len(scores),
        n_iter=bootstrap.n_iter,
        level=bootstrap.level,
        seed=bootstrap.seed,
        label_space_hash=space.hash,
    )
    report.groups = group_means(report)
    return report


def group_means(report: EvalReport) -> Dict[str, float]:
    """Chapter means for diagnosis reports, category means for deterioration reports."""
    aurocs = report.label_aurocs()
    if report.task == "deterioration":
        return deterioration_report(aurocs, strict=False)
    try:
        table = chapter_report(aurocs, report.label_lower_bounds())
    except InvalidCodeError as exc:
        logger.warning(f"No chapter means: {exc}")
        return {}
    return dict(zip(table["chapter"], table["mean_auroc"]))


def comparison_table(reports: Mapping[str, EvalReport]) -> pd.DataFrame:
    """
    Macro AUROC (with interval) and group means of several scenarios side by side.

    Args:
        reports (Mapping[str, EvalReport]): Scenario name to report

    Returns:
        pd.DataFrame: One row per scenario
    """
    rows = []
    for name, report in reports.items():
        point, lo, hi = report.macro
        row = {"scenario": name, "macro_auroc": point, "ci_lo": lo, "ci_hi": hi, "n_above_080": report.count_above()}
        row.update(report.groups)
        rows.append(row)
    return pd.DataFrame(rows).set_index("scenario")


def improvement_table(a: EvalReport, b: EvalReport, labels: Optional[Sequence[str]] = None) -> pd.DataFrame:
    """
    Relative improvement of report ``a`` over report ``b`` for groups and labels.

    Args:
        a (EvalReport): Candidate scenario
        b (EvalReport): Reference scenario
        labels (Sequence[str], optional): Labels to include; all labels defined in both by default

    Returns:
        pd.DataFrame: name, a, b, improvement (percent)
    """
    rows = [("macro", a.macro[0], b.macro[0])]
    rows += [(g, a.groups[g], b.groups[g]) for g in a.groups if g in b.groups]
    a_labels, b_labels = a.label_aurocs(), b.label_aurocs()
    for label in labels if labels is not None else a_labels:
        if label in a_labels and label in b_labels:
            rows.append((label, a_labels[label], b_labels[label]))
    return pd.DataFrame(
        [{"name": n, "a": x, "b": y, "improvement": relative_improvement(x, y)} for n, x, y in rows],
        columns=["name", "a", "b", "improvement"],
    )


def format_table(frame: pd.DataFrame, title: str) -> str:
    return "\n".join(["=" * 80, title, "=" * 80, frame.to_string(float_format=lambda v: f"{v:.4f}"), ""])

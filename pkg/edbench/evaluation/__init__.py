from .analysis import Analysis
from .auroc import AurocAnalysis
from .metrics import (
    auroc,
    auroc_matrix,
    bootstrap_auroc,
    bootstrap_ci,
    macro_auroc,
    percentile_interval,
    relative_improvement,
)
from .reports import (
    EvalReport,
    LabelResult,
    chapter_report,
    comparison_table,
    deterioration_report,
    format_table,
    group_means,
    icd_chapter,
    improvement_table,
    load_chapter_map,
    per_label_report,
)

__all__ = [
    "Analysis",
    "AurocAnalysis",
    "auroc",
    "auroc_matrix",
    "bootstrap_auroc",
    "bootstrap_ci",
    "macro_auroc",
    "percentile_interval",
    "relative_improvement",
    "EvalReport",
    "LabelResult",
    "chapter_report",
    "comparison_table",
    "deterioration_report",
    "format_table",
    "group_means",
    "icd_chapter",
    "improvement_table",
    "load_chapter_map",
    "per_label_report",
]

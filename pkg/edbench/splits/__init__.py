from .folds import ROLES, FoldAssignment, assign_folds, read_fold_file, stratification_targets, write_fold_file
from .impute import MISSING_SUFFIX, MedianImputer, apply_imputer, fit_imputer

__all__ = [
    "ROLES",
    "FoldAssignment",
    "assign_folds",
    "read_fold_file",
    "stratification_targets",
    "write_fold_file",
    "MISSING_SUFFIX",
    "MedianImputer",
    "apply_imputer",
    "fit_imputer",
]

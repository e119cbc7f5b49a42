from .assemble import (
    MASK_SUFFIX,
    FeatureMatrix,
    FeatureVector,
    assemble_features,
    build_feature_matrix,
    mask_column,
    read_feature_matrix,
    write_feature_matrix,
)
from .biometrics import MATCH_DAYS, match_biometrics
from .categorical import CategoryVocab, categorical_value
from .ecg import extract_ecg_features
from .trends import STATS, TrendAggregate, aggregate_trend_frame, aggregate_trends
from .units import CONVERSIONS, canonicalize_frame, convert_units, convert_value, filter_outliers

__all__ = [
    "MASK_SUFFIX",
    "FeatureMatrix",
    "FeatureVector",
    "assemble_features",
    "build_feature_matrix",
    "mask_column",
    "read_feature_matrix",
    "write_feature_matrix",
    "MATCH_DAYS",
    "match_biometrics",
    "CategoryVocab",
    "categorical_value",
    "extract_ecg_features",
    "STATS",
    "TrendAggregate",
    "aggregate_trend_frame",
    "aggregate_trends",
    "CONVERSIONS",
    "canonicalize_frame",
    "convert_units",
    "convert_value",
    "filter_outliers",
]

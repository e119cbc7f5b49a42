from .codes import (
    DiagnosisVocab,
    build_vocab,
    clean_code,
    load_icd9_map,
    normalize_icd,
    propagated_codes,
    read_vocab_file,
    truncate_and_propagate,
    write_vocab_file,
)
from .deterioration import (
    CATEGORIES,
    DeteriorationSpec,
    DeteriorationTarget,
    build_deterioration_matrix,
    coded_event_labels,
    hypoxemia_label,
    icu_labels,
    load_deterioration_spec,
    medication_labels,
    mortality_labels,
)
from .diagnoses import NO_DIAGNOSES, build_diagnosis_matrix, diagnosis_labels, sample_code_sets
from .space import (
    MASKED,
    LabelMatrix,
    LabelSpace,
    LabelVector,
    label_counts,
    read_label_triplets,
    valid_rows,
    write_label_triplets,
)

__all__ = [
    "DiagnosisVocab",
    "build_vocab",
    "clean_code",
    "load_icd9_map",
    "normalize_icd",
    "propagated_codes",
    "read_vocab_file",
    "truncate_and_propagate",
    "write_vocab_file",
    "CATEGORIES",
    "DeteriorationSpec",
    "DeteriorationTarget",
    "build_deterioration_matrix",
    "coded_event_labels",
    "hypoxemia_label",
    "icu_labels",
    "load_deterioration_spec",
    "medication_labels",
    "mortality_labels",
    "NO_DIAGNOSES",
    "build_diagnosis_matrix",
    "diagnosis_labels",
    "sample_code_sets",
    "MASKED",
    "LabelMatrix",
    "LabelSpace",
    "LabelVector",
    "label_counts",
    "read_label_triplets",
    "valid_rows",
    "write_label_triplets",
]

"""
Patient-level fold assignment with multilabel iterative stratification.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from iterstrat.ml_stratifiers import MultilabelStratifiedKFold

from ..cohort.samples import Sample
from ..cohort.stats import AGE_BINS, age_bin
from ..errors import DataError
from ..labels.space import LabelMatrix

logger = logging.getLogger(__name__)

ROLES = ("train", "val", "test")


@dataclass
class FoldAssignment:
    """subject_id -> fold, plus which folds serve validation and test."""

    folds: Dict[str, int]
    n_folds: int = 20
    val_fold: int = 18
    test_fold: int = 19

    def role_of_fold(self, fold: int) -> str:
        if fold == self.val_fold:
            return "val"
        if fold == self.test_fold:
            return "test"
        return "train"

    def role(self, subject_id: str) -> str:
        if subject_id not in self.folds:
            raise DataError(f"subject {subject_id} has no fold")
        return self.role_of_fold(self.folds[subject_id])

    def role_counts(self) -> Dict[str, int]:
        counts = {role: 0 for role in ROLES}
        for fold in range(self.n_folds):
            counts[self.role_of_fold(fold)] += 1
        return counts

    def sample_folds(self, samples: List[Sample]) -> Dict[int, int]:
        return {s.sample_id: self.folds[s.subject_id] for s in samples}

    def split_samples(self, samples: List[Sample]) -> Dict[str, List[Sample]]:
        """
        Partition samples into train, val and test.

        Args:
            samples (List[Sample]): Samples whose subjects all have a fold

        Returns:
            Dict[str, List[Sample]]: Role -> samples, in input order
        """
        split: Dict[str, List[Sample]] = {role: [] for role in ROLES}
        for sample in samples:
            split[self.role(sample.subject_id)].append(sample)
        return split


def stratification_targets(
    samples: List[Sample], labels: Optional[LabelMatrix] = None
) -> Tuple[List[str], np.ndarray]:
    """
    Patient-level binary targets: gender one-hot, age-bin one-hot and any-positive diagnoses.

    Gender and age come from the patient's earliest sample.

    Returns:
        Tuple[List[str], np.ndarray]: Subjects in sorted order and their target matrix
    """
    first: Dict[str, Sample] = {}
    for sample in sorted(samples, key=lambda s: (s.arrival, s.sample_id)):
        first.setdefault(sample.subject_id, sample)
    subjects = sorted(first)
    genders = sorted({first[s].gender for s in subjects})
    bins = [name for name, _, _ in AGE_BINS]

    columns = [np.array([first[s].gender == g for s in subjects]) for g in genders]
    columns += [np.array([age_bin(first[s].age) == b for s in subjects]) for b in bins]
    if labels is not None:
        positive = pd.DataFrame(labels.values == 1, index=labels.sample_ids)
        subject_of = {s.sample_id: s.subject_id for s in samples}
        per_subject = positive.groupby(positive.index.map(subject_of)).any().reindex(subjects, fill_value=False)
        columns += [per_subject[c].to_numpy() for c in per_subject.columns]
    return subjects, np.column_stack(columns).astype(int)


def assign_folds(
    samples: List[Sample],
    labels: Optional[LabelMatrix] = None,
    n_folds: int = 20,
    val_fold: int = 18,
    test_fold: int = 19,
    seed: int = 42,
    fold_file: Optional[Path] = None,
) -> FoldAssignment:
    """
    Assign every patient to one of ``n_folds`` folds.

    Args:
        samples (List[Sample]): Cohort samples
        labels (LabelMatrix, optional): Diagnosis labels used as stratification keys
        n_folds (int): Number of folds
        val_fold (int): Fold used for validation
        test_fold (int): Fold used for testing
        seed (int): Shuffle seed
        fold_file (Path, optional): Precomputed ``subject_id,fold`` file used verbatim

    Returns:
        FoldAssignment: Patient -> fold
    """
    if fold_file is not None:
        folds = read_fold_file(fold_file)
        missing = sorted({s.subject_id for s in samples} - set(folds))
        if missing:
            raise DataError(f"fold file {fold_file} lacks {len(missing)} subjects, e.g. {missing[:3]}")
        return FoldAssignment(folds=folds, n_folds=n_folds, val_fold=val_fold, test_fold=test_fold)

    subjects, targets = stratification_targets(samples, labels)
    if n_folds > len(subjects):
        raise DataError(f"cannot split {len(subjects)} patients into {n_folds} folds")

    splitter = MultilabelStratifiedKFold(n_splits=n_folds, shuffle=True, random_state=seed)
    folds: Dict[str, int] = {}
    for fold, (_, test_idx) in enumerate(splitter.split(np.zeros((len(subjects), 1)), targets)):
        for i in test_idx:
            folds[subjects[i]] = fold
    assignment = FoldAssignment(folds=folds, n_folds=n_folds, val_fold=val_fold, test_fold=test_fold)
    logger.info(f"Assigned {len(subjects)} patients to {n_folds} folds (val {val_fold}, test {test_fold})")
    return assignment


def read_fold_file(path: Path) -> Dict[str, int]:
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    for column in ("subject_id", "fold"):
        if column not in frame.columns:
            raise DataError(f"fold file {path} lacks column {column}")
    return {row.subject_id: int(row.fold) for row in frame.itertuples(index=False)}


def write_fold_file(assignment: FoldAssignment, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(sorted(assignment.folds.items()), columns=["subject_id", "fold"])
    frame.to_csv(path, index=False, lineterminator="\n")
    return path

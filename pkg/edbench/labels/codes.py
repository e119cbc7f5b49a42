"""
ICD code normalization and the diagnosis vocabulary.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Set, Tuple, Union

import pandas as pd

from ..errors import DataError, InvalidCodeError

logger = logging.getLogger(__name__)

MAX_CODE_LENGTH = 5
MIN_CODE_LENGTH = 3
DEFAULT_ICD9_MAP = "icd9_to_icd10_sample.csv"

Icd9Map = Dict[str, List[str]]


def clean_code(code: str) -> str:
    return str(code).replace(".", "").strip().upper()


def load_icd9_map(path: Optional[Path] = None) -> Icd9Map:
    """
    Load an ICD-9 -> ICD-10 general-equivalence table (columns ``icd9``, ``icd10``).

    A code may appear on several rows; all its targets are kept in file order.

    Args:
        path (Path, optional): Mapping CSV; the small packaged table when omitted

    Returns:
        Icd9Map: ICD-9 code -> list of ICD-10 codes
    """
    if path is None:
        with resources.files("edbench.data").joinpath(DEFAULT_ICD9_MAP).open("r", encoding="utf-8") as handle:
            frame = pd.read_csv(handle, dtype=str, keep_default_na=False)
    else:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    mapping: Icd9Map = {}
    for icd9, icd10 in zip(frame["icd9"], frame["icd10"]):
        targets = mapping.setdefault(clean_code(icd9), [])
        if clean_code(icd10) not in targets:
            targets.append(clean_code(icd10))
    return mapping


def normalize_icd(code: str, version: int, map9to10: Icd9Map) -> List[str]:
    """
    Express a code in ICD-10.

    Args:
        code (str): Uppercase dotless code
        version (int): 9 or 10
        map9to10 (Icd9Map): ICD-9 -> ICD-10 mapping

    Returns:
        List[str]: ICD-10 codes; empty when an ICD-9 code has no mapping
    """
    if version == 10:
        return [code]
    targets = map9to10.get(code)
    if not targets:
        logger.warning(f"ICD-9 code {code} has no ICD-10 mapping; dropped")
        return []
    return list(targets)


def truncate_and_propagate(code: str) -> Set[str]:
    """
    Truncate an ICD-10 code to five characters and add every ancestor down to three.

    Args:
        code (str): ICD-10 code

    Returns:
        Set[str]: The truncated code and its prefixes of length 3..len-1
    """
    code = clean_code(code)
    if len(code) < MIN_CODE_LENGTH:
        raise InvalidCodeError(f"ICD-10 code '{code}' is shorter than {MIN_CODE_LENGTH} characters")
    truncated = code[:MAX_CODE_LENGTH]
    return {truncated[:length] for length in range(MIN_CODE_LENGTH, len(truncated) + 1)}


def propagated_codes(codes: Iterable[Tuple[str, int]], map9to10: Icd9Map) -> Set[str]:
    """Normalize and propagate ``(code, version)`` pairs, dropping codes too short to propagate."""
    result: Set[str] = set()
    for code, version in codes:
        for icd10 in normalize_icd(code, version, map9to10):
            try:
                result |= truncate_and_propagate(icd10)
            except InvalidCodeError as exc:
                logger.warning(f"{exc}; dropped")
    return result


@dataclass(frozen=True)
class DiagnosisVocab:
    codes: Tuple[str, ...]
    counts: Tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.codes)

    def __contains__(self, code: str) -> bool:
        return code in self.codes

    def count_of(self, code: str) -> int:
        return dict(zip(self.codes, self.counts)).get(code, 0)


def build_vocab(coded: Union[Mapping[str, int], Iterable[Iterable[str]]], min_count: int) -> DiagnosisVocab:
    """
    Keep every code that occurs at least ``min_count`` times.

    Args:
        coded: Either code -> count, or one propagated code set per sample (each counted once)
        min_count (int): Inclusion threshold

    Returns:
        DiagnosisVocab: Lexicographically sorted codes with their counts
    """
    if isinstance(coded, Mapping):
        counts = Counter({code: int(n) for code, n in coded.items()})
    else:
        counts = Counter()
        for code_set in coded:
            counts.update(set(code_set))
    kept = sorted(code for code, n in counts.items() if n >= min_count)
    if not kept:
        raise DataError(f"no diagnosis code reaches min_count={min_count}")
    logger.info(f"Diagnosis vocabulary: {len(kept)} of {len(counts)} codes with count >= {min_count}")
    return DiagnosisVocab(codes=tuple(kept), counts=tuple(counts[c] for c in kept))


def read_vocab_file(path: Path) -> DiagnosisVocab:
    """Read a vocabulary verbatim: one code per line, or a CSV whose first column is the code."""
    codes = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            code = line.split(",")[0].strip()
            if code and code.lower() not in ("code", "icd_code"):
                codes.append(clean_code(code))
    if not codes:
        raise DataError(f"vocabulary file {path} is empty")
    return DiagnosisVocab(codes=tuple(codes))


def write_vocab_file(vocab: DiagnosisVocab, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({"code": list(vocab.codes)})
    if vocab.counts:
        frame["count"] = list(vocab.counts)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path

import logging
from typing import Dict, Iterable, List, Optional, Set, Tuple

import numpy as np

from ..cohort.samples import Sample
from ..ingest.records import CodedEventRecord
from ..ingest.tables import SourceTables
from .codes import DiagnosisVocab, Icd9Map, build_vocab, load_icd9_map, propagated_codes
from .space import LABEL_DTYPE, LabelMatrix, LabelSpace, LabelVector

logger = logging.getLogger(__name__)

NO_DIAGNOSES = "no-diagnoses"


def diagnosis_labels(codes: Iterable[str], vocab: DiagnosisVocab) -> LabelVector:
    """
    Multi-hot vector of a sample's propagated discharge codes over the vocabulary.

    Args:
        codes (Iterable[str]): Normalized, propagated ICD-10 codes of the sample
        vocab (DiagnosisVocab): Label vocabulary

    Returns:
        LabelVector: 0/1 values (never MASKED); flagged ``no-diagnoses`` when ``codes`` is empty
    """
    code_set = set(codes)
    values = np.array([1 if code in code_set else 0 for code in vocab.codes], dtype=LABEL_DTYPE)
    return LabelVector(values=values, flags=() if code_set else (NO_DIAGNOSES,))


def _index(records: Iterable[CodedEventRecord], key: str) -> Dict[str, List[CodedEventRecord]]:
    index: Dict[str, List[CodedEventRecord]] = {}
    for record in records:
        value = getattr(record, key)
        if value is not None:
            index.setdefault(value, []).append(record)
    return index


def sample_code_sets(samples: List[Sample], sources: SourceTables, icd9_map: Icd9Map) -> List[Set[str]]:
    """Propagated ICD-10 discharge codes per sample: hospital codes via hadm_id, ED codes via stay_id."""
    hosp = _index(sources.diagnoses_hosp, "hadm_id")
    ed = _index(sources.diagnoses_ed, "stay_id")
    code_sets = []
    for sample in samples:
        records = list(ed.get(sample.stay_id, []))
        if sample.hadm_id is not None:
            records += hosp.get(sample.hadm_id, [])
        code_sets.append(propagated_codes(((r.icd_code, r.icd_version) for r in records), icd9_map))
    return code_sets


def build_diagnosis_matrix(
    samples: List[Sample],
    sources: SourceTables,
    min_count: int = 10,
    vocab: Optional[DiagnosisVocab] = None,
    icd9_map: Optional[Icd9Map] = None,
) -> Tuple[LabelMatrix, DiagnosisVocab]:
    """
    Diagnosis labels for every sample.

    Args:
        samples (List[Sample]): Cohort samples
        sources (SourceTables): Loaded source tables
        min_count (int): Vocabulary threshold, used when ``vocab`` is not supplied
        vocab (DiagnosisVocab, optional): Fixed vocabulary, e.g. read from a published file
        icd9_map (Icd9Map, optional): ICD-9 -> ICD-10 mapping; the packaged table by default

    Returns:
        Tuple[LabelMatrix, DiagnosisVocab]: Labels and the vocabulary they are defined over
    """
    icd9_map = icd9_map if icd9_map is not None else load_icd9_map()
    code_sets = sample_code_sets(samples, sources, icd9_map)
    if vocab is None:
        vocab = build_vocab(code_sets, min_count)
    space = LabelSpace(task="diagnoses", labels=vocab.codes)

    values = np.zeros((len(samples), len(vocab)), dtype=LABEL_DTYPE)
    flags = {}
    for i, (sample, codes) in enumerate(zip(samples, code_sets)):
        vector = diagnosis_labels(codes, vocab)
        values[i] = vector.values
        if vector.flags:
            flags[sample.sample_id] = vector.flags
    if flags:
        logger.info(f"{len(flags)} samples have no linked diagnoses")
    return LabelMatrix(space=space, sample_ids=[s.sample_id for s in samples], values=values, flags=flags), vocab

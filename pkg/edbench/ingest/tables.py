"""
Schema-checked CSV readers and writers for the source tables.
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Type

import pandas as pd
from pydantic import ValidationError

from ..errors import DataError, RowError, SchemaError
from .records import (
    AdmissionRecord,
    BiometricRecord,
    CodedEventRecord,
    EcgManifestRecord,
    EventRecord,
    IcuStayRecord,
    MedicationRecord,
    OutcomeRecord,
    SourceRecord,
    StayRecord,
    TriageRecord,
    format_date,
    format_timestamp,
    outcome_records,
)
from .registry import VariableRegistry

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TableSchema:
    record: Type[SourceRecord]
    required: Sequence[str]
    optional: Sequence[str] = ()
    timestamps: Sequence[str] = ()
    dates: Sequence[str] = ()

    @property
    def columns(self) -> List[str]:
        return list(self.required) + list(self.optional)


_CODED = dict(
    record=CodedEventRecord,
    required=("subject_id", "icd_code", "icd_version"),
    optional=("hadm_id", "stay_id", "event_date"),
    dates=("event_date",),
)

SCHEMAS: Dict[str, TableSchema] = {
    "edstays": TableSchema(
        StayRecord,
        required=("subject_id", "stay_id", "intime", "outtime", "gender", "race", "age"),
        optional=("hadm_id", "acuity"),
        timestamps=("intime", "outtime"),
    ),
    "triage": TableSchema(TriageRecord, required=("subject_id", "stay_id"), optional=("acuity",)),
    "vitalsign": TableSchema(
        EventRecord,
        required=("subject_id", "stay_id", "charttime", "variable_id", "value"),
        optional=("unit",),
        timestamps=("charttime",),
    ),
    "labevents": TableSchema(
        EventRecord,
        required=("subject_id", "charttime", "variable_id", "value"),
        optional=("hadm_id", "unit"),
        timestamps=("charttime",),
    ),
    "pyxis": TableSchema(
        MedicationRecord, required=("subject_id", "stay_id", "charttime", "name"), timestamps=("charttime",)
    ),
    "procedures": TableSchema(**_CODED),
    "diagnoses_ed": TableSchema(**_CODED),
    "diagnoses_hosp": TableSchema(**_CODED),
    "admissions": TableSchema(
        AdmissionRecord,
        required=("subject_id", "hadm_id", "admittime", "dischtime"),
        optional=("dod",),
        timestamps=("admittime", "dischtime"),
        dates=("dod",),
    ),
    "icustays": TableSchema(
        IcuStayRecord,
        required=("subject_id", "hadm_id", "stay_id", "intime", "outtime"),
        timestamps=("intime", "outtime"),
    ),
    "omr": TableSchema(
        BiometricRecord,
        required=("subject_id", "charttime", "result_name", "value"),
        optional=("unit",),
        timestamps=("charttime",),
    ),
    "ecg_manifest": TableSchema(
        EcgManifestRecord,
        required=("record_id", "subject_id", "ecg_time", "signal_path", "sidecar_path"),
        timestamps=("ecg_time",),
    ),
}

TABLE_KINDS = tuple(SCHEMAS)


@dataclass(frozen=True)
class RowDiagnostic:
    row: int
    message: str
    level: str = "error"


@dataclass
class LoadedTable:
    """Parsed records of one table plus a diagnostic for every row that did not become a record."""

    kind: str
    records: List[SourceRecord] = field(default_factory=list)
    diagnostics: List[RowDiagnostic] = field(default_factory=list)
    n_input_rows: int = 0

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, index):
        return self.records[index]

    def __iter__(self) -> Iterator[SourceRecord]:
        return iter(self.records)

    @property
    def errors(self) -> List[RowDiagnostic]:
        return [d for d in self.diagnostics if d.level == "error"]

    def to_frame(self) -> pd.DataFrame:
        """Records as a frame; timestamps stay integer seconds."""
        columns = SCHEMAS[self.kind].columns
        return pd.DataFrame([r.model_dump(include=set(columns)) for r in self.records], columns=columns)


def _describe(exc: ValidationError) -> str:
    return "; ".join(f"{'.'.join(str(p) for p in err['loc']) or 'row'}: {err['msg']}" for err in exc.errors())


def load_table(
    path: Path, kind: str, registry: Optional[VariableRegistry] = None, strict: bool = False
) -> LoadedTable:
    """
    Read one source table.

    Args:
        path (Path): CSV file
        kind (str): Table kind, one of ``TABLE_KINDS``
        registry (VariableRegistry, optional): When given, events with unknown variables are
            skipped with a warning diagnostic
        strict (bool): Raise ``RowError`` on the first unparseable row instead of collecting it

    Returns:
        LoadedTable: Records plus row diagnostics; every input row ends up in exactly one of the two
    """
    if kind not in SCHEMAS:
        raise DataError(f"unknown table kind: {kind}")
    schema = SCHEMAS[kind]
    path = Path(path)
    if not path.is_file():
        raise DataError(f"missing source table '{kind}': {path}")

    frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    for column in schema.required:
        if column not in frame.columns:
            raise SchemaError(column, kind)

    table = LoadedTable(kind=kind, n_input_rows=len(frame))
    check_variables = registry is not None and schema.record is EventRecord
    for row_number, row in enumerate(frame.to_dict(orient="records"), start=1):
        try:
            record = schema.record.model_validate(row)
        except ValidationError as exc:
            if strict:
                raise RowError(row_number, _describe(exc)) from exc
            table.diagnostics.append(RowDiagnostic(row_number, _describe(exc)))
            continue
        if check_variables and not registry.knows(record.variable_id):
            logger.warning(f"{kind} row {row_number}: unknown variable '{record.variable_id}' ignored")
            table.diagnostics.append(RowDiagnostic(row_number, f"unknown variable {record.variable_id}", "warning"))
            continue
        table.records.append(record)

    if table.errors:
        logger.warning(f"{kind}: {len(table.errors)} of {table.n_input_rows} rows rejected")
    return table


def _cell(schema: TableSchema, column: str, value) -> str:
    if value is None:
        return ""
    if column in schema.timestamps:
        return format_timestamp(value)
    if column in schema.dates:
        return format_date(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_table(records: Iterable[SourceRecord], path: Path, kind: str) -> Path:
    """
    Write records in the CSV layout ``load_table`` reads back.

    Args:
        records (Iterable[SourceRecord]): Records of the table kind
        path (Path): Destination CSV
        kind (str): Table kind

    Returns:
        Path: The written file
    """
    schema = SCHEMAS[kind]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(schema.columns)
        for record in records:
            writer.writerow([_cell(schema, column, getattr(record, column, None)) for column in schema.columns])
    return path


@dataclass
class SourceTables:
    """Every source table of one data root, typed and validated."""

    root: Path
    stays: List[StayRecord]
    vitals: List[EventRecord]
    labs: List[EventRecord]
    medications: List[MedicationRecord]
    procedures: List[CodedEventRecord]
    diagnoses_ed: List[CodedEventRecord]
    diagnoses_hosp: List[CodedEventRecord]
    admissions: List[AdmissionRecord]
    icustays: List[IcuStayRecord]
    biometrics: List[BiometricRecord]
    ecg_manifest: List[EcgManifestRecord]
    outcomes: List[OutcomeRecord] = field(default_factory=list)
    diagnostics: Dict[str, List[RowDiagnostic]] = field(default_factory=dict)

    def outcome_by_hadm(self) -> Dict[str, OutcomeRecord]:
        return {o.hadm_id: o for o in self.outcomes}


def load_sources(root: Path, registry: Optional[VariableRegistry] = None) -> SourceTables:
    """
    Load all table kinds from ``root/<kind>.csv``.

    Triage acuity is merged into the stays and admissions are joined with ICU stays into outcomes.

    Args:
        root (Path): Data root
        registry (VariableRegistry, optional): Variable registry; the packaged one by default

    Returns:
        SourceTables: The typed tables
    """
    root = Path(root)
    registry = registry or VariableRegistry.load()
    loaded: Dict[str, LoadedTable] = {}
    for kind in TABLE_KINDS:
        path = root / f"{kind}.csv"
        if not path.is_file():
            raise DataError(f"missing source table: {kind} ({path})")
        loaded[kind] = load_table(path, kind, registry=registry)

    acuity = {t.stay_id: t.acuity for t in loaded["triage"] if t.acuity is not None}
    stays = [
        s.model_copy(update={"acuity": acuity[s.stay_id]}) if s.acuity is None and s.stay_id in acuity else s
        for s in loaded["edstays"]
    ]
    admissions = list(loaded["admissions"])
    icustays = list(loaded["icustays"])
    sources = SourceTables(
        root=root,
        stays=stays,
        vitals=list(loaded["vitalsign"]),
        labs=list(loaded["labevents"]),
        medications=list(loaded["pyxis"]),
        procedures=list(loaded["procedures"]),
        diagnoses_ed=list(loaded["diagnoses_ed"]),
        diagnoses_hosp=list(loaded["diagnoses_hosp"]),
        admissions=admissions,
        icustays=icustays,
        biometrics=list(loaded["omr"]),
        ecg_manifest=list(loaded["ecg_manifest"]),
        outcomes=outcome_records(admissions, icustays),
        diagnostics={kind: table.diagnostics for kind, table in loaded.items() if table.diagnostics},
    )
    logger.info(
        f"Loaded sources from {root}: {len(stays)} stays, {len(sources.vitals)} vitals, "
        f"{len(sources.labs)} labs, {len(sources.ecg_manifest)} ECGs"
    )
    return sources

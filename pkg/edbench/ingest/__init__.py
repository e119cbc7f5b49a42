from .records import (
    MACHINE_FEATURES,
    AdmissionRecord,
    BiometricRecord,
    CodedEventRecord,
    EcgManifestRecord,
    EventRecord,
    IcuStayRecord,
    MedicationRecord,
    OutcomeRecord,
    StayRecord,
    TriageRecord,
    WaveformRecord,
    day_of,
    format_timestamp,
    parse_timestamp,
)
from .registry import OutlierRule, VariableRegistry, VariableSpec
from .tables import SCHEMAS, TABLE_KINDS, LoadedTable, RowDiagnostic, SourceTables, load_sources, load_table, write_table
from .waveforms import WaveformStore, load_waveform, quantize, resample_waveform, write_waveform

__all__ = [
    "MACHINE_FEATURES",
    "AdmissionRecord",
    "BiometricRecord",
    "CodedEventRecord",
    "EcgManifestRecord",
    "EventRecord",
    "IcuStayRecord",
    "MedicationRecord",
    "OutcomeRecord",
    "StayRecord",
    "TriageRecord",
    "WaveformRecord",
    "day_of",
    "format_timestamp",
    "parse_timestamp",
    "OutlierRule",
    "VariableRegistry",
    "VariableSpec",
    "SCHEMAS",
    "TABLE_KINDS",
    "LoadedTable",
    "RowDiagnostic",
    "SourceTables",
    "load_sources",
    "load_table",
    "write_table",
    "WaveformStore",
    "load_waveform",
    "quantize",
    "resample_waveform",
    "write_waveform",
]

import logging
import re
from typing import Dict, Iterable, List, Optional

from ..cohort.samples import Sample
from ..ingest.records import SECONDS_PER_DAY, BiometricRecord
from ..ingest.registry import VariableRegistry
from .units import convert_units, filter_outliers

logger = logging.getLogger(__name__)

MATCH_DAYS = 30

# OMR names carry the unit as a suffix, e.g. "Weight (Lbs)"
NAME_UNITS = {"lbs": "lb", "lb": "lb", "kg": "kg", "inches": "in", "in": "in", "cm": "cm", "kg/m2": "kg/m2"}
_NAME_UNIT = re.compile(r"\(([^)]*)\)\s*$")


def result_name_unit(result_name: str) -> str:
    """Unit named in a result-name suffix such as ``Height (Inches)``; empty when there is none."""
    match = _NAME_UNIT.search(result_name.strip().lower())
    if match is None:
        return ""
    return NAME_UNITS.get(match.group(1).strip(), "")


def biometric_name(result_name: str, registry: VariableRegistry) -> Optional[str]:
    """Map an OMR result name such as ``Weight (Lbs)`` to a registry biometric."""
    name = result_name.strip().lower()
    for spec in registry.biometrics:
        if name == spec.name or name.startswith(spec.name + " ") or name.startswith(spec.name + "("):
            return spec.name
    return None


def canonical_biometrics(records: Iterable[BiometricRecord], registry: VariableRegistry) -> Dict[str, List[BiometricRecord]]:
    """Group records by biometric, filter outliers and convert to canonical units; drop missing values."""
    rules = registry.outlier_rules()
    grouped: Dict[str, List[BiometricRecord]] = {}
    for record in records:
        name = biometric_name(record.result_name, registry)
        if name is None or record.value is None:
            continue
        if not record.unit:
            record = record.model_copy(update={"unit": result_name_unit(record.result_name)})
        (record,) = filter_outliers([record], rules, name=name)
        record = convert_units(record, registry, name=name)
        if record.value is not None:
            grouped.setdefault(name, []).append(record)
    return grouped


def match_biometrics(
    sample: Sample, records: Iterable[BiometricRecord], registry: VariableRegistry
) -> Dict[str, Optional[float]]:
    """
    Height, weight and BMI closest in time to arrival, within 30 days either side.

    Args:
        sample (Sample): The sample
        records (Iterable[BiometricRecord]): The patient's OMR records
        registry (VariableRegistry): Biometric names, units and outlier rules

    Returns:
        Dict[str, Optional[float]]: Biometric -> canonical value, None when nothing is close enough
    """
    grouped = canonical_biometrics(records, registry)
    limit = MATCH_DAYS * SECONDS_PER_DAY
    values: Dict[str, Optional[float]] = {}
    for spec in registry.biometrics:
        candidates = [r for r in grouped.get(spec.name, []) if abs(r.charttime - sample.arrival) <= limit]
        if not candidates:
            values[spec.name] = None
            continue
        # ties on distance go to the earlier record
        best = min(candidates, key=lambda r: (abs(r.charttime - sample.arrival), r.charttime))
        values[spec.name] = best.value
    return values

"""
Unit conversion and outlier removal for events and biometrics.
"""

import logging
from typing import Callable, Dict, Mapping, Optional, Tuple, TypeVar

import numpy as np
import pandas as pd

from ..ingest.registry import OutlierRule, VariableRegistry, VariableSpec

logger = logging.getLogger(__name__)

LB_TO_KG = 0.45359237
IN_TO_CM = 2.54

CONVERSIONS: Dict[Tuple[str, str], Callable[[float], float]] = {
    ("degF", "degC"): lambda v: (v - 32.0) * 5.0 / 9.0,
    ("degC", "degF"): lambda v: v * 9.0 / 5.0 + 32.0,
    ("lb", "kg"): lambda v: v * LB_TO_KG,
    ("kg", "lb"): lambda v: v / LB_TO_KG,
    ("in", "cm"): lambda v: v * IN_TO_CM,
    ("cm", "in"): lambda v: v / IN_TO_CM,
}

Record = TypeVar("Record")


def convert_value(value: Optional[float], unit: str, target: str) -> Optional[float]:
    """
    Convert a value between units. An empty source unit is taken to be ``target``.

    Raises:
        KeyError: No conversion between the two units
    """
    if value is None or not unit or unit == target:
        return value
    return CONVERSIONS[(unit, target)](value)


def _spec(registry: VariableRegistry, name: str) -> Optional[VariableSpec]:
    return registry.variables.get(name)


def convert_units(event: Record, registry: VariableRegistry, name: Optional[str] = None) -> Record:
    """
    Express an event (or biometric record) in the canonical unit of its variable.

    Args:
        event: Record with ``value`` and ``unit``
        registry (VariableRegistry): Canonical units
        name (str, optional): Variable name when the record has no ``variable_id``

    Returns:
        A copy in canonical units; ``value`` is None when the unit is not recognized
    """
    name = name or event.variable_id
    spec = _spec(registry, name)
    if spec is None or event.value is None:
        return event
    try:
        value = convert_value(event.value, event.unit, spec.unit)
    except KeyError:
        logger.warning(f"{name}: unknown unit '{event.unit}', value set to missing")
        return event.model_copy(update={"value": None})
    return event.model_copy(update={"value": value, "unit": spec.unit})


def rule_admits(rule: OutlierRule, value: Optional[float], unit: str) -> bool:
    """Check ``value`` (in ``unit``) against a rule stated in ``rule.unit``."""
    if value is None:
        return True
    try:
        in_rule_unit = convert_value(value, unit or rule.unit, rule.unit)
    except KeyError:
        return True
    return rule.admits(in_rule_unit)


def filter_outliers(events, rules: Mapping[str, OutlierRule], name: Optional[str] = None) -> list:
    """
    Set values strictly beyond a variable's bounds to missing; boundary values stay.

    Rules are compared in their own unit, so the Fahrenheit temperature bounds apply to
    Celsius readings as well.

    Args:
        events: Records with ``value`` and ``unit`` (and ``variable_id`` unless ``name`` is given)
        rules (Mapping[str, OutlierRule]): Variable name -> rule
        name (str, optional): Variable name shared by all records

    Returns:
        list: Copies of the records, offending values replaced by None
    """
    out = []
    for event in events:
        rule = rules.get(name or event.variable_id)
        if rule is not None and not rule_admits(rule, event.value, event.unit):
            event = event.model_copy(update={"value": None})
        out.append(event)
    return out


def canonicalize_frame(frame: pd.DataFrame, registry: VariableRegistry, name_column: str = "variable_id") -> pd.DataFrame:
    """
    Vectorized outlier removal and unit conversion over a long frame with ``value`` and ``unit`` columns.

    Unknown units and outliers become NaN; ``unit`` is set to the canonical unit.
    """
    frame = frame.copy()
    values = frame["value"].astype(float).to_numpy(copy=True)
    units = frame["unit"].fillna("").astype(str).to_numpy()
    names = frame[name_column].to_numpy()
    canonical = np.empty(len(frame), dtype=object)
    rules = registry.outlier_rules()

    for (name, unit), positions in pd.Series(range(len(frame))).groupby([names, units]).groups.items():
        positions = np.asarray(list(positions))
        spec = _spec(registry, name)
        if spec is None:
            canonical[positions] = unit
            continue
        canonical[positions] = spec.unit
        source_unit = unit or spec.unit
        rule = rules.get(name)
        if rule is not None:
            try:
                in_rule_unit = convert_value(values[positions], source_unit, rule.unit)
            except KeyError:
                in_rule_unit = None
            if in_rule_unit is not None:
                bad = np.zeros(len(positions), dtype=bool)
                if rule.lower is not None:
                    bad |= in_rule_unit < rule.lower
                if rule.upper is not None:
                    bad |= in_rule_unit > rule.upper
                values[positions[bad]] = np.nan
        try:
            values[positions] = convert_value(values[positions], source_unit, spec.unit)
        except KeyError:
            logger.warning(f"{name}: unknown unit '{unit}' on {len(positions)} rows, values set to missing")
            values[positions] = np.nan

    frame["value"] = values
    frame["unit"] = canonical
    return frame

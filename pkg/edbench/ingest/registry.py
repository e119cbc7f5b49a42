import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Tuple

DEFAULT_REGISTRY = "variables.json"


@dataclass(frozen=True)
class OutlierRule:
    """Closed valid range of a variable; values strictly outside become missing."""

    lower: Optional[float] = None
    upper: Optional[float] = None
    unit: str = ""

    def __post_init__(self):
        if self.lower is not None and self.upper is not None and not self.lower < self.upper:
            raise ValueError(f"outlier rule lower {self.lower} must be below upper {self.upper}")

    def admits(self, value: float) -> bool:
        if self.lower is not None and value < self.lower:
            return False
        if self.upper is not None and value > self.upper:
            return False
        return True


@dataclass(frozen=True)
class VariableSpec:
    name: str
    group: str
    unit: str
    source_units: Tuple[str, ...] = ()
    outlier: Optional[OutlierRule] = None


@dataclass
class VariableRegistry:
    """
    Canonical variables of the clinical-routine feature space.

    Loaded from a JSON file so the variable lists can be extended without code changes.
    """

    stats: List[str]
    numeric_demographics: List[str]
    categorical: List[str]
    biometrics: List[VariableSpec]
    vitals: List[VariableSpec]
    labs: List[VariableSpec]
    ecg: List[str]
    source: str = ""
    _raw: bytes = field(default=b"", repr=False)

    @classmethod
    def load(cls, path: Optional[Path] = None) -> "VariableRegistry":
        """
        Load a registry file; the packaged registry is used when no path is given.

        Args:
            path (Path, optional): Registry JSON file

        Returns:
            VariableRegistry: The parsed registry
        """
        if path is None:
            raw = resources.files("edbench.data").joinpath(DEFAULT_REGISTRY).read_bytes()
            source = f"edbench.data/{DEFAULT_REGISTRY}"
        else:
            raw = Path(path).read_bytes()
            source = str(path)
        data = json.loads(raw.decode("utf-8"))

        def specs(group: str) -> List[VariableSpec]:
            out = []
            for item in data.get(group, []):
                rule = item.get("outlier")
                out.append(
                    VariableSpec(
                        name=item["name"],
                        group=group,
                        unit=item["unit"],
                        source_units=tuple(item.get("source_units", [])),
                        outlier=OutlierRule(rule.get("lower"), rule.get("upper"), rule.get("unit", item["unit"]))
                        if rule
                        else None,
                    )
                )
            return out

        return cls(
            stats=list(data["stats"]),
            numeric_demographics=list(data["demographics"]["numeric"]),
            categorical=list(data["demographics"]["categorical"]),
            biometrics=specs("biometrics"),
            vitals=specs("vitals"),
            labs=specs("labs"),
            ecg=list(data["ecg"]),
            source=source,
            _raw=raw,
        )

    @property
    def event_variables(self) -> Dict[str, VariableSpec]:
        return {spec.name: spec for spec in self.vitals + self.labs}

    @property
    def variables(self) -> Dict[str, VariableSpec]:
        return {spec.name: spec for spec in self.biometrics + self.vitals + self.labs}

    def knows(self, variable_id: str) -> bool:
        return variable_id in self.event_variables

    def group_of(self, variable_id: str) -> str:
        return self.variables[variable_id].group

    def numeric_columns(self) -> List[str]:
        """Ordered numeric clinical-routine columns: demographics, biometrics, vital and lab trends."""
        columns = list(self.numeric_demographics)
        columns += [spec.name for spec in self.biometrics]
        for spec in self.vitals + self.labs:
            columns += [f"{spec.name}_{stat}" for stat in self.stats]
        return columns

    def ecg_columns(self) -> List[str]:
        return [f"ecg_{name}" for name in self.ecg]

    def outlier_rules(self) -> Dict[str, OutlierRule]:
        return {name: spec.outlier for name, spec in self.variables.items() if spec.outlier is not None}

    @property
    def hash(self) -> str:
        """Content hash of the column layout; checkpoints record it."""
        layout = json.dumps(
            {"numeric": self.numeric_columns(), "categorical": self.categorical, "ecg": self.ecg_columns()},
            sort_keys=True,
        )
        return hashlib.sha256(layout.encode("utf-8")).hexdigest()[:16]

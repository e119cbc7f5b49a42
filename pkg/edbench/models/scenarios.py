from dataclasses import dataclass
from typing import Dict, Literal

from ..errors import ConfigError


@dataclass(frozen=True)
class ScenarioSpec:
    """Which model family runs on which inputs."""

    name: str
    family: Literal["tree", "deep"]
    routine: bool = False
    ecg_features: bool = False
    waveform: bool = False

    @property
    def uses_tabular(self) -> bool:
        return self.routine or self.ecg_features


SCENARIOS: Dict[str, ScenarioSpec] = {
    "routine_tree": ScenarioSpec("routine_tree", "tree", routine=True),
    "ecgfeat_tree": ScenarioSpec("ecgfeat_tree", "tree", ecg_features=True),
    "wave_deep": ScenarioSpec("wave_deep", "deep", waveform=True),
    "ecgfeat_routine_tree": ScenarioSpec("ecgfeat_routine_tree", "tree", routine=True, ecg_features=True),
    "wave_routine_deep": ScenarioSpec("wave_routine_deep", "deep", routine=True, waveform=True),
}

# tabular-only deep model, used for ablations next to the five scenarios
ABLATION_SCENARIOS: Dict[str, ScenarioSpec] = {
    "routine_deep": ScenarioSpec("routine_deep", "deep", routine=True),
}


def get_scenario(name: str) -> ScenarioSpec:
    if name in SCENARIOS:
        return SCENARIOS[name]
    if name in ABLATION_SCENARIOS:
        return ABLATION_SCENARIOS[name]
    raise ConfigError(f"unknown scenario: {name} (choose from {', '.join(SCENARIOS)})")

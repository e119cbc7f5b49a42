"""
Configuration objects for every pipeline stage.

Values come from JSON experiment files; ``EDBENCH_*`` environment variables
(and a ``.env`` file) override the data root and output directory.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .errors import ConfigError

# Load environment variables
load_dotenv()

Scenario = Literal["routine_tree", "ecgfeat_tree", "wave_deep", "ecgfeat_routine_tree", "wave_routine_deep"]
Task = Literal["diagnoses", "deterioration"]
Profile = Literal["desk", "paper"]

SCENARIO_NAMES: Tuple[str, ...] = (
    "routine_tree",
    "ecgfeat_tree",
    "wave_deep",
    "ecgfeat_routine_tree",
    "wave_routine_deep",
)

MODEL_PROFILES: Dict[str, Dict[str, Any]] = {
    "paper": {"n_blocks": 4, "d_model": 512, "d_state": 8, "epochs": 20, "batch_size": 64},
    "desk": {"n_blocks": 2, "d_model": 64, "d_state": 8, "epochs": 5, "batch_size": 64},
}


class DeepModelConfig(BaseModel):
    """Hyperparameters of the state-space waveform encoder, tabular encoder and fusion head."""

    n_blocks: int = 4
    d_model: int = 512
    d_state: int = 8
    lr: float = 0.001
    weight_decay: float = 0.001
    schedule: Literal["constant"] = "constant"
    batch_size: int = 64
    epochs: int = 20
    sampling_rate_target: int = 100
    pooling: Literal["mean", "max"] = "mean"
    mlp_layers: int = 3
    embed_dim: int = 8
    head: Literal["linear"] = "linear"
    dropout: float = 0.0
    seed: int = 0

    @field_validator("n_blocks", "d_model", "d_state", "batch_size", "sampling_rate_target", "mlp_layers", "embed_dim")
    @classmethod
    def _positive_int(cls, value: int) -> int:
        if value <= 0:
            raise ValueError("must be positive")
        return value

    @field_validator("lr", "weight_decay")
    @classmethod
    def _positive_float(cls, value: float) -> float:
        if value <= 0:
            raise ValueError("must be positive")
        return value

    @field_validator("epochs")
    @classmethod
    def _non_negative(cls, value: int) -> int:
        if value < 0:
            raise ValueError("must be non-negative")
        return value

    @classmethod
    def from_profile(cls, profile: str = "desk", **overrides) -> "DeepModelConfig":
        """
        Build a config from a named profile.

        Args:
            profile (str): ``desk`` or ``paper``
            **overrides: Field values replacing the profile defaults

        Returns:
            DeepModelConfig: The resolved config
        """
        if profile not in MODEL_PROFILES:
            raise ConfigError(f"unknown model profile: {profile}")
        values = dict(MODEL_PROFILES[profile])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class TreeConfig(BaseModel):
    """Gradient-boosted tree settings; defaults are the library defaults."""

    n_estimators: int = 100
    max_depth: int = 6
    learning_rate: float = 0.3
    use_imputed: bool = False
    n_jobs: int = 1
    seed: int = 0


class SplitConfig(BaseModel):
    n_folds: int = 20
    val_fold: int = 18
    test_fold: int = 19
    seed: int = 42
    mask_columns: bool = True
    fold_file: Optional[Path] = None

    @model_validator(mode="after")
    def _check_roles(self) -> "SplitConfig":
        if self.n_folds < 3:
            raise ValueError("n_folds must be at least 3")
        for fold in (self.val_fold, self.test_fold):
            if not 0 <= fold < self.n_folds:
                raise ValueError(f"fold {fold} outside 0..{self.n_folds - 1}")
        if self.val_fold == self.test_fold:
            raise ValueError("val_fold and test_fold must differ")
        return self


class LabelConfig(BaseModel):
    min_count: int = 10
    vocab_file: Optional[Path] = None
    icd9_map: Optional[Path] = None
    deterioration_spec: Optional[Path] = None


class BootstrapConfig(BaseModel):
    n_iter: int = 1000
    level: float = 0.95
    seed: int = 0

    @field_validator("level")
    @classmethod
    def _level_range(cls, value: float) -> float:
        if not 0 < value < 1:
            raise ValueError("level must lie in (0, 1)")
        return value


class PlantedEffect(BaseModel):
    label: str
    modality: Literal["waveform", "tabular", "both", "missingness"]
    effect_size: float = 1.0

    @field_validator("effect_size")
    @classmethod
    def _non_negative(cls, value: float) -> float:
        if value < 0:
            raise ValueError("effect sizes must be non-negative")
        return value


def _default_effects() -> List[PlantedEffect]:
    return [
        PlantedEffect(label="L_wave", modality="waveform", effect_size=1.0),
        PlantedEffect(label="L_tab", modality="tabular", effect_size=1.0),
        PlantedEffect(label="L_both", modality="both", effect_size=1.0),
        PlantedEffect(label="L_miss", modality="missingness", effect_size=1.0),
    ]


class SynthConfig(BaseModel):
    """Settings of the synthetic fixture generator."""

    n_patients: int = 200
    visits_per_patient: Tuple[int, int] = (1, 2)
    ecgs_per_visit: Tuple[int, int] = (1, 2)
    sampling_rate: int = 100
    noise_level: float = 0.05
    effects: List[PlantedEffect] = Field(default_factory=_default_effects)
    missingness: Literal["random", "informative"] = "informative"
    measure_prob: float = 0.7
    background_codes: int = 12
    seed: int = 7

    @field_validator("n_patients", "sampling_rate")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value <= 0:
            raise ValueError("must be positive")
        return value

    def effect(self, label: str) -> float:
        for planted in self.effects:
            if planted.label == label:
                return planted.effect_size
        return 0.0


class ExperimentConfig(BaseSettings):
    """
    One experiment: where the data lives, which scenario to run and how.

    ``EDBENCH_DATA_ROOT`` and ``EDBENCH_OUTPUT_DIR`` override the file values.
    """

    model_config = SettingsConfigDict(env_prefix="EDBENCH_", env_nested_delimiter="__", extra="forbid")

    data_root: Path = Path("data")
    output_dir: Path = Path("outputs")
    scenario: Scenario = "wave_routine_deep"
    task: Task = "deterioration"
    profile: Profile = "desk"
    seed: int = 0
    train_on_all_ecgs: bool = True
    evaluate_first_only: bool = True
    splits: SplitConfig = Field(default_factory=SplitConfig)
    labels: LabelConfig = Field(default_factory=LabelConfig)
    tree: TreeConfig = Field(default_factory=TreeConfig)
    deep: Dict[str, Any] = Field(default_factory=dict)
    bootstrap: BootstrapConfig = Field(default_factory=BootstrapConfig)
    synth: SynthConfig = Field(default_factory=SynthConfig)

    @classmethod
    def settings_customise_sources(cls, settings_cls, init_settings, env_settings, dotenv_settings, file_secret_settings):
        # environment beats the config file
        return env_settings, init_settings, dotenv_settings, file_secret_settings

    @classmethod
    def from_json(cls, path: Path, **overrides) -> "ExperimentConfig":
        """
        Load an experiment config from a JSON file.

        Args:
            path (Path): JSON config file
            **overrides: Top-level values replacing the file's (e.g. seed, profile)

        Returns:
            ExperimentConfig: The validated config
        """
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.build(**data)

    @classmethod
    def build(cls, **values) -> "ExperimentConfig":
        try:
            return cls(**values)
        except ValidationError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def build_dir(self) -> Path:
        return Path(self.output_dir) / "build"

    @property
    def run_dir(self) -> Path:
        return Path(self.output_dir) / "runs" / f"{self.task}-{self.scenario}-seed{self.seed}"

    def deep_config(self) -> DeepModelConfig:
        overrides = dict(self.deep)
        overrides.setdefault("seed", self.seed)
        try:
            return DeepModelConfig.from_profile(self.profile, **overrides)
        except ValidationError as exc:
            raise ConfigError(str(exc)) from exc

    def tree_config(self) -> TreeConfig:
        return self.tree.model_copy(update={"seed": self.seed})

    def to_dict(self) -> Dict[str, Any]:
        return json.loads(self.model_dump_json())

"""
Self-describing model checkpoints.

A checkpoint carries everything needed to score new rows: the label space and feature
registry it was trained against, the fitted preprocessing state and the weights (network
tensors or serialised boosters).
"""

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Tuple

import torch

from ..config import DeepModelConfig, TreeConfig
from ..errors import CheckpointMismatchError
from ..labels.space import LabelSpace
from .base_model import BaseModel
from .data import InputPreprocessor
from .deep_model import DeepModel
from .layers import S4D_PARAMETERIZATION
from .scenarios import get_scenario
from .tree import TreeBaseline

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


@dataclass
class Checkpoint:
    scenario: str
    task: str
    labels: List[str]
    label_space_hash: str
    registry_hash: str
    model_config: Dict[str, Any]
    preprocessing: Dict[str, Any]
    weights: Dict[str, Any]
    metadata: Dict[str, Any] = field(default_factory=dict)
    experiment: Dict[str, Any] = field(default_factory=dict)
    version: int = CHECKPOINT_VERSION

    def save(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        torch.save(asdict(self), path)
        logger.info(f"Saved checkpoint {path}")
        return path

    @classmethod
    def load(cls, path: Path) -> "Checkpoint":
        path = Path(path)
        if not path.is_file():
            raise CheckpointMismatchError(f"checkpoint not found: {path}")
        return cls(**torch.load(path, map_location="cpu", weights_only=False))

    def verify(self, space: LabelSpace, registry_hash: str):
        """
        Refuse data built against another label space or feature registry.

        Args:
            space (LabelSpace): Label space of the rows to score
            registry_hash (str): Registry hash of their feature matrix
        """
        if space.hash != self.label_space_hash:
            raise CheckpointMismatchError(
                f"label space hash {space.hash} does not match checkpoint {self.label_space_hash}"
            )
        if registry_hash != self.registry_hash:
            raise CheckpointMismatchError(
                f"feature registry hash {registry_hash} does not match checkpoint {self.registry_hash}"
            )

    @property
    def space(self) -> LabelSpace:
        return LabelSpace(task=self.task, labels=tuple(self.labels))


def make_checkpoint(
    model: BaseModel, preprocessor: InputPreprocessor, registry_hash: str, experiment: Dict[str, Any] = None
) -> Checkpoint:
    """
    Capture a trained model and its preprocessing.

    Args:
        model (BaseModel): Trained tree or deep model
        preprocessor (InputPreprocessor): Preprocessing fitted on the training split
        registry_hash (str): Hash of the feature registry the inputs were built with
        experiment (dict, optional): Experiment config recorded for provenance

    Returns:
        Checkpoint: The checkpoint
    """
    if isinstance(model, DeepModel):
        weights = {k: v.detach().cpu() for k, v in model.network.state_dict().items()}
        metadata = {
            "n_numeric": model.n_numeric,
            "vocab_sizes": model.vocab_sizes,
            "sequence_layer": S4D_PARAMETERIZATION,
            "score_convention": "probability",
        }
        if model.result is not None:
            metadata.update(best_epoch=model.result.best_epoch, history=model.result.history)
    else:
        weights = model.state_dict()
        metadata = {"skipped": dict(model.skipped), "score_convention": "probability"}
    return Checkpoint(
        scenario=model.scenario.name,
        task=model.space.task,
        labels=list(model.space.labels),
        label_space_hash=model.space.hash,
        registry_hash=registry_hash,
        model_config=model.config.model_dump(),
        preprocessing=preprocessor.state_dict(),
        weights=weights,
        metadata=metadata,
        experiment=experiment or {},
    )


def restore_model(checkpoint: Checkpoint) -> Tuple[BaseModel, InputPreprocessor]:
    """
    Rebuild the model and preprocessing stored in a checkpoint.

    Args:
        checkpoint (Checkpoint): Loaded checkpoint

    Returns:
        Tuple[BaseModel, InputPreprocessor]: Ready-to-score model and its preprocessing
    """
    scenario = get_scenario(checkpoint.scenario)
    preprocessor = InputPreprocessor.from_state(scenario, checkpoint.preprocessing)
    if scenario.family == "deep":
        config = DeepModelConfig(**checkpoint.model_config)
        model = DeepModel(scenario, checkpoint.space, config, checkpoint.metadata["vocab_sizes"])
        model.build(checkpoint.metadata["n_numeric"])
        model.network.load_state_dict(checkpoint.weights)
    else:
        model = TreeBaseline(scenario, checkpoint.space, TreeConfig(**checkpoint.model_config))
        model.load_state_dict(checkpoint.weights)
    return model, preprocessor

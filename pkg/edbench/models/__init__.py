from .base_model import BaseModel
from .checkpoint import Checkpoint, make_checkpoint, restore_model
from .data import CATEGORICAL_FIELDS, InputPreprocessor, ModelInputs, WaveformNormalizer, load_waveform_array
from .deep_model import DeepModel, TrainResult, build_network, predict_logits, train_deep
from .layers import S4D_PARAMETERIZATION, FusionClassifier, S4DLayer, SequenceBlock, TabularEncoder, WaveformEncoder
from .loss import masked_bce
from .scenarios import ABLATION_SCENARIOS, SCENARIOS, ScenarioSpec, get_scenario
from .tree import TreeBaseline

__all__ = [
    "BaseModel",
    "Checkpoint",
    "make_checkpoint",
    "restore_model",
    "CATEGORICAL_FIELDS",
    "InputPreprocessor",
    "ModelInputs",
    "WaveformNormalizer",
    "load_waveform_array",
    "DeepModel",
    "TrainResult",
    "build_network",
    "predict_logits",
    "train_deep",
    "S4D_PARAMETERIZATION",
    "FusionClassifier",
    "S4DLayer",
    "SequenceBlock",
    "TabularEncoder",
    "WaveformEncoder",
    "masked_bce",
    "ABLATION_SCENARIOS",
    "SCENARIOS",
    "ScenarioSpec",
    "get_scenario",
    "TreeBaseline",
]

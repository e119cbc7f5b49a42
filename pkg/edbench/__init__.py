"""
EDBench - A multimodal emergency-department benchmark: cohort linking, feature
engineering, diagnosis and deterioration labels, tree and state-space models,
and bootstrap AUROC evaluation.
"""

from .config import BootstrapConfig, DeepModelConfig, ExperimentConfig, SplitConfig, SynthConfig, TreeConfig
from .errors import EdbenchError
from .evaluation.auroc import AurocAnalysis
from .evaluation.reports import EvalReport
from .models.base_model import BaseModel
from .models.deep_model import DeepModel
from .models.tree import TreeBaseline

__version__ = "0.1.0"
__all__ = [
    "BootstrapConfig",
    "DeepModelConfig",
    "ExperimentConfig",
    "SplitConfig",
    "SynthConfig",
    "TreeConfig",
    "EdbenchError",
    "AurocAnalysis",
    "EvalReport",
    "BaseModel",
    "DeepModel",
    "TreeBaseline",
]

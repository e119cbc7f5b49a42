"""
Deep models over waveforms, tabular inputs or both, and their training loop.
"""

import copy
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import torch

from ..config import DeepModelConfig
from ..errors import ShapeError, TrainingDivergenceError, UndefinedMetricError
from ..evaluation.metrics import macro_auroc
from ..labels.space import LabelSpace
from .base_model import BaseModel
from .data import ModelInputs
from .layers import FusionClassifier, TabularEncoder, WaveformEncoder
from .loss import masked_bce
from .scenarios import ScenarioSpec

logger = logging.getLogger(__name__)


@dataclass
class TrainResult:
    best_epoch: int
    best_metric: float
    baseline_metric: float
    history: List[Dict[str, float]] = field(default_factory=list)


def build_network(
    scenario: ScenarioSpec,
    n_labels: int,
    config: DeepModelConfig,
    n_numeric: int = 0,
    vocab_sizes: Optional[List[int]] = None,
) -> FusionClassifier:
    """
    Network for a deep scenario, initialised from ``config.seed``.

    Args:
        scenario (ScenarioSpec): Deep scenario
        n_labels (int): Label-space size
        config (DeepModelConfig): Architecture settings
        n_numeric (int): Width of the numeric tabular input
        vocab_sizes (List[int], optional): Embedding table sizes of the categorical fields

    Returns:
        FusionClassifier: The untrained network
    """
    torch.manual_seed(config.seed)
    waveform_encoder = None
    tabular_encoder = None
    if scenario.waveform:
        waveform_encoder = WaveformEncoder(
            d_model=config.d_model,
            n_blocks=config.n_blocks,
            d_state=config.d_state,
            dropout=config.dropout,
            pooling=config.pooling,
        )
    if scenario.uses_tabular:
        tabular_encoder = TabularEncoder(
            n_numeric=n_numeric,
            vocab_sizes=vocab_sizes or [],
            d_model=config.d_model,
            embed_dim=config.embed_dim,
            mlp_layers=config.mlp_layers,
            dropout=config.dropout,
        )
    return FusionClassifier(n_labels, waveform_encoder, tabular_encoder)


def _batch(inputs: ModelInputs, index: np.ndarray) -> Dict[str, torch.Tensor]:
    tensors = {}
    if inputs.waveforms is not None:
        tensors["waveforms"] = torch.from_numpy(np.ascontiguousarray(inputs.waveforms[index]))
    if inputs.tabular is not None:
        tensors["numeric"] = torch.from_numpy(np.ascontiguousarray(inputs.tabular[index]))
    if inputs.categorical is not None:
        tensors["categorical"] = torch.from_numpy(np.ascontiguousarray(inputs.categorical[index])).long()
    return tensors


@torch.no_grad()
def predict_logits(model: FusionClassifier, inputs: ModelInputs, batch_size: int = 256) -> np.ndarray:
    model.eval()
    out = []
    for start in range(0, len(inputs), batch_size):
        index = np.arange(start, min(start + batch_size, len(inputs)))
        out.append(model(**_batch(inputs, index)).double().numpy())
    if not out:
        return np.zeros((0, model.head.out_features))
    return np.concatenate(out)


def _validation_metric(model: FusionClassifier, val: ModelInputs, batch_size: int) -> float:
    if len(val) == 0:
        return float("nan")
    try:
        return macro_auroc(predict_logits(model, val, batch_size), val.labels)
    except UndefinedMetricError:
        return float("nan")


def _improves(metric: float, best: float) -> bool:
    if math.isnan(metric):
        return False
    return math.isnan(best) or metric > best


def train_deep(
    model: FusionClassifier, train: ModelInputs, val: ModelInputs, config: DeepModelConfig
) -> TrainResult:
    """
    Train with AdamW at a constant learning rate and keep the best validation epoch.

    The validation metric is macro AUROC over the first ECG of each visit. On return
    ``model`` holds the weights of the selected epoch; epoch 0 is the initial model.

    Args:
        model (FusionClassifier): Network to train in place
        train (ModelInputs): Training rows (all ECGs)
        val (ModelInputs): Validation rows
        config (DeepModelConfig): Optimiser and schedule settings

    Returns:
        TrainResult: Selected epoch, its metric, the epoch-0 metric and the per-epoch history
    """
    generator = torch.Generator().manual_seed(config.seed)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.lr, weight_decay=config.weight_decay)
    val_first = val.first_only()
    labels = torch.from_numpy(train.labels.astype(np.int64))

    baseline = _validation_metric(model, val_first, config.batch_size)
    best_metric, best_epoch = baseline, 0
    best_state = copy.deepcopy(model.state_dict())
    history = [{"epoch": 0, "train_loss": float("nan"), "val_macro_auroc": baseline}]
    logger.info(f"epoch 0: val macro AUROC {baseline:.4f}")

    for epoch in range(1, config.epochs + 1):
        model.train()
        order = torch.randperm(len(train), generator=generator).numpy()
        total, n_batches = 0.0, 0
        for start in range(0, len(order), config.batch_size):
            index = order[start : start + config.batch_size]
            logits = model(**_batch(train, index))
            try:
                loss = masked_bce(logits, labels[torch.from_numpy(index)])
            except TrainingDivergenceError as exc:
                raise TrainingDivergenceError(f"epoch {epoch}, batch {n_batches}: {exc}") from exc
            if not torch.isfinite(loss):
                raise TrainingDivergenceError(f"epoch {epoch}, batch {n_batches}: loss {loss.item()}")
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += loss.item()
            n_batches += 1

        metric = _validation_metric(model, val_first, config.batch_size)
        train_loss = total / max(n_batches, 1)
        history.append({"epoch": epoch, "train_loss": train_loss, "val_macro_auroc": metric})
        logger.info(f"epoch {epoch}: train loss {train_loss:.4f}, val macro AUROC {metric:.4f}")
        if _improves(metric, best_metric):
            best_metric, best_epoch = metric, epoch
            best_state = copy.deepcopy(model.state_dict())

    model.load_state_dict(best_state)
    logger.info(f"Selected epoch {best_epoch} (val macro AUROC {best_metric:.4f})")
    return TrainResult(best_epoch=best_epoch, best_metric=best_metric, baseline_metric=baseline, history=history)


class DeepModel(BaseModel):
    """
    State-space waveform encoder, tabular encoder, or both fused by concatenation.

    The network is built on the first ``fit`` call from the shapes of the training inputs.
    """

    def __init__(
        self,
        scenario: ScenarioSpec,
        space: LabelSpace,
        config: Optional[DeepModelConfig] = None,
        vocab_sizes: Optional[List[int]] = None,
    ):
        super().__init__(scenario, space)
        self.config = config or DeepModelConfig()
        self.vocab_sizes = list(vocab_sizes or [])
        self.network: Optional[FusionClassifier] = None
        self.n_numeric = 0
        self.result: Optional[TrainResult] = None

    def build(self, n_numeric: int = 0) -> FusionClassifier:
        self.n_numeric = n_numeric
        self.network = build_network(self.scenario, len(self.space), self.config, n_numeric, self.vocab_sizes)
        return self.network

    def fit(self, train: ModelInputs, val: Optional[ModelInputs] = None) -> Dict[str, Any]:
        if val is None:
            raise ShapeError(f"{self.name}: deep training selects its epoch on validation rows")
        if self.network is None:
            self.build(train.tabular.shape[1] if train.tabular is not None else 0)
        self.result = train_deep(self.network, train, val, self.config)
        return {
            "best_epoch": self.result.best_epoch,
            "best_val_macro_auroc": self.result.best_metric,
            "baseline_val_macro_auroc": self.result.baseline_metric,
            "history": self.result.history,
        }

    def predict_proba(self, inputs: ModelInputs) -> np.ndarray:
        logits = predict_logits(self.network, inputs, self.config.batch_size)
        return 1.0 / (1.0 + np.exp(-logits))

    def model_metrics(self) -> Dict[str, Any]:
        return {"family": "deep", **self.network.describe(), **self.config.model_dump()}

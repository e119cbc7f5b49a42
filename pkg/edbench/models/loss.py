import torch
import torch.nn.functional as F

from ..errors import ShapeError, TrainingDivergenceError
from ..labels.space import MASKED


def masked_bce(logits: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """
    Binary cross-entropy averaged over the entries whose label is not MASKED.

    Masked entries contribute neither to the value nor to the gradient; with every
    entry masked the loss is 0.

    Args:
        logits (torch.Tensor): batch x labels logits
        labels (torch.Tensor): batch x labels ternary labels

    Returns:
        torch.Tensor: Scalar loss
    """
    if logits.shape != labels.shape:
        raise ShapeError(f"logits {tuple(logits.shape)} and labels {tuple(labels.shape)} differ")
    if not torch.isfinite(logits).all():
        raise TrainingDivergenceError("non-finite logits")
    active = labels != MASKED
    targets = torch.where(active, labels, torch.zeros_like(labels)).to(logits.dtype)
    losses = F.binary_cross_entropy_with_logits(logits, targets, reduction="none")
    losses = torch.where(active, losses, torch.zeros_like(losses))
    return losses.sum() / active.sum().clamp(min=1)

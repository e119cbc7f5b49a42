"""
Neural building blocks: a diagonal state-space sequence layer, the waveform and
tabular encoders, and the concatenation-fusion head.
"""

import math
from typing import Dict, Optional, Sequence

import torch
import torch.nn as nn

from ..errors import CategoryIndexError, ShapeError
from ..ingest.records import N_LEADS

S4D_PARAMETERIZATION = {
    "layer": "S4D-Lin",
    "direction": "unidirectional",
    "discretization": "zoh",
    "modes": "d_state // 2 complex-conjugate pairs",
    "a_init": "-0.5 + i*pi*n",
    "dt_range": [0.001, 0.1],
}


class S4DLayer(nn.Module):
    """
    Diagonal structured state-space layer over ``d_model`` independent channels.

    The convolution kernel ``K[l] = 2 Re(sum_n C_n B_n exp(dt A_n l))`` is applied with
    an FFT of length 2L, followed by the skip term ``D * u``. Input and output are (B, H, L).
    """

    def __init__(self, d_model: int, d_state: int = 8, dt_min: float = 0.001, dt_max: float = 0.1):
        super().__init__()
        n_modes = max(d_state // 2, 1)
        self.d_model = d_model
        self.n_modes = n_modes

        log_dt = torch.rand(d_model) * (math.log(dt_max) - math.log(dt_min)) + math.log(dt_min)
        self.log_dt = nn.Parameter(log_dt)
        self.C = nn.Parameter(torch.randn(d_model, n_modes, 2) * math.sqrt(0.5))
        self.log_A_real = nn.Parameter(torch.log(0.5 * torch.ones(d_model, n_modes)))
        self.A_imag = nn.Parameter(math.pi * torch.arange(n_modes, dtype=torch.float32).repeat(d_model, 1))
        self.D = nn.Parameter(torch.randn(d_model))

    def kernel(self, length: int) -> torch.Tensor:
        """Convolution kernel of shape (H, L)."""
        dt = torch.exp(self.log_dt)
        C = torch.view_as_complex(self.C)
        A = -torch.exp(self.log_A_real) + 1j * self.A_imag
        dtA = A * dt.unsqueeze(-1)
        # zero-order hold with B = 1 folded into C
        C = C * (torch.exp(dtA) - 1.0) / A
        steps = torch.arange(length, device=A.device, dtype=self.log_dt.dtype)
        powers = torch.exp(dtA.unsqueeze(-1) * steps)
        return 2 * torch.einsum("hn,hnl->hl", C, powers).real

    def forward(self, u: torch.Tensor) -> torch.Tensor:
        length = u.size(-1)
        k = self.kernel(length)
        k_f = torch.fft.rfft(k, n=2 * length)
        u_f = torch.fft.rfft(u, n=2 * length)
        y = torch.fft.irfft(u_f * k_f, n=2 * length)[..., :length]
        return y + u * self.D.unsqueeze(-1)


class SequenceBlock(nn.Module):
    """State-space mixing, GELU, dropout, output projection, residual and post-norm."""

    def __init__(self, d_model: int, d_state: int = 8, dropout: float = 0.0):
        super().__init__()
        self.s4 = S4DLayer(d_model, d_state)
        self.activation = nn.GELU()
        self.dropout = nn.Dropout(dropout)
        self.output = nn.Linear(d_model, d_model)
        self.norm = nn.LayerNorm(d_model)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        # x: (B, H, L)
        z = self.dropout(self.activation(self.s4(x)))
        z = self.output(z.transpose(-1, -2)).transpose(-1, -2)
        x = x + z
        return self.norm(x.transpose(-1, -2)).transpose(-1, -2)


class WaveformEncoder(nn.Module):
    """
    Embeds a (B, 12, L) ECG batch into (B, d_model).

    Leads are projected to ``d_model`` channels per time step, passed through
    ``n_blocks`` sequence blocks and pooled over time.
    """

    def __init__(
        self,
        d_model: int = 512,
        n_blocks: int = 4,
        d_state: int = 8,
        dropout: float = 0.0,
        pooling: str = "mean",
        n_leads: int = N_LEADS,
    ):
        super().__init__()
        self.n_leads = n_leads
        self.d_model = d_model
        self.pooling = pooling
        self.encoder = nn.Linear(n_leads, d_model)
        self.blocks = nn.ModuleList([SequenceBlock(d_model, d_state, dropout) for _ in range(n_blocks)])

    @property
    def output_dim(self) -> int:
        return self.d_model

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x is None or x.dim() != 3 or x.size(1) != self.n_leads:
            raise ShapeError(f"expected (batch, {self.n_leads}, length) waveforms, got {None if x is None else tuple(x.shape)}")
        x = self.encoder(x.transpose(-1, -2)).transpose(-1, -2)
        for block in self.blocks:
            x = block(x)
        if self.pooling == "max":
            return x.max(dim=-1).values
        return x.mean(dim=-1)


class TabularEncoder(nn.Module):
    """
    Embeds numeric inputs (imputed values and mask bits) and categorical indices.

    Each categorical field has its own embedding table whose row 0 stands for unknown values.
    The embeddings are concatenated with the numeric inputs and fed to a ReLU perceptron.
    """

    def __init__(
        self,
        n_numeric: int,
        vocab_sizes: Sequence[int] = (),
        d_model: int = 512,
        embed_dim: int = 8,
        mlp_layers: int = 3,
        dropout: float = 0.0,
    ):
        super().__init__()
        self.n_numeric = n_numeric
        self.d_model = d_model
        self.embeddings = nn.ModuleList([nn.Embedding(size, embed_dim) for size in vocab_sizes])
        layers = []
        width = n_numeric + embed_dim * len(vocab_sizes)
        for i in range(mlp_layers):
            layers.append(nn.Linear(width, d_model))
            if i < mlp_layers - 1:
                layers += [nn.ReLU(), nn.Dropout(dropout)]
            width = d_model
        self.mlp = nn.Sequential(*layers)

    @property
    def output_dim(self) -> int:
        return self.d_model

    def forward(self, numeric: torch.Tensor, categorical: Optional[torch.Tensor] = None) -> torch.Tensor:
        if numeric is None or numeric.dim() != 2 or numeric.size(1) != self.n_numeric:
            raise ShapeError(f"expected (batch, {self.n_numeric}) numeric inputs, got {None if numeric is None else tuple(numeric.shape)}")
        parts = [numeric]
        if self.embeddings:
            if categorical is None or categorical.size(1) != len(self.embeddings):
                raise ShapeError(f"expected {len(self.embeddings)} categorical columns")
            for j, table in enumerate(self.embeddings):
                index = categorical[:, j]
                if index.numel() and (index.min() < 0 or index.max() >= table.num_embeddings):
                    raise CategoryIndexError(
                        f"categorical column {j}: index outside 0..{table.num_embeddings - 1}"
                    )
                parts.append(table(index))
        return self.mlp(torch.cat(parts, dim=-1))


class FusionClassifier(nn.Module):
    """
    Concatenates the available embeddings and maps them to one logit per label.

    With a single encoder this is the unimodal deep model.
    """

    def __init__(
        self,
        n_labels: int,
        waveform_encoder: Optional[WaveformEncoder] = None,
        tabular_encoder: Optional[TabularEncoder] = None,
    ):
        super().__init__()
        if waveform_encoder is None and tabular_encoder is None:
            raise ShapeError("a classifier needs at least one encoder")
        self.waveform_encoder = waveform_encoder
        self.tabular_encoder = tabular_encoder
        width = sum(e.output_dim for e in (waveform_encoder, tabular_encoder) if e is not None)
        self.head = nn.Linear(width, n_labels)

    def classify(self, embeddings: Sequence[torch.Tensor]) -> torch.Tensor:
        fused = torch.cat(list(embeddings), dim=-1)
        if fused.size(-1) != self.head.in_features:
            raise ShapeError(f"fused embedding has {fused.size(-1)} features, head expects {self.head.in_features}")
        return self.head(fused)

    def forward(
        self,
        waveforms: Optional[torch.Tensor] = None,
        numeric: Optional[torch.Tensor] = None,
        categorical: Optional[torch.Tensor] = None,
    ) -> torch.Tensor:
        embeddings = []
        if self.waveform_encoder is not None:
            embeddings.append(self.waveform_encoder(waveforms))
        if self.tabular_encoder is not None:
            embeddings.append(self.tabular_encoder(numeric, categorical))
        return self.classify(embeddings)

    def describe(self) -> Dict[str, object]:
        return {
            "waveform_encoder": self.waveform_encoder is not None,
            "tabular_encoder": self.tabular_encoder is not None,
            "n_labels": self.head.out_features,
            "n_parameters": sum(p.numel() for p in self.parameters()),
            "sequence_layer": S4D_PARAMETERIZATION,
        }

"""Baseline architectures: a small CNN encoder plus four scoring heads.

Every model maps one question image and four candidate answers to four
scores; cross-entropy over the softmaxed scores trains all models except
Siamese, which uses binary cross-entropy on per-pair cosine similarity and
picks the LOWEST similarity at evaluation time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
import torch.nn.functional as F
from torch import nn

from .data import MAX_PIECES, N_CANDIDATES

MODEL_KINDS = ("cnn_mlp", "siamese", "cnn_max", "cnn_glore")


@dataclass(frozen=True)
class EncoderConfig:
    feature_maps: tuple[int, ...] = (16, 32, 64, 128)
    kernel: int = 7
    strides: tuple[int, ...] = (2, 2, 2, 2)
    embed_dim: int = 512
    pool: int = 4          # adaptive pooling grid, makes the head size-agnostic
    score_hidden: int = 0  # scorer MLP width; 0 means embed_dim
    score_dropout: float = 0.0

    def __post_init__(self):
        if len(self.strides) != len(self.feature_maps):
            raise ValueError("one stride per convolutional stage")


class Encoder(nn.Module):
    """4 convolutional stages followed by adaptive pooling and a linear head."""

    def __init__(self, cfg: EncoderConfig = EncoderConfig()):
        super().__init__()
        self.cfg = cfg
        convs, norms = [], []
        prev = 1
        for maps, stride in zip(cfg.feature_maps, cfg.strides):
            convs.append(nn.Conv2d(prev, maps, cfg.kernel, stride, cfg.kernel // 2))
            norms.append(nn.BatchNorm2d(maps))
            prev = maps
        self.convs = nn.ModuleList(convs)
        self.norms = nn.ModuleList(norms)
        self.head = nn.Linear(prev * cfg.pool * cfg.pool, cfg.embed_dim)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        for conv, norm in zip(self.convs, self.norms):
            x = F.relu(norm(conv(x)))
        x = F.adaptive_avg_pool2d(x, self.cfg.pool)
        return self.head(x.flatten(1))


class ScoreMlp(nn.Module):
    """2-layer MLP scoring a (question, candidate) embedding pair."""

    def __init__(self, d: int, hidden: int = 0, dropout: float = 0.0):
        super().__init__()
        hidden = hidden or d
        # keeps pre-activations in range; without it the hidden ReLU layer
        # can die wholesale once embedding magnitudes drift
        self.norm = nn.LayerNorm(2 * d)
        self.fc1 = nn.Linear(2 * d, hidden)
        nn.init.constant_(self.fc1.bias, 0.1)  # keep ReLU units alive early
        self.fc2 = nn.Linear(hidden, 1)
        self.drop = nn.Dropout(dropout)

    def forward(self, v_q: torch.Tensor, v_c: torch.Tensor) -> torch.Tensor:
        if v_q.shape[-1] != v_c.shape[-1]:
            raise ValueError("question and candidate embeddings differ in size")
        h = self.drop(F.relu(self.fc1(self.norm(torch.cat([v_q, v_c], dim=-1)))))
        return self.fc2(h).squeeze(-1)


def score_siamese(v_q: torch.Tensor, v_c: torch.Tensor) -> torch.Tensor:
    """Cosine similarity; raises on (near-)zero vectors."""
    eps = 1e-12
    if (v_q.norm(dim=-1) < eps).any() or (v_c.norm(dim=-1) < eps).any():
        raise ValueError("cosine similarity undefined for zero vectors")
    return F.cosine_similarity(v_q, v_c, dim=-1)


def aggregate_max(vectors: torch.Tensor, counts: torch.Tensor | None = None) -> torch.Tensor:
    """Dimension-wise maximum over the piece axis (..., m, d) -> (..., d).

    ``counts`` masks out zero-padded slots so they never contribute."""
    if vectors.shape[-2] == 0:
        raise ValueError("cannot aggregate zero pieces")
    if counts is None:
        return vectors.max(dim=-2).values
    m = vectors.shape[-2]
    mask = torch.arange(m, device=vectors.device) < counts.unsqueeze(-1)
    filled = vectors.masked_fill(~mask.unsqueeze(-1), float("-inf"))
    return filled.max(dim=-2).values


@dataclass
class GloreParams:
    """Trainable weights of the global reasoning unit."""

    k: int = 8
    m: int = MAX_PIECES
    d: int = 512

    def build(self) -> nn.ParameterDict:
        def rand(*shape):
            return nn.Parameter(torch.randn(*shape) * 0.1)

        return nn.ParameterDict({
            "b": rand(self.k, self.m),
            "e": rand(self.m, self.k),
            "adj": rand(self.k, self.k),
            "g1": rand(self.d, self.d),
            "g2": rand(self.d, self.d),
        })


def glore_aggregate(vectors: torch.Tensor, params, counts: torch.Tensor | None = None
                    ) -> torch.Tensor:
    """Interaction-space aggregation of piece vectors (..., m, d) -> (..., d).

    Nodes n_i = sum_j b_ij v_j; Z = (I - A) tanh(A N G1) G2; pieces read the
    nodes back through e and are averaged.  Zero-padded piece slots carry
    zero vectors in, and ``counts`` keeps them out of the final mean."""
    b, e, adj, g1, g2 = params["b"], params["e"], params["adj"], params["g1"], params["g2"]
    if vectors.shape[-2] != b.shape[1]:
        raise ValueError(f"expected {b.shape[1]} piece slots, got {vectors.shape[-2]}")
    if vectors.shape[-1] != g1.shape[0]:
        raise ValueError("piece vector dimension does not match G1")
    eye = torch.eye(adj.shape[0], dtype=vectors.dtype, device=vectors.device)
    nodes = b @ vectors                              # (..., K, d)
    z = (eye - adj) @ torch.tanh(adj @ nodes @ g1) @ g2
    back = e @ z                                     # (..., m, d)
    if counts is None:
        return back.mean(dim=-2)
    m = back.shape[-2]
    mask = (torch.arange(m, device=back.device) < counts.unsqueeze(-1)).to(back.dtype)
    return (back * mask.unsqueeze(-1)).sum(dim=-2) / counts.unsqueeze(-1).to(back.dtype)


class RotationCnnMlp(nn.Module):
    task = "rotation"
    eval_rule = "argmax"

    def __init__(self, cfg: EncoderConfig = EncoderConfig()):
        super().__init__()
        self.encoder = Encoder(cfg)
        self.score = ScoreMlp(cfg.embed_dim, cfg.score_hidden, cfg.score_dropout)

    def forward(self, q, cands):
        bsz = q.shape[0]
        v_q = self.encoder(q)
        v_c = self.encoder(cands.flatten(0, 1)).view(bsz, N_CANDIDATES, -1)
        return self.score(v_q.unsqueeze(1).expand_as(v_c), v_c)

    @staticmethod
    def loss(scores, answers):
        return F.cross_entropy(scores, answers)


class RotationSiamese(nn.Module):
    task = "rotation"
    eval_rule = "argmin"   # the odd one out is the LEAST similar candidate

    def __init__(self, cfg: EncoderConfig = EncoderConfig()):
        super().__init__()
        self.encoder = Encoder(cfg)

    def forward(self, q, cands):
        bsz = q.shape[0]
        v_q = self.encoder(q)
        v_c = self.encoder(cands.flatten(0, 1)).view(bsz, N_CANDIDATES, -1)
        return score_siamese(v_q.unsqueeze(1).expand_as(v_c), v_c)

    @staticmethod
    def loss(scores, answers):
        # correct pair (the non-equivalent candidate) targets similarity 0,
        # the three equivalent candidates target 1
        target = 1.0 - F.one_hot(answers, N_CANDIDATES).to(scores.dtype)
        prob = (1 + scores) / 2
        return F.binary_cross_entropy(prob.clamp(1e-6, 1 - 1e-6), target)


class _CompositionBase(nn.Module):
    """Two encoders (question vs pieces) plus a pluggable aggregator."""

    task = "composition"
    eval_rule = "argmax"

    def __init__(self, cfg: EncoderConfig = EncoderConfig()):
        super().__init__()
        self.encoder_q = Encoder(cfg)
        self.encoder_p = Encoder(cfg)
        self.embed_dim = cfg.embed_dim
        self.score = ScoreMlp(cfg.embed_dim, cfg.score_hidden, cfg.score_dropout)

    def piece_vectors(self, pieces, counts):
        bsz = pieces.shape[0]
        flat = pieces.flatten(0, 2)                  # (B*4*5, 1, H, W)
        live = (torch.arange(MAX_PIECES, device=pieces.device)
                < counts.unsqueeze(-1)).flatten()    # skip blank slots
        v = flat.new_zeros(flat.shape[0], self.embed_dim)
        v[live] = self.encoder_p(flat[live])
        return v.view(bsz, N_CANDIDATES, MAX_PIECES, -1)

    def forward(self, q, pieces, counts):
        v_q = self.encoder_q(q)
        v_p = self.piece_vectors(pieces, counts)
        v_c = self.aggregate(v_p, counts)
        return self.score(v_q.unsqueeze(1).expand_as(v_c), v_c)

    @staticmethod
    def loss(scores, answers):
        return F.cross_entropy(scores, answers)


class CompositionCnnMlp(_CompositionBase):
    """Concatenates the (up to 5) piece vectors and maps them through a
    2-layer MLP; slot assignment is shuffled per sample while training."""

    def __init__(self, cfg: EncoderConfig = EncoderConfig()):
        super().__init__(cfg)
        d = cfg.embed_dim
        self.agg_norm = nn.LayerNorm(MAX_PIECES * d)
        self.agg1 = nn.Linear(MAX_PIECES * d, d)
        nn.init.constant_(self.agg1.bias, 0.1)
        self.agg2 = nn.Linear(d, d)

    def aggregate(self, v_p, counts):
        if self.training:
            perm = torch.argsort(torch.rand(v_p.shape[:3], device=v_p.device), dim=-1)
            v_p = torch.gather(v_p, 2, perm.unsqueeze(-1).expand_as(v_p))
        return self.agg2(F.relu(self.agg1(self.agg_norm(v_p.flatten(-2)))))


class CompositionCnnMax(_CompositionBase):
    def aggregate(self, v_p, counts):
        return aggregate_max(v_p, counts)


class CompositionCnnGlore(_CompositionBase):
    def __init__(self, cfg: EncoderConfig = EncoderConfig(), k: int = 8):
        super().__init__(cfg)
        self.glore = GloreParams(k=k, m=MAX_PIECES, d=cfg.embed_dim).build()

    def aggregate(self, v_p, counts):
        return glore_aggregate(v_p, self.glore, counts)


def build_model(kind: str, task: str, cfg: EncoderConfig = EncoderConfig()) -> nn.Module:
    table = {
        ("cnn_mlp", "rotation"): RotationCnnMlp,
        ("siamese", "rotation"): RotationSiamese,
        ("cnn_mlp", "composition"): CompositionCnnMlp,
        ("cnn_max", "composition"): CompositionCnnMax,
        ("cnn_glore", "composition"): CompositionCnnGlore,
    }
    if (kind, task) not in table:
        raise ValueError(f"model {kind!r} is not defined for the {task} task")
    return table[(kind, task)](cfg)

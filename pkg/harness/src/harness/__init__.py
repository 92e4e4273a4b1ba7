"""Toy-scale CNN baselines over forge-built spatial reasoning datasets."""

from .data import (
    CompositionDataset,
    DatasetError,
    MAX_PIECES,
    N_CANDIDATES,
    RotationDataset,
    load_manifest,
    open_dataset,
)
from .gradcam import gradcam, save_overlays
from .models import (
    MODEL_KINDS,
    CompositionCnnGlore,
    CompositionCnnMax,
    CompositionCnnMlp,
    Encoder,
    EncoderConfig,
    GloreParams,
    RotationCnnMlp,
    RotationSiamese,
    ScoreMlp,
    aggregate_max,
    build_model,
    glore_aggregate,
    score_siamese,
)
from .train import TrainConfig, evaluate, load_checkpoint, train

__version__ = "0.1.0"

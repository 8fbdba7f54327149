"""Interpretable job-profile relevance ranking.

Job descriptions are encoded with an LSTM and linearly projected into an
explicit skill space (one dimension per skill); profiles enter the same
space as binary skill indicators, and relevance is their dot product.
Training the projection end to end yields two reusable by-products: skill
embeddings (projection rows) and a job-to-skill tagger.
"""

from .errors import (
    DegenerateInputError,
    DimensionError,
    EmptyVocabularyError,
    ModelLoadError,
    NumericError,
    ParseError,
    RangeError,
    SesaError,
    UndefinedMetricError,
)
from .estimator import SesaRanker, SimilarityLogRegBaseline
from .linalg import SeededRng
from .metrics import Metrics, evaluate, roc_auc
from .model import Dims, Example, ModelParams, forward, init_params
from .synth import GenConfig, gen_aligned_embeddings, gen_dataset
from .training import TrainConfig, TrainHistory, grad_check, train

__version__ = "0.1.0"

__all__ = [
    "Dims",
    "Example",
    "GenConfig",
    "Metrics",
    "ModelParams",
    "SeededRng",
    "SesaRanker",
    "SimilarityLogRegBaseline",
    "TrainConfig",
    "TrainHistory",
    "evaluate",
    "forward",
    "gen_aligned_embeddings",
    "gen_dataset",
    "grad_check",
    "init_params",
    "roc_auc",
    "train",
    "SesaError",
    "DimensionError",
    "DegenerateInputError",
    "RangeError",
    "EmptyVocabularyError",
    "ParseError",
    "NumericError",
    "UndefinedMetricError",
    "ModelLoadError",
]

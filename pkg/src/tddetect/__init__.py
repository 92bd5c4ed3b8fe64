"""Detecting technical-debt discussions in issue-tracker tickets.

Pipeline: ingest tickets, train small word/document embeddings on the
corpus text, extract a fixed registry of 105 features, train a
gradient-boosted tree classifier on soft expert labels, evaluate with
importance-weighted metrics, and estimate corpus prevalence with an
inverse-probability-weighted estimator.
"""

from .corpus import Comment, Corpus, LabelRecord, Ticket
from .errors import DataError, UsageError
from .features import FeatureRegistry
from .gbm import GbmModel, TrainConfig
from .pipeline import PipelineConfig, run_end_to_end

__version__ = "0.1.0"

__all__ = [
    "Comment", "Corpus", "LabelRecord", "Ticket",
    "DataError", "UsageError",
    "FeatureRegistry", "GbmModel", "TrainConfig",
    "PipelineConfig", "run_end_to_end",
    "__version__",
]

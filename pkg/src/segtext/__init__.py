"""Statistical text segmentation with adaptive language models."""

from .corpus import (
    Corpus,
    Segmentation,
    SurfaceCorpus,
    Vocabulary,
    build_vocabulary,
    encode,
    load_corpus,
    tokenize,
)
from .trigram import TrigramModel, perplexity, train_trigram
from .trigger import (
    HistoryCache,
    TriggerModel,
    TriggerPair,
    mutual_information,
    select_triggers,
    train_triggers_iis,
)
from .relevance import relevance_profile, sentence_relevance, word_relevance
from .features import (
    BoundaryContext,
    FeatureTemplate,
    TrainingEvent,
    extract_events,
    generate_candidates,
)
from .induction import BoundaryModel, gain, iis_fit, induce, q_boundary
from .metric import baseline, evaluate, mu_from_reference, p_mu, precision_recall
from .segmenter import SegmenterConfig, decide, score_gaps, tune
from .estimator import TextSegmenter
from .synth import synthetic_corpus, write_corpus

__all__ = [
    "Corpus",
    "Segmentation",
    "SurfaceCorpus",
    "Vocabulary",
    "build_vocabulary",
    "encode",
    "load_corpus",
    "tokenize",
    "TrigramModel",
    "perplexity",
    "train_trigram",
    "HistoryCache",
    "TriggerModel",
    "TriggerPair",
    "mutual_information",
    "select_triggers",
    "train_triggers_iis",
    "relevance_profile",
    "sentence_relevance",
    "word_relevance",
    "BoundaryContext",
    "FeatureTemplate",
    "TrainingEvent",
    "extract_events",
    "generate_candidates",
    "BoundaryModel",
    "gain",
    "iis_fit",
    "induce",
    "q_boundary",
    "baseline",
    "evaluate",
    "mu_from_reference",
    "p_mu",
    "precision_recall",
    "SegmenterConfig",
    "decide",
    "score_gaps",
    "tune",
    "TextSegmenter",
    "synthetic_corpus",
    "write_corpus",
]

__version__ = "0.1.0"

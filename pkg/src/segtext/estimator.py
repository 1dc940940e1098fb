"""A scikit-learn style facade over the whole pipeline.

``TextSegmenter`` packs vocabulary building, the backoff trigram, trigger
selection and training, boundary-feature induction, and threshold tuning
into one estimator: ``fit`` takes sentences plus per-sentence document
labels, ``predict`` assigns document labels to new sentences, and ``score``
reports the pair-agreement probability against a labeled reference.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .corpus import Segmentation, SurfaceCorpus, build_vocabulary, encode, tokenize
from .features import extract_events, generate_candidates
from .induction import induce
from .metric import mu_from_reference, p_mu
from .segmenter import SegmenterConfig, decide, score_gaps, tune
from .trigger import TriggerModel, select_triggers, train_triggers_iis
from .trigram import train_trigram

__all__ = ["TextSegmenter"]


def _token_sentences(X) -> list[list[str]]:
    sentences = []
    for i, sent in enumerate(X):
        tokens = tokenize(sent) if isinstance(sent, str) else [str(w) for w in sent]
        if not tokens:
            raise ValueError(f"sentence {i} has no usable tokens")
        sentences.append(tokens)
    return sentences


def _spans_from_labels(y, n: int) -> list[tuple[int, int]]:
    """Document spans from per-sentence labels; each label must form one
    contiguous run."""
    labels = list(y)
    if len(labels) != n:
        raise ValueError(f"got {len(labels)} labels for {n} sentences")
    spans = []
    seen = set()
    start = 0
    for i in range(1, n + 1):
        if i == n or labels[i] != labels[i - 1]:
            label = labels[start]
            if label in seen:
                raise ValueError(f"document label {label!r} is not contiguous")
            seen.add(label)
            spans.append((start, i - 1))
            start = i
    return spans


class TextSegmenter(BaseEstimator):
    """End-to-end statistical text segmenter.

    Parameters mirror the pipeline stages: ``vocab_size`` and
    ``discount_cutoff`` shape the trigram; ``n_triggers``, ``window_n``,
    ``min_freq``, ``min_cooccur`` and ``trigger_iterations`` the adaptive
    model; ``num_features``, ``max_word_rank`` and ``refit_every`` the
    boundary model.  Leave ``alpha``/``epsilon`` as None to tune them on a
    heldout slice (``heldout_fraction`` of documents, taken from the end),
    or set both to skip tuning.  ``mu`` fixes the evaluation decay rate;
    None derives it from the training reference.
    """

    def __init__(self, vocab_size: int = 10000, discount_cutoff: int = 5,
                 window_n: int = 500, n_triggers: int = 200,
                 min_freq: int = 10, min_cooccur: float = 3,
                 trigger_iterations: int = 10, num_features: int = 25,
                 max_word_rank: int = 5000, refit_every: int = 5,
                 heldout_fraction: float = 0.2,
                 alpha: float | None = None, epsilon: int | None = None,
                 mu: float | None = None, threads: int = 1):
        self.vocab_size = vocab_size
        self.discount_cutoff = discount_cutoff
        self.window_n = window_n
        self.n_triggers = n_triggers
        self.min_freq = min_freq
        self.min_cooccur = min_cooccur
        self.trigger_iterations = trigger_iterations
        self.num_features = num_features
        self.max_word_rank = max_word_rank
        self.refit_every = refit_every
        self.heldout_fraction = heldout_fraction
        self.alpha = alpha
        self.epsilon = epsilon
        self.mu = mu
        self.threads = threads

    # ------------------------------------------------------------------

    def fit(self, X, y):
        """Train every stage on labeled sentences.

        ``X``: sentences, each either a raw string (tokenized internally) or
        a sequence of tokens.  ``y``: a document label per sentence; equal
        labels must be contiguous.
        """
        sentences = _token_sentences(X)
        n = len(sentences)
        spans = _spans_from_labels(y, n)
        if len(spans) < 2:
            raise ValueError("training corpus must contain at least two "
                             "documents")
        tuning = self.alpha is None or self.epsilon is None
        if tuning:
            if not 0 < self.heldout_fraction < 1:
                raise ValueError("heldout_fraction must lie in (0, 1)")
            n_held = max(2, round(self.heldout_fraction * len(spans)))
            if len(spans) - n_held < 2:
                raise ValueError(
                    f"{len(spans)} documents are too few to split off a "
                    "tuning slice; fit on more documents or set alpha and "
                    "epsilon explicitly")
            train_spans = spans[:len(spans) - n_held]
            held_spans = spans[len(spans) - n_held:]
            h0 = held_spans[0][0]
            held_surface = SurfaceCorpus(
                sentences[h0:], [(a - h0, b - h0) for a, b in held_spans])
        else:
            train_spans = spans
            held_surface = None
        cut = train_spans[-1][1] + 1
        train_surface = SurfaceCorpus(sentences[:cut], train_spans)

        self.vocab_ = build_vocabulary(train_surface, max_size=self.vocab_size)
        train = encode(train_surface, self.vocab_)
        self.trigram_ = train_trigram(train, self.vocab_,
                                      discount_cutoff=self.discount_cutoff)
        pairs = select_triggers(train, self.vocab_, window_n=self.window_n,
                                max_pairs=self.n_triggers,
                                min_cooccur=self.min_cooccur,
                                min_freq=self.min_freq)
        self.trigger_model_ = train_triggers_iis(
            TriggerModel(self.trigram_, pairs, self.window_n), train,
            iterations=self.trigger_iterations)

        events = extract_events(train, self.trigger_model_)
        candidates = generate_candidates(self.vocab_,
                                         max_word_rank=self.max_word_rank)
        result = induce(events, candidates, self.num_features,
                        refit_every=self.refit_every)
        self.boundary_model_ = result.model
        self.feature_trace_ = result.trace

        reference = Segmentation(n, [a for a, _ in spans[1:]])
        self.mu_ = self.mu if self.mu is not None \
            else mu_from_reference(reference)
        if tuning:
            heldout = encode(held_surface, self.vocab_)
            self.config_ = tune(self.boundary_model_, self.trigger_model_,
                                heldout, mu=self.mu_, threads=self.threads)
        else:
            self.config_ = SegmenterConfig(self.alpha, self.epsilon)
        return self

    # ------------------------------------------------------------------

    def _check_fitted(self):
        if not hasattr(self, "boundary_model_"):
            raise NotFittedError(
                "this TextSegmenter is not fitted yet; call fit first")

    def _encode(self, X) -> list[list[int]]:
        sentences = _token_sentences(X)
        surface = SurfaceCorpus(sentences, [(0, len(sentences) - 1)])
        return encode(surface, self.vocab_).sentences

    def boundary_probabilities(self, X) -> np.ndarray:
        """Probability of a document boundary at each of the n-1 gaps."""
        self._check_fitted()
        return score_gaps(self.boundary_model_, self.trigger_model_,
                          self._encode(X), threads=self.threads)

    def segment(self, X) -> Segmentation:
        """Decode X into a Segmentation with the fitted knobs."""
        self._check_fitted()
        probs = score_gaps(self.boundary_model_, self.trigger_model_,
                           self._encode(X), threads=self.threads)
        return decide(probs, self.config_)

    def predict(self, X) -> np.ndarray:
        """Document index (0, 1, 2, ...) for every sentence of X."""
        return np.asarray(self.segment(X).doc_ids())

    def score(self, X, y) -> float:
        """Pair-agreement probability of the predicted segmentation against
        the labeling ``y``."""
        hyp = self.segment(X)
        reference = Segmentation(
            hyp.n_sentences,
            [a for a, _ in _spans_from_labels(y, hyp.n_sentences)[1:]])
        mu = self.mu if self.mu is not None else mu_from_reference(reference)
        return p_mu(reference, hyp, mu)

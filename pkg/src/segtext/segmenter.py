"""Turning per-gap boundary probabilities into an actual segmentation.

Decoding is deliberately simple: accept gaps whose probability clears a
threshold, highest-confidence first, while keeping accepted boundaries a
minimum number of sentences apart.  Both knobs are tuned by exhaustive grid
search against the pair-agreement score on heldout data.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Corpus, Segmentation
from .features import gap_contexts
from .induction import BoundaryModel, q_boundary
from .metric import mu_from_reference, p_mu
from .relevance import sentence_relevance
from .trigger import TriggerModel

__all__ = [
    "ALPHA_GRID",
    "EPSILON_GRID",
    "SegmenterConfig",
    "score_gaps",
    "decide",
    "tune",
]

ALPHA_GRID = tuple(round(0.02 * i, 2) for i in range(1, 50))
EPSILON_GRID = tuple(range(1, 11))


@dataclass(frozen=True)
class SegmenterConfig:
    """Decoding knobs: probability threshold and minimum separation."""

    alpha: float
    epsilon: int

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.epsilon < 1 or self.epsilon != int(self.epsilon):
            raise ValueError(f"epsilon must be a positive whole number of "
                             f"sentences, got {self.epsilon}")


def score_gaps(model: BoundaryModel, trig: TriggerModel,
               sentences: Sequence[Sequence[int]],
               threads: int = 1) -> np.ndarray:
    """Boundary probability at every gap of an unsegmented sentence stream.

    Relevance runs with a never-resetting cache — at decoding time nothing
    is known about document structure, so the history simply accumulates.
    Entry ``i`` of the result is the probability of a boundary at gap
    ``i + 1`` (i.e. before sentence ``i + 1``).
    """
    if len(sentences) < 2:
        raise ValueError("need at least two sentences to score gaps")
    cache = trig.new_cache()
    rel = np.array([sentence_relevance(trig, s, cache).value
                    for s in sentences])
    contexts = gap_contexts(sentences, rel)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            probs = list(pool.map(lambda c: q_boundary(model, c), contexts))
    else:
        probs = [q_boundary(model, c) for c in contexts]
    return np.asarray(probs, dtype=float)


def decide(probs: Sequence[float], config: SegmenterConfig) -> Segmentation:
    """Greedy boundary placement.

    Gaps with probability >= alpha are visited in descending probability
    (ties toward the smaller gap index); each is accepted unless it falls
    within epsilon sentences of an already-accepted boundary.  May return a
    segmentation with no boundaries at all.
    """
    p = np.asarray(probs, dtype=float)
    if p.size and not (np.isfinite(p).all() and (p >= 0).all()
                       and (p <= 1).all()):
        raise ValueError("gap probabilities must lie in [0, 1]")
    accepted: list[int] = []
    for i in sorted(range(p.size), key=lambda i: (-p[i], i)):
        if p[i] < config.alpha:
            break
        g = i + 1
        if all(abs(g - a) >= config.epsilon for a in accepted):
            accepted.append(g)
    return Segmentation(p.size + 1, sorted(accepted))


def _grid_row(alpha: float, probs: np.ndarray, ref: Segmentation,
              mu: float) -> list[float]:
    return [p_mu(ref, decide(probs, SegmenterConfig(alpha, eps)), mu)
            for eps in EPSILON_GRID]


def tune(model: BoundaryModel, trig: TriggerModel, heldout: Corpus,
         mu: float | None = None, threads: int = 1) -> SegmenterConfig:
    """Exhaustive (alpha, epsilon) grid search maximizing the pair-agreement
    score against the heldout reference.  Ties break toward the smaller
    alpha, then the smaller epsilon."""
    ref = heldout.reference_segmentation()
    if not ref.boundaries:
        raise ValueError("heldout corpus has a single document; "
                         "tuning needs reference boundaries")
    if mu is None:
        mu = mu_from_reference(ref)
    probs = score_gaps(model, trig, heldout.sentences, threads=threads)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(
                lambda a: _grid_row(a, probs, ref, mu), ALPHA_GRID))
    else:
        rows = [_grid_row(a, probs, ref, mu) for a in ALPHA_GRID]
    best_score = -np.inf
    best = None
    for alpha, row in zip(ALPHA_GRID, rows):
        for eps, score in zip(EPSILON_GRID, row):
            if score > best_score:
                best_score = score
                best = SegmenterConfig(alpha, eps)
    return best

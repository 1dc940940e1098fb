"""Relevance: how much the trigger model outpredicts the trigram prior.

A word's relevance is the log ratio ``log p_trigger - log p_trigram`` at its
position; a sentence's relevance is the arithmetic mean over its words plus
the sentence-end prediction.  Tracked against segment structure with a
history cache that never resets, relevance starts negative right after a
boundary (the cache is still full of the previous topic) and climbs as the
window fills with the current segment — the degradation curve that boundary
features later exploit.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from typing import NamedTuple

import numpy as np

from .corpus import Corpus
from .trigger import HistoryCache, TriggerModel
from .trigram import sentence_events

__all__ = [
    "RelevanceScore",
    "RelevanceProfile",
    "word_relevance",
    "sentence_relevance",
    "sentence_relevances",
    "relevance_profile",
]


class RelevanceScore(NamedTuple):
    value: float
    span: str  # "word" or "sentence"


def word_relevance(model: TriggerModel, w: int, cache: HistoryCache,
                   w2: int, w1: int) -> RelevanceScore:
    """log p_trigger(w | history, context) - log p_trigram(w | context).

    Equals the active boost on w minus the log partition value, so words the
    history says nothing about score exactly ``-ln Z`` (slightly negative
    whenever anything else is boosted).
    """
    value = cache.boost(w) - model.log_partition(cache, w2, w1)
    return RelevanceScore(value, "word")


def sentence_relevance(model: TriggerModel, sentence: Sequence[int],
                       cache: HistoryCache) -> RelevanceScore:
    """Mean word relevance over a sentence, sentence-end prediction included.

    The cache must stand at the sentence start; the walk pushes each word,
    so afterwards the cache stands at the next sentence.
    """
    if len(sentence) == 0:
        raise ValueError("cannot score an empty sentence")
    vocab = model.vocab
    total = 0.0
    count = 0
    for (u, v), w in sentence_events(sentence, vocab):
        total += cache.boost(w) - model.log_partition(cache, u, v)
        count += 1
        if w != vocab.sent_end_id:
            cache.push(w)
    return RelevanceScore(total / count, "sentence")


def sentence_relevances(model: TriggerModel, corpus: Corpus,
                        reset_at_doc_boundaries: bool = False) -> np.ndarray:
    """Relevance of every sentence in corpus order.

    By default the cache runs straight through document boundaries — the
    test-time condition, where segment structure is unknown.  Training-time
    callers can reset instead.
    """
    cache = model.new_cache()
    out = np.empty(corpus.n_sentences)
    for first, last in corpus.doc_spans:
        if reset_at_doc_boundaries:
            cache.reset()
        for si in range(first, last + 1):
            out[si] = sentence_relevance(model, corpus.sentences[si], cache).value
    return out


class RelevanceProfile:
    """Mean sentence relevance by offset from segment starts.

    Offset 0 is the first sentence of a segment; positive offsets stay within
    that segment, negative offsets index backwards into the preceding one.
    ``counts`` says how many sentences fed each mean (0 where no segment was
    long enough, with a NaN mean).
    """

    def __init__(self, offsets: np.ndarray, means: np.ndarray, counts: np.ndarray):
        self.offsets = offsets
        self.means = means
        self.counts = counts

    def mean_at(self, offset: int) -> float:
        idx = int(offset - self.offsets[0])
        if not 0 <= idx < len(self.offsets):
            raise ValueError(f"offset {offset} outside profile range")
        return float(self.means[idx])

    def write_tsv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("offset\tmean_relevance\tcount\n")
            for o, m, c in zip(self.offsets, self.means, self.counts):
                mean = "nan" if c == 0 else repr(float(m))
                fh.write(f"{o}\t{mean}\t{c}\n")


def relevance_profile(model: TriggerModel, corpus: Corpus,
                      max_offset: int = 15) -> RelevanceProfile:
    """Profile relevance against segment position, cache never resetting.

    Every segment start contributes the sentences at offsets
    ``-max_offset..max_offset`` that fall inside the neighboring segments:
    offset o >= 0 uses that segment's sentence o, offset o < 0 reaches into
    the previous segment.  Offsets past either segment's extent are skipped
    rather than polluted with material from further away.
    """
    if max_offset < 0:
        raise ValueError("max_offset must be non-negative")
    rel = sentence_relevances(model, corpus, reset_at_doc_boundaries=False)
    offsets = np.arange(-max_offset, max_offset + 1)
    sums = np.zeros(len(offsets))
    counts = np.zeros(len(offsets), dtype=np.int64)
    spans = corpus.doc_spans
    for d, (first, last) in enumerate(spans):
        seg_len = last - first + 1
        for idx, o in enumerate(offsets):
            if o >= 0:
                if o < seg_len:
                    sums[idx] += rel[first + o]
                    counts[idx] += 1
            elif d > 0:
                prev_first, prev_last = spans[d - 1]
                si = first + o
                if si >= prev_first:
                    sums[idx] += rel[si]
                    counts[idx] += 1
    means = np.full(len(offsets), math.nan)
    nz = counts > 0
    means[nz] = sums[nz] / counts[nz]
    return RelevanceProfile(offsets, means, counts)

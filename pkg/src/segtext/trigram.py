"""Backoff trigram language model with Good-Turing discounting.

Each sentence is padded with two begin markers and predicts an end marker,
so a sentence of m words contributes m+1 events.  Seen n-grams keep a
discounted relative frequency; unseen ones back off, weighted so every
conditional distribution sums to one over the whole vocabulary and no
probability is ever zero.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Iterator, Sequence

import numpy as np

from .corpus import Corpus, Vocabulary

__all__ = ["TrigramModel", "train_trigram", "perplexity", "sentence_events"]

_EPS = 1e-12


def sentence_events(sentence: Sequence[int], vocab: Vocabulary) -> Iterator[tuple[tuple[int, int], int]]:
    """Yield ``((w2, w1), w)`` prediction events for one sentence: every word
    in order, then the sentence-end token, with begin-marker padding."""
    u = v = vocab.sent_begin_id
    for w in sentence:
        yield (u, v), w
        u, v = v, w
    yield (u, v), vocab.sent_end_id


class TrigramModel:
    """Katz-style backoff trigram model over a closed vocabulary."""

    def __init__(self, vocab: Vocabulary, p1: np.ndarray,
                 p2: dict[tuple[int, int], float],
                 p3: dict[tuple[int, int, int], float],
                 bow2: dict[int, float],
                 bow3: dict[tuple[int, int], float],
                 discount_cutoff: int,
                 counts: tuple | None = None):
        self.vocab = vocab
        self.p1 = p1
        self.p2 = p2
        self.p3 = p3
        self.bow2 = bow2
        self.bow3 = bow3
        self.discount_cutoff = discount_cutoff
        #: (unigram array, bigram Counter, trigram Counter) when trained in
        #: process; None for models read back from disk.
        self.counts = counts

    def _check_id(self, wid: int) -> None:
        if not 0 <= wid < self.vocab.size:
            raise ValueError(f"word id {wid} out of range [0, {self.vocab.size})")

    def prob(self, w: int, w2: int, w1: int) -> float:
        """p(w | w2, w1) with backoff; always in (0, 1]."""
        self._check_id(w)
        self._check_id(w2)
        self._check_id(w1)
        p = self.p3.get((w2, w1, w))
        if p is not None:
            return p
        b3 = self.bow3.get((w2, w1), 1.0)
        p = self.p2.get((w1, w))
        if p is not None:
            return b3 * p
        return b3 * self.bow2.get(w1, 1.0) * self.p1[w]

    def bigram_prob(self, w: int, w1: int) -> float:
        """p(w | w1) from the bigram backoff level."""
        self._check_id(w)
        self._check_id(w1)
        p = self.p2.get((w1, w))
        if p is not None:
            return p
        return self.bow2.get(w1, 1.0) * self.p1[w]

    def logprob(self, w: int, w2: int, w1: int) -> float:
        return math.log(self.prob(w, w2, w1))


def _discount_table(count_of_counts: Counter, k: int) -> dict[int, float]:
    """Good-Turing discount ratio for each count 1..k, computed from the
    global count-of-counts at one n-gram order.  Whenever the Good-Turing
    estimate is unusable (missing frequencies-of-frequencies, or a ratio
    outside (0, 1)), an absolute discount of 0.5 stands in."""
    n1 = count_of_counts.get(1, 0)
    nk1 = count_of_counts.get(k + 1, 0)
    big_a = (k + 1) * nk1 / n1 if n1 > 0 else None
    table = {}
    for c in range(1, k + 1):
        d = None
        nc = count_of_counts.get(c, 0)
        ncp1 = count_of_counts.get(c + 1, 0)
        if big_a is not None and big_a < 1.0 and nc > 0 and ncp1 > 0:
            r_star = (c + 1) * ncp1 / nc
            cand = (r_star / c - big_a) / (1.0 - big_a)
            if 0.0 < cand < 1.0:
                d = cand
        if d is None:
            d = (c - 0.5) / c
        table[c] = d
    return table


def _discounted(count: int, table: dict[int, float], k: int) -> float:
    return table[count] * count if count <= k else float(count)


def _context_distribution(seen: dict[int, int], total: int, table: dict[int, float],
                          k: int, vocab_size: int, lower_prob) -> tuple[dict[int, float], float | None]:
    """Discounted probabilities for one conditioning context plus its backoff
    weight.  If the context covers the entire vocabulary the raw relative
    frequencies are kept and no weight is needed.  If discounting frees no
    mass (every count above the cutoff), the whole context falls back to
    absolute discounting so unseen words keep nonzero probability."""
    if len(seen) == vocab_size:
        return {w: c / total for w, c in seen.items()}, None
    disc = {w: _discounted(c, table, k) for w, c in seen.items()}
    freed = 1.0 - sum(disc.values()) / total
    if freed <= _EPS:
        disc = {w: c - 0.5 for w, c in seen.items()}
        freed = 1.0 - sum(disc.values()) / total
    probs = {w: d / total for w, d in disc.items()}
    lower_mass = sum(lower_prob(w) for w in seen)
    bow = freed / (1.0 - lower_mass)
    return probs, bow


def _unigram_distribution(c1: np.ndarray, table: dict[int, float], k: int) -> np.ndarray:
    """Unigram probabilities over the full vocabulary.  Freed mass is spread
    uniformly over zero-count entries (the begin marker at minimum); if every
    entry was seen, plain relative frequencies already have full support."""
    total = float(c1.sum())
    zeros = np.flatnonzero(c1 == 0)
    if len(zeros) == 0:
        return c1 / total
    disc = np.array([_discounted(int(c), table, k) if c > 0 else 0.0 for c in c1])
    freed = 1.0 - disc.sum() / total
    if freed <= _EPS:
        disc = np.where(c1 > 0, c1 - 0.5, 0.0)
        freed = 1.0 - disc.sum() / total
    p1 = disc / total
    p1[zeros] = freed / len(zeros)
    return p1


def train_trigram(corpus: Corpus, vocab: Vocabulary, discount_cutoff: int = 5) -> TrigramModel:
    """Estimate the model from an encoded corpus.

    Counts at each order come from the padded prediction events; discounting
    uses Good-Turing ratios for counts up to ``discount_cutoff`` with
    absolute-discount fallbacks on degenerate statistics.
    """
    if corpus.n_sentences < 1:
        raise ValueError("cannot train on an empty corpus")
    k = int(discount_cutoff)
    if k < 1:
        raise ValueError("discount_cutoff must be at least 1")
    size = vocab.size

    c3: Counter = Counter()
    for sent in corpus.sentences:
        for (u, v), w in sentence_events(sent, vocab):
            if not 0 <= w < size or not 0 <= u < size or not 0 <= v < size:
                raise ValueError("corpus contains ids outside the vocabulary")
            c3[(u, v, w)] += 1
    c2: Counter = Counter()
    c1 = np.zeros(size, dtype=np.int64)
    for (u, v, w), n in c3.items():
        c2[(v, w)] += n
        c1[w] += n

    coc1 = Counter(int(c) for c in c1 if c > 0)
    coc2 = Counter(c2.values())
    coc3 = Counter(c3.values())
    t1 = _discount_table(coc1, k)
    t2 = _discount_table(coc2, k)
    t3 = _discount_table(coc3, k)

    p1 = _unigram_distribution(c1, t1, k)

    by_ctx2: dict[int, dict[int, int]] = {}
    for (v, w), n in c2.items():
        by_ctx2.setdefault(v, {})[w] = n
    p2: dict[tuple[int, int], float] = {}
    bow2: dict[int, float] = {}
    for v, seen in by_ctx2.items():
        probs, bow = _context_distribution(seen, sum(seen.values()), t2, k, size,
                                           lambda w: p1[w])
        for w, p in probs.items():
            p2[(v, w)] = p
        if bow is not None:
            bow2[v] = bow

    def bigram_prob(w: int, v: int) -> float:
        p = p2.get((v, w))
        if p is not None:
            return p
        return bow2.get(v, 1.0) * p1[w]

    by_ctx3: dict[tuple[int, int], dict[int, int]] = {}
    for (u, v, w), n in c3.items():
        by_ctx3.setdefault((u, v), {})[w] = n
    p3: dict[tuple[int, int, int], float] = {}
    bow3: dict[tuple[int, int], float] = {}
    for (u, v), seen in by_ctx3.items():
        probs, bow = _context_distribution(seen, sum(seen.values()), t3, k, size,
                                           lambda w, _v=v: bigram_prob(w, _v))
        for w, p in probs.items():
            p3[(u, v, w)] = p
        if bow is not None:
            bow3[(u, v)] = bow

    return TrigramModel(vocab, p1, p2, p3, bow2, bow3, k, counts=(c1, c2, c3))


def perplexity(model: TrigramModel, corpus: Corpus) -> float:
    """exp of the mean negative log probability over all prediction events
    (every word plus each sentence's end token)."""
    if corpus.n_sentences < 1:
        raise ValueError("empty corpus")
    total = 0.0
    events = 0
    for sent in corpus.sentences:
        for (u, v), w in sentence_events(sent, model.vocab):
            total -= math.log(model.prob(w, u, v))
            events += 1
    return math.exp(total / events)

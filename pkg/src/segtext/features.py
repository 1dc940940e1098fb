"""Candidate boundary features over inter-sentence gaps.

A gap g (1-based, between sentences g-1 and g) is described by a
:class:`BoundaryContext`: the nearby sentences and words on both sides plus
sentence relevance scores just after the gap.  Binary feature templates ask
questions about that neighborhood — "does word w appear up to k sentences in
the future?", "does the mean relevance of the next two sentences fall in this
bin?" — and the cross product over frequent words forms the candidate space
for boundary-model induction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from collections.abc import Sequence

import numpy as np

from .corpus import Corpus, Vocabulary
from .relevance import sentence_relevances
from .trigger import TriggerModel

__all__ = [
    "FeatureTemplate",
    "BoundaryContext",
    "TrainingEvent",
    "WORD_KINDS",
    "RELEVANCE_BIN",
    "DEFAULT_BIN_EDGES",
    "DEFAULT_BIN_SPANS",
    "default_relevance_bins",
    "evaluate_feature",
    "generate_candidates",
    "extract_events",
    "gap_contexts",
    "build_firing_index",
    "format_feature",
    "parse_feature",
]

WORD_IN_NEXT_K_SENTENCES = "WordInNextKSentences"
WORD_IN_PREV_K_SENTENCES = "WordInPrevKSentences"
WORD_PREV_K_NOT_NEXT_K = "WordPrevKNotNextK"
WORD_NEXT_K_NOT_PREV_K = "WordNextKNotPrevK"
WORD_IN_NEXT_K_WORDS = "WordInNextKWords"
WORD_IN_PREV_K_WORDS = "WordInPrevKWords"
WORD_BEGINS_PRECEDING_SENTENCE = "WordBeginsPrecedingSentence"
RELEVANCE_BIN = "RelevanceBin"

WORD_KINDS = (
    WORD_IN_NEXT_K_SENTENCES,
    WORD_IN_PREV_K_SENTENCES,
    WORD_PREV_K_NOT_NEXT_K,
    WORD_NEXT_K_NOT_PREV_K,
    WORD_IN_NEXT_K_WORDS,
    WORD_IN_PREV_K_WORDS,
    WORD_BEGINS_PRECEDING_SENTENCE,
)

SENTENCE_KS = (1, 2, 3, 5)
WORD_KS = (1, 5)

# bin edges for mean future relevance; consecutive pairs give half-open
# [lo, hi) bins, crossed with how many upcoming sentences the mean covers
DEFAULT_BIN_EDGES = (-math.inf, -0.5, -0.1, 0.0, 0.05, 0.1, 0.5, math.inf)
DEFAULT_BIN_SPANS = (1, 2)


@dataclass(frozen=True)
class FeatureTemplate:
    """One binary question about a boundary context.

    Word templates carry ``word`` (token id) and a span ``k``; relevance bins
    carry ``k`` (sentence span of the mean) and the half-open interval
    ``[lo, hi)``.
    """

    kind: str
    word: int | None = None
    k: int = 1
    lo: float | None = None
    hi: float | None = None

    def __post_init__(self):
        if self.kind in (WORD_IN_NEXT_K_SENTENCES, WORD_IN_PREV_K_SENTENCES):
            allowed = SENTENCE_KS
        elif self.kind in (WORD_PREV_K_NOT_NEXT_K, WORD_NEXT_K_NOT_PREV_K):
            allowed = (5,)
        elif self.kind in (WORD_IN_NEXT_K_WORDS, WORD_IN_PREV_K_WORDS):
            allowed = WORD_KS
        elif self.kind == WORD_BEGINS_PRECEDING_SENTENCE:
            allowed = (1,)
        elif self.kind == RELEVANCE_BIN:
            if self.word is not None:
                raise ValueError("relevance bins carry no word")
            if self.lo is None or self.hi is None or not self.lo < self.hi:
                raise ValueError("relevance bin needs lo < hi")
            if self.k < 1:
                raise ValueError("relevance bin span must be >= 1")
            return
        else:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if self.word is None or self.word < 0:
            raise ValueError(f"{self.kind} needs a word id")
        if self.k not in allowed:
            raise ValueError(f"{self.kind} span must be one of {allowed}")
        if self.lo is not None or self.hi is not None:
            raise ValueError("word templates carry no bin interval")

    def describe(self, vocab: Vocabulary) -> str:
        if self.kind == RELEVANCE_BIN:
            return f"{self.kind}[{self.lo:g},{self.hi:g})x{self.k}"
        return f"{self.kind}({vocab.word(self.word)},{self.k})"


class _GapData:
    """Shared per-corpus arrays all the gap contexts point into."""

    __slots__ = ("sentences", "sent_sets", "flat", "offsets", "rel", "n")

    def __init__(self, sentences: Sequence[Sequence[int]],
                 rel: np.ndarray | None):
        self.sentences = [list(s) for s in sentences]
        self.sent_sets = [frozenset(s) for s in self.sentences]
        self.flat = [w for s in self.sentences for w in s]
        offsets = [0]
        for s in self.sentences:
            offsets.append(offsets[-1] + len(s))
        self.offsets = offsets
        self.rel = rel
        self.n = len(self.sentences)


class BoundaryContext:
    """The neighborhood of gap ``g``: sentence windows on both sides, word
    windows that ignore sentence breaks, and the relevance of the sentences
    about to start.  Windows silently stop at the corpus edges; the
    ``*_truncated`` probes say when that happened."""

    __slots__ = ("data", "g", "_cache")

    def __init__(self, data: _GapData, g: int):
        if not 1 <= g <= data.n - 1:
            raise ValueError(f"gap {g} outside [1, {data.n - 1}]")
        self.data = data
        self.g = g
        self._cache: dict = {}

    def words_in_next_sentences(self, k: int) -> frozenset:
        key = ("ns", k)
        got = self._cache.get(key)
        if got is None:
            d = self.data
            got = frozenset().union(*d.sent_sets[self.g:self.g + k]) \
                if self.g < d.n else frozenset()
            self._cache[key] = got
        return got

    def words_in_prev_sentences(self, k: int) -> frozenset:
        key = ("ps", k)
        got = self._cache.get(key)
        if got is None:
            d = self.data
            got = frozenset().union(*d.sent_sets[max(0, self.g - k):self.g])
            self._cache[key] = got
        return got

    def words_in_next_words(self, k: int) -> frozenset:
        d = self.data
        start = d.offsets[self.g]
        return frozenset(d.flat[start:start + k])

    def words_in_prev_words(self, k: int) -> frozenset:
        d = self.data
        end = d.offsets[self.g]
        return frozenset(d.flat[max(0, end - k):end])

    def first_word_of_preceding_sentence(self) -> int:
        return self.data.sentences[self.g - 1][0]

    def mean_future_relevance(self, span: int) -> float:
        if self.data.rel is None:
            raise ValueError("context carries no relevance scores")
        chunk = self.data.rel[self.g:self.g + span]
        return float(chunk.mean())

    def next_truncated(self, k: int) -> bool:
        return self.g + k > self.data.n

    def prev_truncated(self, k: int) -> bool:
        return self.g - k < 0


@dataclass(frozen=True)
class TrainingEvent:
    context: BoundaryContext
    label: bool  # True at a document boundary


def evaluate_feature(f: FeatureTemplate, ctx: BoundaryContext) -> int:
    """The feature's bit on this context; total and pure."""
    kind = f.kind
    if kind == WORD_IN_NEXT_K_SENTENCES:
        return int(f.word in ctx.words_in_next_sentences(f.k))
    if kind == WORD_IN_PREV_K_SENTENCES:
        return int(f.word in ctx.words_in_prev_sentences(f.k))
    if kind == WORD_PREV_K_NOT_NEXT_K:
        return int(f.word in ctx.words_in_prev_sentences(f.k)
                   and f.word not in ctx.words_in_next_sentences(f.k))
    if kind == WORD_NEXT_K_NOT_PREV_K:
        return int(f.word in ctx.words_in_next_sentences(f.k)
                   and f.word not in ctx.words_in_prev_sentences(f.k))
    if kind == WORD_IN_NEXT_K_WORDS:
        return int(f.word in ctx.words_in_next_words(f.k))
    if kind == WORD_IN_PREV_K_WORDS:
        return int(f.word in ctx.words_in_prev_words(f.k))
    if kind == WORD_BEGINS_PRECEDING_SENTENCE:
        return int(ctx.first_word_of_preceding_sentence() == f.word)
    if kind == RELEVANCE_BIN:
        r = ctx.mean_future_relevance(f.k)
        return int(f.lo <= r < f.hi)
    raise ValueError(f"unknown feature kind {kind!r}")


def word_templates(word: int) -> list[FeatureTemplate]:
    """All templates parameterized by one word, in the fixed candidate order."""
    out = [FeatureTemplate(WORD_IN_NEXT_K_SENTENCES, word=word, k=k)
           for k in SENTENCE_KS]
    out += [FeatureTemplate(WORD_IN_PREV_K_SENTENCES, word=word, k=k)
            for k in SENTENCE_KS]
    out.append(FeatureTemplate(WORD_PREV_K_NOT_NEXT_K, word=word, k=5))
    out.append(FeatureTemplate(WORD_NEXT_K_NOT_PREV_K, word=word, k=5))
    out += [FeatureTemplate(WORD_IN_NEXT_K_WORDS, word=word, k=k)
            for k in WORD_KS]
    out += [FeatureTemplate(WORD_IN_PREV_K_WORDS, word=word, k=k)
            for k in WORD_KS]
    out.append(FeatureTemplate(WORD_BEGINS_PRECEDING_SENTENCE, word=word))
    return out


def default_relevance_bins() -> list[tuple[float, float, int]]:
    edges = DEFAULT_BIN_EDGES
    return [(edges[i], edges[i + 1], span)
            for span in DEFAULT_BIN_SPANS
            for i in range(len(edges) - 1)]


def generate_candidates(vocab: Vocabulary, max_word_rank: int = 5000,
                        relevance_bins: Sequence[tuple[float, float, int]] | None
                        = None) -> list[FeatureTemplate]:
    """The candidate space: every word template for the ``max_word_rank``
    most frequent words, then the relevance bins.  Order is deterministic and
    doubles as the tie-break order during induction."""
    if max_word_rank < 0:
        raise ValueError("max_word_rank must be non-negative")
    if relevance_bins is None:
        relevance_bins = default_relevance_bins()
    top = min(max_word_rank, vocab.size - Vocabulary.N_RESERVED)
    out: list[FeatureTemplate] = []
    for word in range(Vocabulary.N_RESERVED, Vocabulary.N_RESERVED + top):
        out.extend(word_templates(word))
    for lo, hi, span in relevance_bins:
        out.append(FeatureTemplate(RELEVANCE_BIN, k=span, lo=lo, hi=hi))
    return out


def gap_contexts(sentences: Sequence[Sequence[int]],
                 relevances: np.ndarray | None = None) -> list[BoundaryContext]:
    """One context per inter-sentence gap of an (unsegmented) sentence list."""
    if len(sentences) < 2:
        raise ValueError("need at least two sentences to have a gap")
    if relevances is not None and len(relevances) != len(sentences):
        raise ValueError("one relevance score per sentence required")
    data = _GapData(sentences, None if relevances is None
                    else np.asarray(relevances, dtype=float))
    return [BoundaryContext(data, g) for g in range(1, data.n)]


def extract_events(corpus: Corpus, trig: TriggerModel) -> list[TrainingEvent]:
    """Labeled training events, one per gap of the segmented corpus.

    Relevance runs with a never-resetting cache — the same condition the
    features will face on unsegmented test text.
    """
    if corpus.n_sentences < 2:
        raise ValueError("need at least two sentences to extract events")
    rel = sentence_relevances(trig, corpus, reset_at_doc_boundaries=False)
    contexts = gap_contexts(corpus.sentences, rel)
    boundaries = set(corpus.reference_segmentation().boundaries)
    return [TrainingEvent(ctx, ctx.g in boundaries) for ctx in contexts]


def build_firing_index(events: Sequence[TrainingEvent],
                       candidates: Sequence[FeatureTemplate]
                       ) -> dict[FeatureTemplate, np.ndarray]:
    """Inverted index: candidate -> sorted event positions where it fires.

    Built in one sweep over the gaps, touching only words that are both near
    a gap and used by some candidate — the dense bit matrix never exists.
    """
    if not events:
        return {f: np.empty(0, dtype=np.int64) for f in candidates}
    data = events[0].context.data
    for ev in events:
        if ev.context.data is not data:
            raise ValueError("events must share one underlying corpus")

    by_word: dict[tuple[str, int], set[int]] = {}
    bins: list[FeatureTemplate] = []
    for f in candidates:
        if f.kind == RELEVANCE_BIN:
            bins.append(f)
        else:
            by_word.setdefault((f.kind, f.k), set()).add(f.word)

    fired: dict[FeatureTemplate, list[int]] = {f: [] for f in candidates}
    for i, ev in enumerate(events):
        ctx = ev.context
        for (kind, k), words in by_word.items():
            if kind == WORD_IN_NEXT_K_SENTENCES:
                hits = ctx.words_in_next_sentences(k) & words
            elif kind == WORD_IN_PREV_K_SENTENCES:
                hits = ctx.words_in_prev_sentences(k) & words
            elif kind == WORD_PREV_K_NOT_NEXT_K:
                hits = (ctx.words_in_prev_sentences(k)
                        - ctx.words_in_next_sentences(k)) & words
            elif kind == WORD_NEXT_K_NOT_PREV_K:
                hits = (ctx.words_in_next_sentences(k)
                        - ctx.words_in_prev_sentences(k)) & words
            elif kind == WORD_IN_NEXT_K_WORDS:
                hits = ctx.words_in_next_words(k) & words
            elif kind == WORD_IN_PREV_K_WORDS:
                hits = ctx.words_in_prev_words(k) & words
            else:  # WORD_BEGINS_PRECEDING_SENTENCE
                first = ctx.first_word_of_preceding_sentence()
                hits = {first} if first in words else ()
            for w in hits:
                fired[FeatureTemplate(kind, word=w, k=k)].append(i)

    if bins:
        for span in {f.k for f in bins}:
            means = np.array([ev.context.mean_future_relevance(span)
                              for ev in events])
            for f in bins:
                if f.k == span:
                    fired[f] = list(np.flatnonzero(
                        (f.lo <= means) & (means < f.hi)))

    return {f: np.asarray(sorted(ix), dtype=np.int64)
            for f, ix in fired.items()}


# --------------------------------------------------------------------------
# feature lines (shared by induced-model and trace files)

def format_feature(f: FeatureTemplate, lam: float, vocab: Vocabulary) -> str:
    """``kind<TAB>word-or-bin<TAB>k<TAB>lambda``."""
    if f.kind == RELEVANCE_BIN:
        middle = f"{f.lo!r}:{f.hi!r}"
    else:
        middle = vocab.word(f.word)
    return f"{f.kind}\t{middle}\t{f.k}\t{lam!r}"


def parse_feature(line: str, vocab: Vocabulary) -> tuple[FeatureTemplate, float]:
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 4:
        raise ValueError(f"expected 4 tab fields, got {len(parts)}: {line!r}")
    kind, middle, k_str, lam_str = parts
    k = int(k_str)
    lam = float(lam_str)
    if kind == RELEVANCE_BIN:
        lo_str, _, hi_str = middle.partition(":")
        if not hi_str:
            raise ValueError(f"malformed bin interval {middle!r}")
        f = FeatureTemplate(kind, k=k, lo=float(lo_str), hi=float(hi_str))
    else:
        if middle not in vocab:
            raise ValueError(f"feature word {middle!r} is not in the vocabulary")
        f = FeatureTemplate(kind, word=vocab.id(middle), k=k)
    return f, lam

"""Text handling: tokenization, vocabulary, and segmented-corpus containers.

A corpus on disk is UTF-8 text, one sentence per line, with a delimiter line
(``===`` by default) separating documents.  Loading produces surface token
sentences grouped into document spans; a frequency-ranked vocabulary then maps
tokens to dense integer ids, with out-of-vocabulary tokens collapsing onto a
reserved unknown id.
"""

from __future__ import annotations

import re
import string
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

__all__ = [
    "tokenize",
    "Vocabulary",
    "SurfaceCorpus",
    "Corpus",
    "Segmentation",
    "load_corpus",
    "build_vocabulary",
    "encode",
]

DEFAULT_DELIMITER = "==="

#: Tokens whose trailing period is part of the word, not sentence punctuation.
_ABBREVIATIONS = frozenset(
    "mr mrs ms dr prof rev gen sen rep jr sr st mt co corp inc ltd no vs etc".split()
)
_LETTER_DOTS = re.compile(r"^(?:[a-z]\.)+$")
_PUNCT = string.punctuation


def tokenize(line: str) -> list[str]:
    """Split one sentence into lowercase tokens.

    Leading and trailing punctuation is stripped and discarded, with one
    exception: a trailing period stays attached when the remaining stem is a
    single letter, a dotted-letter sequence ("c.", "u.s."), or a recognized
    abbreviation ("mr.").  Tokens that are punctuation all the way through
    vanish.  Interior characters (hyphens, apostrophes, commas in numbers)
    are left alone.

    >>> tokenize("Mr. Coyote cited")
    ['mr.', 'coyote', 'cited']
    >>> tokenize("C. N. N.")
    ['c.', 'n.', 'n.']
    """
    out = []
    for raw in line.lower().split():
        tok = raw.lstrip(_PUNCT)
        stem = tok.rstrip(_PUNCT)
        if not stem:
            continue
        if tok[len(stem):].startswith(".") and _keeps_period(stem):
            stem += "."
        out.append(stem)
    return out


def _keeps_period(stem: str) -> bool:
    if stem in _ABBREVIATIONS:
        return True
    if len(stem) == 1 and stem.isalpha():
        return True
    return bool(_LETTER_DOTS.match(stem + "."))


class Vocabulary:
    """Dense word-id mapping with three reserved tokens.

    Ids 0, 1, 2 are the unknown word, sentence begin, and sentence end; real
    words occupy 3..size-1 in frequency-rank order.  Lookup of an unlisted
    surface form returns the unknown id.
    """

    UNK = "<unk>"
    SENT_BEGIN = "<s>"
    SENT_END = "</s>"
    RESERVED = (UNK, SENT_BEGIN, SENT_END)
    N_RESERVED = 3

    unk_id = 0
    sent_begin_id = 1
    sent_end_id = 2

    def __init__(self, words: Sequence[str]):
        words = list(words)
        if tuple(words[:3]) != self.RESERVED:
            raise ValueError(
                f"vocabulary must start with reserved tokens {self.RESERVED}"
            )
        if len(set(words)) != len(words):
            raise ValueError("vocabulary contains duplicate surface forms")
        self._words = words
        self._ids = {w: i for i, w in enumerate(words)}

    @property
    def size(self) -> int:
        return len(self._words)

    @property
    def words(self) -> list[str]:
        return list(self._words)

    def __len__(self) -> int:
        return len(self._words)

    def __contains__(self, word: str) -> bool:
        return word in self._ids

    def id(self, word: str) -> int:
        return self._ids.get(word, self.unk_id)

    def word(self, wid: int) -> str:
        if not 0 <= wid < len(self._words):
            raise ValueError(f"word id {wid} out of range [0, {len(self._words)})")
        return self._words[wid]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and other._words == self._words

    def save(self, path: str) -> None:
        """Write the vocabulary: a header line naming the reserved tokens,
        then one word per line in id order."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(" ".join(self.RESERVED) + "\n")
            for w in self._words[3:]:
                fh.write(w + "\n")

    @classmethod
    def load(cls, path: str) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().split()
            if tuple(header) != cls.RESERVED:
                raise ValueError(f"bad vocabulary header in {path!r}: {header}")
            words = [line.rstrip("\n") for line in fh if line.strip()]
        return cls(list(cls.RESERVED) + words)


def _check_spans(spans: Sequence[tuple[int, int]], n_sentences: int) -> None:
    if n_sentences == 0:
        raise ValueError("corpus has no sentences")
    expected_start = 0
    for first, last in spans:
        if first != expected_start or last < first:
            raise ValueError(f"document spans do not partition the corpus: {spans}")
        expected_start = last + 1
    if expected_start != n_sentences:
        raise ValueError("document spans do not cover every sentence")


class SurfaceCorpus:
    """Tokenized sentences (surface strings) grouped into document spans."""

    def __init__(self, sentences: Sequence[Sequence[str]],
                 doc_spans: Sequence[tuple[int, int]]):
        self.sentences = [list(s) for s in sentences]
        self.doc_spans = [tuple(sp) for sp in doc_spans]
        _check_spans(self.doc_spans, len(self.sentences))
        for i, sent in enumerate(self.sentences):
            if not sent:
                raise ValueError(f"sentence {i} is empty")

    @property
    def n_sentences(self) -> int:
        return len(self.sentences)

    @property
    def n_documents(self) -> int:
        return len(self.doc_spans)

    def iter_tokens(self) -> Iterable[str]:
        for sent in self.sentences:
            yield from sent


class Corpus:
    """Encoded corpus: sentences of word ids plus document spans.

    Sentence-begin/end markers are never stored; models add them on the fly.
    ``doc_spans`` holds inclusive ``(first_sentence, last_sentence)`` pairs
    that partition ``0..n_sentences-1`` in order.
    """

    def __init__(self, sentences: Sequence[Sequence[int]],
                 doc_spans: Sequence[tuple[int, int]]):
        self.sentences = [list(map(int, s)) for s in sentences]
        self.doc_spans = [tuple(sp) for sp in doc_spans]
        _check_spans(self.doc_spans, len(self.sentences))
        for i, sent in enumerate(self.sentences):
            if not sent:
                raise ValueError(f"sentence {i} is empty")

    @property
    def n_sentences(self) -> int:
        return len(self.sentences)

    @property
    def n_documents(self) -> int:
        return len(self.doc_spans)

    @property
    def n_words(self) -> int:
        return sum(len(s) for s in self.sentences)

    def doc_starts(self) -> list[int]:
        return [first for first, _ in self.doc_spans]

    def mean_doc_length(self) -> float:
        """Average document length in sentences."""
        return self.n_sentences / self.n_documents

    def prefix_words(self, max_words: int) -> "Corpus":
        """A corpus holding the leading sentences up to ``max_words`` word
        tokens (at least one sentence), with document spans clipped to match.
        Used to train on a subset of a large corpus."""
        if max_words <= 0:
            raise ValueError("max_words must be positive")
        total = 0
        cut = 0
        for i, sent in enumerate(self.sentences):
            total += len(sent)
            cut = i + 1
            if total >= max_words:
                break
        spans = []
        for first, last in self.doc_spans:
            if first >= cut:
                break
            spans.append((first, min(last, cut - 1)))
        return Corpus(self.sentences[:cut], spans)

    def reference_segmentation(self) -> "Segmentation":
        return Segmentation(
            self.n_sentences, [first for first, _ in self.doc_spans[1:]]
        )


class Segmentation:
    """A set of boundary gaps over ``n_sentences`` sentences.

    Gap ``g`` (``1 <= g <= n_sentences-1``) separates sentence ``g-1`` from
    sentence ``g``.  Boundaries are kept sorted and duplicate-free.
    """

    def __init__(self, n_sentences: int, boundaries: Iterable[int]):
        if n_sentences < 1:
            raise ValueError("a segmentation needs at least one sentence")
        bounds = sorted(int(g) for g in boundaries)
        for a, b in zip(bounds, bounds[1:]):
            if a == b:
                raise ValueError(f"duplicate boundary gap {a}")
        if bounds and not (1 <= bounds[0] and bounds[-1] <= n_sentences - 1):
            raise ValueError(
                f"boundary gaps must lie in [1, {n_sentences - 1}]: {bounds}"
            )
        self.n_sentences = int(n_sentences)
        self.boundaries = tuple(bounds)
        self._bound_set = frozenset(bounds)

    def __contains__(self, gap: int) -> bool:
        return gap in self._bound_set

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Segmentation)
            and other.n_sentences == self.n_sentences
            and other.boundaries == self.boundaries
        )

    @property
    def n_documents(self) -> int:
        return len(self.boundaries) + 1

    def doc_spans(self) -> list[tuple[int, int]]:
        starts = [0, *self.boundaries]
        ends = [*(g - 1 for g in self.boundaries), self.n_sentences - 1]
        return list(zip(starts, ends))

    def doc_ids(self) -> list[int]:
        """Document index of each sentence."""
        ids = [0] * self.n_sentences
        doc = 0
        for s in range(1, self.n_sentences):
            if s in self._bound_set:
                doc += 1
            ids[s] = doc
        return ids

    def save(self, path: str) -> None:
        """Write ``#n=<sentences>`` then one boundary gap index per line."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"#n={self.n_sentences}\n")
            for g in self.boundaries:
                fh.write(f"{g}\n")

    @classmethod
    def load(cls, path: str) -> "Segmentation":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip()
            if not header.startswith("#n="):
                raise ValueError(f"{path!r} lacks the '#n=<sentences>' header")
            n = int(header[3:])
            bounds = [int(line) for line in fh if line.strip()]
        return cls(n, bounds)


def load_corpus(source, delimiter: str = DEFAULT_DELIMITER) -> SurfaceCorpus:
    """Read a corpus from a path or an iterable of lines.

    A line equal to the delimiter (after stripping surrounding whitespace)
    closes the current document.  Blank lines and empty documents are
    skipped, so leading, trailing, or doubled delimiters are harmless.
    Raises ``ValueError`` if no sentences survive.
    """
    if isinstance(source, str):
        with open(source, encoding="utf-8") as fh:
            return load_corpus(list(fh), delimiter)

    sentences: list[list[str]] = []
    doc_spans: list[tuple[int, int]] = []
    doc_start = 0
    for line in source:
        if line.strip() == delimiter:
            if len(sentences) > doc_start:
                doc_spans.append((doc_start, len(sentences) - 1))
                doc_start = len(sentences)
            continue
        toks = tokenize(line)
        if toks:
            sentences.append(toks)
    if len(sentences) > doc_start:
        doc_spans.append((doc_start, len(sentences) - 1))
    if not sentences:
        raise ValueError("corpus stream yielded zero sentences")
    return SurfaceCorpus(sentences, doc_spans)


def build_vocabulary(corpus: SurfaceCorpus | Iterable[str],
                     max_size: int = 20000) -> Vocabulary:
    """Frequency-ranked vocabulary of at most ``max_size`` entries.

    The top ``max_size - 3`` surface forms by count (ties broken
    lexicographically) sit behind the three reserved tokens.
    """
    if max_size < 4:
        raise ValueError("max_size must leave room for the reserved tokens")
    tokens = corpus.iter_tokens() if isinstance(corpus, SurfaceCorpus) else corpus
    counts = Counter(tokens)
    for reserved in Vocabulary.RESERVED:
        counts.pop(reserved, None)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    keep = [w for w, _ in ranked[: max_size - 3]]
    return Vocabulary(list(Vocabulary.RESERVED) + keep)


def encode(surface: SurfaceCorpus, vocab: Vocabulary) -> Corpus:
    """Map every token to its id (unknown id for out-of-vocabulary forms)."""
    sentences = [[vocab.id(tok) for tok in sent] for sent in surface.sentences]
    return Corpus(sentences, surface.doc_spans)

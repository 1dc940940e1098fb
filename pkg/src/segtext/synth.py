"""Synthetic topical corpora with planted structure.

Documents draw a handful of planted "topic" words that recur throughout the
document and nowhere else, over a shared Zipf-ish background vocabulary.
That gives trigger selection a known answer (the planted self pairs), gives
relevance its rise-after-the-boundary shape, and, with an optional cue word
opening each document, gives boundary induction a feature worth finding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import SurfaceCorpus

__all__ = ["SynthResult", "synthetic_corpus", "write_corpus"]


@dataclass
class SynthResult:
    surface: SurfaceCorpus
    #: planted (s, t) trigger pairs as surface forms; s == t for self pairs
    planted: list[tuple[str, str]] = field(default_factory=list)
    cue_word: str | None = None


def synthetic_corpus(n_docs: int, seed: int, *, n_pairs: int = 50,
                     pairs_per_doc: int = 5, background_vocab: int = 500,
                     doc_sentences: tuple[int, int] = (16, 22),
                     sentence_words: tuple[int, int] = (8, 12),
                     topic_rate: float = 0.35, cue_word: str | None = "begin",
                     cue_prob: float = 1.0,
                     pair_style: str = "self") -> SynthResult:
    """Generate ``n_docs`` documents, deterministically for a given seed.

    ``pair_style="self"`` plants ``n_pairs`` bursty words, each document
    mixing ``pairs_per_doc`` of them into its sentences at ``topic_rate``;
    the planted trigger pairs are the self pairs (w, w).  ``"distinct"``
    instead plants source/target pairs: the source appears once early in the
    document and the target only afterwards.
    """
    if n_docs < 1:
        raise ValueError("need at least one document")
    if pair_style not in ("self", "distinct"):
        raise ValueError(f"unknown pair_style {pair_style!r}")
    if not 1 <= pairs_per_doc <= n_pairs:
        raise ValueError("pairs_per_doc must lie in [1, n_pairs]")
    rng = np.random.default_rng(seed)

    background = [f"w{i:03d}" for i in range(background_vocab)]
    bg_weights = 1.0 / (np.arange(background_vocab) + 2.0)
    bg_weights /= bg_weights.sum()

    if pair_style == "self":
        planted = [(f"topic{k:02d}", f"topic{k:02d}") for k in range(n_pairs)]
    else:
        planted = [(f"src{k:02d}", f"tgt{k:02d}") for k in range(n_pairs)]

    lo_s, hi_s = doc_sentences
    lo_w, hi_w = sentence_words
    sentences: list[list[str]] = []
    doc_spans: list[tuple[int, int]] = []

    for _ in range(n_docs):
        n_sent = int(rng.integers(lo_s, hi_s + 1))
        active = rng.choice(n_pairs, size=pairs_per_doc, replace=False)
        lengths = rng.integers(lo_w, hi_w + 1, size=n_sent)
        total = int(lengths.sum())
        is_topic = rng.random(total) < topic_rate
        bg_draw = rng.choice(background_vocab, size=total, p=bg_weights)
        topic_draw = active[rng.integers(0, pairs_per_doc, size=total)]

        doc: list[list[str]] = []
        pos = 0
        for length in lengths:
            sent = []
            for _ in range(int(length)):
                if pair_style == "self" and is_topic[pos]:
                    sent.append(planted[topic_draw[pos]][0])
                else:
                    sent.append(background[bg_draw[pos]])
                pos += 1
            doc.append(sent)

        if pair_style == "distinct":
            for k in active:
                src, tgt = planted[k]
                s_sent = int(rng.integers(0, max(1, n_sent // 3)))
                s_slot = int(rng.integers(0, len(doc[s_sent]) + 1))
                doc[s_sent].insert(s_slot, src)
                for si in range(s_sent + 1, n_sent):
                    if rng.random() < min(1.0, 3.0 / max(1, n_sent - s_sent - 1)):
                        slot = int(rng.integers(0, len(doc[si]) + 1))
                        doc[si].insert(slot, tgt)

        if cue_word is not None and rng.random() < cue_prob:
            doc[0].insert(0, cue_word)

        first = len(sentences)
        sentences.extend(doc)
        doc_spans.append((first, len(sentences) - 1))

    return SynthResult(SurfaceCorpus(sentences, doc_spans), planted,
                       cue_word if cue_word else None)


def write_corpus(surface: SurfaceCorpus, path: str, delimiter: str = "===") -> None:
    """One sentence per line, a delimiter line between documents."""
    with open(path, "w", encoding="utf-8") as fh:
        for d, (first, last) in enumerate(surface.doc_spans):
            if d > 0:
                fh.write(delimiter + "\n")
            for si in range(first, last + 1):
                fh.write(" ".join(surface.sentences[si]) + "\n")

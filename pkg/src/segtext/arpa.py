"""ARPA-format reader/writer for the backoff trigram model.

The file carries base-10 log probabilities and backoff weights.  Entries
that exist only to carry a backoff weight for a context (for example the
double begin-marker) use the conventional ``-99`` placeholder probability;
a backoff weight of ``-99`` likewise stands for an exact zero.  Values are
written with 17 significant digits so a round trip reproduces the model.
"""

from __future__ import annotations

import math

from .corpus import Vocabulary
from .trigram import TrigramModel

__all__ = ["write_arpa", "read_arpa"]

_PLACEHOLDER = -99.0


def _log10(p: float) -> float:
    return math.log10(p)


def _fmt(x: float) -> str:
    return format(x, ".17g")


def write_arpa(model: TrigramModel, path: str) -> None:
    vocab = model.vocab
    uni = list(range(vocab.size))
    bi_keys = sorted(set(model.p2) | set(model.bow3))
    tri_keys = sorted(model.p3)

    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\\data\\\n")
        fh.write(f"ngram 1={len(uni)}\n")
        fh.write(f"ngram 2={len(bi_keys)}\n")
        fh.write(f"ngram 3={len(tri_keys)}\n\n")

        fh.write("\\1-grams:\n")
        for w in uni:
            line = f"{_fmt(_log10(model.p1[w]))}\t{vocab.word(w)}"
            if w in model.bow2:
                line += f"\t{_fmt(_log10(model.bow2[w]))}"
            fh.write(line + "\n")
        fh.write("\n\\2-grams:\n")
        for v, w in bi_keys:
            p = model.p2.get((v, w))
            lp = _fmt(_log10(p)) if p is not None else _fmt(_PLACEHOLDER)
            line = f"{lp}\t{vocab.word(v)} {vocab.word(w)}"
            if (v, w) in model.bow3:
                line += f"\t{_fmt(_log10(model.bow3[(v, w)]))}"
            fh.write(line + "\n")
        fh.write("\n\\3-grams:\n")
        for u, v, w in tri_keys:
            fh.write(f"{_fmt(_log10(model.p3[(u, v, w)]))}\t"
                     f"{vocab.word(u)} {vocab.word(v)} {vocab.word(w)}\n")
        fh.write("\n\\end\\\n")


def read_arpa(path: str) -> TrigramModel:
    """Rebuild a model from an ARPA file.  The unigram section fixes the
    vocabulary (ids in order of appearance); counts are not recoverable."""
    import numpy as np

    sections: dict[int, list[tuple[float, list[str], float | None]]] = {1: [], 2: [], 3: []}
    declared: dict[int, int] = {}
    order = 0
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line == "\\data\\":
                order = 0
                continue
            if line == "\\end\\":
                break
            if line.startswith("ngram "):
                n, count = line[6:].split("=")
                declared[int(n)] = int(count)
                continue
            if line.endswith("-grams:") and line.startswith("\\"):
                order = int(line[1])
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                parts = line.split()
                parts = [parts[0], " ".join(parts[1:1 + order]),
                         *parts[1 + order:]]
            logp = float(parts[0])
            words = parts[1].split()
            bow = float(parts[2]) if len(parts) > 2 else None
            if order not in sections or len(words) != order:
                raise ValueError(f"malformed ARPA line: {raw!r}")
            sections[order].append((logp, words, bow))

    for n, entries in sections.items():
        if n in declared and declared[n] != len(entries):
            raise ValueError(
                f"ARPA header promises {declared[n]} {n}-grams, found {len(entries)}"
            )

    surfaces = [words[0] for _, words, _ in sections[1]]
    for tok in Vocabulary.RESERVED:
        if tok not in surfaces:
            raise ValueError(f"ARPA unigrams lack reserved token {tok!r}")
    if surfaces[:3] != list(Vocabulary.RESERVED):
        raise ValueError("ARPA unigrams must begin with the reserved tokens")
    vocab = Vocabulary(surfaces)

    p1 = np.zeros(vocab.size)
    bow2: dict[int, float] = {}
    for logp, (word,), bow in sections[1]:
        wid = vocab.id(word)
        p1[wid] = 10.0 ** logp
        if bow is not None:
            bow2[wid] = 0.0 if bow <= _PLACEHOLDER + 0.5 else 10.0 ** bow
    p2: dict[tuple[int, int], float] = {}
    bow3: dict[tuple[int, int], float] = {}
    for logp, (v, w), bow in sections[2]:
        key = (vocab.id(v), vocab.id(w))
        if logp > _PLACEHOLDER + 0.5:
            p2[key] = 10.0 ** logp
        if bow is not None:
            bow3[key] = 0.0 if bow <= _PLACEHOLDER + 0.5 else 10.0 ** bow
    p3: dict[tuple[int, int, int], float] = {}
    for logp, (u, v, w), _ in sections[3]:
        p3[(vocab.id(u), vocab.id(v), vocab.id(w))] = 10.0 ** logp

    return TrigramModel(vocab, p1, p2, p3, bow2, bow3, discount_cutoff=5, counts=None)

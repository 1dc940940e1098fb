"""Shared fixtures: small corpora with hand-checkable statistics."""

import numpy as np
import pytest

from segtext.corpus import Corpus, Vocabulary, build_vocabulary, encode, load_corpus

# Make the local oracle helpers importable from any test module.
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def toy_surface():
    return load_corpus(["the cat sat", "the cat ran", "===", "a dog sat"])


@pytest.fixture
def toy_vocab(toy_surface):
    return build_vocabulary(toy_surface, max_size=50)


@pytest.fixture
def toy_corpus(toy_surface, toy_vocab):
    # ids: cat=3 sat=4 the=5 a=6 dog=7 ran=8
    return encode(toy_surface, toy_vocab)


@pytest.fixture
def abc_corpus():
    """100 copies of the sentence "a b c" (a=3, b=4, c=5)."""
    surface = load_corpus(["a b c"] * 100)
    vocab = build_vocabulary(surface, max_size=10)
    return encode(surface, vocab), vocab


def random_corpus(seed, n_docs=6, vocab_size=30, doc_sentences=(3, 7),
                  sentence_words=(2, 9)):
    """Random encoded corpus over ids [3, vocab_size); reproducible."""
    rng = np.random.default_rng(seed)
    sentences, spans = [], []
    for _ in range(n_docs):
        start = len(sentences)
        for _ in range(rng.integers(doc_sentences[0], doc_sentences[1] + 1)):
            n = int(rng.integers(sentence_words[0], sentence_words[1] + 1))
            sentences.append([int(w) for w in rng.integers(3, vocab_size, n)])
        spans.append((start, len(sentences) - 1))
    vocab = Vocabulary(
        ["<unk>", "<s>", "</s>"] + [f"w{i}" for i in range(3, vocab_size)])
    return Corpus(sentences, spans), vocab

"""Trigger pairs: mutual-information selection, the sliding history cache,
the boosted distribution, and iterative-scaling training."""

import math

import numpy as np
import pytest

from segtext.corpus import Corpus, Vocabulary
from segtext.trigger import (
    HistoryCache,
    TriggerModel,
    TriggerPair,
    load_triggers,
    mean_log_likelihood,
    mutual_information,
    save_triggers,
    select_triggers,
    train_triggers_iis,
)
from segtext.trigram import train_trigram

from conftest import random_corpus
from oracles import dense_partition, mi_oracle


def doc_words(corpus):
    return [[w for s in range(first, last + 1) for w in corpus.sentences[s]]
            for first, last in corpus.doc_spans]


@pytest.fixture
def bursty():
    """Eight documents alternating between two bursty topic words (3 and 4)
    over a small uniform background."""
    rng = np.random.default_rng(77)
    sentences, spans = [], []
    for d in range(8):
        start = len(sentences)
        topic = 3 + (d % 2)
        for _ in range(4):
            sent = [topic if rng.random() < 0.5 else int(rng.integers(5, 12))
                    for _ in range(6)]
            sentences.append(sent)
        spans.append((start, len(sentences) - 1))
    vocab = Vocabulary(["<unk>", "<s>", "</s>"] + [f"w{i}" for i in range(3, 12)])
    return Corpus(sentences, spans), vocab


class TestMutualInformation:
    def test_alternating_pair_is_one_bit(self):
        corpus = Corpus([[3, 4, 3, 4]], [(0, 0)])
        assert mutual_information(corpus, 3, 4, window_n=1) == pytest.approx(
            math.log(2), abs=1e-12)

    def test_windows_do_not_cross_documents(self):
        corpus = Corpus([[3], [4]], [(0, 0), (1, 1)])
        assert mutual_information(corpus, 3, 4, window_n=5) == 0.0

    @pytest.mark.parametrize("seed,window", [(0, 3), (1, 10), (2, 500), (5, 1)])
    def test_matches_literal_slicing(self, seed, window):
        corpus, vocab = random_corpus(seed, n_docs=4, vocab_size=12)
        docs = doc_words(corpus)
        rng = np.random.default_rng(seed + 100)
        for _ in range(25):
            s, t = (int(x) for x in rng.integers(3, vocab.size, 2))
            assert mutual_information(corpus, s, t, window) == pytest.approx(
                mi_oracle(docs, s, t, window), abs=1e-12)

    def test_never_negative(self):
        corpus, vocab = random_corpus(3, n_docs=3, vocab_size=10)
        for s in range(3, 10):
            for t in range(3, 10):
                assert mutual_information(corpus, s, t, 4) >= 0.0


class TestSelectTriggers:
    def test_scores_and_order_match_oracle(self):
        corpus, vocab = random_corpus(8, n_docs=5, vocab_size=14,
                                      doc_sentences=(4, 8))
        pairs = select_triggers(corpus, vocab, window_n=20, max_pairs=30,
                                min_cooccur=1, min_freq=1)
        docs = doc_words(corpus)
        assert len(pairs) == 30
        for p in pairs:
            assert p.mi == pytest.approx(mi_oracle(docs, p.s, p.t, 20),
                                         abs=1e-12)
        keys = [(-p.mi, p.s, p.t) for p in pairs]
        assert keys == sorted(keys)

    def test_thresholds_respected(self, bursty):
        corpus, vocab = bursty
        docs = doc_words(corpus)
        counts = np.bincount([w for d in docs for w in d], minlength=vocab.size)
        pairs = select_triggers(corpus, vocab, window_n=30, max_pairs=500,
                                min_cooccur=3, min_freq=10)
        assert pairs
        for p in pairs:
            assert counts[p.s] >= 10 and counts[p.t] >= 10
            assert p.s >= 3 and p.t >= 3
            cooccur = sum(1 for d in docs for i, w in enumerate(d)
                          if w == p.t and p.s in d[max(0, i - 30):i])
            assert cooccur >= 3

    def test_bursty_words_trigger_themselves(self, bursty):
        corpus, vocab = bursty
        pairs = select_triggers(corpus, vocab, window_n=30, max_pairs=4,
                                min_cooccur=3, min_freq=5)
        top_sts = {(p.s, p.t) for p in pairs}
        assert (3, 3) in top_sts and (4, 4) in top_sts


def make_model(corpus, vocab, pair_ids, window_n=20, lambdas=None):
    prior = train_trigram(corpus, vocab)
    pairs = [TriggerPair(s=s, t=t) for s, t in pair_ids]
    model = TriggerModel(prior, pairs, window_n=window_n)
    if lambdas is not None:
        model = model.with_lambdas(np.asarray(lambdas, dtype=float))
    return model


class TestHistoryCache:
    @pytest.fixture
    def model(self, toy_corpus, toy_vocab):
        return make_model(toy_corpus, toy_vocab,
                          [(3, 4), (3, 5), (6, 4)], window_n=3,
                          lambdas=[1.0, -0.5, 2.0])

    def test_window_eviction(self, model):
        cache = model.new_cache()
        for w in [3, 5, 6, 7]:
            cache.push(w)
        assert len(cache) == 3
        assert 3 not in cache and 7 in cache

    def test_boost_follows_membership(self, model):
        cache = model.new_cache()
        cache.push(3)
        assert cache.boost(4) == pytest.approx(1.0)
        assert cache.boost(5) == pytest.approx(-0.5)
        cache.push(6)
        assert cache.boost(4) == pytest.approx(3.0)
        for w in (8, 8, 8):  # slide 3 and 6 out
            cache.push(w)
        assert cache.boost(4) == 0.0 and cache.boost(5) == 0.0
        assert cache.active == {}

    def test_duplicate_copies_keep_pair_active(self, model):
        cache = model.new_cache()
        for w in [3, 3, 7]:
            cache.push(w)
        cache.push(7)  # evicts one copy of 3, one remains
        assert cache.boost(4) == pytest.approx(1.0)
        cache.push(7)  # evicts the last copy
        assert cache.boost(4) == 0.0

    def test_rebuild_agrees_after_random_walk(self, model):
        rng = np.random.default_rng(5)
        cache = model.new_cache()
        for w in rng.integers(3, 9, 200):
            cache.push(int(w))
        fresh = cache.rebuild()
        assert fresh.words() == cache.words()
        assert fresh.active == cache.active

    def test_reset(self, model):
        cache = model.new_cache()
        cache.push(3)
        v = cache.version
        cache.reset()
        assert len(cache) == 0 and cache.active == {}
        assert cache.version > v


class TestTriggerModel:
    def test_rejects_reserved_and_duplicate_pairs(self, toy_corpus, toy_vocab):
        prior = train_trigram(toy_corpus, toy_vocab)
        with pytest.raises(ValueError):
            TriggerModel(prior, [TriggerPair(s=1, t=4)])
        with pytest.raises(ValueError):
            TriggerModel(prior, [TriggerPair(s=3, t=4), TriggerPair(s=3, t=4)])

    def test_zero_lambdas_reduce_to_prior(self, toy_corpus, toy_vocab):
        model = make_model(toy_corpus, toy_vocab, [(3, 4), (5, 6)])
        cache = model.new_cache()
        for w in [3, 5, 6]:
            cache.push(w)
        for w in range(toy_vocab.size):
            assert model.prob(w, cache, 5, 3) == pytest.approx(
                model.prior.prob(w, 5, 3), abs=1e-15)

    def test_normalization_and_dense_partition(self):
        corpus, vocab = random_corpus(13, n_docs=4, vocab_size=15)
        rng = np.random.default_rng(99)
        pair_ids = [(int(s), int(t)) for s, t in rng.integers(3, 15, (6, 2))]
        pair_ids = list(dict.fromkeys(pair_ids))
        model = make_model(corpus, vocab, pair_ids, window_n=10,
                           lambdas=rng.uniform(-2, 3, len(pair_ids)))
        cache = model.new_cache()
        for w in rng.integers(3, 15, 30):
            cache.push(int(w))
            contexts = [(1, 1), (5, 7), (int(w), 3)]
            for (u, v) in contexts:
                z_dense = dense_partition(model, cache, u, v)
                assert math.exp(model.log_partition(cache, u, v)) == (
                    pytest.approx(z_dense, rel=1e-10))
                total = math.fsum(model.prob(w2, cache, u, v)
                                  for w2 in range(vocab.size))
                assert total == pytest.approx(1.0, abs=1e-9)

    def test_partition_memo_tracks_cache_version(self, toy_corpus, toy_vocab):
        model = make_model(toy_corpus, toy_vocab, [(3, 4)], window_n=2,
                           lambdas=[2.0])
        cache = model.new_cache()
        cache.push(3)
        before = model.log_partition(cache, 1, 1)
        assert model.log_partition(cache, 1, 1) == before  # memo hit
        for w in (7, 7, 7):
            cache.push(w)
        after = model.log_partition(cache, 1, 1)
        assert after != before
        assert after == pytest.approx(0.0, abs=1e-12)


class TestIterativeScaling:
    def test_trace_monotone_and_improves(self, bursty):
        corpus, vocab = bursty
        model = make_model(corpus, vocab, [(3, 3), (4, 4), (3, 4)],
                           window_n=30)
        trained = train_triggers_iis(model, corpus, iterations=8)
        trace = trained.training_ll_trace
        assert len(trace) >= 2
        assert all(b >= a - 1e-10 for a, b in zip(trace, trace[1:]))
        assert trace[-1] > trace[0] + 0.01

    def test_trace_endpoints_match_direct_walk(self, bursty):
        corpus, vocab = bursty
        model = make_model(corpus, vocab, [(3, 3), (4, 4)], window_n=30)
        trained = train_triggers_iis(model, corpus, iterations=5)
        assert trained.training_ll_trace[0] == pytest.approx(
            mean_log_likelihood(model, corpus), abs=1e-9)
        assert trained.training_ll_trace[-1] == pytest.approx(
            mean_log_likelihood(trained, corpus), abs=1e-9)

    def test_bursty_pairs_get_positive_weight(self, bursty):
        corpus, vocab = bursty
        model = make_model(corpus, vocab, [(3, 3), (4, 4)], window_n=30)
        trained = train_triggers_iis(model, corpus, iterations=8)
        assert trained.lambdas[0] > 0.2
        assert trained.lambdas[1] > 0.2
        assert np.all(np.abs(trained.lambdas) <= 10.0)

    def test_no_pairs_is_a_no_op(self, bursty):
        corpus, vocab = bursty
        model = make_model(corpus, vocab, [])
        trained = train_triggers_iis(model, corpus, iterations=3)
        assert trained.n_pairs == 0
        assert len(trained.training_ll_trace) == 1

    def test_training_beats_prior_perplexity(self, bursty):
        corpus, vocab = bursty
        model = make_model(corpus, vocab, [(3, 3), (4, 4)], window_n=30)
        trained = train_triggers_iis(model, corpus, iterations=8)
        prior_ll = mean_log_likelihood(model, corpus)
        assert mean_log_likelihood(trained, corpus) > prior_ll


class TestTriggerFiles:
    def test_round_trip(self, tmp_path, toy_vocab):
        pairs = [TriggerPair(s=3, t=4, lam=0.5, mi=0.25),
                 TriggerPair(s=5, t=5, lam=-1.25, mi=0.75)]
        path = str(tmp_path / "triggers.tsv")
        save_triggers(path, pairs, toy_vocab)
        loaded = load_triggers(path, toy_vocab)
        assert loaded == [pairs[1], pairs[0]]  # best mutual information first

    def test_unknown_surface_rejected(self, tmp_path, toy_vocab):
        path = tmp_path / "triggers.tsv"
        path.write_text("cat\tzebra\t0.0\t0.1\n", encoding="utf-8")
        with pytest.raises(ValueError):
            load_triggers(str(path), toy_vocab)

    def test_malformed_line_rejected(self, tmp_path, toy_vocab):
        path = tmp_path / "triggers.tsv"
        path.write_text("cat\tsat\n", encoding="utf-8")
        with pytest.raises(ValueError):
            load_triggers(str(path), toy_vocab)

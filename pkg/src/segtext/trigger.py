"""Long-range trigger-pair model layered on the trigram prior.

A trigger pair (s, t) raises the probability of word t whenever s occurred
in the recent history — a sliding window over the last ``window_n`` word
tokens.  The model multiplies the trigram prior by ``exp(sum of active
lambdas)`` and renormalizes; because features touch only triggered words,
the partition function reduces to a sparse sum over currently boosted
targets.  Pairs are chosen by mutual information between "s occurred in the
window" and "the next word is t", and their weights are fit by improved
iterative scaling.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, replace

import numpy as np

from .corpus import Corpus, Vocabulary
from .trigram import TrigramModel, sentence_events

__all__ = [
    "TriggerPair",
    "TriggerModel",
    "HistoryCache",
    "mutual_information",
    "select_triggers",
    "train_triggers_iis",
    "mean_log_likelihood",
    "save_triggers",
    "load_triggers",
]

LAMBDA_CLAMP = 10.0


@dataclass(frozen=True)
class TriggerPair:
    s: int
    t: int
    lam: float = 0.0
    mi: float = 0.0


def _mi_from_table(n11: float, n1_: float, n_1: float, n: float) -> float:
    """Mutual information (nats) of a 2x2 contingency table given the joint
    cell ``n11``, the two marginals, and the total.  Empty cells contribute
    zero."""
    total = 0.0
    for cell, rm, cm in (
        (n11, n1_, n_1),
        (n1_ - n11, n1_, n - n_1),
        (n_1 - n11, n - n1_, n_1),
        (n - n1_ - n_1 + n11, n - n1_, n - n_1),
    ):
        if cell > 0 and rm > 0 and cm > 0:
            total += (cell / n) * math.log(cell * n / (rm * cm))
    return max(0.0, total)


def _doc_word_arrays(corpus: Corpus) -> list[np.ndarray]:
    docs = []
    for first, last in corpus.doc_spans:
        words: list[int] = []
        for s in range(first, last + 1):
            words.extend(corpus.sentences[s])
        docs.append(np.asarray(words, dtype=np.int64))
    return docs


def mutual_information(corpus: Corpus, s: int, t: int, window_n: int) -> float:
    """MI between the indicator "s occurred within the previous ``window_n``
    words" and "the current word is t", over every word position.  Windows
    never cross document boundaries."""
    if window_n < 1:
        raise ValueError("window_n must be positive")
    n11 = n1_ = n_1 = n = 0
    for doc in _doc_word_arrays(corpus):
        window: deque[int] = deque()
        counts: Counter = Counter()
        for w in doc:
            x = counts[s] > 0
            if x:
                n1_ += 1
            if w == t:
                n_1 += 1
                if x:
                    n11 += 1
            n += 1
            window.append(w)
            counts[w] += 1
            if len(window) > window_n:
                old = window.popleft()
                counts[old] -= 1
                if counts[old] == 0:
                    del counts[old]
    if n == 0:
        return 0.0
    return _mi_from_table(n11, n1_, n_1, n)


def select_triggers(corpus: Corpus, vocab: Vocabulary, window_n: int = 500,
                    max_pairs: int = 200, min_cooccur: float = 3,
                    min_freq: int = 10) -> list[TriggerPair]:
    """Rank candidate (s, t) pairs by mutual information and keep the top
    ``max_pairs``.

    Both words must occur at least ``min_freq`` times and the pair must
    co-occur (s in window, then t) at least ``min_cooccur`` times.  Ties
    break toward smaller (s, t) ids.  Self pairs s == t are welcome — bursty
    words trigger themselves.
    """
    if window_n < 1:
        raise ValueError("window_n must be positive")
    docs = _doc_word_arrays(corpus)
    size = vocab.size
    col = np.zeros(size, dtype=np.int64)
    for doc in docs:
        col += np.bincount(doc, minlength=size)
    total_positions = int(col.sum())

    cand = np.flatnonzero(col >= min_freq)
    cand = cand[cand >= 3]  # reserved ids never trigger
    if len(cand) == 0 or total_positions == 0:
        return []
    cand_row = {int(s): i for i, s in enumerate(cand)}

    n11 = np.zeros((len(cand), size), dtype=np.int64)
    n1_ = np.zeros(len(cand), dtype=np.int64)
    for doc in docs:
        present = np.unique(doc)
        for s in present:
            row = cand_row.get(int(s))
            if row is None:
                continue
            occ = np.flatnonzero(doc == s)
            # positions whose preceding window contains s: union of
            # (o, o+window_n] ranges, built with a difference array
            diff = np.zeros(len(doc) + 1, dtype=np.int32)
            starts = occ + 1
            ends = np.minimum(occ + 1 + window_n, len(doc))
            valid = starts < len(doc)
            np.add.at(diff, starts[valid], 1)
            np.add.at(diff, ends[valid], -1)
            mask = np.cumsum(diff[:-1]) > 0
            n1_[row] += int(mask.sum())
            n11[row] += np.bincount(doc[mask], minlength=size)

    n11f = n11.astype(np.float64)
    scored: list[tuple[float, int, int]] = []
    n = float(total_positions)
    for i, s in enumerate(cand):
        row = n11f[i]
        ts = np.flatnonzero(n11[i] >= min_cooccur)
        ts = ts[ts >= 3]
        for t in ts:
            mi = _mi_from_table(row[t], float(n1_[i]), float(col[t]), n)
            scored.append((float(mi), int(s), int(t)))
    scored.sort(key=lambda x: (-x[0], x[1], x[2]))
    return [TriggerPair(s=s, t=t, lam=0.0, mi=mi) for mi, s, t in scored[:max_pairs]]


class HistoryCache:
    """Sliding multiset of the last ``window_n`` word tokens, tracking which
    trigger pairs are active.

    ``active`` maps each boosted target t to ``{pair index: lambda}`` for
    every pair whose source word is somewhere in the window.  Entries appear
    when a source enters the window and vanish exactly when its last copy
    leaves, so the active set never drifts.  ``version`` bumps on every
    mutation; the owning model uses it to memoize partition functions.
    """

    def __init__(self, model: "TriggerModel"):
        self._model = model
        self.window_n = model.window_n
        self._window: deque[int] = deque()
        self._counts: Counter = Counter()
        self.active: dict[int, dict[int, float]] = {}
        self.version = 0

    def __len__(self) -> int:
        return len(self._window)

    def __contains__(self, w: int) -> bool:
        return self._counts[w] > 0

    def words(self) -> Counter:
        return Counter(self._counts)

    def _activate(self, s: int) -> None:
        model = self._model
        for pi in model._by_s.get(s, ()):
            t = model.pairs[pi].t
            self.active.setdefault(t, {})[pi] = model.lambdas[pi]

    def _deactivate(self, s: int) -> None:
        model = self._model
        for pi in model._by_s.get(s, ()):
            t = model.pairs[pi].t
            slot = self.active[t]
            del slot[pi]
            if not slot:
                del self.active[t]

    def push(self, w: int) -> None:
        self.version += 1
        self._window.append(w)
        self._counts[w] += 1
        if self._counts[w] == 1:
            self._activate(w)
        if len(self._window) > self.window_n:
            old = self._window.popleft()
            self._counts[old] -= 1
            if self._counts[old] == 0:
                del self._counts[old]
                self._deactivate(old)

    def reset(self) -> None:
        self.version += 1
        self._window.clear()
        self._counts.clear()
        self.active.clear()

    def boost(self, w: int) -> float:
        """Sum of lambdas of active pairs targeting w."""
        slot = self.active.get(w)
        return sum(slot.values()) if slot else 0.0

    def rebuild(self) -> "HistoryCache":
        """Fresh cache fed the same window contents (for consistency checks)."""
        other = HistoryCache(self._model)
        for w in self._window:
            other.push(w)
        return other


class TriggerModel:
    """Trigram prior reweighted by trigger-pair boosts."""

    def __init__(self, prior: TrigramModel, pairs: list[TriggerPair],
                 window_n: int = 500):
        if window_n < 1:
            raise ValueError("window_n must be positive")
        size = prior.vocab.size
        seen: set[tuple[int, int]] = set()
        for p in pairs:
            if not (3 <= p.s < size and 3 <= p.t < size):
                raise ValueError(f"trigger pair {(p.s, p.t)} uses a reserved or "
                                 "out-of-range word id")
            if (p.s, p.t) in seen:
                raise ValueError(f"duplicate trigger pair {(p.s, p.t)}")
            seen.add((p.s, p.t))
        self.prior = prior
        self.vocab = prior.vocab
        self.pairs = list(pairs)
        self.window_n = int(window_n)
        self.lambdas = np.array([p.lam for p in pairs], dtype=np.float64)
        by_s: dict[int, list[int]] = {}
        for i, p in enumerate(pairs):
            by_s.setdefault(p.s, []).append(i)
        self._by_s = by_s

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)

    def with_lambdas(self, lambdas: np.ndarray) -> "TriggerModel":
        if len(lambdas) != len(self.pairs):
            raise ValueError("lambda vector length mismatch")
        pairs = [replace(p, lam=float(l)) for p, l in zip(self.pairs, lambdas)]
        return TriggerModel(self.prior, pairs, self.window_n)

    def new_cache(self) -> HistoryCache:
        return HistoryCache(self)

    def log_partition(self, cache: HistoryCache, w2: int, w1: int) -> float:
        """ln Z(history, context): computed over the active targets only,
        since unboosted words contribute exactly their prior mass."""
        memo = getattr(cache, "_z_memo", None)
        if memo is not None and memo[0] == (cache.version, w2, w1):
            return memo[1]
        z = 1.0
        prior = self.prior
        for t, slot in cache.active.items():
            lam = sum(slot.values())
            z += prior.prob(t, w2, w1) * math.expm1(lam)
        logz = math.log(z)
        cache._z_memo = ((cache.version, w2, w1), logz)
        return logz

    def prob(self, w: int, cache: HistoryCache, w2: int, w1: int) -> float:
        """p(w | history, w2, w1): the boosted, renormalized prior."""
        p0 = self.prior.prob(w, w2, w1)
        lam = cache.boost(w)
        return p0 * math.exp(lam - self.log_partition(cache, w2, w1))

    def logprob(self, w: int, cache: HistoryCache, w2: int, w1: int) -> float:
        return (self.prior.logprob(w, w2, w1) + cache.boost(w)
                - self.log_partition(cache, w2, w1))


# --------------------------------------------------------------------------
# training

class _EventTable:
    """Flattened record of one pass over the corpus: for every prediction
    event, the active boosted targets, their prior probabilities, and the
    pair memberships.  Everything iterative scaling needs, with no further
    corpus walks."""

    def __init__(self, model: TriggerModel, corpus: Corpus):
        vocab = model.vocab
        prior = model.prior
        grp_event: list[int] = []
        grp_p0: list[float] = []
        grp_m: list[int] = []
        ent_group: list[int] = []
        ent_pair: list[int] = []
        match_pairs: list[int] = []
        prior_ll = 0.0
        match_group: list[int] = []
        n_events = 0

        cache = model.new_cache()
        for first, last in corpus.doc_spans:
            cache.reset()
            for si in range(first, last + 1):
                sent = corpus.sentences[si]
                for (u, v), w in sentence_events(sent, vocab):
                    j = n_events
                    n_events += 1
                    prior_ll += math.log(prior.prob(w, u, v))
                    mg = -1
                    for t, slot in cache.active.items():
                        g = len(grp_event)
                        grp_event.append(j)
                        grp_p0.append(prior.prob(t, u, v))
                        grp_m.append(len(slot))
                        for pi in slot:
                            ent_group.append(g)
                            ent_pair.append(pi)
                        if t == w:
                            mg = g
                            match_pairs.extend(slot)
                    match_group.append(mg)
                    if w != vocab.sent_end_id:
                        cache.push(w)

        self.n_events = n_events
        self.prior_ll = prior_ll
        self.grp_event = np.asarray(grp_event, dtype=np.int64)
        self.grp_p0 = np.asarray(grp_p0, dtype=np.float64)
        self.grp_m = np.asarray(grp_m, dtype=np.int64)
        self.ent_group = np.asarray(ent_group, dtype=np.int64)
        self.ent_pair = np.asarray(ent_pair, dtype=np.int64)
        self.match_group = np.asarray(match_group, dtype=np.int64)
        self.empirical = np.bincount(np.asarray(match_pairs, dtype=np.int64),
                                     minlength=model.n_pairs).astype(np.float64)

    def boosts(self, lam: np.ndarray) -> np.ndarray:
        n_groups = len(self.grp_event)
        if len(self.ent_group) == 0:
            return np.zeros(n_groups)
        return np.bincount(self.ent_group, weights=lam[self.ent_pair],
                           minlength=n_groups)

    def log_likelihood(self, lam: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        """Total training log likelihood plus the per-group boost and
        per-event partition value for the given lambdas."""
        lam_grp = self.boosts(lam)
        z = np.ones(self.n_events)
        if len(lam_grp):
            contrib = self.grp_p0 * np.expm1(lam_grp)
            z += np.bincount(self.grp_event, weights=contrib,
                             minlength=self.n_events)
        matched = self.match_group[self.match_group >= 0]
        ll = self.prior_ll + float(lam_grp[matched].sum()) - float(np.log(z).sum())
        return ll, lam_grp, z


def _solve_scaling_updates(s_hist: np.ndarray, target: np.ndarray,
                           tol: float = 1e-8, max_steps: int = 50) -> np.ndarray:
    """Per-feature improved-iterative-scaling step: solve
    ``sum_m S[i, m] * exp(delta_i * m) = target_i`` for each row.

    Newton iterations on the log of the left side (convex, monotone), with a
    bisection fallback whenever a step escapes the current sign bracket.
    Rows with zero target are sent to -inf (the caller clamps); rows that
    never fire keep delta 0.
    """
    n, m_dim = s_hist.shape
    mvals = np.arange(m_dim, dtype=np.float64)
    row_mass = s_hist.sum(axis=1)
    delta = np.zeros(n)
    live = (row_mass > 0) & (target > 0)
    dead_neg = (row_mass > 0) & (target <= 0)
    delta[dead_neg] = -np.inf

    if not live.any():
        return delta
    s_live = s_hist[live]
    t_live = np.log(target[live])
    d = np.zeros(s_live.shape[0])
    lo = np.full_like(d, -60.0)
    hi = np.full_like(d, 60.0)
    for _ in range(max_steps):
        ex = np.exp(d[:, None] * mvals[None, :])
        phi = (s_live * ex).sum(axis=1)
        dphi = (s_live * ex * mvals[None, :]).sum(axis=1)
        g = np.log(phi) - t_live
        too_low = g < 0
        lo = np.where(too_low, d, lo)
        hi = np.where(~too_low, d, hi)
        step = g / (dphi / phi)
        nd = d - step
        outside = (nd <= lo) | (nd >= hi)
        nd = np.where(outside, 0.5 * (lo + hi), nd)
        moved = np.abs(nd - d)
        d = nd
        if moved.max() < tol:
            break
    delta[live] = d
    return delta


def train_triggers_iis(model: TriggerModel, corpus: Corpus,
                       iterations: int = 10, tol: float = 1e-9) -> TriggerModel:
    """Fit trigger lambdas by improved iterative scaling.

    The history cache restarts at every document boundary (segment structure
    of the training text is known).  Returns a new model whose
    ``training_ll_trace`` attribute holds the mean log likelihood per event
    after each pass — non-decreasing, and starting at the trigram prior's
    likelihood when the incoming lambdas are zero.
    """
    if model.n_pairs == 0 or iterations < 1:
        out = model.with_lambdas(model.lambdas)
        out.training_ll_trace = (mean_log_likelihood(model, corpus),)
        return out

    table = _EventTable(model, corpus)
    lam = model.lambdas.copy()
    trace = []
    m_max = int(table.grp_m.max()) if len(table.grp_m) else 0

    for _ in range(iterations):
        ll, lam_grp, z = table.log_likelihood(lam)
        trace.append(ll / table.n_events)
        if m_max == 0:
            break
        p_grp = table.grp_p0 * np.exp(lam_grp) / z[table.grp_event]
        s_hist = np.zeros((model.n_pairs, m_max + 1))
        np.add.at(s_hist, (table.ent_pair, table.grp_m[table.ent_group]),
                  p_grp[table.ent_group])
        delta = _solve_scaling_updates(s_hist, table.empirical)
        new_lam = np.clip(lam + delta, -LAMBDA_CLAMP, LAMBDA_CLAMP)
        bad = ~np.isfinite(new_lam)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            pair = model.pairs[i]
            raise ArithmeticError(
                "divergent iterative-scaling update for trigger pair "
                f"({model.vocab.word(pair.s)!r}, {model.vocab.word(pair.t)!r})"
            )
        moved = np.abs(new_lam - lam).max()
        lam = new_lam
        if moved < tol:
            break

    ll, _, _ = table.log_likelihood(lam)
    trace.append(ll / table.n_events)
    out = model.with_lambdas(lam)
    out.training_ll_trace = tuple(trace)
    return out


def mean_log_likelihood(model: TriggerModel, corpus: Corpus,
                        reset_at_doc_boundaries: bool = True) -> float:
    """Mean log p(event) over the corpus via a plain cache walk — the slow,
    direct counterpart of the vectorized training path."""
    vocab = model.vocab
    cache = model.new_cache()
    total = 0.0
    events = 0
    for first, last in corpus.doc_spans:
        if reset_at_doc_boundaries:
            cache.reset()
        for si in range(first, last + 1):
            for (u, v), w in sentence_events(corpus.sentences[si], vocab):
                total += model.logprob(w, cache, u, v)
                events += 1
                if w != vocab.sent_end_id:
                    cache.push(w)
    if events == 0:
        raise ValueError("empty corpus")
    return total / events


# --------------------------------------------------------------------------
# serialization

def save_triggers(path: str, pairs: list[TriggerPair], vocab: Vocabulary) -> None:
    """TSV of ``s  t  lambda  mi`` surface forms, best pairs first."""
    ordered = sorted(pairs, key=lambda p: (-p.mi, p.s, p.t))
    with open(path, "w", encoding="utf-8") as fh:
        for p in ordered:
            fh.write(f"{vocab.word(p.s)}\t{vocab.word(p.t)}\t"
                     f"{float(p.lam)!r}\t{float(p.mi)!r}\n")


def load_triggers(path: str, vocab: Vocabulary) -> list[TriggerPair]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            parts = raw.rstrip("\n").split("\t")
            if len(parts) != 4:
                raise ValueError(f"{path!r} line {ln}: expected 4 tab fields")
            s_word, t_word, lam, mi = parts
            for word in (s_word, t_word):
                if word not in vocab:
                    raise ValueError(f"{path!r} line {ln}: {word!r} is not in "
                                     "the vocabulary")
            pairs.append(TriggerPair(s=vocab.id(s_word), t=vocab.id(t_word),
                                     lam=float(lam), mi=float(mi)))
    return pairs

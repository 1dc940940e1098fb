"""Independent reference implementations used only by the tests.

Each oracle recomputes a quantity from first principles — dense sums, brute
enumeration, grid search — sharing no code with the package internals, so
agreement is evidence rather than tautology.
"""

from __future__ import annotations

import math
from collections import Counter
from itertools import combinations

import numpy as np


class KatzReference:
    """Dense backoff trigram estimator.

    Follows the same estimation rules as the package (Good-Turing discounts
    for counts up to k with absolute-discount fallbacks, begin-marker
    padding, predicted end marker) but derives every conditional
    distribution as a full dense row, with backoff weights recomputed from
    dense sums instead of stored.
    """

    def __init__(self, sentences, vocab_size, k=5, bos=1, eos=2):
        self.V = int(vocab_size)
        self.k = int(k)
        tri: Counter = Counter()
        for sent in sentences:
            seq = [bos, bos, *sent, eos]
            for i in range(2, len(seq)):
                tri[(seq[i - 2], seq[i - 1], seq[i])] += 1
        self.tri = tri
        self.bi: Counter = Counter()
        self.uni: Counter = Counter()
        for (u, v, w), c in tri.items():
            self.bi[(v, w)] += c
            self.uni[w] += c
        self.d1 = self._gt_table(Counter(self.uni.values()))
        self.d2 = self._gt_table(Counter(self.bi.values()))
        self.d3 = self._gt_table(Counter(self.tri.values()))
        self._unigram_row = self._unigrams()
        self._bi_rows: dict[int, np.ndarray] = {}
        self._tri_rows: dict[tuple[int, int], np.ndarray] = {}

    def _gt_table(self, coc):
        out = {}
        k = self.k
        n1 = coc.get(1, 0)
        nk1 = coc.get(k + 1, 0)
        for c in range(1, k + 1):
            d = None
            if n1 > 0 and coc.get(c, 0) > 0 and coc.get(c + 1, 0) > 0:
                big_a = (k + 1) * nk1 / n1
                if big_a < 1.0:
                    val = ((c + 1) * coc[c + 1] / (c * coc[c]) - big_a) / (1.0 - big_a)
                    if 0.0 < val < 1.0:
                        d = val
            out[c] = d if d is not None else (c - 0.5) / c
        return out

    def _disc(self, c, table):
        return table[c] * c if c <= self.k else float(c)

    def _unigrams(self):
        total = sum(self.uni.values())
        row = np.zeros(self.V)
        zeros = [w for w in range(self.V) if self.uni.get(w, 0) == 0]
        if not zeros:
            for w, c in self.uni.items():
                row[w] = c / total
            return row
        disc = {w: self._disc(c, self.d1) for w, c in self.uni.items()}
        freed = 1.0 - sum(disc.values()) / total
        if freed <= 1e-12:
            disc = {w: c - 0.5 for w, c in self.uni.items()}
            freed = 1.0 - sum(disc.values()) / total
        for w, d in disc.items():
            row[w] = d / total
        for w in zeros:
            row[w] = freed / len(zeros)
        return row

    def _mix(self, seen, lower_row, table):
        if not seen:
            return lower_row.copy()
        total = sum(seen.values())
        row = np.zeros(self.V)
        if len(seen) == self.V:
            for w, c in seen.items():
                row[w] = c / total
            return row
        disc = {w: self._disc(c, table) for w, c in seen.items()}
        freed = 1.0 - sum(disc.values()) / total
        if freed <= 1e-12:
            disc = {w: c - 0.5 for w, c in seen.items()}
            freed = 1.0 - sum(disc.values()) / total
        alpha = freed / (1.0 - sum(lower_row[w] for w in seen))
        row = alpha * lower_row
        for w, d in disc.items():
            row[w] = d / total
        return row

    def bigram_row(self, v):
        if v not in self._bi_rows:
            seen = {w: c for (vv, w), c in self.bi.items() if vv == v}
            self._bi_rows[v] = self._mix(seen, self._unigram_row, self.d2)
        return self._bi_rows[v]

    def trigram_row(self, u, v):
        if (u, v) not in self._tri_rows:
            seen = {w: c for (uu, vv, w), c in self.tri.items()
                    if uu == u and vv == v}
            self._tri_rows[(u, v)] = self._mix(seen, self.bigram_row(v), self.d3)
        return self._tri_rows[(u, v)]

    def prob(self, w, u, v):
        return float(self.trigram_row(u, v)[w])


def mi_oracle(docs, s, t, window):
    """2x2 contingency mutual information by literal window slicing."""
    n11 = n10 = n01 = n00 = 0
    for doc in docs:
        doc = list(doc)
        for i, w in enumerate(doc):
            x = s in doc[max(0, i - window):i]
            y = w == t
            if x and y:
                n11 += 1
            elif x:
                n10 += 1
            elif y:
                n01 += 1
            else:
                n00 += 1
    n = n11 + n10 + n01 + n00
    if n == 0:
        return 0.0
    total = 0.0
    marg_x = {1: n11 + n10, 0: n01 + n00}
    marg_y = {1: n11 + n01, 0: n10 + n00}
    for cell, x, y in ((n11, 1, 1), (n10, 1, 0), (n01, 0, 1), (n00, 0, 0)):
        if cell:
            total += (cell / n) * math.log(cell * n / (marg_x[x] * marg_y[y]))
    return total


def dense_partition(trigger_model, cache, w2, w1):
    """Z(history, context) summed over the entire vocabulary."""
    terms = []
    for w in range(trigger_model.vocab.size):
        terms.append(math.exp(cache.boost(w)) * trigger_model.prior.prob(w, w2, w1))
    return math.fsum(terms)


def doc_id_array(n, boundaries):
    ids = np.zeros(n, dtype=np.int64)
    for g in boundaries:
        ids[g:] += 1
    return ids


def p_mu_oracle(n, ref_bounds, hyp_bounds, mu):
    """Agreement metric by direct summation over all ordered sentence pairs
    (i <= j, the diagonal included)."""
    ref = doc_id_array(n, ref_bounds)
    hyp = doc_id_array(n, hyp_bounds)
    i, j = np.triu_indices(n)
    weights = np.exp(-mu * (j - i))
    agree = (ref[i] == ref[j]) == (hyp[i] == hyp[j])
    return float((weights * agree).sum() / weights.sum())


def decide_oracle(probs, alpha, epsilon):
    """Boundary placement by exhaustive search: among all subsets of
    above-threshold gaps whose pairwise separation reaches epsilon, pick the
    lexicographically greatest membership vector in preference order
    (descending probability, then smaller gap) — the set a greedy sweep in
    that order commits to."""
    cands = [i + 1 for i, p in enumerate(probs) if p >= alpha]
    pref = sorted(cands, key=lambda g: (-probs[g - 1], g))
    best_key = None
    best = []
    for r in range(len(pref) + 1):
        for combo in combinations(pref, r):
            gaps = sorted(combo)
            if all(b - a >= epsilon for a, b in zip(gaps, gaps[1:])):
                chosen = set(combo)
                key = tuple(1 if g in chosen else 0 for g in pref)
                if best_key is None or key > best_key:
                    best_key = key
                    best = gaps
    return best


def gain_grid_oracle(firing_logits, firing_labels, n_events,
                     lo=-15.0, hi=15.0, step=1e-4):
    """Best feature weight and gain by dense grid search over alpha."""
    a0 = np.asarray(firing_logits, dtype=np.float64)
    y = np.asarray(firing_labels, dtype=bool)
    base = np.where(y, -np.logaddexp(0, -a0), -np.logaddexp(0, a0)).sum()
    best_alpha = 0.0
    best_ll = base
    grid = np.arange(lo, hi + step / 2, step)
    for chunk in np.array_split(grid, max(1, len(grid) // 5000)):
        shifted = a0[:, None] + chunk[None, :]
        ll = np.where(y[:, None], -np.logaddexp(0, -shifted),
                      -np.logaddexp(0, shifted)).sum(axis=0)
        k = int(np.argmax(ll))
        if ll[k] > best_ll:
            best_ll = float(ll[k])
            best_alpha = float(chunk[k])
    return best_alpha, (best_ll - base) / n_events


def spearman(xs, ys):
    """Spearman rank correlation (no tie correction)."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    rx = np.argsort(np.argsort(xs)).astype(np.float64)
    ry = np.argsort(np.argsort(ys)).astype(np.float64)
    rx -= rx.mean()
    ry -= ry.mean()
    return float((rx * ry).sum() / np.sqrt((rx ** 2).sum() * (ry ** 2).sum()))

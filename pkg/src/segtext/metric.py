"""Segmentation quality: the distance-weighted agreement probability,
exact-match precision/recall, and the four degenerate baselines.

The headline number is the probability that two sentences, drawn with
exponentially distributed separation, are classified the same way by
reference and hypothesis — both in one document, or not.  Near misses keep
most of the credit (only pairs straddling the small disputed strip
disagree), which is the whole point versus exact-match scoring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import Segmentation

__all__ = [
    "DistanceDistribution",
    "MetricReport",
    "p_mu",
    "precision_recall",
    "evaluate",
    "baseline",
    "monte_carlo_p_mu",
    "mu_from_reference",
    "format_table",
    "TSV_HEADER",
    "report_tsv_line",
]

BASELINE_KINDS = ("random", "all", "none", "even")


class DistanceDistribution:
    """Exponential weight over ordered sentence pairs i <= j (diagonal
    included): D(i, j) proportional to e^{-mu (j-i)}, normalized to sum to
    one over all such pairs of an n-sentence text."""

    def __init__(self, mu: float, n: int):
        if n < 2:
            raise ValueError("need at least two sentences")
        if not (mu > 0 and math.isfinite(mu)):
            raise ValueError("mu must be positive and finite")
        self.mu = float(mu)
        self.n = int(n)
        # prefix[d] = sum of e^{-mu t} for t = 0..d
        self._decay = np.exp(-self.mu * np.arange(n))
        self._prefix = np.cumsum(self._decay)
        # row i contributes distances 0..n-1-i
        self._total = float(self._prefix[::-1].sum())
        self.gamma = 1.0 / self._total

    def weight(self, i: int, j: int) -> float:
        if not 0 <= i <= j < self.n:
            raise ValueError("need 0 <= i <= j < n")
        return self.gamma * float(self._decay[j - i])

    def band_sum(self, lo: int, hi: int) -> float:
        """Unnormalized sum of e^{-mu d} for d in [lo, hi]; empty when lo > hi."""
        if lo > hi:
            return 0.0
        hi = min(hi, self.n - 1)
        if lo <= 0:
            return float(self._prefix[hi])
        return float(self._prefix[hi] - self._prefix[lo - 1])


def _doc_ends(seg: Segmentation) -> np.ndarray:
    """For each sentence, the index of the last sentence of its document."""
    ends = np.empty(seg.n_sentences, dtype=np.int64)
    prev = 0
    for g in list(seg.boundaries) + [seg.n_sentences]:
        ends[prev:g] = g - 1
        prev = g
    return ends


def p_mu(ref: Segmentation, hyp: Segmentation, mu: float) -> float:
    """Agreement probability under the distance distribution.

    Runs in O(n): for each left sentence i, reference and hypothesis agree
    on every pair except those whose right end falls strictly between the
    two document ends — one geometric band per row.
    """
    n = ref.n_sentences
    if hyp.n_sentences != n:
        raise ValueError("reference and hypothesis cover different lengths")
    dist = DistanceDistribution(mu, n)
    r_end = _doc_ends(ref)
    h_end = _doc_ends(hyp)
    lo = np.minimum(r_end, h_end)
    hi = np.maximum(r_end, h_end)
    # pairs (i, j) disagree exactly when lo[i] < j <= hi[i]
    i = np.arange(n)
    prefix = dist._prefix
    rows = prefix[n - 1 - i]
    disputed = np.where(lo < hi, prefix[hi - i] - prefix[lo - i], 0.0)
    # Dividing by the same summed array keeps p_mu(seg, seg) at exactly 1.0.
    return float((rows - disputed).sum()) / dist._total


def monte_carlo_p_mu(ref: Segmentation, hyp: Segmentation, mu: float,
                     samples: int, seed: int | None = None) -> float:
    """Estimate the same probability by sampling pairs from D directly."""
    if samples < 1:
        raise ValueError("need at least one sample")
    n = ref.n_sentences
    if hyp.n_sentences != n:
        raise ValueError("reference and hypothesis cover different lengths")
    rng = np.random.default_rng(seed)
    d_support = np.arange(n)
    pd = (n - d_support) * np.exp(-mu * d_support)
    pd /= pd.sum()
    ds = rng.choice(n, size=samples, p=pd)
    left = (rng.random(samples) * (n - ds)).astype(np.int64)
    r_end = _doc_ends(ref)
    h_end = _doc_ends(hyp)
    right = left + ds
    agree = (r_end[left] >= right) == (h_end[left] >= right)
    return float(agree.mean())


def precision_recall(ref: Segmentation, hyp: Segmentation
                     ) -> tuple[float, float, float | None]:
    """Exact boundary matching.  Undefined ratios (nothing hypothesized /
    nothing to find) come back as 0.0; F is None when both sides are zero."""
    if hyp.n_sentences != ref.n_sentences:
        raise ValueError("reference and hypothesis cover different lengths")
    ref_b = set(ref.boundaries)
    hyp_b = set(hyp.boundaries)
    inter = len(ref_b & hyp_b)
    precision = inter / len(hyp_b) if hyp_b else 0.0
    recall = inter / len(ref_b) if ref_b else 0.0
    f = 2 * precision * recall / (precision + recall) \
        if precision + recall > 0 else None
    return precision, recall, f


@dataclass(frozen=True)
class MetricReport:
    p_mu: float
    precision: float
    recall: float
    f_measure: float | None
    ref_count: int  # documents in the reference
    hyp_count: int  # documents in the hypothesis
    precision_defined: bool = True
    recall_defined: bool = True


def evaluate(ref: Segmentation, hyp: Segmentation, mu: float) -> MetricReport:
    precision, recall, f = precision_recall(ref, hyp)
    return MetricReport(
        p_mu=p_mu(ref, hyp, mu),
        precision=precision,
        recall=recall,
        f_measure=f,
        ref_count=len(ref.boundaries) + 1,
        hyp_count=len(hyp.boundaries) + 1,
        precision_defined=bool(hyp.boundaries),
        recall_defined=bool(ref.boundaries),
    )


def mu_from_reference(ref: Segmentation) -> float:
    """Decay rate set to 1 / (mean document length in sentences)."""
    return (len(ref.boundaries) + 1) / ref.n_sentences


def baseline(kind: str, n: int, ref_count: int | None = None,
             mean_len: int | None = None,
             seed: int | None = None) -> Segmentation:
    """Degenerate segmenters used as calibration rows.

    ``random`` scatters as many documents as the reference has (uniform gaps,
    seeded); ``all`` splits everywhere; ``none`` never; ``even`` places a
    boundary every ``mean_len`` sentences.
    """
    if kind == "all":
        return Segmentation(n, range(1, n))
    if kind == "none":
        return Segmentation(n, ())
    if kind == "even":
        if mean_len is None or mean_len < 1:
            raise ValueError("even baseline needs mean_len >= 1")
        return Segmentation(n, range(mean_len, n, mean_len))
    if kind == "random":
        if ref_count is None or ref_count < 1:
            raise ValueError("random baseline needs the reference doc count")
        k = ref_count - 1
        if k > n - 1:
            raise ValueError(f"cannot place {k} boundaries in {n - 1} gaps")
        rng = np.random.default_rng(seed)
        gaps = rng.choice(np.arange(1, n), size=k, replace=False)
        return Segmentation(n, sorted(int(g) for g in gaps))
    raise ValueError(f"unknown baseline kind {kind!r}; "
                     f"expected one of {BASELINE_KINDS}")


# --------------------------------------------------------------------------
# report rendering

TSV_HEADER = "label\tp_mu\tprecision\trecall\tf_measure\tref_docs\thyp_docs"


def _fmt_f(report: MetricReport) -> str:
    return "—" if report.f_measure is None else f"{report.f_measure:.3f}"


def report_tsv_line(label: str, report: MetricReport) -> str:
    return "\t".join([
        label,
        f"{report.p_mu:.6f}",
        f"{report.precision:.6f}",
        f"{report.recall:.6f}",
        "—" if report.f_measure is None else f"{report.f_measure:.6f}",
        str(report.ref_count),
        str(report.hyp_count),
    ])


def format_table(rows: list[tuple[str, MetricReport]]) -> str:
    """Aligned text table, one row per (label, report)."""
    header = ("segmenter", "P_mu", "prec", "recall", "F", "docs")
    cells = [header]
    for label, r in rows:
        cells.append((label, f"{r.p_mu:.3f}", f"{r.precision:.3f}",
                      f"{r.recall:.3f}", _fmt_f(r), str(r.hyp_count)))
    widths = [max(len(row[c]) for row in cells) for c in range(len(header))]
    lines = []
    for row in cells:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths))
                     .rstrip())
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines)

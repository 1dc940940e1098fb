"""Exponential boundary model: greedy feature induction + iterative scaling.

The model q(YES | ω) starts from a constant prior q0 and is reshaped by
binary features: q = e^{λ·f(ω)} q0 / (e^{λ·f(ω)} q0 + (1 - q0)), i.e. the
log odds of a boundary move by the summed weight of the active features.
Induction repeatedly scores every candidate by the likelihood gain of adding
it with its one best weight, keeps the winner, and periodically refits all
weights together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .corpus import Vocabulary
from .features import (
    BoundaryContext,
    FeatureTemplate,
    TrainingEvent,
    build_firing_index,
    evaluate_feature,
    format_feature,
    parse_feature,
)
from .trigger import _solve_scaling_updates

__all__ = [
    "BoundaryModel",
    "GainResult",
    "LikelihoodReport",
    "InductionResult",
    "q_boundary",
    "log_likelihood",
    "gain",
    "iis_fit",
    "induce",
    "save_model",
    "load_model",
    "write_trace",
]

LAMBDA_CLAMP = 15.0
SOLVER_TOL = 1e-8


def _logit(p: float) -> float:
    return math.log(p) - math.log1p(-p)


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -x)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -60.0, 60.0)))


@dataclass(frozen=True)
class BoundaryModel:
    """Prior boundary probability plus weighted binary features."""

    q0_yes: float
    features: tuple[FeatureTemplate, ...] = ()
    lambdas: tuple[float, ...] = ()

    def __post_init__(self):
        if not 0.0 < self.q0_yes < 1.0:
            raise ValueError("q0_yes must lie strictly inside (0, 1)")
        object.__setattr__(self, "q0_yes", float(self.q0_yes))
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "lambdas",
                           tuple(float(l) for l in self.lambdas))
        if len(self.features) != len(self.lambdas):
            raise ValueError("features and lambdas must run parallel")
        if len(set(self.features)) != len(self.features):
            raise ValueError("duplicate feature in model")
        if any(not math.isfinite(l) for l in self.lambdas):
            raise ValueError("lambdas must be finite")

    @property
    def n_features(self) -> int:
        return len(self.features)

    def with_lambdas(self, lambdas: Sequence[float]) -> "BoundaryModel":
        return BoundaryModel(self.q0_yes, self.features, tuple(lambdas))


class LikelihoodReport(NamedTuple):
    mean_ll: float       # mean log q(label | ω), nats per event
    kl_to_empirical: float  # equals -mean_ll, up to the empirical entropy


class GainResult(NamedTuple):
    alpha_star: float
    gain: float  # nats per event, never negative


@dataclass
class InductionResult:
    model: BoundaryModel
    #: selection order with final boost factors e^lambda, like the trace files
    trace: list[tuple[FeatureTemplate, float]]
    #: mean training log likelihood after each selection / refit
    ll_trace: tuple[float, ...]


def q_boundary(model: BoundaryModel, ctx: BoundaryContext) -> float:
    """Probability of YES at this gap; always strictly inside (0, 1)."""
    active = sum(l for f, l in zip(model.features, model.lambdas)
                 if evaluate_feature(f, ctx))
    x = _logit(model.q0_yes) + active
    return float(_sigmoid(np.asarray(x)))


def _labels(events: Sequence[TrainingEvent]) -> np.ndarray:
    return np.array([ev.label for ev in events], dtype=bool)


def _event_logits(model: BoundaryModel, events: Sequence[TrainingEvent],
                  index: dict | None = None) -> np.ndarray:
    logits = np.full(len(events), _logit(model.q0_yes))
    if model.n_features:
        if index is None:
            index = build_firing_index(events, model.features)
        for f, l in zip(model.features, model.lambdas):
            logits[index[f]] += l
    return logits


def _mean_ll(logits: np.ndarray, labels: np.ndarray) -> float:
    ll = np.where(labels, _log_sigmoid(logits), _log_sigmoid(-logits))
    return float(ll.mean())


def log_likelihood(model: BoundaryModel,
                   events: Sequence[TrainingEvent]) -> LikelihoodReport:
    if not events:
        raise ValueError("no events to score")
    mean = _mean_ll(_event_logits(model, events), _labels(events))
    return LikelihoodReport(mean, -mean)


def _best_alpha(s: np.ndarray, y: np.ndarray, n_events: int,
                lo: float = -LAMBDA_CLAMP, hi: float = LAMBDA_CLAMP,
                tol: float = SOLVER_TOL) -> GainResult:
    """Maximize the likelihood over the single weight added to logits ``s``
    of the firing events ``(s, y)``; concave, so Newton with a bisection
    bracket nails it."""
    if len(s) == 0:
        return GainResult(0.0, 0.0)
    base = float(np.sum(np.where(y, _log_sigmoid(s), _log_sigmoid(-s))))
    yf = y.astype(float)
    alpha = 0.0
    for _ in range(100):
        p = _sigmoid(s + alpha)
        grad = float(np.sum(yf - p))
        if grad > 0:
            lo = alpha
        else:
            hi = alpha
        curv = float(np.sum(p * (1.0 - p)))
        step = grad / curv if curv > 0 else 0.0
        new = alpha + step
        if not lo < new < hi:
            new = 0.5 * (lo + hi)
        if abs(new - alpha) < tol:
            alpha = new
            break
        alpha = new
    best = float(np.sum(np.where(y, _log_sigmoid(s + alpha),
                                 _log_sigmoid(-s - alpha))))
    return GainResult(alpha, max(0.0, (best - base) / n_events))


def gain(model: BoundaryModel, g: FeatureTemplate,
         events: Sequence[TrainingEvent]) -> GainResult:
    """Best achievable improvement (nats/event) from adding ``g`` alone."""
    if g in model.features:
        raise ValueError("feature is already part of the model")
    if not events:
        raise ValueError("no events to score")
    fires = np.array([bool(evaluate_feature(g, ev.context)) for ev in events])
    logits = _event_logits(model, events)
    return _best_alpha(logits[fires], _labels(events)[fires], len(events))


def iis_fit(model: BoundaryModel, events: Sequence[TrainingEvent],
            max_iters: int = 100, tol: float = SOLVER_TOL,
            index: dict | None = None) -> BoundaryModel:
    """Refit all lambdas to the (unique) maximum-likelihood solution.

    Improved iterative scaling: each pass solves one scaling equation per
    feature, grouped by how many features fire together, and the training
    likelihood never decreases.  The returned model carries the per-pass
    mean-likelihood history in ``fit_ll_trace``.
    """
    if not events:
        raise ValueError("no events to fit to")
    labels = _labels(events)
    if model.n_features == 0:
        out = model.with_lambdas(())
        object.__setattr__(out, "fit_ll_trace",
                           (_mean_ll(_event_logits(model, events), labels),))
        return out
    if index is None:
        index = build_firing_index(events, model.features)

    n = len(events)
    fire_count = np.zeros(n, dtype=np.int64)
    for f in model.features:
        fire_count[index[f]] += 1
    m_max = int(fire_count.max()) if n else 0
    empirical = np.array([float(np.count_nonzero(labels[index[f]]))
                          for f in model.features])

    lam = np.array(model.lambdas, dtype=float)
    base_logit = _logit(model.q0_yes)
    trace = []
    for _ in range(max_iters):
        logits = np.full(n, base_logit)
        for f, l in zip(model.features, lam):
            logits[index[f]] += l
        trace.append(_mean_ll(logits, labels))
        if m_max == 0:
            break
        p_yes = _sigmoid(logits)
        s_hist = np.zeros((model.n_features, m_max + 1))
        for i, f in enumerate(model.features):
            ix = index[f]
            np.add.at(s_hist[i], fire_count[ix], p_yes[ix])
        delta = _solve_scaling_updates(s_hist, empirical)
        new_lam = np.clip(lam + delta, -LAMBDA_CLAMP, LAMBDA_CLAMP)
        bad = ~np.isfinite(new_lam)
        if bad.any():
            f = model.features[int(np.flatnonzero(bad)[0])]
            raise ArithmeticError(
                f"divergent iterative-scaling update for feature "
                f"{f.kind}(word={f.word}, k={f.k})")
        moved = float(np.abs(new_lam - lam).max())
        lam = new_lam
        if moved < tol:
            break
    logits = np.full(n, base_logit)
    for f, l in zip(model.features, lam):
        logits[index[f]] += l
    trace.append(_mean_ll(logits, labels))

    out = model.with_lambdas(lam)
    object.__setattr__(out, "fit_ll_trace", tuple(trace))
    return out


def induce(events: Sequence[TrainingEvent],
           candidates: Sequence[FeatureTemplate], num_features: int,
           refit_every: int = 5, q0_yes: float | None = None) -> InductionResult:
    """Greedy induction: repeatedly add the candidate with the largest gain.

    Ties go to the earlier candidate in the given order; all weights are
    refit together every ``refit_every`` selections and once at the end.
    Stops early when no candidate improves the likelihood.
    """
    if num_features < 0:
        raise ValueError("num_features must be non-negative")
    if refit_every < 1:
        raise ValueError("refit_every must be positive")
    if not events:
        raise ValueError("no training events")
    labels = _labels(events)
    if q0_yes is None:
        rate = float(labels.mean())
        if not 0.0 < rate < 1.0:
            raise ValueError("all training labels agree; supply q0_yes "
                             "explicitly")
        q0_yes = rate

    n = len(events)
    index = build_firing_index(events, candidates)
    model = BoundaryModel(q0_yes)
    logits = np.full(n, _logit(q0_yes))
    chosen: list[FeatureTemplate] = []
    lambdas: list[float] = []
    ll_trace = [_mean_ll(logits, labels)]

    def refit():
        nonlocal model, logits, lambdas
        model = iis_fit(model, events, index=index)
        lambdas = list(model.lambdas)
        logits = np.full(n, _logit(q0_yes))
        for f, l in zip(model.features, model.lambdas):
            logits[index[f]] += l

    for step in range(num_features):
        taken = set(chosen)
        best_gain = 0.0
        best: tuple[int, FeatureTemplate, float] | None = None
        for ci, f in enumerate(candidates):
            if f in taken:
                continue
            ix = index[f]
            if len(ix) == 0:
                continue
            alpha, g = _best_alpha(logits[ix], labels[ix], n)
            if g > best_gain + 1e-12:
                best_gain = g
                best = (ci, f, alpha)
        if best is None:
            break
        _, f, alpha = best
        chosen.append(f)
        lambdas.append(alpha)
        logits[index[f]] += alpha
        model = BoundaryModel(q0_yes, tuple(chosen), tuple(lambdas))
        if len(chosen) % refit_every == 0:
            refit()
        ll_trace.append(_mean_ll(logits, labels))

    refit()
    ll_trace.append(_mean_ll(logits, labels))
    trace = [(f, math.exp(l)) for f, l in zip(model.features, model.lambdas)]
    return InductionResult(model, trace, tuple(ll_trace))


# --------------------------------------------------------------------------
# files

def save_model(path: str, model: BoundaryModel, vocab: Vocabulary) -> None:
    """Header line with the prior, then one feature line per weight."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#q0={model.q0_yes!r}\n")
        for f, l in zip(model.features, model.lambdas):
            fh.write(format_feature(f, l, vocab) + "\n")


def load_model(path: str, vocab: Vocabulary) -> BoundaryModel:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("#q0="):
            raise ValueError(f"{path!r} is not a boundary-model file")
        q0 = float(header[len("#q0="):])
        features, lambdas = [], []
        for line in fh:
            if not line.strip():
                continue
            f, l = parse_feature(line, vocab)
            features.append(f)
            lambdas.append(l)
    return BoundaryModel(q0, tuple(features), tuple(lambdas))


def write_trace(path: str, result: InductionResult, vocab: Vocabulary) -> None:
    """``rank<TAB>feature<TAB>e_lambda``, in selection order."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("rank\tfeature\te_lambda\n")
        for rank, (f, e_lam) in enumerate(result.trace, 1):
            fh.write(f"{rank}\t{f.describe(vocab)}\t{e_lam:.4g}\n")

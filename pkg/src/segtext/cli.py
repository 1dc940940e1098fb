"""Command-line driver wiring the pipeline stages together:
corpus -> vocabulary -> trigram -> triggers -> relevance -> boundary
features -> tuned segmenter -> evaluation.

Every subcommand loads and validates its inputs before writing anything,
and identical inputs and seeds produce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import os
import sys

from .arpa import read_arpa, write_arpa
from .corpus import (
    DEFAULT_DELIMITER,
    Segmentation,
    SurfaceCorpus,
    Vocabulary,
    build_vocabulary,
    encode,
    load_corpus,
)
from .features import extract_events, generate_candidates
from .induction import induce, load_model, save_model, write_trace
from .metric import (
    BASELINE_KINDS,
    TSV_HEADER,
    baseline,
    evaluate,
    format_table,
    mu_from_reference,
    p_mu,
    report_tsv_line,
)
from .relevance import relevance_profile, sentence_relevances
from .segmenter import SegmenterConfig, decide, score_gaps, tune
from .synth import synthetic_corpus, write_corpus
from .trigger import (
    TriggerModel,
    load_triggers,
    save_triggers,
    select_triggers,
    train_triggers_iis,
)
from .trigram import train_trigram

__all__ = ["main"]


class CLIError(Exception):
    pass


def _resolve_threads(value: int | None) -> int:
    if value is None:
        env = os.environ.get("SEGTEXT_THREADS")
        if env is None:
            return 1
        try:
            value = int(env)
        except ValueError:
            raise CLIError(f"SEGTEXT_THREADS={env!r} is not an integer")
    if value < 1:
        raise CLIError("thread count must be at least 1")
    return value


def _require(path: str, what: str) -> str:
    if not os.path.exists(path):
        raise CLIError(f"{what} file {path!r} does not exist")
    return path


def _load_surface(args) -> SurfaceCorpus:
    return load_corpus(_require(args.corpus, "corpus"), args.delimiter)


def _load_encoded(args):
    surface = _load_surface(args)
    vocab = Vocabulary.load(_require(args.vocab, "vocabulary"))
    return encode(surface, vocab), vocab


def _load_trigger_model(args, vocab: Vocabulary) -> TriggerModel:
    lm = read_arpa(_require(args.lm, "language model"))
    if lm.vocab != vocab:
        raise CLIError("vocabulary file does not match the language model")
    pairs = load_triggers(_require(args.triggers, "trigger"), vocab)
    return TriggerModel(lm, pairs, window_n=args.window)


def _reference_segmentation(args) -> Segmentation:
    if args.ref is not None:
        return Segmentation.load(_require(args.ref, "segmentation"))
    surface = load_corpus(_require(args.ref_corpus, "corpus"), args.delimiter)
    return Segmentation(surface.n_sentences,
                        [a for a, _ in surface.doc_spans[1:]])


# --------------------------------------------------------------------------
# subcommands

def cmd_build_vocab(args) -> None:
    surface = _load_surface(args)
    vocab = build_vocabulary(surface, max_size=args.max_size)
    vocab.save(args.out)
    print(f"wrote {vocab.size} words to {args.out}")


def cmd_train_trigram(args) -> None:
    corpus, vocab = _load_encoded(args)
    model = train_trigram(corpus, vocab, discount_cutoff=args.discount_cutoff)
    write_arpa(model, args.out)
    print(f"wrote trigram model to {args.out}")


def cmd_select_triggers(args) -> None:
    corpus, vocab = _load_encoded(args)
    pairs = select_triggers(corpus, vocab, window_n=args.window,
                            max_pairs=args.max_pairs,
                            min_cooccur=args.min_cooccur,
                            min_freq=args.min_freq)
    save_triggers(args.out, pairs, vocab)
    print(f"wrote {len(pairs)} trigger pairs to {args.out}")


def cmd_train_triggers(args) -> None:
    corpus, vocab = _load_encoded(args)
    model = _load_trigger_model(args, vocab)
    trained = train_triggers_iis(model, corpus, iterations=args.iterations)
    save_triggers(args.out, list(trained.pairs), vocab)
    trace = trained.training_ll_trace
    print(f"wrote {len(trained.pairs)} trained pairs to {args.out}")
    print(f"mean log-likelihood: {trace[0]:.6f} -> {trace[-1]:.6f}")


def cmd_relevance_profile(args) -> None:
    corpus, vocab = _load_encoded(args)
    model = _load_trigger_model(args, vocab)
    profile = relevance_profile(model, corpus, max_offset=args.max_offset)
    profile.write_tsv(args.out)
    print(f"wrote relevance profile to {args.out}")


def cmd_extract_events(args) -> None:
    corpus, vocab = _load_encoded(args)
    model = _load_trigger_model(args, vocab)
    events = extract_events(corpus, model)
    rel = sentence_relevances(model, corpus, reset_at_doc_boundaries=False)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("gap\tlabel\trelevance\n")
        for event in events:
            g = event.context.g
            fh.write(f"{g}\t{int(event.label)}\t{float(rel[g])!r}\n")
    print(f"wrote {len(events)} events to {args.out}")


def cmd_induce(args) -> None:
    corpus, vocab = _load_encoded(args)
    model = _load_trigger_model(args, vocab)
    events = extract_events(corpus, model)
    candidates = generate_candidates(vocab, max_word_rank=args.max_word_rank)
    result = induce(events, candidates, args.num_features,
                    refit_every=args.refit_every, q0_yes=args.q0)
    save_model(args.out, result.model, vocab)
    if args.trace:
        write_trace(args.trace, result, vocab)
    print(f"wrote boundary model with {result.model.n_features} features "
          f"to {args.out}")
    print(f"mean log-likelihood: {result.ll_trace[0]:.6f} -> "
          f"{result.ll_trace[-1]:.6f}")


def cmd_tune(args) -> None:
    corpus, vocab = _load_encoded(args)
    trig = _load_trigger_model(args, vocab)
    model = load_model(_require(args.model, "boundary model"), vocab)
    threads = _resolve_threads(args.threads)
    config = tune(model, trig, corpus, mu=args.mu, threads=threads)
    ref = corpus.reference_segmentation()
    mu = args.mu if args.mu is not None else mu_from_reference(ref)
    probs = score_gaps(model, trig, corpus.sentences, threads=threads)
    score = p_mu(ref, decide(probs, config), mu)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(f"alpha\t{config.alpha!r}\n")
            fh.write(f"epsilon\t{config.epsilon}\n")
    print(f"alpha\t{config.alpha!r}")
    print(f"epsilon\t{config.epsilon}")
    print(f"p_mu\t{score!r}")


def cmd_segment(args) -> None:
    corpus, vocab = _load_encoded(args)
    trig = _load_trigger_model(args, vocab)
    model = load_model(_require(args.model, "boundary model"), vocab)
    config = SegmenterConfig(args.alpha, args.epsilon)
    threads = _resolve_threads(args.threads)
    # document delimiters in the input, if any, are deliberately ignored:
    # the decoder sees one continuous sentence stream
    probs = score_gaps(model, trig, corpus.sentences, threads=threads)
    seg = decide(probs, config)
    if args.probs:
        with open(args.probs, "w", encoding="utf-8") as fh:
            fh.write("gap\tprob\n")
            for i, p in enumerate(probs):
                fh.write(f"{i + 1}\t{float(p)!r}\n")
    seg.save(args.out)
    print(f"placed {len(seg.boundaries)} boundaries over "
          f"{seg.n_sentences} sentences; wrote {args.out}")


def cmd_evaluate(args) -> None:
    ref = _reference_segmentation(args)
    hyp = Segmentation.load(_require(args.hyp, "segmentation"))
    mu = args.mu if args.mu is not None else mu_from_reference(ref)
    report = evaluate(ref, hyp, mu)
    if args.tsv:
        with open(args.tsv, "w", encoding="utf-8") as fh:
            fh.write(TSV_HEADER + "\n")
            fh.write(report_tsv_line(args.label, report) + "\n")
    print(f"mu: {mu!r}")
    print(format_table([(args.label, report)]))


def cmd_baseline(args) -> None:
    ref = _reference_segmentation(args)
    n = ref.n_sentences
    docs = len(ref.boundaries) + 1
    mean_len = args.mean_len if args.mean_len is not None \
        else max(1, round(n / docs))
    seg = baseline(args.kind, n, ref_count=docs, mean_len=mean_len,
                   seed=args.seed)
    seg.save(args.out)
    print(f"wrote {args.kind} baseline ({len(seg.boundaries)} boundaries) "
          f"to {args.out}")


def cmd_synth(args) -> None:
    result = synthetic_corpus(
        args.docs, args.seed, n_pairs=args.pairs,
        pairs_per_doc=args.pairs_per_doc,
        background_vocab=args.background_vocab,
        doc_sentences=tuple(args.doc_sentences),
        sentence_words=tuple(args.sentence_words),
        topic_rate=args.topic_rate, cue_word=args.cue_word,
        cue_prob=args.cue_prob, pair_style=args.style)
    write_corpus(result.surface, args.out, delimiter=args.delimiter)
    if args.ref:
        surface = result.surface
        Segmentation(surface.n_sentences,
                     [a for a, _ in surface.doc_spans[1:]]).save(args.ref)
    print(f"wrote {result.surface.n_documents} documents "
          f"({result.surface.n_sentences} sentences) to {args.out}")


# --------------------------------------------------------------------------
# argument plumbing

def _add_corpus(p, help="corpus file (one sentence per line)"):
    p.add_argument("--corpus", required=True, help=help)
    p.add_argument("--delimiter", default=DEFAULT_DELIMITER,
                   help="document delimiter line (default %(default)r)")


def _add_vocab(p):
    p.add_argument("--vocab", required=True, help="vocabulary file")


def _add_trigger_stack(p):
    _add_vocab(p)
    p.add_argument("--lm", required=True, help="trigram model (ARPA)")
    p.add_argument("--triggers", required=True, help="trigger pair file")
    p.add_argument("--window", type=int, default=500,
                   help="history window in words (default %(default)s)")


def _add_threads(p):
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: SEGTEXT_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segtext",
        description="Statistical text segmentation with adaptive language "
                    "models and induced boundary features.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-vocab", help="rank words and write a vocabulary")
    _add_corpus(p)
    p.add_argument("--out", required=True)
    p.add_argument("--max-size", type=int, default=10000)
    p.set_defaults(func=cmd_build_vocab)

    p = sub.add_parser("train-trigram", help="train the backoff trigram model")
    _add_corpus(p)
    _add_vocab(p)
    p.add_argument("--out", required=True)
    p.add_argument("--discount-cutoff", type=int, default=5)
    p.set_defaults(func=cmd_train_trigram)

    p = sub.add_parser("select-triggers",
                       help="rank trigger pairs by mutual information")
    _add_corpus(p)
    _add_vocab(p)
    p.add_argument("--out", required=True)
    p.add_argument("--window", type=int, default=500)
    p.add_argument("--max-pairs", type=int, default=200)
    p.add_argument("--min-freq", type=int, default=10)
    p.add_argument("--min-cooccur", type=float, default=3)
    p.set_defaults(func=cmd_select_triggers)

    p = sub.add_parser("train-triggers",
                       help="fit trigger weights by iterative scaling")
    _add_corpus(p)
    _add_trigger_stack(p)
    p.add_argument("--out", required=True)
    p.add_argument("--iterations", type=int, default=10)
    p.set_defaults(func=cmd_train_triggers)

    p = sub.add_parser("relevance-profile",
                       help="mean relevance by distance from segment starts")
    _add_corpus(p)
    _add_trigger_stack(p)
    p.add_argument("--out", required=True)
    p.add_argument("--max-offset", type=int, default=15)
    p.set_defaults(func=cmd_relevance_profile)

    p = sub.add_parser("extract-events",
                       help="dump labeled boundary events for inspection")
    _add_corpus(p)
    _add_trigger_stack(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract_events)

    p = sub.add_parser("induce", help="induce the boundary feature model")
    _add_corpus(p)
    _add_trigger_stack(p)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", help="optional feature-selection trace TSV")
    p.add_argument("--num-features", type=int, default=25)
    p.add_argument("--refit-every", type=int, default=5)
    p.add_argument("--max-word-rank", type=int, default=5000)
    p.add_argument("--q0", type=float, default=None,
                   help="prior boundary probability (default: empirical)")
    p.set_defaults(func=cmd_induce)

    p = sub.add_parser("tune",
                       help="grid-search alpha and epsilon on heldout data")
    _add_corpus(p, help="heldout corpus with document delimiters")
    _add_trigger_stack(p)
    p.add_argument("--model", required=True, help="boundary model file")
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--out", help="optional file for the chosen knobs")
    _add_threads(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("segment", help="place boundaries in running text")
    _add_corpus(p, help="text to segment (delimiters, if any, are ignored)")
    _add_trigger_stack(p)
    p.add_argument("--model", required=True, help="boundary model file")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--epsilon", type=int, required=True)
    p.add_argument("--probs", help="optional per-gap probability TSV")
    p.add_argument("--out", required=True, help="boundary output file")
    _add_threads(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("evaluate", help="score a hypothesis segmentation")
    ref = p.add_mutually_exclusive_group(required=True)
    ref.add_argument("--ref", help="reference segmentation file")
    ref.add_argument("--ref-corpus",
                     help="corpus file whose delimiters define the reference")
    p.add_argument("--delimiter", default=DEFAULT_DELIMITER)
    p.add_argument("--hyp", required=True, help="hypothesis segmentation file")
    p.add_argument("--mu", type=float, default=None,
                   help="decay rate (default: documents / sentences)")
    p.add_argument("--label", default="model")
    p.add_argument("--tsv", help="optional machine-readable report")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("baseline", help="write a degenerate segmentation")
    p.add_argument("--kind", required=True, choices=BASELINE_KINDS)
    ref = p.add_mutually_exclusive_group(required=True)
    ref.add_argument("--ref", help="reference segmentation file")
    ref.add_argument("--ref-corpus",
                     help="corpus file whose delimiters define the reference")
    p.add_argument("--delimiter", default=DEFAULT_DELIMITER)
    p.add_argument("--out", required=True)
    p.add_argument("--mean-len", type=int, default=None,
                   help="sentences per document for --kind even "
                        "(default: reference mean)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("synth", help="generate a synthetic triggered corpus")
    p.add_argument("--docs", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--ref", help="optional reference segmentation output")
    p.add_argument("--pairs", type=int, default=50)
    p.add_argument("--pairs-per-doc", type=int, default=5)
    p.add_argument("--background-vocab", type=int, default=500)
    p.add_argument("--doc-sentences", type=int, nargs=2, default=(16, 22),
                   metavar=("LO", "HI"))
    p.add_argument("--sentence-words", type=int, nargs=2, default=(8, 12),
                   metavar=("LO", "HI"))
    p.add_argument("--topic-rate", type=float, default=0.35)
    p.add_argument("--cue-word", default="begin")
    p.add_argument("--cue-prob", type=float, default=1.0)
    p.add_argument("--style", choices=("self", "distinct"), default="self")
    p.add_argument("--delimiter", default=DEFAULT_DELIMITER)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (CLIError, ValueError, OSError) as exc:
        print(f"segtext: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Checks for the pair-agreement score, exact-match precision/recall, the
degenerate baselines, and the report renderers."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import p_mu_oracle
from segtext.corpus import Segmentation
from segtext.metric import (
    BASELINE_KINDS,
    DistanceDistribution,
    MetricReport,
    TSV_HEADER,
    baseline,
    evaluate,
    format_table,
    monte_carlo_p_mu,
    mu_from_reference,
    p_mu,
    precision_recall,
    report_tsv_line,
)


def random_segmentation(rng, n, max_docs=6):
    k = int(rng.integers(0, min(max_docs, n)))
    if k == 0:
        return Segmentation(n, ())
    gaps = rng.choice(np.arange(1, n), size=k, replace=False)
    return Segmentation(n, sorted(int(g) for g in gaps))


class TestDistanceDistribution:
    def test_weights_sum_to_one(self):
        dist = DistanceDistribution(0.3, 13)
        total = sum(dist.weight(i, j) for i in range(13) for j in range(i, 13))
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_weight_is_exponential_in_distance(self):
        dist = DistanceDistribution(0.5, 10)
        assert dist.weight(2, 6) / dist.weight(2, 5) == pytest.approx(
            math.exp(-0.5), rel=1e-12)
        assert dist.weight(0, 0) == pytest.approx(dist.gamma, rel=1e-12)
        # only the separation matters
        assert dist.weight(1, 4) == pytest.approx(dist.weight(5, 8), rel=1e-12)

    def test_weight_rejects_bad_pairs(self):
        dist = DistanceDistribution(1.0, 5)
        with pytest.raises(ValueError):
            dist.weight(3, 2)
        with pytest.raises(ValueError):
            dist.weight(-1, 2)
        with pytest.raises(ValueError):
            dist.weight(0, 5)

    def test_band_sum(self):
        mu = 0.7
        dist = DistanceDistribution(mu, 6)
        assert dist.band_sum(2, 1) == 0.0
        expect = sum(math.exp(-mu * d) for d in range(3))
        assert dist.band_sum(0, 2) == pytest.approx(expect, rel=1e-12)
        expect = sum(math.exp(-mu * d) for d in (2, 3))
        assert dist.band_sum(2, 3) == pytest.approx(expect, rel=1e-12)
        # hi is clipped to the largest representable distance
        assert dist.band_sum(0, 99) == pytest.approx(dist.band_sum(0, 5),
                                                     rel=1e-12)

    @pytest.mark.parametrize("mu,n", [(0.0, 5), (-1.0, 5), (math.inf, 5),
                                      (math.nan, 5), (1.0, 1)])
    def test_validation(self, mu, n):
        with pytest.raises(ValueError):
            DistanceDistribution(mu, n)


class TestPMu:
    def test_hand_case(self):
        # n=4, mu=ln 2: pair weights are 2^-d.  Reference splits after
        # sentence 1, hypothesis never splits.  Agreeing mass: the four
        # diagonal pairs plus (0,1) and (2,3) = 4 + 1 = 5 out of 6.125.
        ref = Segmentation(4, (2,))
        hyp = Segmentation(4, ())
        assert p_mu(ref, hyp, math.log(2)) == pytest.approx(40 / 49, rel=1e-12)

    def test_identical_segmentations_score_exactly_one(self):
        rng = np.random.default_rng(5)
        for n in (2, 3, 17, 64):
            seg = random_segmentation(rng, n)
            assert p_mu(seg, seg, 0.4) == 1.0

    def test_matches_quadratic_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(60):
            n = int(rng.integers(2, 61))
            mu = float(rng.choice([0.08, 0.25, 1.0]))
            ref = random_segmentation(rng, n)
            hyp = random_segmentation(rng, n)
            expect = p_mu_oracle(n, ref.boundaries, hyp.boundaries, mu)
            assert p_mu(ref, hyp, mu) == pytest.approx(expect, abs=1e-12)

    @given(st.data())
    @settings(max_examples=60, deadline=None)
    def test_symmetric_and_bounded(self, data):
        n = data.draw(st.integers(2, 14))
        bounds = st.sets(st.integers(1, n - 1), max_size=n - 1)
        ref = Segmentation(n, sorted(data.draw(bounds)))
        hyp = Segmentation(n, sorted(data.draw(bounds)))
        forward = p_mu(ref, hyp, 0.5)
        assert 0.0 <= forward <= 1.0
        assert forward == pytest.approx(p_mu(hyp, ref, 0.5), abs=1e-12)

    def test_near_miss_decays_with_displacement(self):
        ref = Segmentation(40, (20,))
        scores = [p_mu(ref, Segmentation(40, (20 + d,)), 0.25)
                  for d in range(11)]
        assert scores[0] == 1.0
        for a, b in zip(scores, scores[1:]):
            assert b < a

    def test_degenerate_hypotheses_score_below_near_miss(self):
        n, mean_len = 60, 6
        ref = Segmentation(n, range(mean_len, n, mean_len))
        mu = 1 / mean_len
        displaced = Segmentation(n, [g + 1 for g in ref.boundaries])
        everywhere = p_mu(ref, baseline("all", n), mu)
        nowhere = p_mu(ref, baseline("none", n), mu)
        near = p_mu(ref, displaced, mu)
        assert near > everywhere
        assert near > nowhere

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            p_mu(Segmentation(5, ()), Segmentation(6, ()), 0.5)


class TestMonteCarlo:
    def test_identical_segmentations(self):
        seg = Segmentation(30, (10, 20))
        assert monte_carlo_p_mu(seg, seg, 0.2, 500, seed=0) == 1.0

    def test_agrees_with_exact_within_three_sigma(self):
        rng = np.random.default_rng(23)
        ref = random_segmentation(rng, 80)
        hyp = random_segmentation(rng, 80)
        exact = p_mu(ref, hyp, 0.15)
        samples = 200_000
        estimate = monte_carlo_p_mu(ref, hyp, 0.15, samples, seed=99)
        sigma = math.sqrt(max(exact * (1 - exact), 1e-6) / samples)
        assert abs(estimate - exact) <= 3 * sigma

    def test_validation(self):
        seg = Segmentation(5, ())
        with pytest.raises(ValueError):
            monte_carlo_p_mu(seg, seg, 0.5, 0)
        with pytest.raises(ValueError):
            monte_carlo_p_mu(seg, Segmentation(6, ()), 0.5, 10)


class TestPrecisionRecall:
    def test_perfect_hypothesis(self):
        seg = Segmentation(9, (3, 6))
        assert precision_recall(seg, seg) == (1.0, 1.0, 1.0)

    def test_partial_overlap(self):
        ref = Segmentation(9, (2, 5))
        hyp = Segmentation(9, (2, 7))
        assert precision_recall(ref, hyp) == (0.5, 0.5, 0.5)

    def test_split_everywhere_has_full_recall(self):
        ref = Segmentation(10, (4, 8))
        p, r, f = precision_recall(ref, baseline("all", 10))
        assert r == 1.0
        assert p == pytest.approx(2 / 9)
        assert f == pytest.approx(2 * p / (p + 1))

    def test_off_by_one_gets_no_credit(self):
        ref = Segmentation(8, (4,))
        hyp = Segmentation(8, (5,))
        assert precision_recall(ref, hyp) == (0.0, 0.0, None)

    def test_empty_sides(self):
        ref = Segmentation(6, (3,))
        nothing = Segmentation(6, ())
        assert precision_recall(ref, nothing) == (0.0, 0.0, None)
        assert precision_recall(nothing, ref) == (0.0, 0.0, None)


class TestEvaluate:
    def test_report_fields(self):
        ref = Segmentation(12, (4, 8))
        hyp = Segmentation(12, (4,))
        report = evaluate(ref, hyp, 0.25)
        assert report.p_mu == pytest.approx(p_mu(ref, hyp, 0.25), rel=1e-12)
        assert report.precision == 1.0
        assert report.recall == 0.5
        assert report.f_measure == pytest.approx(2 / 3)
        assert (report.ref_count, report.hyp_count) == (3, 2)
        assert report.precision_defined and report.recall_defined

    def test_undefined_flags(self):
        ref = Segmentation(6, (3,))
        report = evaluate(ref, Segmentation(6, ()), 0.5)
        assert not report.precision_defined
        assert report.recall_defined
        report = evaluate(Segmentation(6, ()), ref, 0.5)
        assert report.precision_defined
        assert not report.recall_defined

    def test_mu_from_reference(self):
        assert mu_from_reference(Segmentation(12, (3, 7))) == pytest.approx(
            0.25)
        assert mu_from_reference(Segmentation(10, ())) == pytest.approx(0.1)


class TestBaseline:
    def test_all_and_none(self):
        assert baseline("all", 5).boundaries == (1, 2, 3, 4)
        assert baseline("none", 5).boundaries == ()

    def test_even(self):
        assert baseline("even", 10, mean_len=3).boundaries == (3, 6, 9)
        assert baseline("even", 9, mean_len=3).boundaries == (3, 6)
        with pytest.raises(ValueError):
            baseline("even", 10)
        with pytest.raises(ValueError):
            baseline("even", 10, mean_len=0)

    def test_random_is_seeded_and_sized(self):
        a = baseline("random", 30, ref_count=5, seed=7)
        b = baseline("random", 30, ref_count=5, seed=7)
        assert a.boundaries == b.boundaries
        assert len(a.boundaries) == 4
        assert all(1 <= g <= 29 for g in a.boundaries)
        assert baseline("random", 30, ref_count=1, seed=7).boundaries == ()
        other = baseline("random", 30, ref_count=5, seed=8)
        assert other.boundaries != a.boundaries

    def test_random_validation(self):
        with pytest.raises(ValueError):
            baseline("random", 30)
        with pytest.raises(ValueError):
            baseline("random", 5, ref_count=6)

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown baseline"):
            baseline("sometimes", 10)
        assert set(BASELINE_KINDS) == {"random", "all", "none", "even"}


class TestRendering:
    def test_tsv_line(self):
        report = MetricReport(p_mu=0.875, precision=0.5, recall=0.25,
                              f_measure=1 / 3, ref_count=4, hyp_count=2)
        line = report_tsv_line("greedy", report)
        fields = line.split("\t")
        assert len(fields) == len(TSV_HEADER.split("\t")) == 7
        assert fields[0] == "greedy"
        assert fields[1] == "0.875000"
        assert fields[4] == "0.333333"
        assert fields[5:] == ["4", "2"]

    def test_tsv_line_with_undefined_f(self):
        report = MetricReport(p_mu=0.5, precision=0.0, recall=0.0,
                              f_measure=None, ref_count=2, hyp_count=1)
        assert report_tsv_line("none", report).split("\t")[4] == "—"

    def test_format_table(self):
        rows = [
            ("model", MetricReport(0.91, 0.5, 0.4, 4 / 9, 5, 4)),
            ("none", MetricReport(0.62, 0.0, 0.0, None, 5, 1)),
        ]
        text = format_table(rows)
        lines = text.split("\n")
        assert lines[0].startswith("segmenter")
        assert set(lines[1]) == {"-"}
        assert lines[2].startswith("model")
        assert "—" in lines[3]
        assert "0.910" in lines[2]

"""Confidence metric arithmetic and cross-model aggregation."""

import math

import pytest

from codepool.confmetrics import (
    ConfidenceMetric,
    ConfidenceScore,
    apply_metric,
    cross_model_sum,
    entropy_per_byte,
    nll_per_byte,
    sum_entropy_norm,
)
from codepool.errors import DataError
from codepool.model import EnsembleSpec, TokenTrace

from conftest import model, record, trace


class TestPerByteMetrics:
    def test_nll_sum_over_bytes(self):
        t = trace(nlls=(1.0, 2.0), entropies=(0.0, 0.0))
        assert nll_per_byte(t, 2) == 1.5

    def test_zero_nlls(self):
        t = trace(nlls=(0.0, 0.0, 0.0), entropies=(0.0, 0.0, 0.0))
        assert nll_per_byte(t, 17) == 0.0

    def test_entropy_sum_over_bytes(self):
        ln2 = math.log(2.0)
        t = trace(nlls=(0.0, 0.0), entropies=(ln2, ln2))
        assert entropy_per_byte(t, 2) == ln2

    def test_degenerate_byte_len(self):
        t = trace()
        with pytest.raises(ValueError, match="degenerate patch"):
            nll_per_byte(t, 0)
        with pytest.raises(ValueError, match="degenerate patch"):
            entropy_per_byte(t, 0)

    def test_empty_trace_rejected_for_per_byte(self):
        t = TokenTrace(nlls=(), entropies=(), vocab_size=100)
        with pytest.raises(ValueError, match="degenerate patch"):
            nll_per_byte(t, 10)


class TestSumEntropyNorm:
    def test_max_entropy_token_scores_one(self):
        v = 32000
        t = TokenTrace(nlls=(0.0,), entropies=(math.log(v),), vocab_size=v)
        assert sum_entropy_norm(t) == 1.0

    def test_empty_trace_sums_to_zero(self):
        t = TokenTrace(nlls=(), entropies=(), vocab_size=50257)
        assert sum_entropy_norm(t) == 0.0

    def test_byte_len_never_read(self):
        t = trace(entropies=(0.5, 0.25))
        want = (0.5 + 0.25) / math.log(32000)
        assert sum_entropy_norm(t) == want

    def test_normalizer_is_natural_log_of_vocab(self):
        t = TokenTrace(nlls=(0.0, 0.0), entropies=(1.0, 2.0), vocab_size=1000)
        assert sum_entropy_norm(t) == (1.0 + 2.0) / math.log(1000)


class TestApplyMetric:
    def test_dispatch(self):
        t = trace(nlls=(2.0, 2.0), entropies=(0.5, 0.5), vocab=100)
        assert apply_metric(ConfidenceMetric.NLL_PER_BYTE, t, 4) == 1.0
        assert apply_metric(ConfidenceMetric.ENTROPY_PER_BYTE, t, 4) == 0.25
        assert apply_metric(ConfidenceMetric.SUM_ENTROPY_NORM, t, 4) == (
            1.0 / math.log(100)
        )


class TestConfidenceScore:
    def test_negative_or_nan_rejected(self):
        with pytest.raises(ValueError, match="finite and non-negative"):
            ConfidenceScore(ConfidenceMetric.NLL_PER_BYTE, -0.1)
        with pytest.raises(ValueError, match="finite and non-negative"):
            ConfidenceScore(ConfidenceMetric.NLL_PER_BYTE, float("nan"))


class TestCrossModelSum:
    def members(self):
        return (model("a"), model("b"))

    def spec(self, members=None):
        members = members or self.members()
        return EnsembleSpec(name="e", members=members, n_outputs=2, k=2)

    def test_sum_of_two_member_scores(self):
        code = "xxxx"
        rec = record(
            code=code,
            cross={
                "a": trace(nlls=(2.0, 2.0), entropies=(0.0, 0.0)),
                "b": trace(nlls=(12.0,), entropies=(0.0,)),
            },
        )
        got = cross_model_sum(rec, ConfidenceMetric.NLL_PER_BYTE, self.spec())
        assert got == 1.0 + 3.0

    def test_single_member_equals_plain_metric(self):
        rec = record(code="xxxx", cross={"a": trace(nlls=(2.0, 6.0))})
        spec = self.spec(members=(model("a"),))
        got = cross_model_sum(rec, ConfidenceMetric.NLL_PER_BYTE, spec)
        assert got == nll_per_byte(rec.cross_traces["a"], 4)

    def test_each_member_uses_own_vocab(self):
        rec = record(
            code="xx",
            cross={
                "a": TokenTrace(nlls=(0.0,), entropies=(1.0,), vocab_size=100),
                "b": TokenTrace(nlls=(0.0,), entropies=(1.0,), vocab_size=10000),
            },
        )
        got = cross_model_sum(rec, ConfidenceMetric.SUM_ENTROPY_NORM, self.spec())
        assert got == 1.0 / math.log(100) + 1.0 / math.log(10000)

    def test_missing_member_trace_names_model(self):
        rec = record(code="xxxx", cross={"a": trace()})
        with pytest.raises(DataError, match="no trace from model 'b'"):
            cross_model_sum(rec, ConfidenceMetric.NLL_PER_BYTE, self.spec())

    def test_unscoreable_candidate_rejected(self):
        rec = record(code=None, cross={"a": trace(), "b": trace()})
        with pytest.raises(DataError, match="no extracted code"):
            cross_model_sum(rec, ConfidenceMetric.NLL_PER_BYTE, self.spec())

    def test_member_order_permutation_matches_closely(self):
        cross = {
            "a": trace(nlls=(0.37, 1.21, 0.04), entropies=(0.1, 0.2, 0.3)),
            "b": trace(nlls=(2.5, 0.125), entropies=(0.1, 0.2)),
        }
        rec = record(code="xxxxx", cross=cross)
        fwd = cross_model_sum(
            rec, ConfidenceMetric.NLL_PER_BYTE, self.spec((model("a"), model("b")))
        )
        rev = cross_model_sum(
            rec, ConfidenceMetric.NLL_PER_BYTE, self.spec((model("b"), model("a")))
        )
        assert fwd == pytest.approx(rev, abs=1e-12)


class TestScaleAndLengthProperties:
    def test_power_of_two_scaling_is_exact(self):
        t = trace(nlls=(0.3, 1.7, 0.9), entropies=(0.0, 0.0, 0.0))
        for c in (2.0, 4.0, 0.5, 8.0):
            scaled = TokenTrace(
                nlls=tuple(c * x for x in t.nlls),
                entropies=t.entropies,
                vocab_size=t.vocab_size,
            )
            assert nll_per_byte(scaled, 7) == c * nll_per_byte(t, 7)

    def test_arbitrary_scaling_is_close(self):
        t = trace(nlls=(0.3, 1.7, 0.9), entropies=(0.0, 0.0, 0.0))
        c = 3.7
        scaled = TokenTrace(
            nlls=tuple(c * x for x in t.nlls),
            entropies=t.entropies,
            vocab_size=t.vocab_size,
        )
        assert nll_per_byte(scaled, 7) == pytest.approx(
            c * nll_per_byte(t, 7), rel=1e-12
        )

    def test_zero_token_appended_changes_nothing(self):
        t = trace(nlls=(0.3, 1.7), entropies=(0.2, 0.6))
        longer = TokenTrace(
            nlls=t.nlls + (0.0,),
            entropies=t.entropies + (0.0,),
            vocab_size=t.vocab_size,
        )
        assert nll_per_byte(longer, 9) == nll_per_byte(t, 9)
        assert entropy_per_byte(longer, 9) == entropy_per_byte(t, 9)
        assert sum_entropy_norm(longer) == sum_entropy_norm(t)

"""Similarity metrics: lexing, n-gram overlap, structure, dataflow,
embeddings, the combined score, and pairwise aggregation."""

import math

import numpy as np
import pytest

from codepool.errors import DataError
from codepool.simmetrics import (
    CodeBleu,
    CodeBleuConfig,
    EmbeddingSeq,
    HashingEmbedder,
    Smoothing,
    StructureTreeProvider,
    TableEmbedder,
    TokenSeq,
    AssignmentFlowProvider,
    bertscore_f3,
    codebleu,
    dataflow_match,
    keyword_set,
    keyword_weight_map,
    ngram_bleu,
    pairwise_matrix,
    pairwise_sum_scores,
    scan_tokens,
    syntax_match,
    tokenize,
    weighted_ngram_match,
    write_sidecar,
)

from conftest import simple_pool


class TestLexer:
    def test_java_token_stream(self):
        code = 'int x = a >>= 2; // trailing\nString s = "hi\\"there";'
        toks = tokenize(code, "java")
        assert list(toks) == [
            "int", "x", "=", "a", ">>=", "2", ";",
            "String", "s", "=", '"hi\\"there"', ";",
        ]

    def test_longest_operator_wins(self):
        assert list(tokenize("a >>>= b >>> c >> d > e", "java")) == [
            "a", ">>>=", "b", ">>>", "c", ">>", "d", ">", "e",
        ]

    def test_block_comment_dropped(self):
        assert list(tokenize("a /* x\ny */ b", "java")) == ["a", "b"]

    def test_python_strings_and_walrus(self):
        code = "if (n := len(f'''multi\nline''')) > 0:\n    pass  # done"
        toks = tokenize(code, "python")
        assert "f'''multi\nline'''" in list(toks)
        assert ":=" in list(toks)
        assert "#" not in "".join(toks)

    def test_newlines_only_on_request(self):
        code = "a\nb"
        assert [t.kind for t in scan_tokens(code, "python")] == ["ident", "ident"]
        kinds = [t.kind for t in scan_tokens(code, "python", keep_newlines=True)]
        assert kinds == ["ident", "newline", "ident"]

    def test_keyword_sets(self):
        java = keyword_set("java")
        assert {"class", "while", "true", "null"} <= java
        assert "x" not in java
        python = keyword_set("python")
        assert {"def", "lambda", "None", "True"} <= python

    def test_unsupported_language(self):
        with pytest.raises(ValueError, match="unsupported language"):
            tokenize("x", "ruby")
        with pytest.raises(ValueError, match="unsupported language"):
            keyword_set("ruby")

    def test_empty_token_rejected(self):
        with pytest.raises(ValueError, match="empty token"):
            TokenSeq(("a", ""))


def _toks(*texts):
    return TokenSeq(texts)


class TestNgramBleu:
    def test_identity_is_exactly_one(self):
        a = tokenize("int f() { return a + b; }", "java")
        assert ngram_bleu(a, a) == 1.0

    def test_hand_value_two_gram(self):
        a, b = _toks("x", "=", "1"), _toks("y", "=", "2")
        got = ngram_bleu(a, b, max_n=2)
        assert got == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_no_smoothing_gives_zero_on_missing_order(self):
        a, b = _toks("x", "=", "1"), _toks("y", "=", "2")
        assert ngram_bleu(a, b, max_n=2, smoothing=Smoothing.NONE) == 0.0

    def test_brevity_penalty_when_candidate_shorter(self):
        a, b = _toks("x", "="), _toks("x", "=", "1")
        expected_bp = math.exp(1.0 - 3.0 / 2.0)
        p1 = 2.0 / 2.0
        p2 = 1.0 / 1.0
        assert ngram_bleu(a, b, max_n=2) == pytest.approx(
            expected_bp * (p1 * p2) ** 0.5, abs=1e-12
        )

    def test_no_penalty_when_candidate_longer(self):
        a, b = _toks("x", "=", "1"), _toks("x", "=")
        p1 = 2.0 / 3.0
        p2 = 1.0 / 2.0
        assert ngram_bleu(a, b, max_n=2) == pytest.approx((p1 * p2) ** 0.5, abs=1e-12)

    def test_orders_capped_by_candidate_length(self):
        a, b = _toks("x"), _toks("x")
        assert ngram_bleu(a, b, max_n=4) == 1.0


class TestWeightedNgram:
    def test_keywords_dominate_unigram_precision(self):
        kw = keyword_weight_map(keyword_set("java"), 4.0)
        a, b = _toks("return", "x", ";"), _toks("return", "y", ";")
        got = weighted_ngram_match(a, b, kw, max_n=1)
        assert got == pytest.approx(5.0 / 6.0, abs=1e-12)
        assert ngram_bleu(a, b, max_n=1) == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_higher_orders_unweighted(self):
        kw = keyword_weight_map(keyword_set("java"), 4.0)
        a = tokenize("return a + b;", "java")
        assert weighted_ngram_match(a, a, kw) == 1.0

    def test_weight_map_values(self):
        kw = keyword_weight_map({"if", "while"}, 4.0)
        assert kw == {"if": 4.0, "while": 4.0}
        with pytest.raises(ValueError, match="positive"):
            weighted_ngram_match(_toks("a"), _toks("a"), {"a": 0.0})


def _tree(code, language="java"):
    return StructureTreeProvider(language).parse(code)


class TestStructure:
    def test_identity(self):
        t = _tree("if (x > 0) { y = x; } else { y = 0; }")
        assert syntax_match(t, t) == 1.0

    def test_renamed_identifiers_match_fully(self):
        a = _tree("int total = first + second;")
        b = _tree("int acc = left + right;")
        assert syntax_match(a, b) == 1.0

    def test_partial_overlap_hand_value(self):
        a = _tree("x = a + b ;")
        b = _tree("x = a ;")
        # a: unit, stmt, and 5 leaves; b shares the three names and the "="
        assert syntax_match(a, b) == pytest.approx(4.0 / 7.0, abs=1e-12)
        assert syntax_match(b, a) == pytest.approx(3.0 / 5.0, abs=1e-12)

    def test_keyword_leaves_are_distinct(self):
        a = _tree("while ( x ) { }")
        b = _tree("if ( x ) { }")
        assert syntax_match(a, b) == pytest.approx(0.5, abs=1e-12)

    def test_python_statements_split_on_newline(self):
        t = _tree("x = 1\ny = 2", "python")
        assert t.kind == "unit"
        assert len(t.children) == 2
        assert all(c.kind == "stmt" for c in t.children)

    def test_unbalanced_code_still_parses(self):
        t = _tree("int f() { if (x { return 1; }")
        assert t.node_count() > 1
        u = _tree("} ) stray")
        assert u.node_count() > 1


def _flow(code, language="java"):
    return AssignmentFlowProvider(language).extract(code)


class TestDataflow:
    def test_simple_assignment_edges(self):
        f = _flow("x = a + b ;")
        assert f.counts() == {("x", "a"): 1, ("x", "b"): 1}

    def test_partial_overlap_hand_value(self):
        a, b = _flow("x = a + b ;"), _flow("x = a ;")
        assert dataflow_match(a, b) == pytest.approx(0.5, abs=1e-12)
        assert dataflow_match(b, a) == 1.0

    def test_both_empty_match_fully(self):
        a, b = _flow("f(1, 2);"), _flow("g(3);")
        assert dataflow_match(a, b) == 1.0

    def test_empty_against_nonempty(self):
        assert dataflow_match(_flow("f();"), _flow("x = y;")) == 0.0

    def test_keywords_not_collected_as_uses(self):
        f = _flow("x = new Foo(a);")
        assert f.counts() == {("x", "Foo"): 1, ("x", "a"): 1}

    def test_attribute_targets_skipped(self):
        assert _flow("self.x = a", "python").counts() == {}

    def test_compound_and_walrus(self):
        assert _flow("x += y ;").counts() == {("x", "y"): 1}
        assert _flow("if (n := m):", "python").counts() == {("n", "m"): 1}

    def test_multiset_counts(self):
        a = _flow("x = a; x = a;")
        b = _flow("x = a;")
        assert a.counts() == {("x", "a"): 2}
        assert dataflow_match(a, b) == pytest.approx(0.5, abs=1e-12)

    def test_rhs_stops_at_statement_end(self):
        f = _flow("x = a;\ny = b;")
        assert f.counts() == {("x", "a"): 1, ("y", "b"): 1}


class TestEmbeddings:
    def test_hashing_embedder_is_deterministic(self):
        a = HashingEmbedder(dim=16).embed(_toks("return", "x"))
        b = HashingEmbedder(dim=16).embed(_toks("return", "x"))
        np.testing.assert_array_equal(a.vectors, b.vectors)

    def test_rows_are_unit_norm(self):
        seq = HashingEmbedder(dim=8).embed(_toks("a", "bb", "ccc"))
        norms = np.linalg.norm(seq.vectors, axis=1)
        np.testing.assert_allclose(norms, 1.0, atol=1e-12)

    def test_non_unit_rows_rejected(self):
        with pytest.raises(ValueError, match="unit-norm"):
            EmbeddingSeq(np.array([[1.0, 1.0]]))

    def test_identity_scores_one(self):
        seq = HashingEmbedder(dim=16).embed(tokenize("int f() { return 1; }", "java"))
        assert bertscore_f3(seq, seq) == pytest.approx(1.0, abs=1e-12)

    def test_recall_weighted_asymmetry(self):
        emb = HashingEmbedder(dim=16)
        small = emb.embed(_toks("a", "b"))
        big = emb.embed(_toks("a", "b", "c", "d"))
        # recall against the larger side drags the score down more
        assert bertscore_f3(small, big) < bertscore_f3(big, small)

    def test_score_within_unit_interval(self):
        emb = HashingEmbedder(dim=4)
        a = emb.embed(_toks("p", "q", "r"))
        b = emb.embed(_toks("s", "t"))
        assert 0.0 <= bertscore_f3(a, b) <= 1.0

    def test_empty_sequence_rejected(self):
        emb = HashingEmbedder(dim=4)
        empty = emb.embed(TokenSeq(()))
        with pytest.raises(ValueError, match="empty embedding"):
            bertscore_f3(empty, emb.embed(_toks("a")))

    def test_dim_mismatch_rejected(self):
        a = HashingEmbedder(dim=4).embed(_toks("a"))
        b = HashingEmbedder(dim=8).embed(_toks("a"))
        with pytest.raises(ValueError, match="dimension mismatch"):
            bertscore_f3(a, b)

    def test_table_round_trip(self, tmp_path):
        emb = HashingEmbedder(dim=6)
        tokens = ["x", "=", "1", "with space", 'quo"te']
        table = {t: emb._vector(t) for t in tokens}
        path = tmp_path / "emb.txt"
        write_sidecar(path, table)
        loaded = TableEmbedder.load(path)
        got = loaded.embed(TokenSeq(tuple(tokens)))
        np.testing.assert_allclose(
            got.vectors, np.stack([table[t] for t in tokens]), atol=1e-15
        )

    def test_table_missing_token(self, tmp_path):
        path = tmp_path / "emb.txt"
        write_sidecar(path, {"x": np.array([1.0, 0.0])})
        loaded = TableEmbedder.load(path)
        with pytest.raises(DataError, match="no embedding for token 'y'"):
            loaded.embed(_toks("y"))

    def test_table_truncated_file(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text('2 2\n"x" 1.0 0.0\n', encoding="utf-8")
        with pytest.raises(DataError, match="ended early"):
            TableEmbedder.load(path)


class TestCodeBleu:
    def test_identity_is_exactly_one(self):
        code = "int add(int a, int b) { return a + b; }"
        assert codebleu(code, code) == 1.0

    def test_pure_ngram_weights_reduce_to_bleu(self):
        a, b = "x = a + b ;", "x = a ;"
        got = codebleu(a, b, weights=(1.0, 0.0, 0.0, 0.0))
        want = ngram_bleu(tokenize(a, "java"), tokenize(b, "java"))
        assert got == want

    def test_equal_weights_average_the_terms(self):
        scorer = CodeBleu(CodeBleuConfig())
        a = scorer.prepare("x = a + b ;")
        b = scorer.prepare("x = a ;")
        terms = scorer.terms(a, b)
        want = 0.25 * sum(terms[name] for name in terms)
        assert scorer.score(a, b) == pytest.approx(want, abs=1e-15)

    def test_provider_failure_renormalizes(self):
        class BoomTrees:
            def parse(self, code):
                raise RuntimeError("no tree for you")

        cfg = CodeBleuConfig()
        scorer = CodeBleu(cfg, tree_provider=BoomTrees())
        a = scorer.prepare("x = a + b ;")
        b = scorer.prepare("x = a ;")
        assert a.tree is None
        terms = scorer.terms(a, b)
        assert terms["syntax"] is None
        live = [terms["ngram"], terms["weighted_ngram"], terms["dataflow"]]
        want = 0.25 * sum(live) / 0.75
        assert scorer.score(a, b) == pytest.approx(want, abs=1e-15)

    def test_all_providers_failing_scores_zero(self):
        class Boom:
            def parse(self, code):
                raise RuntimeError("x")

            def extract(self, code):
                raise RuntimeError("x")

        cfg = CodeBleuConfig(weights=(0.0, 0.0, 0.5, 0.5))
        scorer = CodeBleu(cfg, tree_provider=Boom(), dataflow_provider=Boom())
        a = scorer.prepare("x = 1;")
        assert scorer.score(a, a) == 0.0

    def test_bad_weights_rejected(self):
        with pytest.raises(ValueError, match="sum to 1"):
            CodeBleuConfig(weights=(0.5, 0.5, 0.5, 0.5))
        with pytest.raises(ValueError, match="non-negative"):
            CodeBleuConfig(weights=(-0.5, 0.5, 0.5, 0.5))


class TestPairwise:
    def metric(self, a, b):
        # cheap deterministic stand-in keyed on candidate indices
        return 1.0 / (1 + abs(a.candidate_index - b.candidate_index))

    def test_sums_cover_other_scoreable_candidates(self):
        pool = simple_pool(["int f() {}", None, "int g() {}", "int h() {}"])
        sums = pairwise_sum_scores(pool, self.metric)
        assert set(sums) == {("m0", 0), ("m0", 2), ("m0", 3)}
        assert sums[("m0", 0)] == (1.0 / 3 + 1.0 / 4)
        assert sums[("m0", 2)] == (1.0 / 3 + 1.0 / 2)
        assert sums[("m0", 3)] == (1.0 / 4 + 1.0 / 2)

    def test_single_scoreable_candidate_scores_zero(self):
        pool = simple_pool(["int f() {}", None, None])
        assert pairwise_sum_scores(pool, self.metric) == {("m0", 0): 0.0}

    def test_matrix_row_sums_match(self):
        pool = simple_pool(["a = 1;", "a = 2;", "b = 1;", None, "a = 1;"])
        keys, matrix = pairwise_matrix(pool, self.metric)
        sums = pairwise_sum_scores(pool, self.metric)
        assert keys == [("m0", 0), ("m0", 1), ("m0", 2), ("m0", 4)]
        np.testing.assert_array_equal(np.diag(matrix), 0.0)
        for i, key in enumerate(keys):
            acc = 0.0
            for j in range(len(keys)):
                if j != i:
                    acc += matrix[i, j]
            assert acc == sums[key]

    def test_codebleu_scorer_on_pool(self):
        codes = ["x = a + b ;", "x = a ;", "y = a + b ;"]
        pool = simple_pool(codes)
        from codepool.simmetrics import CodeBleuPairScorer

        sums = pairwise_sum_scores(pool, CodeBleuPairScorer())
        direct = {}
        for i, a in enumerate(codes):
            acc = 0.0
            for j, b in enumerate(codes):
                if i != j:
                    acc += codebleu(a, b)
            direct[("m0", i)] = acc
        for key in direct:
            assert sums[key] == pytest.approx(direct[key], abs=1e-12)

    def test_embedding_scorer_blank_side_scores_zero(self):
        from codepool.simmetrics import EmbeddingPairScorer

        pool = simple_pool(["x = 1 ;", "   ", "y = 2 ;"])
        scorer = EmbeddingPairScorer(HashingEmbedder(dim=8), "java")
        sums = pairwise_sum_scores(pool, scorer)
        # whitespace-only code lexes to no tokens; its pairs contribute 0
        assert sums[("m0", 1)] == 0.0
        assert sums[("m0", 0)] > 0.0

"""Output-based similarity metrics and their pairwise aggregation."""

from .bleu import (
    NgramProfile,
    Smoothing,
    keyword_weight_map,
    ngram_bleu,
    ngram_profile,
    profile_bleu,
    weighted_ngram_match,
)
from .codebleu import TERM_NAMES, CodeBleu, CodeBleuConfig, CodeBleuDoc, codebleu
from .dataflow import (
    AssignmentFlowProvider,
    DataflowSet,
    counts_dataflow_match,
    dataflow_match,
)
from .embed import (
    EmbeddingSeq,
    HashingEmbedder,
    TableEmbedder,
    bertscore_f3,
    write_sidecar,
)
from .lexer import Token, TokenSeq, keyword_set, scan_tokens, tokenize
from .pairwise import (
    CodeBleuPairScorer,
    EmbeddingPairScorer,
    PairScorer,
    pairwise_matrix,
    pairwise_sum_scores,
)
from .structure import (
    SignatureProfile,
    StructureTreeProvider,
    SyntaxTree,
    profile_syntax_match,
    signature_profile,
    syntax_match,
)

__all__ = [
    "NgramProfile",
    "Smoothing",
    "keyword_weight_map",
    "ngram_bleu",
    "ngram_profile",
    "profile_bleu",
    "weighted_ngram_match",
    "TERM_NAMES",
    "CodeBleu",
    "CodeBleuConfig",
    "CodeBleuDoc",
    "codebleu",
    "AssignmentFlowProvider",
    "DataflowSet",
    "counts_dataflow_match",
    "dataflow_match",
    "EmbeddingSeq",
    "HashingEmbedder",
    "TableEmbedder",
    "bertscore_f3",
    "write_sidecar",
    "Token",
    "TokenSeq",
    "keyword_set",
    "scan_tokens",
    "tokenize",
    "CodeBleuPairScorer",
    "EmbeddingPairScorer",
    "PairScorer",
    "pairwise_matrix",
    "pairwise_sum_scores",
    "SignatureProfile",
    "StructureTreeProvider",
    "SyntaxTree",
    "profile_syntax_match",
    "signature_profile",
    "syntax_match",
]

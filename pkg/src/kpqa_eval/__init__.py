"""Importance-weighted similarity metrics for generative QA evaluation.

Computes BLEU / ROUGE-L / greedy embedding-matching scores and their
keyphrase-weighted variants over JSONL corpora, plus meta-evaluation
statistics (outlier-filtered human scores, inter-annotator agreement,
metric-human correlation, rank-pair matching).
"""

from .core import (
    AlignmentReport,
    InputError,
    LoadError,
    QASample,
    ScoreTriple,
    Side,
    TokenSeq,
    load_samples,
    samples_by_id,
    tokenize,
    validate_alignment,
)
from .embed_metrics import (
    BertScoreResult,
    EmbeddingMatrix,
    EmbeddingStore,
    load_embedding_store,
    weighted_bertscore,
)
from .meta_eval import (
    GroupStats,
    JudgmentRecord,
    ReliabilityMatrix,
    aggregate_human,
    breakdown,
    filter_ratings,
    krippendorff_alpha,
    load_judgments,
    pearson,
    rank_pair_match,
    spearman,
)
from .ngram_metrics import (
    LcsAlignment,
    bleu,
    bleu1_kpqa,
    lcs_align,
    rouge_l,
    rouge_l_kpqa,
)
from .weights import (
    IdfTable,
    Provenance,
    WeightStore,
    WeightVector,
    floor_weights,
    idf_fit,
    idf_weights,
    load_weight_store,
    uniform_weights,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentReport",
    "BertScoreResult",
    "EmbeddingMatrix",
    "EmbeddingStore",
    "GroupStats",
    "IdfTable",
    "InputError",
    "JudgmentRecord",
    "LcsAlignment",
    "LoadError",
    "Provenance",
    "QASample",
    "ReliabilityMatrix",
    "ScoreTriple",
    "Side",
    "TokenSeq",
    "WeightStore",
    "WeightVector",
    "aggregate_human",
    "bleu",
    "bleu1_kpqa",
    "breakdown",
    "filter_ratings",
    "floor_weights",
    "idf_fit",
    "idf_weights",
    "krippendorff_alpha",
    "lcs_align",
    "load_embedding_store",
    "load_judgments",
    "load_samples",
    "load_weight_store",
    "pearson",
    "rank_pair_match",
    "rouge_l",
    "rouge_l_kpqa",
    "samples_by_id",
    "spearman",
    "tokenize",
    "uniform_weights",
    "validate_alignment",
    "weighted_bertscore",
]

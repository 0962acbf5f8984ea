"""Per-sample scoring pipeline shared by the CLI commands.

Resolves weight sources, applies the zero-sum floor, and fans each requested
metric out over a sample's references (scoring against each reference and
keeping the maximum, the usual multi-reference convention).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from .core import InputError, QASample, ScoreTriple, Side, TokenSeq
from .embed_metrics import EmbeddingStore, weighted_bertscore
from .ngram_metrics import bleu, bleu1_kpqa, rouge_l, rouge_l_kpqa
from .weights import (
    IdfTable,
    Provenance,
    WeightStore,
    WeightVector,
    floor_weights,
    idf_weights,
    uniform_weights,
)

logger = logging.getLogger(__name__)

BLEU_METRICS = {"bleu-1": 1, "bleu-2": 2, "bleu-3": 3, "bleu-4": 4}
WEIGHTED_METRICS = ("bleu-1-kpqa", "rouge-l-kpqa", "bertscore-kpqa")
ALL_METRICS = tuple(BLEU_METRICS) + ("rouge-l", "bertscore") + WEIGHTED_METRICS

WEIGHT_SOURCES = ("uniform", "idf", "kpw-file", "kp-file")
FILE_SOURCES = ("kpw-file", "kp-file")


@dataclass(frozen=True)
class ScoreRow:
    sample_id: str
    metric: str
    score: float
    precision: float | None = None
    recall: float | None = None


@dataclass(frozen=True)
class ScoringContext:
    """Everything needed to score one sample, picklable for worker processes."""

    metrics: tuple[str, ...]
    beta: float = 1.2
    bleu1_clipped: bool = False
    rouge_mode: str = "symmetric"
    # weight source per weighted metric name (baseline bertscore included)
    weight_sources: dict[str, str] = field(default_factory=dict)
    idf_table: IdfTable | None = None
    weight_store: WeightStore | None = None
    embedding_store: EmbeddingStore | None = None

    def source_for(self, metric: str) -> str:
        if metric == "bertscore":
            return self.weight_sources.get(metric, "idf")
        return self.weight_sources.get(metric, "kpw-file")


def provenance_for_source(source: str) -> Provenance:
    return Provenance.EXTERNAL_KP if source == "kp-file" else Provenance.EXTERNAL_KPW


def _weights_for(ctx: ScoringContext, sample: QASample, seq: TokenSeq,
                 side: Side, source: str) -> WeightVector:
    if source == "uniform":
        vector = uniform_weights(seq)
    elif source == "idf":
        if ctx.idf_table is None:
            raise InputError("idf weight source requested but no IDF table was fitted")
        vector = idf_weights(ctx.idf_table, seq)
    elif source in FILE_SOURCES:
        if ctx.weight_store is None:
            raise InputError(f"{source} weight source requires a weights file")
        vector = ctx.weight_store.get(sample.id, side)
    else:
        raise InputError(f"unknown weight source {source!r}")
    floored, substituted = floor_weights(vector)
    if substituted:
        logger.warning("zero-sum %s weights for sample %s/%s; fell back to uniform",
                       source, sample.id, side.value)
    return floored


def _single_reference(sample: QASample, metric: str) -> TokenSeq:
    # File-backed weights and embeddings key one reference record per sample,
    # so these metrics require single-reference corpora.
    if len(sample.references) != 1:
        raise InputError(
            f"metric {metric!r} uses per-reference file data; sample {sample.id!r} "
            f"has {len(sample.references)} references")
    return sample.references[0]


def _triple_row(sample_id: str, metric: str, triple: ScoreTriple) -> ScoreRow:
    return ScoreRow(sample_id, metric, triple.f, triple.precision, triple.recall)


def _score_metric(ctx: ScoringContext, sample: QASample, metric: str) -> ScoreRow:
    if metric in BLEU_METRICS:
        value = bleu(sample.candidate, sample.references, BLEU_METRICS[metric])
        return ScoreRow(sample.id, metric, value)

    if metric == "rouge-l":
        best = max(
            (rouge_l(sample.candidate, ref, ctx.beta) for ref in sample.references),
            key=lambda t: t.f)
        return _triple_row(sample.id, metric, best)

    if metric == "bleu-1-kpqa":
        source = ctx.source_for(metric)
        cand_w = _weights_for(ctx, sample, sample.candidate, Side.CANDIDATE, source)
        value = bleu1_kpqa(sample.candidate, sample.references, cand_w,
                           clipped=ctx.bleu1_clipped)
        return ScoreRow(sample.id, metric, value)

    if metric == "rouge-l-kpqa":
        source = ctx.source_for(metric)
        cand_w = _weights_for(ctx, sample, sample.candidate, Side.CANDIDATE, source)
        if source in FILE_SOURCES:
            references = (_single_reference(sample, metric),)
        else:
            references = sample.references
        best: ScoreTriple | None = None
        for ref in references:
            ref_w = _weights_for(ctx, sample, ref, Side.REFERENCE, source)
            triple = rouge_l_kpqa(sample.candidate, ref, cand_w, ref_w,
                                  beta=ctx.beta, mode=ctx.rouge_mode)
            if best is None or triple.f > best.f:
                best = triple
        return _triple_row(sample.id, metric, best)

    if metric in ("bertscore", "bertscore-kpqa"):
        if ctx.embedding_store is None:
            raise InputError(f"metric {metric!r} requires an embeddings file")
        source = ctx.source_for(metric)
        reference = _single_reference(sample, metric)
        cand_emb = ctx.embedding_store.get(sample.id, Side.CANDIDATE)
        ref_emb = ctx.embedding_store.get(sample.id, Side.REFERENCE)
        cand_w = _weights_for(ctx, sample, sample.candidate, Side.CANDIDATE, source)
        ref_w = _weights_for(ctx, sample, reference, Side.REFERENCE, source)
        result = weighted_bertscore(cand_emb, ref_emb, cand_w, ref_w)
        return ScoreRow(sample.id, metric, result.f, result.precision, result.recall)

    raise InputError(f"unknown metric {metric!r}; available: {', '.join(ALL_METRICS)}")


def score_sample(sample: QASample, ctx: ScoringContext) -> list[ScoreRow]:
    return [_score_metric(ctx, sample, metric) for metric in ctx.metrics]


def score_corpus(samples: Sequence[QASample], ctx: ScoringContext,
                 jobs: int = 1) -> list[ScoreRow]:
    """Score every (sample, metric) pair, ordered by sample id then metric name.

    With ``jobs`` > 1 samples fan out to a process pool; the reduction
    preserves input order, so the output is identical at any parallelism.
    """
    if jobs > 1 and len(samples) > 1:
        from concurrent.futures import ProcessPoolExecutor
        from functools import partial

        chunk = max(1, len(samples) // (jobs * 4))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_sample = list(pool.map(partial(score_sample, ctx=ctx),
                                       samples, chunksize=chunk))
    else:
        per_sample = [score_sample(sample, ctx) for sample in samples]
    rows = [row for rows in per_sample for row in rows]
    rows.sort(key=lambda row: (row.sample_id, row.metric))
    return rows

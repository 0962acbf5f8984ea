"""Command-line entry points: score, meta-eval, rank-pair, idf-build.

Exit codes: 0 on success, 1 on any input error (bad file, bad flag
combination, misaligned data), 2 on an internal invariant violation.
Outputs are deterministic: rows are fully ordered and floats are printed
with 6 decimal places, so reruns produce byte-identical files regardless
of the parallelism degree.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from collections import defaultdict
from pathlib import Path
from typing import Sequence

from .core import InputError, QASample, load_samples
from .embed_metrics import load_embedding_store
from .meta_eval import (
    breakdown,
    load_judgments,
    pearson,
    rank_pair_match,
    spearman,
)
from .scoring import (
    ALL_METRICS,
    FILE_SOURCES,
    WEIGHT_SOURCES,
    WEIGHTED_METRICS,
    ScoreRow,
    ScoringContext,
    provenance_for_source,
    score_corpus,
)
from .weights import idf_fit, load_weight_store


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.6f}"


def _round(value: float | None) -> float | None:
    return None if value is None else round(value, 6)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kpqa-eval",
        description="Importance-weighted similarity metrics for generative QA, "
                    "plus meta-evaluation against human judgments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, with_scoring: bool = True) -> None:
        p.add_argument("--samples", required=True, help="samples.jsonl corpus")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
        if with_scoring:
            p.add_argument("--metrics", required=True,
                           help=f"comma-separated metric names from: {', '.join(ALL_METRICS)}")
            p.add_argument("--weights", default=None, help="weights.jsonl file")
            p.add_argument("--embeddings", default=None, help="embeddings.jsonl file")
            p.add_argument("--weight-source", default=None,
                           help="weight source for weighted metrics: one of "
                                f"{', '.join(WEIGHT_SOURCES)}, or per-metric overrides "
                                "like 'bertscore=uniform,bleu-1-kpqa=kpw-file'")
            p.add_argument("--beta", type=float, default=1.2,
                           help="F-measure recall/precision balance (default 1.2)")
            p.add_argument("--bleu1-mode", choices=("literal", "clipped"),
                           default="literal")
            p.add_argument("--rouge-mode", choices=("symmetric", "literal"),
                           default="symmetric")
            p.add_argument("--jobs", type=int, default=1,
                           help="worker processes for sample scoring")

    p_score = sub.add_parser("score", help="per-sample score table")
    add_common(p_score)

    p_meta = sub.add_parser("meta-eval",
                            help="correlate metric scores with human judgments")
    add_common(p_meta)
    p_meta.add_argument("--judgments", required=True, help="judgments.jsonl file")

    p_rank = sub.add_parser("rank-pair",
                            help="win/lose agreement with human preference "
                                 "between two models")
    add_common(p_rank)
    p_rank.add_argument("--judgments", required=True, help="judgments.jsonl file")
    p_rank.add_argument("--gap-threshold", type=float, default=2.0,
                        help="minimum human 1-5 mean gap for an eligible pair")

    p_idf = sub.add_parser("idf-build",
                           help="fit an IDF table over the reference answers")
    add_common(p_idf, with_scoring=False)
    return parser


def _parse_metrics(spec: str) -> tuple[str, ...]:
    metrics = tuple(name.strip() for name in spec.split(",") if name.strip())
    if not metrics:
        raise InputError("no metrics requested")
    for name in metrics:
        if name not in ALL_METRICS:
            raise InputError(f"unknown metric {name!r}; available: {', '.join(ALL_METRICS)}")
    return metrics


def _parse_weight_sources(spec: str | None, metrics: Sequence[str]) -> dict[str, str]:
    """A bare value applies to every weighted metric; 'metric=source' entries
    override per metric (the baseline bertscore may be overridden too)."""
    sources: dict[str, str] = {}
    if spec is None:
        return sources
    for entry in spec.split(","):
        entry = entry.strip()
        if not entry:
            continue
        if "=" in entry:
            metric, _, source = entry.partition("=")
            metric, source = metric.strip(), source.strip()
            if metric not in WEIGHTED_METRICS + ("bertscore",):
                raise InputError(f"{metric!r} does not take a weight source")
            if source not in WEIGHT_SOURCES:
                raise InputError(f"unknown weight source {source!r}")
            sources[metric] = source
        else:
            if entry not in WEIGHT_SOURCES:
                raise InputError(f"unknown weight source {entry!r}")
            for metric in WEIGHTED_METRICS:
                sources.setdefault(metric, entry)
    return sources


def _build_context(args: argparse.Namespace,
                   samples: list[QASample]) -> ScoringContext:
    metrics = _parse_metrics(args.metrics)
    weight_sources = _parse_weight_sources(args.weight_source, metrics)

    ctx = ScoringContext(
        metrics=metrics,
        beta=args.beta,
        bleu1_clipped=args.bleu1_mode == "clipped",
        rouge_mode=args.rouge_mode,
        weight_sources=weight_sources,
    )
    needed_sources = {ctx.source_for(m) for m in metrics
                      if m in WEIGHTED_METRICS or m == "bertscore"}

    idf_table = None
    if "idf" in needed_sources:
        idf_table = idf_fit([ref for s in samples for ref in s.references])

    weight_store = None
    file_sources = needed_sources & set(FILE_SOURCES)
    if file_sources:
        if len(file_sources) > 1:
            raise InputError("one weights file cannot serve both kpw-file and kp-file")
        if args.weights is None:
            raise InputError(
                f"weight source {next(iter(file_sources))!r} requires --weights")
        weight_store = load_weight_store(
            args.weights, samples,
            provenance=provenance_for_source(next(iter(file_sources))))

    embedding_store = None
    if any(m in ("bertscore", "bertscore-kpqa") for m in metrics):
        if args.embeddings is None:
            raise InputError("bertscore metrics require --embeddings")
        embedding_store = load_embedding_store(args.embeddings, samples)

    return ScoringContext(
        metrics=metrics,
        beta=ctx.beta,
        bleu1_clipped=ctx.bleu1_clipped,
        rouge_mode=ctx.rouge_mode,
        weight_sources=weight_sources,
        idf_table=idf_table,
        weight_store=weight_store,
        embedding_store=embedding_store,
    )


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _rows_to_text(header: Sequence[str], rows: Sequence[Sequence], fmt: str) -> str:
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])
        return buffer.getvalue()
    lines = [json.dumps({k: v for k, v in zip(header, row) if v is not None},
                        ensure_ascii=False)
             for row in rows]
    return "".join(line + "\n" for line in lines)


def _score_rows_as_cells(rows: Sequence[ScoreRow], fmt: str) -> str:
    header = ("id", "metric", "score", "precision", "recall")
    if fmt == "csv":
        cells = [(r.sample_id, r.metric, _fmt(r.score), _fmt(r.precision),
                  _fmt(r.recall)) for r in rows]
        # blank precision/recall cells stay blank rather than printing 0
        cells = [(i, m, s, p or None, rr or None) for i, m, s, p, rr in cells]
    else:
        cells = [(r.sample_id, r.metric, _round(r.score), _round(r.precision),
                  _round(r.recall)) for r in rows]
    return _rows_to_text(header, cells, fmt)


def cmd_score(args: argparse.Namespace) -> int:
    samples = load_samples(args.samples)
    ctx = _build_context(args, samples)
    rows = score_corpus(samples, ctx, jobs=args.jobs)
    _write(_score_rows_as_cells(rows, args.format), args.out)
    return 0


def _human_and_metric_tables(args: argparse.Namespace,
                             samples: list[QASample]) -> tuple[dict, dict]:
    judgments = load_judgments(args.judgments)
    sample_ids = {s.id for s in samples}
    judged_ids = set(judgments)
    if sample_ids != judged_ids:
        missing_judgments = sorted(sample_ids - judged_ids)
        missing_samples = sorted(judged_ids - sample_ids)
        parts = []
        if missing_judgments:
            parts.append(f"samples without judgments: {', '.join(missing_judgments)}")
        if missing_samples:
            parts.append(f"judgments without samples: {', '.join(missing_samples)}")
        raise InputError("id mismatch; " + "; ".join(parts))

    ctx = _build_context(args, samples)
    rows = score_corpus(samples, ctx, jobs=args.jobs)
    metric_scores: dict[str, dict[str, float]] = defaultdict(dict)
    for row in rows:
        metric_scores[row.metric][row.sample_id] = row.score
    return judgments, metric_scores


def cmd_meta_eval(args: argparse.Namespace) -> int:
    samples = load_samples(args.samples)
    judgments, metric_scores = _human_and_metric_tables(args, samples)
    human = {sid: rec.human_score for sid, rec in judgments.items()}
    ordered_ids = sorted(human)

    out_rows = []
    for metric in sorted(metric_scores):
        scores = metric_scores[metric]
        xs = [human[i] for i in ordered_ids]
        ys = [scores[i] for i in ordered_ids]
        r, p = pearson(xs, ys)
        rho = spearman(xs, ys)
        out_rows.append(("all", metric, r, p, rho, len(ordered_ids)))
        for key, prefix in (("question_type", "type"), ("model_tag", "model")):
            if not all(getattr(s, key) is not None for s in samples):
                continue
            for group in breakdown(samples, human, scores, key):
                out_rows.append((f"{prefix}:{group.group}", metric, group.pearson_r,
                                 group.p_value, group.spearman_rho, group.n))

    header = ("group", "metric", "pearson", "p_value", "spearman", "n")
    if args.format == "csv":
        cells = [(g, m, _fmt(r), _fmt(p), _fmt(rho), n)
                 for g, m, r, p, rho, n in out_rows]
    else:
        cells = [(g, m, _round(r), _round(p), _round(rho), n)
                 for g, m, r, p, rho, n in out_rows]
    _write(_rows_to_text(header, cells, args.format), args.out)
    return 0


def cmd_rank_pair(args: argparse.Namespace) -> int:
    samples = load_samples(args.samples)
    tags = sorted({s.model_tag for s in samples if s.model_tag is not None})
    if len(tags) != 2 or any(s.model_tag is None for s in samples):
        raise InputError(f"rank-pair needs exactly 2 model tags on every sample, "
                         f"found: {tags or 'none'}")
    judgments, metric_scores = _human_and_metric_tables(args, samples)

    # Pair the two models' outputs by shared question text.
    by_question: dict[str, dict[str, QASample]] = defaultdict(dict)
    for sample in samples:
        slot = by_question[sample.question.raw_text]
        if sample.model_tag in slot:
            raise InputError(f"two samples from model {sample.model_tag!r} share "
                             f"question {sample.question.raw_text!r}")
        slot[sample.model_tag] = sample
    paired = [(slot[tags[0]].id, slot[tags[1]].id)
              for question, slot in sorted(by_question.items())
              if len(slot) == 2]
    if not paired:
        raise InputError("no questions shared by both models")

    human_a = [judgments[a].kept_mean for a, _ in paired]
    human_b = [judgments[b].kept_mean for _, b in paired]
    out_rows = []
    for metric in sorted(metric_scores):
        scores = metric_scores[metric]
        pct, eligible = rank_pair_match(
            human_a, human_b,
            [scores[a] for a, _ in paired], [scores[b] for _, b in paired],
            gap_threshold=args.gap_threshold)
        out_rows.append((metric, pct, eligible))

    header = ("metric", "match_pct", "eligible")
    if args.format == "csv":
        cells = [(m, _fmt(pct), n) for m, pct, n in out_rows]
    else:
        cells = [(m, _round(pct), n) for m, pct, n in out_rows]
    _write(_rows_to_text(header, cells, args.format), args.out)
    return 0


def cmd_idf_build(args: argparse.Namespace) -> int:
    samples = load_samples(args.samples)
    table = idf_fit([ref for s in samples for ref in s.references])
    payload = {"doc_count": table.doc_count,
               "df": {token: table.df[token] for token in sorted(table.df)}}
    _write(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", args.out)
    return 0


_COMMANDS = {
    "score": cmd_score,
    "meta-eval": cmd_meta_eval,
    "rank-pair": cmd_rank_pair,
    "idf-build": cmd_idf_build,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # internal invariant violation
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

"""Export jobs: read a samples corpus, emit weights.jsonl / embeddings.jsonl.

Output formats (one JSON object per line, UTF-8, LF):
  weights.jsonl    {"id", "side", "tokens", "weights"}
  embeddings.jsonl {"id", "side", "tokens", "dim", "vectors"}

Records are written ordered by sample id, candidate side before reference
side, so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .mock import mock_vector, mock_weight
from .wordtok import word_tokens

MODES = ("kpqa", "kp", "mock")
SIDES = ("candidate", "reference")


class ExportError(ValueError):
    """Bad inputs or an inference/alignment failure; exits nonzero."""


@dataclass(frozen=True)
class ExportJob:
    samples_path: str
    mode: str = "mock"
    model: str | None = None           # model id or local path; unused in mock mode
    layer: int = 1                     # first hidden layer after the embedding layer
    weights_out: str | None = None
    embeddings_out: str | None = None
    pooling: str = "mean"              # subword-to-word aggregation
    mock_dim: int = 8

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ExportError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.weights_out is None and self.embeddings_out is None:
            raise ExportError("nothing to export: give --weights-out and/or --embeddings-out")
        if self.mode != "mock" and self.model is None:
            raise ExportError(f"mode {self.mode!r} requires --model")
        if self.pooling not in ("mean", "first"):
            raise ExportError(f"pooling must be 'mean' or 'first', got {self.pooling!r}")


@dataclass(frozen=True)
class SampleText:
    """One corpus entry reduced to what inference needs."""

    id: str
    question: str
    sides: dict[str, str]  # side name -> raw answer text


def read_samples(path: str | Path) -> list[SampleText]:
    """Read the samples.jsonl corpus format.

    ``reference`` may be a list; the first entry is the one exported, since
    the output formats key one reference record per sample id.
    """
    samples: list[SampleText] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ExportError(f"{path}:{lineno}: invalid JSON ({exc.msg})")
            try:
                sample_id = record["id"]
                question = record["question"]
                reference = record["reference"]
                candidate = record["candidate"]
            except KeyError as exc:
                raise ExportError(f"{path}:{lineno}: missing field {exc.args[0]!r}")
            if sample_id in seen:
                raise ExportError(f"{path}:{lineno}: duplicate sample id {sample_id!r}")
            seen.add(sample_id)
            if isinstance(reference, list):
                if not reference:
                    raise ExportError(f"{path}:{lineno}: empty reference list")
                reference = reference[0]
            samples.append(SampleText(
                id=sample_id, question=question,
                sides={"candidate": candidate, "reference": reference}))
    if not samples:
        raise ExportError(f"{path}: no samples")
    return samples


def _mock_weights(sample: SampleText, side: str, tokens: list[str]) -> list[float]:
    return [mock_weight(sample.id, side, token) for token in tokens]


def _mock_vectors(tokens: list[str], dim: int) -> list[list[float]]:
    return [mock_vector(token, dim) for token in tokens]


def run_export(job: ExportJob) -> None:
    samples = sorted(read_samples(job.samples_path), key=lambda s: s.id)

    if job.mode == "mock":
        scorer = None
        embedder = None
        dim = job.mock_dim
    else:
        from .model import TokenImportanceScorer, WordEmbedder

        scorer = TokenImportanceScorer(job.model, with_question=job.mode == "kpqa",
                                       pooling=job.pooling) if job.weights_out else None
        embedder = WordEmbedder(job.model, layer=job.layer,
                                pooling=job.pooling) if job.embeddings_out else None
        dim = embedder.dimension if embedder else 0

    weights_fh = open(job.weights_out, "w", encoding="utf-8") if job.weights_out else None
    embeddings_fh = (open(job.embeddings_out, "w", encoding="utf-8")
                     if job.embeddings_out else None)
    try:
        for sample in samples:
            for side in SIDES:
                text = sample.sides[side]
                tokens = word_tokens(text)
                if weights_fh is not None:
                    if scorer is None:
                        values = _mock_weights(sample, side, tokens)
                    else:
                        values = scorer.weights(sample.id, sample.question, tokens)
                    weights_fh.write(json.dumps(
                        {"id": sample.id, "side": side, "tokens": tokens,
                         "weights": values}, ensure_ascii=False) + "\n")
                if embeddings_fh is not None:
                    if embedder is None:
                        vectors = _mock_vectors(tokens, dim)
                    else:
                        vectors = embedder.vectors(sample.id, tokens)
                    embeddings_fh.write(json.dumps(
                        {"id": sample.id, "side": side, "tokens": tokens,
                         "dim": dim, "vectors": vectors}, ensure_ascii=False) + "\n")
    finally:
        if weights_fh is not None:
            weights_fh.close()
        if embeddings_fh is not None:
            embeddings_fh.close()

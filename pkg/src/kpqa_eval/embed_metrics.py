"""Greedy-matching embedding similarity over ingested per-token vectors.

Embeddings are external data, not computed in-process: scores are
reproducible bit-for-bit from files and the package needs no ML runtime.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .core import InputError, LoadError, QASample, ScoreTriple, Side, validate_alignment
from .weights import WeightVector


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """Unit-norm contextual vectors, one row per token."""

    vectors: np.ndarray  # shape (n_tokens, dimension), float64, read-only

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return int(self.vectors.shape[0])

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]], dimension: int) -> EmbeddingMatrix:
        """Build from raw rows, L2-normalizing each vector.

        Raises on inconsistent row lengths or a zero-norm row; the message
        names the offending position.
        """
        for position, row in enumerate(rows):
            if len(row) != dimension:
                raise InputError(
                    f"vector at position {position} has dim {len(row)}, expected {dimension}")
        matrix = np.asarray(rows, dtype=np.float64).reshape(len(rows), dimension)
        norms = np.linalg.norm(matrix, axis=1)
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise InputError(f"zero-norm vector at position {int(zero[0])}")
        matrix = matrix / norms[:, None]
        matrix.flags.writeable = False
        return cls(vectors=matrix)


@dataclass(frozen=True)
class EmbeddingStore:
    """Loaded embeddings keyed by (sample id, side), all of one dimension."""

    dimension: int
    _records: dict[tuple[str, Side], tuple[tuple[str, ...], EmbeddingMatrix]] = field(
        default_factory=dict)

    def get(self, sample_id: str, side: Side) -> EmbeddingMatrix:
        try:
            return self._records[(sample_id, side)][1]
        except KeyError:
            raise InputError(
                f"no embeddings for sample {sample_id!r} side {side.value!r}") from None

    def __contains__(self, key: tuple[str, Side]) -> bool:
        return key in self._records

    def __len__(self) -> int:
        return len(self._records)

    def items(self) -> Iterator[tuple[tuple[str, Side], tuple[tuple[str, ...], EmbeddingMatrix]]]:
        return iter(self._records.items())


def load_embedding_store(path: str | Path, samples: Sequence[QASample]) -> EmbeddingStore:
    """Load an embeddings.jsonl file, validating exactly like the weight loader.

    One object per line: ``{"id", "side", "tokens", "dim", "vectors"}``.
    Vectors are L2-normalized on load; a zero vector, a dimension mismatch
    across records, or a token list differing from the corpus tokenization
    rejects the file.
    """
    by_id = {s.id: s for s in samples}
    records: dict[tuple[str, Side], tuple[tuple[str, ...], EmbeddingMatrix]] = {}
    dimension: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LoadError(f"invalid JSON ({exc.msg})", path=path, line=lineno)
            try:
                sample_id = record["id"]
                side_field = record["side"]
                tokens = tuple(record["tokens"])
                dim = record["dim"]
                rows = record["vectors"]
            except KeyError as exc:
                raise LoadError(f"missing field {exc.args[0]!r}", path=path, line=lineno)
            if side_field == Side.CANDIDATE.value:
                side = Side.CANDIDATE
            elif side_field == Side.REFERENCE.value:
                side = Side.REFERENCE
            else:
                raise LoadError(f"'side' must be 'candidate' or 'reference', got {side_field!r}",
                                path=path, line=lineno)
            if dimension is None:
                dimension = int(dim)
            elif dim != dimension:
                raise LoadError(f"dimension mismatch across records: {dim} != {dimension}",
                                path=path, line=lineno)
            sample = by_id.get(sample_id)
            if sample is None:
                raise LoadError(f"unknown sample id {sample_id!r}", path=path, line=lineno)
            seq = sample.candidate if side is Side.CANDIDATE else sample.references[0]
            if tokens != seq.tokens:
                raise LoadError(
                    f"token mismatch for sample {sample_id!r} side {side.value!r}: "
                    f"file has {list(tokens)}, corpus has {list(seq.tokens)}",
                    path=path, line=lineno)
            report = validate_alignment(seq, len(rows), sample_id, side)
            if not report.ok:
                raise LoadError(report.describe(), path=path, line=lineno)
            try:
                matrix = EmbeddingMatrix.from_rows(rows, int(dim))
            except InputError as exc:
                raise LoadError(f"{exc} (sample {sample_id!r} side {side.value!r})",
                                path=path, line=lineno)
            key = (sample_id, side)
            if key in records:
                raise LoadError(f"duplicate record for sample {sample_id!r} "
                                f"side {side.value!r}", path=path, line=lineno)
            records[key] = (tokens, matrix)
    return EmbeddingStore(dimension=dimension or 0, _records=records)


@dataclass(frozen=True)
class BertScoreResult:
    """Greedy-matching similarity scores, clamped to [0, 1] for reporting.

    Raw values are retained because unit-norm cosines can be negative.
    """

    precision: float
    recall: float
    f: float
    raw_precision: float
    raw_recall: float
    raw_f: float
    degenerate: bool = False

    def as_triple(self) -> ScoreTriple:
        return ScoreTriple(self.precision, self.recall, self.f, self.degenerate)


def _clamp01(value: float) -> float:
    return 0.0 if value < 0.0 else 1.0 if value > 1.0 else value


def _harmonic(precision: float, recall: float) -> float:
    denom = precision + recall
    if denom <= 0.0:
        return 0.0
    return 2.0 * precision * recall / denom


def weighted_bertscore(cand_emb: EmbeddingMatrix, ref_emb: EmbeddingMatrix,
                       cand_weights: WeightVector,
                       ref_weights: WeightVector) -> BertScoreResult:
    """Importance-weighted greedy cosine matching.

    Precision: each candidate token takes its best cosine against the
    reference tokens; the weighted average uses candidate-side weights.
    Recall mirrors this from the reference side. F is the harmonic mean
    (0 when P + R is not positive). The max over a cosine row is evaluation
    order independent, so results do not depend on any internal parallelism.
    """
    if len(cand_weights) != len(cand_emb):
        raise InputError(
            f"candidate weights misaligned: {len(cand_weights)} weights for "
            f"{len(cand_emb)} vectors")
    if len(ref_weights) != len(ref_emb):
        raise InputError(
            f"reference weights misaligned: {len(ref_weights)} weights for "
            f"{len(ref_emb)} vectors")
    if len(cand_emb) == 0 or len(ref_emb) == 0:
        return BertScoreResult(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, degenerate=True)
    if cand_emb.dimension != ref_emb.dimension:
        raise InputError(
            f"embedding dimensions differ: {cand_emb.dimension} != {ref_emb.dimension}")
    similarity = cand_emb.vectors @ ref_emb.vectors.T
    cand_w = np.asarray(cand_weights.weights, dtype=np.float64)
    ref_w = np.asarray(ref_weights.weights, dtype=np.float64)
    cand_total = float(cand_w.sum())
    ref_total = float(ref_w.sum())
    raw_p = float(cand_w @ similarity.max(axis=1)) / cand_total if cand_total > 0 else 0.0
    raw_r = float(ref_w @ similarity.max(axis=0)) / ref_total if ref_total > 0 else 0.0
    precision = _clamp01(raw_p)
    recall = _clamp01(raw_r)
    return BertScoreResult(
        precision=precision,
        recall=recall,
        f=_harmonic(precision, recall),
        raw_precision=raw_p,
        raw_recall=raw_r,
        raw_f=_harmonic(raw_p, raw_r) if raw_p + raw_r > 0 else 0.0,
    )

"""Per-token importance weights: uniform, corpus IDF, and file-loaded keyphrase weights."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, Sequence

from .core import InputError, LoadError, QASample, Side, TokenSeq, validate_alignment


class Provenance(str, Enum):
    UNIFORM = "uniform"
    IDF = "idf"
    EXTERNAL_KPW = "external_kpw"  # keyphrase weights conditioned on the question
    EXTERNAL_KP = "external_kp"    # ablated weights computed without the question


@dataclass(frozen=True)
class WeightVector:
    """Non-negative per-token weights, 1:1 with a TokenSeq at use time."""

    weights: tuple[float, ...]
    provenance: Provenance

    def __post_init__(self) -> None:
        for i, w in enumerate(self.weights):
            if not math.isfinite(w) or w < 0:
                raise InputError(f"weight at position {i} is {w!r}; must be finite and >= 0")

    def __len__(self) -> int:
        return len(self.weights)

    def total(self) -> float:
        return sum(self.weights)

    def scaled(self, factor: float) -> WeightVector:
        return WeightVector(tuple(w * factor for w in self.weights), self.provenance)


def uniform_weights(seq: TokenSeq) -> WeightVector:
    """Weight 1 for every token; the unweighted reduction case."""
    return WeightVector((1.0,) * len(seq.tokens), Provenance.UNIFORM)


@dataclass(frozen=True)
class IdfTable:
    """Document frequencies over a fitting corpus.

    ``df`` counts distinct documents containing each token type.
    """

    doc_count: int
    df: dict[str, int]


def idf_fit(corpus: Sequence[TokenSeq]) -> IdfTable:
    """Fit document frequencies over a corpus of token sequences."""
    if not corpus:
        raise InputError("empty corpus")
    df: Counter[str] = Counter()
    for doc in corpus:
        df.update(set(doc.tokens))
    return IdfTable(doc_count=len(corpus), df=dict(df))


def idf_weights(table: IdfTable, seq: TokenSeq) -> WeightVector:
    """Smoothed IDF per token: ln((N + 1) / (df + 1)), df = 0 for unseen tokens.

    The plus-one smoothing keeps unseen tokens finite; a token present in
    every document gets weight ln((N + 1) / (N + 1)) = 0.
    """
    n = table.doc_count
    values = tuple(
        math.log((n + 1) / (table.df.get(token, 0) + 1)) for token in seq.tokens
    )
    return WeightVector(values, Provenance.IDF)


def floor_weights(w: WeightVector, epsilon: float = 1e-8) -> tuple[WeightVector, bool]:
    """Guard against all-zero weight vectors that would zero every denominator.

    If the weight sum is below ``epsilon`` the vector is replaced with uniform
    weights and the substitution is flagged; otherwise it is returned unchanged.
    A degenerate sample must not abort corpus scoring.
    """
    if epsilon <= 0:
        raise InputError("epsilon must be > 0")
    if w.total() < epsilon:
        return WeightVector((1.0,) * len(w), Provenance.UNIFORM), True
    return w, False


@dataclass(frozen=True)
class WeightStore:
    """Loaded weights keyed by (sample id, side).

    Records are alignment-validated against the sample corpus at load time,
    so lookups always return weights that match the corpus tokenization.
    """

    provenance: Provenance
    _records: dict[tuple[str, Side], tuple[tuple[str, ...], WeightVector]] = field(
        default_factory=dict)

    def get(self, sample_id: str, side: Side) -> WeightVector:
        try:
            return self._records[(sample_id, side)][1]
        except KeyError:
            raise InputError(
                f"no {self.provenance.value} weights for sample {sample_id!r} "
                f"side {side.value!r}"
            ) from None

    def tokens(self, sample_id: str, side: Side) -> tuple[str, ...]:
        return self._records[(sample_id, side)][0]

    def __contains__(self, key: tuple[str, Side]) -> bool:
        return key in self._records

    def __len__(self) -> int:
        return len(self._records)

    def items(self) -> Iterator[tuple[tuple[str, Side], tuple[tuple[str, ...], WeightVector]]]:
        return iter(self._records.items())


def _side_from_field(value: object, path: str | Path, lineno: int) -> Side:
    if value == Side.CANDIDATE.value:
        return Side.CANDIDATE
    if value == Side.REFERENCE.value:
        return Side.REFERENCE
    raise LoadError(f"'side' must be 'candidate' or 'reference', got {value!r}",
                    path=path, line=lineno)


def _seq_for_side(sample: QASample, side: Side) -> TokenSeq:
    # The file format keys one record per (id, side); reference-side records
    # describe the first reference answer.
    return sample.candidate if side is Side.CANDIDATE else sample.references[0]


def load_weight_store(path: str | Path, samples: Sequence[QASample],
                      provenance: Provenance = Provenance.EXTERNAL_KPW) -> WeightStore:
    """Load a weights.jsonl file and validate every record against the corpus.

    One object per line: ``{"id", "side", "tokens", "weights"}``. Rejected on
    the first mismatch: unknown id, token list differing from the corpus
    tokenization, weight/token length mismatch, weight outside [0, 1], or a
    duplicate (id, side) key.
    """
    if provenance not in (Provenance.EXTERNAL_KPW, Provenance.EXTERNAL_KP):
        raise InputError(f"weight files carry external weights, not {provenance.value}")
    by_id = {s.id: s for s in samples}
    records: dict[tuple[str, Side], tuple[tuple[str, ...], WeightVector]] = {}
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
                tokens = record["tokens"]
                values = record["weights"]
            except KeyError as exc:
                raise LoadError(f"missing field {exc.args[0]!r}", path=path, line=lineno)
            side = _side_from_field(side_field, path, lineno)
            sample = by_id.get(sample_id)
            if sample is None:
                raise LoadError(f"unknown sample id {sample_id!r}", path=path, line=lineno)
            seq = _seq_for_side(sample, side)
            tokens = tuple(tokens)
            if tokens != seq.tokens:
                raise LoadError(
                    f"token mismatch for sample {sample_id!r} side {side.value!r}: "
                    f"file has {list(tokens)}, corpus has {list(seq.tokens)}",
                    path=path, line=lineno)
            report = validate_alignment(seq, len(values), sample_id, side)
            if not report.ok:
                raise LoadError(report.describe(), path=path, line=lineno)
            for value in values:
                if not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
                    raise LoadError(
                        f"weight {value!r} out of [0, 1] for sample {sample_id!r} "
                        f"side {side.value!r}", path=path, line=lineno)
            key = (sample_id, side)
            if key in records:
                raise LoadError(f"duplicate record for sample {sample_id!r} "
                                f"side {side.value!r}", path=path, line=lineno)
            records[key] = (tokens, WeightVector(tuple(float(v) for v in values), provenance))
    return WeightStore(provenance=provenance, _records=records)

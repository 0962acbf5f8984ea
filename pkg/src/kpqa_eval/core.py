"""Domain types, tokenization, and alignment validation shared by all metric modules.

Everything here is immutable after construction and all functions are pure,
so values can be shared freely across threads or worker processes.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence


class InputError(ValueError):
    """Bad user-supplied data: malformed files, misaligned attachments,
    degenerate argument values. The CLI maps this to exit code 1."""


class LoadError(InputError):
    """File-level failure, annotated with path and 1-based line number."""

    def __init__(self, message: str, *, path: str | Path | None = None,
                 line: int | None = None):
        prefix = ""
        if path is not None:
            prefix = str(path)
            if line is not None:
                prefix += f":{line}"
            prefix += ": "
        super().__init__(prefix + message)
        self.path = None if path is None else str(path)
        self.line = line


class Side(str, Enum):
    """Which role a piece of text plays in a QA sample."""

    QUESTION = "question"
    REFERENCE = "reference"
    CANDIDATE = "candidate"


def _strip_edge_punct(word: str) -> str:
    """Strip leading/trailing punctuation (Unicode categories P*)."""
    start, end = 0, len(word)
    while start < end and unicodedata.category(word[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(word[end - 1]).startswith("P"):
        end -= 1
    return word[start:end]


def _token_list(text: str) -> tuple[str, ...]:
    """Lowercase, whitespace-split, strip edge punctuation, drop empties.

    NFC normalization first, so composed/decomposed inputs tokenize alike.
    """
    normalized = unicodedata.normalize("NFC", text).casefold()
    tokens = []
    for word in normalized.split():
        word = _strip_edge_punct(word)
        if word:
            tokens.append(word)
    return tuple(tokens)


@dataclass(frozen=True)
class TokenSeq:
    """A tokenized text with the original string retained.

    ``tokens`` is always exactly the tokenizer's output for ``raw_text``;
    the constructor re-derives it and refuses inconsistent values.
    """

    raw_text: str
    tokens: tuple[str, ...]
    side: Side

    def __post_init__(self) -> None:
        expected = _token_list(self.raw_text)
        if self.tokens != expected:
            raise ValueError(
                f"tokens do not match tokenizer output for {self.raw_text!r}: "
                f"got {list(self.tokens)}, expected {list(expected)}"
            )

    def __len__(self) -> int:
        return len(self.tokens)


def tokenize(text: str, side: Side = Side.CANDIDATE) -> TokenSeq:
    """Tokenize ``text`` deterministically. Empty input yields an empty sequence."""
    return TokenSeq(raw_text=text, tokens=_token_list(text), side=side)


@dataclass(frozen=True)
class AlignmentReport:
    """Result of checking that a per-token attachment matches a TokenSeq."""

    ok: bool
    token_count: int
    attachment_length: int
    sample_id: str | None = None
    side: Side | None = None

    def describe(self) -> str:
        where = ""
        if self.sample_id is not None:
            where = f" for sample {self.sample_id!r}"
            if self.side is not None:
                where += f"/{self.side.value}"
        if self.ok:
            return f"aligned ({self.token_count} tokens){where}"
        return (f"length mismatch{where}: sequence has {self.token_count} "
                f"tokens, attachment has {self.attachment_length}")


def validate_alignment(seq: TokenSeq, attachment_length: int,
                       sample_id: str | None = None,
                       side: Side | None = None) -> AlignmentReport:
    """Check that an attachment (weights, vectors) is 1:1 with ``seq``.

    Never raises; callers decide whether a mismatch is fatal.
    """
    return AlignmentReport(
        ok=attachment_length == len(seq.tokens),
        token_count=len(seq.tokens),
        attachment_length=attachment_length,
        sample_id=sample_id,
        side=side,
    )


@dataclass(frozen=True)
class ScoreTriple:
    """Precision / recall / F bundle.

    ``degenerate`` marks scores produced from empty inputs (both sides
    empty), where 0.0 is a placeholder rather than a measurement.
    """

    precision: float
    recall: float
    f: float
    degenerate: bool = False


@dataclass(frozen=True)
class QASample:
    """One scoring unit: question, reference answer(s), candidate answer."""

    id: str
    question: TokenSeq
    references: tuple[TokenSeq, ...]
    candidate: TokenSeq
    question_type: str | None = None
    model_tag: str | None = None

    def __post_init__(self) -> None:
        if not self.references:
            raise InputError(f"sample {self.id!r} has no references")


def _sample_from_record(record: dict, path: str | Path, lineno: int) -> QASample:
    try:
        sample_id = record["id"]
        question = record["question"]
        reference = record["reference"]
        candidate = record["candidate"]
    except KeyError as exc:
        raise LoadError(f"missing field {exc.args[0]!r}", path=path, line=lineno)
    if not isinstance(sample_id, str) or not sample_id:
        raise LoadError("'id' must be a non-empty string", path=path, line=lineno)
    references = [reference] if isinstance(reference, str) else list(reference)
    if not references or not all(isinstance(r, str) for r in references):
        raise LoadError("'reference' must be a string or non-empty list of strings",
                        path=path, line=lineno)
    return QASample(
        id=sample_id,
        question=tokenize(question, Side.QUESTION),
        references=tuple(tokenize(r, Side.REFERENCE) for r in references),
        candidate=tokenize(candidate, Side.CANDIDATE),
        question_type=record.get("question_type"),
        model_tag=record.get("model"),
    )


def load_samples(path: str | Path) -> list[QASample]:
    """Read a samples.jsonl corpus.

    One JSON object per line: ``{"id", "question", "reference", "candidate"}``
    plus optional ``"question_type"`` and ``"model"``. ``reference`` may be a
    string or a non-empty list of strings. Duplicate ids and empty corpora
    are load errors.
    """
    samples: list[QASample] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LoadError(f"invalid JSON ({exc.msg})", path=path, line=lineno)
            sample = _sample_from_record(record, path, lineno)
            if sample.id in seen:
                raise LoadError(f"duplicate sample id {sample.id!r}",
                                path=path, line=lineno)
            seen.add(sample.id)
            samples.append(sample)
    if not samples:
        raise LoadError("no samples", path=path)
    return samples


def samples_by_id(samples: Sequence[QASample]) -> dict[str, QASample]:
    return {sample.id: sample for sample in samples}

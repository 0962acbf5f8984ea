"""Produce per-token keyphrase weights and contextual embeddings as JSONL."""

from .export import ExportError, ExportJob, read_samples, run_export
from .mock import mock_vector, mock_weight, stable_hash
from .wordtok import word_tokens

__version__ = "0.1.0"

__all__ = [
    "ExportError",
    "ExportJob",
    "mock_vector",
    "mock_weight",
    "read_samples",
    "run_export",
    "stable_hash",
    "word_tokens",
]

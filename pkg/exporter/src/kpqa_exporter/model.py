"""Transformers-backed inference for keyphrase weights and word embeddings.

Any token-classification checkpoint with a per-token in-span probability
(two labels, or one label read through a sigmoid) can produce weights; any
encoder checkpoint can produce embeddings. Subword outputs are pooled to the
word tokens of the corpus format (mean by default, first-subword optional).

torch and transformers are imported lazily so mock-mode exports never touch
an ML runtime.
"""

from __future__ import annotations

from .export import ExportError


def _load_torch():
    try:
        import torch
    except ImportError as exc:
        raise ExportError(f"model mode requires torch: {exc}")
    return torch


def _check_fast(tokenizer, model_id):
    if not getattr(tokenizer, "is_fast", False):
        raise ExportError(
            f"tokenizer for {model_id!r} is not a fast tokenizer; word-level "
            "alignment needs word_ids()")


def _pool(values, positions, pooling):
    if pooling == "first":
        return values[positions[0]]
    return sum(values[p] for p in positions) / len(positions)


def _word_positions(encoding, word_count, target_sequence, sample_id):
    """Map each word index to its subword positions within one sequence."""
    word_ids = encoding.word_ids(0)
    sequence_ids = encoding.sequence_ids(0)
    positions: list[list[int]] = [[] for _ in range(word_count)]
    for idx, (seq, word) in enumerate(zip(sequence_ids, word_ids)):
        if seq == target_sequence and word is not None:
            positions[word].append(idx)
    for word, subs in enumerate(positions):
        if not subs:
            raise ExportError(
                f"sample {sample_id!r}: word {word} produced no subword tokens")
    return positions


class TokenImportanceScorer:
    """Per-word positive-class probability from a token-classification model."""

    def __init__(self, model_id: str, with_question: bool = True,
                 pooling: str = "mean"):
        torch = _load_torch()
        try:
            from transformers import AutoModelForTokenClassification, AutoTokenizer
        except ImportError as exc:
            raise ExportError(f"model mode requires transformers: {exc}")
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_id, use_fast=True)
            self.model = AutoModelForTokenClassification.from_pretrained(model_id)
        except Exception as exc:
            raise ExportError(f"cannot load model {model_id!r}: {exc}")
        _check_fast(self.tokenizer, model_id)
        self.model.eval()
        self.with_question = with_question
        self.pooling = pooling
        self.num_labels = int(self.model.config.num_labels)
        if self.num_labels not in (1, 2):
            raise ExportError(
                f"model {model_id!r} has {self.num_labels} labels; need a "
                "binary in-span head (1 or 2 labels)")
        self._torch = torch

    def weights(self, sample_id: str, question: str, answer_words: list[str]) -> list[float]:
        if not answer_words:
            return []
        torch = self._torch
        from .wordtok import word_tokens

        if self.with_question:
            question_words = word_tokens(question) or ["?"]
            encoding = self.tokenizer(question_words, answer_words,
                                      is_split_into_words=True, return_tensors="pt")
            answer_sequence = 1
        else:
            encoding = self.tokenizer(answer_words, is_split_into_words=True,
                                      return_tensors="pt")
            answer_sequence = 0
        limit = getattr(self.tokenizer, "model_max_length", None)
        if limit and limit < 1_000_000 and encoding["input_ids"].shape[1] > limit:
            raise ExportError(f"sample {sample_id!r}: input exceeds model "
                              f"max length {limit}")
        with torch.no_grad():
            logits = self.model(**encoding).logits[0]
        if self.num_labels == 2:
            probs = torch.softmax(logits, dim=-1)[:, 1]
        else:
            probs = torch.sigmoid(logits[:, 0])
        values = probs.tolist()
        positions = _word_positions(encoding, len(answer_words), answer_sequence,
                                    sample_id)
        return [min(1.0, max(0.0, _pool(values, subs, self.pooling)))
                for subs in positions]


class WordEmbedder:
    """Per-word vectors from one hidden layer of an encoder, unit-normalized.

    ``layer`` indexes the hidden-state stack: 0 is the embedding layer output,
    1 the first encoder layer (the default).
    """

    def __init__(self, model_id: str, layer: int = 1, pooling: str = "mean"):
        torch = _load_torch()
        try:
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise ExportError(f"model mode requires transformers: {exc}")
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_id, use_fast=True)
            self.model = AutoModel.from_pretrained(model_id)
        except Exception as exc:
            raise ExportError(f"cannot load model {model_id!r}: {exc}")
        _check_fast(self.tokenizer, model_id)
        self.model.eval()
        self.layer = layer
        self.pooling = pooling
        self.dimension = int(self.model.config.hidden_size)
        depth = int(getattr(self.model.config, "num_hidden_layers", 0))
        if not 0 <= layer <= depth:
            raise ExportError(f"layer {layer} out of range; model has hidden "
                              f"states 0..{depth}")
        self._torch = torch

    def vectors(self, sample_id: str, answer_words: list[str]) -> list[list[float]]:
        if not answer_words:
            return []
        torch = self._torch
        encoding = self.tokenizer(answer_words, is_split_into_words=True,
                                  return_tensors="pt")
        with torch.no_grad():
            hidden = self.model(**encoding, output_hidden_states=True).hidden_states
        states = hidden[self.layer][0]  # (seq_len, dimension)
        positions = _word_positions(encoding, len(answer_words), 0, sample_id)
        out = []
        for word, subs in enumerate(positions):
            if self.pooling == "first":
                vec = states[subs[0]]
            else:
                vec = states[subs].mean(dim=0)
            norm = float(torch.linalg.vector_norm(vec))
            if norm == 0.0:
                raise ExportError(f"sample {sample_id!r}: zero-norm vector at "
                                  f"word {word}")
            out.append((vec / norm).tolist())
        return out

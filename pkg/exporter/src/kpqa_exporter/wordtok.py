"""Word-level tokenization matching the scoring toolkit's corpus format.

Emitted token lists must byte-match the consumer's tokenization of the same
text: NFC-normalize, casefold, split on Unicode whitespace, strip leading and
trailing punctuation (categories P*) from each piece, drop empty results.
"""

from __future__ import annotations

import unicodedata


def _strip_edge_punct(word: str) -> str:
    start, end = 0, len(word)
    while start < end and unicodedata.category(word[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(word[end - 1]).startswith("P"):
        end -= 1
    return word[start:end]


def word_tokens(text: str) -> list[str]:
    normalized = unicodedata.normalize("NFC", text).casefold()
    tokens = []
    for piece in normalized.split():
        piece = _strip_edge_punct(piece)
        if piece:
            tokens.append(piece)
    return tokens

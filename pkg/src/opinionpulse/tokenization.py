"""Shared tokenizer for topic matching, collocation counting and polarity scoring.

Rules: lowercase, split on Unicode whitespace, strip leading/trailing
punctuation except ``#`` and ``@`` (hashtags and mentions survive), keep
emoji as tokens. No stemming, no multi-word normalization.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from typing import Iterable

_KEEP = frozenset("#@")


def _strippable(ch: str) -> bool:
    if ch in _KEEP:
        return False
    return unicodedata.category(ch).startswith("P")


def _strip_punct(token: str) -> str:
    start, end = 0, len(token)
    while start < end and _strippable(token[start]):
        start += 1
    while end > start and _strippable(token[end - 1]):
        end -= 1
    return token[start:end]


def tokenize(text: str) -> list[str]:
    """Split text into lowercase tokens.

    ``str.split()`` handles Unicode whitespace; emoji are symbol
    characters, not punctuation, so they are never stripped.
    """
    tokens = []
    for raw in text.split():
        token = _strip_punct(raw).lower()
        if token:
            tokens.append(token)
    return tokens


def count_tokens(texts: Iterable[str]) -> Counter:
    """Aggregate token counts over many texts (order-independent)."""
    counts: Counter = Counter()
    for text in texts:
        counts.update(tokenize(text))
    return counts

"""Polarity label vocabulary and token normalization.

Everything downstream (corpus records, parsed completions, eval reports)
shares this one three-way label set.
"""
from __future__ import annotations

import string
from enum import Enum

__all__ = ["PolarityLabel", "LabelParseError", "normalize_label"]


class LabelParseError(ValueError):
    """Raised when a token cannot be folded into an admissible label."""

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class PolarityLabel(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"

    def __str__(self) -> str:  # serialize as the bare token
        return self.value


_ADMISSIBLE = {label.value: label for label in PolarityLabel}


def _lower_latin(text: str) -> str:
    return "".join(c.lower() if "A" <= c <= "Z" else c for c in text)


def normalize_label(token: str) -> PolarityLabel:
    """Fold a raw label token into a PolarityLabel.

    Trims whitespace and ASCII punctuation, lowercases Latin letters, and
    when the token holds several whitespace-separated words keeps only the
    first (models like to append chatter after the label).

    Raises LabelParseError if no admissible label remains.
    """
    words = token.split()
    if not words:
        raise LabelParseError("empty label token", raw=token)
    word = _lower_latin(words[0].strip(string.punctuation))
    label = _ADMISSIBLE.get(word)
    if label is None:
        raise LabelParseError(f"not an admissible polarity label: {token!r}", raw=token)
    return label

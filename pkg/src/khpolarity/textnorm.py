"""Text cleaning for casual Khmer corpora, plus script profiling.

Cleaning steps, in order: NFC normalization, Latin lowercasing, emoji
removal, punctuation removal, symbol removal, token respelling, whitespace
collapsing.  Khmer letters, digits, and combining signs are never touched;
the only Khmer codepoints the cleaner may remove are the four marks
។ ៕ ៖ ៗ.
"""
from __future__ import annotations

import string
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import regex

__all__ = [
    "CleanConfig",
    "ScriptClass",
    "ScriptProfile",
    "clean_text",
    "script_profile",
    "load_respell_map",
]

KHMER_BLOCK = (0x1780, 0x17FF)

# ASCII punctuation proper (P* categories); $+<=>^`|~ are symbols, not punctuation
_ASCII_PUNCT = frozenset(c for c in string.punctuation if unicodedata.category(c).startswith("P"))
# the only punctuation removed inside the Khmer block: khan, bariyoosan, camnuc pii kuuh, lek too
_KHMER_PUNCT = frozenset("។៕៖ៗ")

# pictographs plus the glue that emoji sequences are built from:
# variation selectors, ZWJ, keycap, regional indicators, skin-tone modifiers
_EMOJI_RE = regex.compile(
    r"\p{Extended_Pictographic}"
    r"|[︀-️‍⃣]"
    r"|[\U0001F1E6-\U0001F1FF]"
    r"|[\U0001F3FB-\U0001F3FF]"
)
_PICTO_RE = regex.compile(r"\p{Extended_Pictographic}")

_LATIN_UPPER_RE = regex.compile(r"\p{Script=Latin}")


@dataclass
class CleanConfig:
    lowercase_latin: bool = True
    strip_punctuation: bool = True
    strip_emoji: bool = True
    strip_symbols: bool = True
    respell_map: dict[str, str] = field(default_factory=dict)
    collapse_whitespace: bool = True

    def __post_init__(self):
        normalized: dict[str, str] = {}
        for key, value in self.respell_map.items():
            nkey = unicodedata.normalize("NFC", key)
            if not nkey.strip():
                raise ValueError("respell_map keys must be non-empty")
            if nkey in normalized:
                raise ValueError(f"respell_map keys collide after NFC: {key!r}")
            normalized[nkey] = unicodedata.normalize("NFC", value)
        self.respell_map = normalized


def _in_khmer_block(c: str) -> bool:
    return KHMER_BLOCK[0] <= ord(c) <= KHMER_BLOCK[1]


def _lower_latin_char(c: str) -> str:
    if c.isupper() and _LATIN_UPPER_RE.match(c):
        low = c.lower()
        # keep length-changing folds (e.g. dotted capital I) to preserve
        # the one-in-one-out shape of the cleaner
        if len(low) == 1:
            return low
    return c


def _is_symbol(c: str) -> bool:
    # pictographs belong to the emoji stage, so the two toggles stay orthogonal
    return (unicodedata.category(c).startswith("S")
            and not _in_khmer_block(c)
            and not _PICTO_RE.match(c))


def _is_punct(c: str) -> bool:
    return c in _ASCII_PUNCT or c in _KHMER_PUNCT


def _respell(text: str, mapping: dict[str, str]) -> str:
    parts = regex.split(r"(\s+)", text)
    return "".join(mapping.get(p, p) for p in parts)


def clean_text(text: str, config: CleanConfig | None = None) -> str:
    """Apply the cleaning pipeline; total on valid Unicode, idempotent with defaults."""
    config = config or CleanConfig()
    out = unicodedata.normalize("NFC", text)
    if config.lowercase_latin:
        out = "".join(_lower_latin_char(c) for c in out)
    if config.strip_emoji:
        out = _EMOJI_RE.sub("", out)
    if config.strip_punctuation:
        out = "".join(c for c in out if not _is_punct(c))
    if config.strip_symbols:
        out = "".join(c for c in out if not _is_symbol(c))
    if config.respell_map:
        out = _respell(out, config.respell_map)
    # removal can butt a base against a trailing combining mark; renormalize
    # so the output is NFC and a second pass is a no-op
    out = unicodedata.normalize("NFC", out)
    if config.collapse_whitespace:
        out = " ".join(out.split())
    return out


class ScriptClass(str, Enum):
    KHMER = "khmer"
    ROMANIZED = "romanized"
    MIXED = "mixed"
    OTHER = "other"


@dataclass
class ScriptProfile:
    khmer_ratio: float
    latin_ratio: float
    other_ratio: float
    classification: ScriptClass


def script_profile(text: str) -> ScriptProfile:
    """Profile the letter codepoints of a text by script.

    Ratios are over letter codepoints only (combining signs, digits, and
    punctuation do not count).  Khmer means the U+1780-U+17FF block, Latin
    means Basic Latin letters.  A text with no letters at all profiles as
    (0, 0, 1) / other.
    """
    khmer = latin = other = 0
    for c in text:
        if not c.isalpha():
            continue
        if _in_khmer_block(c):
            khmer += 1
        elif ("a" <= c <= "z") or ("A" <= c <= "Z"):
            latin += 1
        else:
            other += 1
    total = khmer + latin + other
    if total == 0:
        return ScriptProfile(0.0, 0.0, 1.0, ScriptClass.OTHER)

    kr, lr, orr = khmer / total, latin / total, other / total
    if kr >= 0.9:
        cls = ScriptClass.KHMER
    elif lr >= 0.9:
        cls = ScriptClass.ROMANIZED
    elif kr >= 0.1 and lr >= 0.1:
        cls = ScriptClass.MIXED
    else:
        cls = ScriptClass.OTHER
    return ScriptProfile(kr, lr, orr, cls)


def load_respell_map(path: str | Path) -> dict[str, str]:
    """Read a two-column TSV (surface token, replacement); '#' lines are comments."""
    mapping: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise ValueError(f"{path}: line {lineno}: expected 'token<TAB>replacement'")
        mapping[parts[0]] = parts[1]
    return mapping

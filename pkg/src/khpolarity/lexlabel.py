"""Heuristic keyword auto-labeler.

Assigns a provisional polarity by majority vote over lexicon-term matches
and records the matched spans as the rationale.  Khmer text has no word
delimiters, so matching is a longest-match-first, non-overlapping
substring scan.  Negation is deliberately not modeled; disagreements are
what the curation queue is for.
"""
from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .corpus import Dataset, LabeledExample
from .labels import PolarityLabel

__all__ = [
    "Lexicon",
    "LexiconError",
    "RationaleMatch",
    "HeuristicLabel",
    "load_lexicon",
    "starter_lexicon",
    "auto_label",
    "label_corpus",
]


class LexiconError(ValueError):
    pass


def _nfc_terms(terms, side: str) -> frozenset[str]:
    out = set()
    for t in terms:
        nt = unicodedata.normalize("NFC", t).strip()
        if not nt:
            raise LexiconError(f"empty {side} term in lexicon")
        out.add(nt)
    return frozenset(out)


@dataclass(frozen=True)
class Lexicon:
    positive_terms: frozenset[str]
    negative_terms: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "positive_terms", _nfc_terms(self.positive_terms, "positive"))
        object.__setattr__(self, "negative_terms", _nfc_terms(self.negative_terms, "negative"))
        both = self.positive_terms & self.negative_terms
        if both:
            raise LexiconError(f"terms listed under both polarities: {', '.join(sorted(both))}")

    def polarity_of(self, term: str) -> str:
        return "positive" if term in self.positive_terms else "negative"


@dataclass(frozen=True)
class RationaleMatch:
    term: str
    polarity: str  # "positive" | "negative"
    start: int  # codepoint offset into the input
    end: int
    byte_offset: int  # UTF-8 byte offset of the same position

    def to_dict(self) -> dict:
        return {
            "term": self.term,
            "polarity": self.polarity,
            "start": self.start,
            "end": self.end,
            "byte_offset": self.byte_offset,
        }


@dataclass(frozen=True)
class HeuristicLabel:
    label: PolarityLabel
    matches: tuple[RationaleMatch, ...]


def load_lexicon(path: str | Path) -> Lexicon:
    """Read a TSV of term<TAB>polarity rows (polarity: positive|negative)."""
    positive: set[str] = set()
    negative: set[str] = set()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise LexiconError(f"{path}: line {lineno}: expected 'term<TAB>polarity'")
        term, polarity = parts[0], parts[1].strip()
        if polarity == "positive":
            positive.add(term)
        elif polarity == "negative":
            negative.add(term)
        else:
            raise LexiconError(f"{path}: line {lineno}: unknown polarity {polarity!r}")
    return Lexicon(frozenset(positive), frozenset(negative))


def starter_lexicon() -> Lexicon:
    """The small bundled lexicon; a starting point, not a curated resource."""
    path = resources.files("khpolarity").joinpath("data/lexicons/starter_khmer.tsv")
    with resources.as_file(path) as p:
        return load_lexicon(p)


def auto_label(text: str, lexicon: Lexicon) -> HeuristicLabel:
    """Label a cleaned text by majority vote over non-overlapping term matches.

    Longer terms are matched first so a short stem never shadows a longer
    phrase that contains it.  Ties (including zero matches) are neutral.
    """
    terms = sorted(lexicon.positive_terms | lexicon.negative_terms, key=lambda t: (-len(t), t))
    claimed = bytearray(len(text))
    found: list[RationaleMatch] = []
    for term in terms:
        pos = text.find(term)
        while pos != -1:
            end = pos + len(term)
            if not any(claimed[pos:end]):
                claimed[pos:end] = b"\x01" * (end - pos)
                found.append(
                    RationaleMatch(
                        term=term,
                        polarity=lexicon.polarity_of(term),
                        start=pos,
                        end=end,
                        byte_offset=len(text[:pos].encode("utf-8")),
                    )
                )
            pos = text.find(term, pos + 1)
    found.sort(key=lambda m: m.start)

    positives = sum(1 for m in found if m.polarity == "positive")
    negatives = len(found) - positives
    if positives > negatives:
        label = PolarityLabel.POSITIVE
    elif negatives > positives:
        label = PolarityLabel.NEGATIVE
    else:
        label = PolarityLabel.NEUTRAL
    return HeuristicLabel(label=label, matches=tuple(found))


def label_corpus(ds: Dataset, lexicon: Lexicon) -> Dataset:
    """Provisionally label every record and flag it for human review.

    Gold labels already on the records are preserved; the heuristic result
    goes into provisional_label / rationale_matches only.
    """
    labeled: list[LabeledExample] = []
    for rec in ds.records:
        result = auto_label(rec.text, lexicon)
        labeled.append(
            LabeledExample(
                id=rec.id,
                text=rec.text,
                reasoning=rec.reasoning,
                label=rec.label,
                source=rec.source,
                split=rec.split,
                provisional_label=result.label,
                rationale_matches=[m.to_dict() for m in result.matches],
                needs_review=True,
            )
        )
    return Dataset(
        records=labeled,
        name=ds.name,
        created_at=ds.created_at,
        metadata={**ds.metadata, "auto_labeled": True},
    )

"""Parse raw model completions into a label plus optional self-explanation.

Completions are expected to look like the training targets: an optional
think block holding the rationale, then the polarity token.  The parser
is total on arbitrary Unicode; when no admissible label can be extracted
it raises LabelParseError carrying the raw completion.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .labels import LabelParseError, PolarityLabel, normalize_label

__all__ = [
    "ClassificationOutcome",
    "parse_completion",
    "normalize_label",
    "LabelParseError",
    "REASONING_LEAD_IN",
    "THINK_OPEN",
    "THINK_CLOSE",
]

THINK_OPEN = "<think>"
THINK_CLOSE = "</think>"

# the fixed lead-in the training targets wrap rationales with; parsing
# peels it off so callers get the bare keywords back
REASONING_LEAD_IN = "Because the input text contains the following"


@dataclass
class ClassificationOutcome:
    label: PolarityLabel
    reasoning: str | None
    raw: str  # unmodified completion, kept for audit
    meta: dict = field(default_factory=dict)


def _extract_reasoning(head: str) -> str | None:
    head = head.lstrip()
    if head.startswith(THINK_OPEN):
        head = head[len(THINK_OPEN):]
    # degenerate completions can nest tags; the rationale never carries them
    head = head.replace(THINK_OPEN, "").replace(THINK_CLOSE, "").strip()
    if head.startswith(REASONING_LEAD_IN):
        head = head[len(REASONING_LEAD_IN):].strip()
    return head or None


def parse_completion(completion: str) -> ClassificationOutcome:
    """Split a completion at the first </think> and normalize the label after it.

    Serving stacks differ on whether the primed <think> prefix is echoed
    back, so a leading <think> is accepted and stripped.  A whitespace-only
    think block (the non-reasoning shape) yields reasoning=None.  Without
    any </think>, the whole completion is treated as the label token.
    """
    idx = completion.find(THINK_CLOSE)
    if idx == -1:
        reasoning = None
        tail = completion
    else:
        reasoning = _extract_reasoning(completion[:idx])
        tail = completion[idx + len(THINK_CLOSE):]
    try:
        label = normalize_label(tail)
    except LabelParseError as exc:
        raise LabelParseError(f"no admissible label in completion: {str(exc)}", raw=completion) from exc
    return ClassificationOutcome(label=label, reasoning=reasoning, raw=completion)

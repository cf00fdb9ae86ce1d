import random

import pytest

from khpolarity.labels import PolarityLabel
from khpolarity.thinkparse import LabelParseError, parse_completion


def test_reasoning_completion():
    out = parse_completion(
        "<think> Because the input text contains the following ឆ្ងាញ់ </think>\npositive"
    )
    assert out.label is PolarityLabel.POSITIVE
    assert out.reasoning == "ឆ្ងាញ់"


def test_empty_think_block():
    out = parse_completion("<think>\n\n</think>\nneutral")
    assert out.label is PolarityLabel.NEUTRAL
    assert out.reasoning is None


def test_bare_label_without_think_block():
    out = parse_completion("negative")
    assert out.label is PolarityLabel.NEGATIVE
    assert out.reasoning is None


def test_unechoed_prefix():
    # some stacks do not echo the primed <think> back
    out = parse_completion(" reasoning here </think>\npositive")
    assert out.label is PolarityLabel.POSITIVE
    assert out.reasoning == "reasoning here"


def test_custom_phrasing_kept_verbatim():
    out = parse_completion("<think> the text praises the food </think>\npositive")
    assert out.reasoning == "the text praises the food"


def test_first_close_tag_wins():
    out = parse_completion("<think> a </think>\npositive </think> negative")
    assert out.label is PolarityLabel.POSITIVE
    assert out.reasoning == "a"


def test_nested_tags_scrubbed():
    out = parse_completion("<think> keep <think>this</think>\nneutral")
    assert out.label is PolarityLabel.NEUTRAL
    assert out.reasoning == "keep this"


def test_label_with_trailing_chatter():
    out = parse_completion("<think>\n\n</think>\nPositive. Definitely positive")
    assert out.label is PolarityLabel.POSITIVE


def test_raw_preserved_for_audit():
    raw = "<think> x </think>\nnegative"
    assert parse_completion(raw).raw == raw


def test_unparseable_raises_with_raw():
    with pytest.raises(LabelParseError) as exc_info:
        parse_completion("<think> hmm </think>\nsomething else")
    assert exc_info.value.raw == "<think> hmm </think>\nsomething else"


def test_empty_completion_raises():
    with pytest.raises(LabelParseError):
        parse_completion("")


def test_garbage_only_ever_raises_label_parse_error():
    rng = random.Random(404)
    pool = "<>/think\n ابគខpositivxyz"
    for _ in range(500):
        s = "".join(rng.choice(pool) for _ in range(rng.randint(0, 40)))
        try:
            parse_completion(s)
        except LabelParseError:
            pass  # the only admissible failure mode

import pytest

from khpolarity.corpus import Dataset, LabeledExample
from khpolarity.labels import PolarityLabel


def make_dataset(rows, name="fixture", **kwargs):
    """rows: iterable of (id, text, reasoning, label-or-None) tuples."""
    records = [
        LabeledExample(
            id=rid,
            text=text,
            reasoning=reasoning,
            label=PolarityLabel(label) if label else None,
            **kwargs,
        )
        for rid, text, reasoning, label in rows
    ]
    return Dataset(records, name=name)


@pytest.fixture
def sample_dataset():
    from khmer_fixtures import CASUAL_ROWS, FORMAL_ROWS

    rows = [(f"{i:04d}", text, reasoning, label)
            for i, (text, reasoning, label) in enumerate(FORMAL_ROWS + CASUAL_ROWS)]
    return make_dataset(rows)

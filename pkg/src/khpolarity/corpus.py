"""Canonical polarity dataset records: load, validate, split, persist.

The canonical on-disk format is JSONL with one record per line using the
fields {id, text, reasoning, label, source, split} plus the optional
auto-labeling fields {provisional_label, rationale_matches, needs_review}.
CSV (columns text,reasoning,label, header required) is accepted on ingest
only.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from random import Random
from typing import Iterable

from .labels import LabelParseError, PolarityLabel, normalize_label

__all__ = [
    "Source",
    "Split",
    "LabeledExample",
    "Dataset",
    "DatasetError",
    "load_dataset",
    "save_dataset",
    "split_dataset",
]


class Source(str, Enum):
    KP = "kp"
    CKP = "ckp"
    CUSTOM = "custom"


class Split(str, Enum):
    TRAIN = "train"
    TEST = "test"
    UNASSIGNED = "unassigned"


class DatasetError(ValueError):
    """Load/validation failure; carries per-row problems when applicable."""

    def __init__(self, message: str, row_errors: list[tuple[int, str]] | None = None):
        if row_errors:
            detail = "; ".join(f"line {n}: {msg}" for n, msg in row_errors)
            message = f"{message}: {detail}"
        super().__init__(message)
        self.row_errors = row_errors or []


@dataclass
class LabeledExample:
    """One corpus record.

    `reasoning` holds the polarity-related keywords/phrases when the row
    has them (KP-style rows do, CKP-style rows do not).  An empty or
    whitespace-only reasoning is normalized to absent.
    """

    id: str
    text: str
    reasoning: str | None = None
    label: PolarityLabel | None = None
    source: Source = Source.CUSTOM
    split: Split = Split.UNASSIGNED
    # set by the heuristic labeler; gold `label` is never overwritten
    provisional_label: PolarityLabel | None = None
    rationale_matches: list[dict] | None = None
    needs_review: bool = False

    def __post_init__(self):
        if not self.id:
            raise DatasetError("record id must be non-empty")
        if not self.text or not self.text.strip():
            raise DatasetError(f"record {self.id!r}: text is empty after trimming")
        if self.reasoning is not None and not self.reasoning.strip():
            self.reasoning = None

    def to_dict(self) -> dict:
        d: dict = {"id": self.id, "text": self.text}
        if self.reasoning is not None:
            d["reasoning"] = self.reasoning
        if self.label is not None:
            d["label"] = self.label.value
        d["source"] = self.source.value
        d["split"] = self.split.value
        if self.provisional_label is not None:
            d["provisional_label"] = self.provisional_label.value
        if self.rationale_matches is not None:
            d["rationale_matches"] = self.rationale_matches
        if self.needs_review:
            d["needs_review"] = True
        return d

    @classmethod
    def from_dict(cls, d: dict, fallback_id: str | None = None) -> "LabeledExample":
        rec_id = str(d["id"]) if d.get("id") not in (None, "") else fallback_id
        if rec_id is None:
            raise DatasetError("record has no id and no fallback was provided")
        label = d.get("label")
        provisional = d.get("provisional_label")
        return cls(
            id=rec_id,
            text=d.get("text", ""),
            reasoning=d.get("reasoning") or None,
            label=normalize_label(label) if label not in (None, "") else None,
            source=Source(d.get("source", "custom")),
            split=Split(d.get("split", "unassigned")),
            provisional_label=normalize_label(provisional) if provisional not in (None, "") else None,
            rationale_matches=d.get("rationale_matches"),
            needs_review=bool(d.get("needs_review", False)),
        )


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class Dataset:
    records: list[LabeledExample]
    name: str = "dataset"
    created_at: str = field(default_factory=_utcnow)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        seen: set[str] = set()
        dupes: set[str] = set()
        for rec in self.records:
            (dupes if rec.id in seen else seen).add(rec.id)
        if dupes:
            raise DatasetError(f"duplicate record ids: {', '.join(sorted(dupes))}")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def _auto_id(index: int, total: int) -> str:
    return str(index).zfill(max(4, len(str(total))))


def _rows_from_jsonl(lines: Iterable[str]) -> list[tuple[int, dict]]:
    rows = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        rows.append((lineno, line))
    return rows


def load_dataset(path: str | Path, format: str = "jsonl", name: str | None = None) -> Dataset:
    """Load and validate a dataset; malformed rows are reported with line numbers."""
    path = Path(path)
    if format not in ("jsonl", "csv"):
        raise DatasetError(f"unknown format {format!r} (expected jsonl or csv)")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise DatasetError(f"{path} is not valid UTF-8: {exc}") from exc

    raw_rows: list[tuple[int, dict]] = []
    errors: list[tuple[int, str]] = []
    if format == "jsonl":
        for lineno, line in _rows_from_jsonl(text.splitlines()):
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("row is not a JSON object")
                raw_rows.append((lineno, obj))
            except ValueError as exc:
                errors.append((lineno, str(exc)))
    else:
        reader = csv.DictReader(text.splitlines())
        if reader.fieldnames is None or "text" not in reader.fieldnames:
            raise DatasetError(f"{path}: CSV header with a 'text' column is required")
        for lineno, row in enumerate(reader, start=2):  # header is line 1
            raw_rows.append((lineno, {k: v for k, v in row.items() if v not in (None, "")}))

    total = len(raw_rows)
    records: list[LabeledExample] = []
    seen_ids: set[str] = set()
    for seq, (lineno, obj) in enumerate(raw_rows):
        try:
            rec = LabeledExample.from_dict(obj, fallback_id=_auto_id(seq, total))
        except (DatasetError, LabelParseError, ValueError, KeyError) as exc:
            errors.append((lineno, str(exc)))
            continue
        if rec.id in seen_ids:
            errors.append((lineno, f"duplicate id {rec.id!r}"))
            continue
        seen_ids.add(rec.id)
        records.append(rec)

    if errors:
        raise DatasetError(f"{path}: {len(errors)} malformed row(s)", row_errors=errors)

    meta_path = path.with_suffix(path.suffix + ".meta.json")
    if meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        return Dataset(
            records=records,
            name=name or meta.get("name", path.stem),
            created_at=meta.get("created_at", _utcnow()),
            metadata=meta.get("metadata", {}),
        )
    return Dataset(records=records, name=name or path.stem)


def save_dataset(ds: Dataset, path: str | Path, format: str = "jsonl") -> None:
    """Write the canonical JSONL plus a small .meta.json sidecar.

    The sidecar carries dataset-level fields (name, created_at, metadata)
    so that save -> load round-trips the whole Dataset, not just records.
    """
    if format != "jsonl":
        raise DatasetError("datasets are saved as JSONL only (CSV is accepted on ingest)")
    path = Path(path)
    with path.open("w", encoding="utf-8") as f:
        for rec in ds.records:
            f.write(json.dumps(rec.to_dict(), ensure_ascii=False) + "\n")
    meta_path = path.with_suffix(path.suffix + ".meta.json")
    meta = {"name": ds.name, "created_at": ds.created_at, "metadata": ds.metadata}
    meta_path.write_text(json.dumps(meta, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def split_dataset(ds: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministic seeded train/test split.

    |test| = round(test_fraction * N) with half-up rounding; the partition
    is disjoint and exhaustive and record order is preserved within each
    side.  The seed and fraction are recorded in both datasets' metadata.
    """
    n = len(ds.records)
    if n == 0:
        raise DatasetError("cannot split an empty dataset")
    if not 0.0 < test_fraction < 1.0:
        raise DatasetError(f"test_fraction must be in (0, 1), got {test_fraction}")

    n_test = int(n * test_fraction + 0.5)
    indices = list(range(n))
    Random(seed).shuffle(indices)
    test_idx = set(indices[:n_test])

    train_records = [replace(r, split=Split.TRAIN) for i, r in enumerate(ds.records) if i not in test_idx]
    test_records = [replace(r, split=Split.TEST) for i, r in enumerate(ds.records) if i in test_idx]
    split_meta = {"split_seed": seed, "test_fraction": test_fraction, "split_of": ds.name}
    train = Dataset(train_records, name=f"{ds.name}-train", metadata={**ds.metadata, **split_meta})
    test = Dataset(test_records, name=f"{ds.name}-test", metadata={**ds.metadata, **split_meta})
    return train, test

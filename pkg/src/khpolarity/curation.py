"""Human review service for heuristically labeled records.

State is event-sourced: an initial-queue snapshot plus an append-only
decision log, both JSONL.  Every mutation is serialized through one lock
and hits the log before the caller sees a response, so replaying the log
over the snapshot reproduces the live state exactly.
"""
from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from pydantic import BaseModel

from .corpus import Dataset, LabeledExample, Source, save_dataset
from .labels import PolarityLabel

__all__ = [
    "CurationStatus",
    "CurationItem",
    "CurationError",
    "ConflictError",
    "UnknownItemError",
    "CurationStore",
    "DecisionBody",
    "create_app",
]

DECISIONS = ("accept", "correct", "skip")


class CurationStatus(str, Enum):
    PENDING = "pending"
    ACCEPTED = "accepted"
    CORRECTED = "corrected"
    SKIPPED = "skipped"


class CurationError(ValueError):
    pass


class UnknownItemError(CurationError):
    pass


class ConflictError(CurationError):
    """Decision on an item that is already decided or leased elsewhere."""


@dataclass
class CurationItem:
    item_id: str
    text: str
    provisional_label: PolarityLabel
    rationale_matches: list[dict] = field(default_factory=list)
    status: CurationStatus = CurationStatus.PENDING
    final_label: PolarityLabel | None = None
    reviewer: str | None = None
    decided_at: float | None = None
    source: str = "custom"

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "text": self.text,
            "provisional_label": self.provisional_label.value,
            "rationale_matches": self.rationale_matches,
            "status": self.status.value,
            "final_label": self.final_label.value if self.final_label else None,
            "reviewer": self.reviewer,
            "decided_at": self.decided_at,
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CurationItem":
        return cls(
            item_id=d["item_id"],
            text=d["text"],
            provisional_label=PolarityLabel(d["provisional_label"]),
            rationale_matches=d.get("rationale_matches") or [],
            status=CurationStatus(d.get("status", "pending")),
            final_label=PolarityLabel(d["final_label"]) if d.get("final_label") else None,
            reviewer=d.get("reviewer"),
            decided_at=d.get("decided_at"),
            source=d.get("source", "custom"),
        )


class CurationStore:
    """In-memory item table rebuilt from (snapshot, log) at startup."""

    def __init__(self, log_path: str | Path, snapshot_path: str | Path,
                 lease_seconds: float = 600.0, clock=time.time):
        self.log_path = Path(log_path)
        self.snapshot_path = Path(snapshot_path)
        self.lease_seconds = lease_seconds
        self.clock = clock
        self._lock = threading.Lock()
        self._items: dict[str, CurationItem] = {}
        self._order: list[str] = []
        self._leases: dict[str, tuple[str, float]] = {}  # item_id -> (reviewer, expires)
        self._replay_from_disk()

    # -- persistence ------------------------------------------------------

    def _replay_from_disk(self) -> None:
        if self.snapshot_path.exists():
            for line in self.snapshot_path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                item = CurationItem.from_dict(json.loads(line))
                self._items[item.item_id] = item
                self._order.append(item.item_id)
        if self.log_path.exists():
            for line in self.log_path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                entry = json.loads(line)
                item = self._items.get(entry["item_id"])
                if item is not None:
                    self._apply(item, entry["decision"], entry.get("label"), entry["reviewer"], entry["ts"])

    def _append_log(self, entry: dict) -> None:
        with self.log_path.open("a", encoding="utf-8") as f:
            f.write(json.dumps(entry, ensure_ascii=False) + "\n")
            f.flush()

    def _append_snapshot(self, items: list[CurationItem]) -> None:
        with self.snapshot_path.open("a", encoding="utf-8") as f:
            for item in items:
                f.write(json.dumps(item.to_dict(), ensure_ascii=False) + "\n")
            f.flush()

    # -- queue operations -------------------------------------------------

    def enqueue(self, ds: Dataset) -> dict:
        """Add one pending item per review-flagged record; re-enqueueing
        already-known ids is a no-op."""
        with self._lock:
            added: list[CurationItem] = []
            for rec in ds.records:
                if not rec.needs_review:
                    continue
                if rec.provisional_label is None:
                    raise CurationError(f"record {rec.id!r} is flagged for review but has no provisional label")
                if rec.id in self._items:
                    continue
                item = CurationItem(
                    item_id=rec.id,
                    text=rec.text,
                    provisional_label=rec.provisional_label,
                    rationale_matches=rec.rationale_matches or [],
                    source=rec.source.value,
                )
                self._items[item.item_id] = item
                self._order.append(item.item_id)
                added.append(item)
            if added:
                self._append_snapshot(added)
            return {"added": len(added), "total": len(self._items), "pending": self._pending_count()}

    def _pending_count(self) -> int:
        return sum(1 for i in self._items.values() if i.status is CurationStatus.PENDING)

    def _lease_active(self, item_id: str) -> str | None:
        lease = self._leases.get(item_id)
        if lease is None:
            return None
        reviewer, expires = lease
        if expires <= self.clock():
            del self._leases[item_id]
            return None
        return reviewer

    def next_item(self, reviewer: str) -> CurationItem | None:
        """Hand the reviewer a pending item under a soft lease.

        A reviewer holding an unexpired lease gets that same item back, so
        a page reload does not silently walk the queue.
        """
        with self._lock:
            now = self.clock()
            for item_id in self._order:
                item = self._items[item_id]
                if item.status is not CurationStatus.PENDING:
                    continue
                holder = self._lease_active(item_id)
                if holder == reviewer:
                    self._leases[item_id] = (reviewer, now + self.lease_seconds)
                    return item
            for item_id in self._order:
                item = self._items[item_id]
                if item.status is not CurationStatus.PENDING:
                    continue
                if self._lease_active(item_id) is None:
                    self._leases[item_id] = (reviewer, now + self.lease_seconds)
                    return item
            return None

    def _apply(self, item: CurationItem, decision: str, label: str | None,
               reviewer: str, ts: float) -> None:
        if decision == "correct" and label == item.provisional_label.value:
            decision = "accept"  # correcting to the same label is an accept
        if decision == "accept":
            item.status = CurationStatus.ACCEPTED
            item.final_label = item.provisional_label
        elif decision == "correct":
            item.status = CurationStatus.CORRECTED
            item.final_label = PolarityLabel(label)
        elif decision == "skip":
            item.status = CurationStatus.SKIPPED
            item.final_label = None
        item.reviewer = reviewer
        item.decided_at = ts
        self._leases.pop(item.item_id, None)

    def submit_decision(self, item_id: str, decision: str, reviewer: str,
                        label: str | None = None) -> CurationItem:
        """Validate, append to the decision log, then apply; in that order."""
        if decision not in DECISIONS:
            raise CurationError(f"unknown decision {decision!r}")
        if decision == "correct":
            if label is None:
                raise CurationError("correct needs a label")
            PolarityLabel(label)  # raises on junk
        with self._lock:
            item = self._items.get(item_id)
            if item is None:
                raise UnknownItemError(f"unknown item {item_id!r}")
            if item.status is not CurationStatus.PENDING:
                raise ConflictError(f"item {item_id!r} is already {item.status.value}")
            holder = self._lease_active(item_id)
            if holder is not None and holder != reviewer:
                raise ConflictError(f"item {item_id!r} is leased to another reviewer")
            ts = self.clock()
            self._append_log(
                {"item_id": item_id, "decision": decision, "label": label, "reviewer": reviewer, "ts": ts}
            )
            self._apply(item, decision, label, reviewer, ts)
            return item

    def stats(self) -> dict:
        with self._lock:
            counts = {status.value: 0 for status in CurationStatus}
            for item in self._items.values():
                counts[item.status.value] += 1
            counts["total"] = len(self._items)
            return counts

    def items_state(self) -> dict[str, dict]:
        """Current state of every item, for replay comparison."""
        with self._lock:
            return {item_id: self._items[item_id].to_dict() for item_id in self._order}

    def export_curated(self, path: str | Path | None = None) -> Dataset:
        """Accepted/corrected items as a gold-labeled dataset; others excluded."""
        with self._lock:
            records = []
            for item_id in self._order:
                item = self._items[item_id]
                if item.status in (CurationStatus.ACCEPTED, CurationStatus.CORRECTED):
                    records.append(
                        LabeledExample(
                            id=item.item_id,
                            text=item.text,
                            label=item.final_label,
                            source=Source(item.source),
                            provisional_label=item.provisional_label,
                            rationale_matches=item.rationale_matches or None,
                        )
                    )
        ds = Dataset(records, name="curated", metadata={"decision_log": str(self.log_path)})
        if path is not None:
            save_dataset(ds, path)
        return ds


# -- HTTP layer -----------------------------------------------------------


class DecisionBody(BaseModel):
    # module scope: route annotations resolve through module globals
    item_id: str
    decision: str
    label: str | None = None
    reviewer: str = "anonymous"


def create_app(store: CurationStore, ui_dir: str | Path | None = None):
    """FastAPI app over a store; serves the review UI bundle at / when present."""
    from fastapi import FastAPI, HTTPException
    from fastapi.responses import HTMLResponse, PlainTextResponse
    from fastapi.staticfiles import StaticFiles

    app = FastAPI(title="polarity curation")

    @app.get("/api/queue/next")
    def queue_next(reviewer: str = "anonymous"):
        item = store.next_item(reviewer)
        return item.to_dict() if item else None

    @app.post("/api/decision")
    def decision(body: DecisionBody):
        try:
            item = store.submit_decision(body.item_id, body.decision, body.reviewer, body.label)
        except UnknownItemError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except (CurationError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return item.to_dict()

    @app.get("/api/stats")
    def stats():
        return store.stats()

    @app.get("/api/export")
    def export():
        ds = store.export_curated()
        body = "".join(json.dumps(rec.to_dict(), ensure_ascii=False) + "\n" for rec in ds.records)
        return PlainTextResponse(body, media_type="application/x-ndjson")

    ui_path = Path(ui_dir) if ui_dir else None
    if ui_path and ui_path.is_dir():
        app.mount("/", StaticFiles(directory=ui_path, html=True), name="ui")
    else:
        @app.get("/")
        def index():
            return HTMLResponse(
                "<html><body><h1>polarity curation</h1>"
                "<p>No UI bundle found. The JSON API lives under /api/.</p></body></html>"
            )

    return app

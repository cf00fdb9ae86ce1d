"""Score classification outcomes against gold labels and compare runs.

Outcomes that carry no admissible label (transport failures, off-format
generations) count toward n but can never be correct; the confusion
matrix gets an extra "unparseable" predicted column so a wrong label and
a missing label stay distinguishable.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .labels import PolarityLabel
from .thinkparse import ClassificationOutcome

__all__ = ["EvalReport", "RunComparison", "score", "compare_runs", "render_report", "UNPARSEABLE"]

LABEL_ORDER = [l.value for l in (PolarityLabel.POSITIVE, PolarityLabel.NEGATIVE, PolarityLabel.NEUTRAL)]
UNPARSEABLE = "unparseable"
PRED_COLUMNS = LABEL_ORDER + [UNPARSEABLE]


@dataclass
class EvalReport:
    run_id: str
    mode: str
    n: int
    accuracy: float
    per_class: dict[str, dict[str, float]]
    confusion: dict[str, dict[str, int]]  # gold label -> predicted column -> count
    unparseable_count: int
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "mode": self.mode,
            "n": self.n,
            "accuracy": self.accuracy,
            "per_class": self.per_class,
            "confusion": self.confusion,
            "unparseable_count": self.unparseable_count,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(**d)


def _predicted_column(outcome) -> str:
    """Map an outcome-or-error to a predicted column name."""
    if isinstance(outcome, ClassificationOutcome):
        return outcome.label.value
    if isinstance(outcome, PolarityLabel):
        return outcome.value
    if isinstance(outcome, str):
        try:
            return PolarityLabel(outcome).value
        except ValueError:
            return UNPARSEABLE
    return UNPARSEABLE


def score(outcomes: list, gold: list, run_id: str = "run", mode: str = "thinking",
          metadata: dict | None = None) -> EvalReport:
    """Build an EvalReport from parallel outcome and gold-label lists.

    Accepts ClassificationOutcome, PolarityLabel, or label strings as
    predictions; anything else (FailedOutcome, None, junk) lands in the
    unparseable column.
    """
    if len(outcomes) != len(gold):
        raise ValueError(f"length mismatch: {len(outcomes)} outcomes vs {len(gold)} gold labels")
    if not gold:
        raise ValueError("cannot score an empty run")

    confusion = {g: {p: 0 for p in PRED_COLUMNS} for g in LABEL_ORDER}
    for outcome, g in zip(outcomes, gold):
        g_label = g.value if isinstance(g, PolarityLabel) else PolarityLabel(g).value
        confusion[g_label][_predicted_column(outcome)] += 1

    n = len(gold)
    correct = sum(confusion[l][l] for l in LABEL_ORDER)
    unparseable_count = sum(confusion[g][UNPARSEABLE] for g in LABEL_ORDER)

    per_class = {}
    for label in LABEL_ORDER:
        tp = confusion[label][label]
        fp = sum(confusion[g][label] for g in LABEL_ORDER if g != label)
        support = sum(confusion[label].values())
        fn = support - tp
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[label] = {"precision": precision, "recall": recall, "f1": f1, "support": support}

    meta = {"timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds")}
    meta.update(metadata or {})
    meta.setdefault("unparseable_policy", "counted as errors")
    return EvalReport(
        run_id=run_id,
        mode=mode,
        n=n,
        accuracy=correct / n,
        per_class=per_class,
        confusion=confusion,
        unparseable_count=unparseable_count,
        metadata=meta,
    )


@dataclass
class RunComparison:
    dataset_name: str
    reference_run_id: str
    rows: list[dict]  # sorted by accuracy desc; each: run_id, mode, accuracy, n, delta, flag

    def to_dict(self) -> dict:
        return {
            "dataset_name": self.dataset_name,
            "reference_run_id": self.reference_run_id,
            "rows": self.rows,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunComparison":
        return cls(**d)


def compare_runs(reports: list[EvalReport], reference_run_id: str | None = None) -> RunComparison:
    """Rank runs on one dataset by accuracy; flag the top two, show deltas.

    The reference defaults to the lowest-accuracy run (the usual baseline
    position); pass reference_run_id to designate another.
    """
    if len(reports) < 2:
        raise ValueError("need at least two reports to compare")
    datasets = {r.metadata.get("dataset_name", "") for r in reports}
    if len(datasets) > 1:
        raise ValueError(f"reports span different datasets: {sorted(datasets)}")

    ordered = sorted(reports, key=lambda r: (-r.accuracy, r.run_id))
    if reference_run_id is None:
        reference = ordered[-1]
    else:
        by_id = {r.run_id: r for r in reports}
        if reference_run_id not in by_id:
            raise ValueError(f"reference run {reference_run_id!r} is not among the reports")
        reference = by_id[reference_run_id]

    rows = []
    for rank, rep in enumerate(ordered):
        flag = "highest" if rank == 0 else "second" if rank == 1 else ""
        rows.append(
            {
                "run_id": rep.run_id,
                "mode": rep.mode,
                "accuracy": rep.accuracy,
                "n": rep.n,
                "delta": rep.accuracy - reference.accuracy,
                "flag": flag,
            }
        )
    return RunComparison(dataset_name=datasets.pop(), reference_run_id=reference.run_id, rows=rows)


def _md_report(report: EvalReport) -> str:
    lines = [
        f"## {report.run_id} ({report.mode})",
        "",
        f"n = {report.n}, accuracy = {report.accuracy:.2f}, unparseable = {report.unparseable_count}",
        "",
        "| Class | Precision | Recall | F1 | Support |",
        "|---|---|---|---|---|",
    ]
    for label in LABEL_ORDER:
        m = report.per_class[label]
        lines.append(
            f"| {label} | {m['precision']:.2f} | {m['recall']:.2f} | {m['f1']:.2f} | {int(m['support'])} |"
        )
    lines += ["", "| gold \\ pred | " + " | ".join(PRED_COLUMNS) + " |", "|---" * (len(PRED_COLUMNS) + 1) + "|"]
    for g in LABEL_ORDER:
        lines.append(f"| {g} | " + " | ".join(str(report.confusion[g][p]) for p in PRED_COLUMNS) + " |")
    return "\n".join(lines) + "\n"


def _md_comparison(cmp: RunComparison) -> str:
    lines = [
        f"## Runs on {cmp.dataset_name or 'unnamed dataset'} (reference: {cmp.reference_run_id})",
        "",
        "| Model | Accuracy | Delta |",
        "|---|---|---|",
    ]
    for row in cmp.rows:
        name = row["run_id"]
        if row["flag"] == "highest":
            name = f"**{name}**"
        elif row["flag"] == "second":
            name = f"*{name}*"
        lines.append(f"| {name} | {row['accuracy']:.2f} | {row['delta']:+.2f} |")
    return "\n".join(lines) + "\n"


def render_report(obj: EvalReport | RunComparison, format: str = "json") -> str:
    """Render a report or comparison as lossless JSON or a display table."""
    if format == "json":
        return json.dumps(obj.to_dict(), ensure_ascii=False, indent=2) + "\n"
    if format == "markdown":
        return _md_report(obj) if isinstance(obj, EvalReport) else _md_comparison(obj)
    raise ValueError(f"unknown format {format!r}")

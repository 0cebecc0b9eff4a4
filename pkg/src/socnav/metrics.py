"""Ranked-action agreement metrics and dataset-level aggregation.

Five per-sample metrics compare a predicted ranked action list against the
ground-truth acceptable set (membership ignores ground-truth order):

* pred_at_1: the top prediction is acceptable (0/1).
* pred_at_n: mean of +1 per acceptable / -1 per hallucinated prediction.
* apg: every prediction is acceptable (0/1).
* maa: position-weighted hit mass sum(w_i * hit_i) / |gt| with
  w = [6, 5, 4, 3, 2, 1]; zero whenever the prediction is longer than the
  ground truth.
* er: fraction of hallucinated predictions.

An empty (degenerate) prediction scores worst-case on everything. All ratios
are computed as one division of small integers, so each value is the
correctly rounded image of an exact rational with denominator <= 6.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

from .actions import Action, RankedActions

WEIGHTS: tuple[int, ...] = (6, 5, 4, 3, 2, 1)

METRIC_COLUMNS = ("Pred@1↑", "Pred@n↑", "APG↑", "MAA↑", "ER↓")
FPS_COLUMN = "FPS↑"


@dataclass(frozen=True)
class SampleScore:
    pred_at_1: int
    pred_at_n: float
    apg: int
    maa: float
    er: float
    degenerate: bool = False

    def as_dict(self) -> dict:
        return {
            "pred_at_1": self.pred_at_1,
            "pred_at_n": self.pred_at_n,
            "apg": self.apg,
            "maa": self.maa,
            "er": self.er,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class MetricMeans:
    pred_at_1: float
    pred_at_n: float
    apg: float
    maa: float
    er: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.pred_at_1, self.pred_at_n, self.apg, self.maa, self.er)


@dataclass(frozen=True)
class AggregateReport:
    overall: MetricMeans
    count: int
    fps: float | None = None
    by_difficulty: dict[str, tuple[MetricMeans, int]] | None = None


def _require_gt(gt: Sequence[Action]) -> None:
    if not gt:
        raise ValueError("ground-truth action set must be non-empty")


def _validate_weights(weights: Sequence[int]) -> None:
    if len(weights) != 6 or any(a <= b for a, b in zip(weights, weights[1:])):
        raise ValueError("weights must be 6 strictly decreasing values")


def pred_at_1(pred: RankedActions, gt: RankedActions) -> int:
    _require_gt(gt)
    if not pred:
        return 0
    return 1 if pred[0] in gt else 0


def pred_at_n(pred: RankedActions, gt: RankedActions) -> float:
    _require_gt(gt)
    if not pred:
        return -1.0
    hits = sum(1 for a in pred if a in gt)
    return (2 * hits - len(pred)) / len(pred)


def apg(pred: RankedActions, gt: RankedActions) -> int:
    _require_gt(gt)
    if not pred:
        return 0
    return 1 if all(a in gt for a in pred) else 0


def maa(pred: RankedActions, gt: RankedActions,
        weights: Sequence[int] = WEIGHTS) -> float:
    _require_gt(gt)
    _validate_weights(weights)
    if not pred or len(pred) > len(gt):
        return 0.0
    total = sum(w for w, a in zip(weights, pred) if a in gt)
    return total / len(gt)


def error_rate(pred: RankedActions, gt: RankedActions) -> float:
    _require_gt(gt)
    if not pred:
        return 1.0
    misses = sum(1 for a in pred if a not in gt)
    return misses / len(pred)


def score_sample(pred: RankedActions, gt: RankedActions) -> SampleScore:
    """Bundle all five metrics; an empty prediction is flagged degenerate."""
    _require_gt(gt)
    return SampleScore(
        pred_at_1=pred_at_1(pred, gt),
        pred_at_n=pred_at_n(pred, gt),
        apg=apg(pred, gt),
        maa=maa(pred, gt),
        er=error_rate(pred, gt),
        degenerate=not pred,
    )


def _means(scores: Sequence[SampleScore]) -> MetricMeans:
    n = len(scores)
    return MetricMeans(
        pred_at_1=sum(s.pred_at_1 for s in scores) / n,
        pred_at_n=sum(s.pred_at_n for s in scores) / n,
        apg=sum(s.apg for s in scores) / n,
        maa=sum(s.maa for s in scores) / n,
        er=sum(s.er for s in scores) / n,
    )


def aggregate(scores: Sequence[SampleScore],
              total_policy_seconds: float | None = None,
              difficulties: Sequence[str] | None = None) -> AggregateReport:
    """Arithmetic means over samples, throughput, optional per-level breakdown.

    total_policy_seconds is the summed wall-clock time spent inside the policy;
    fps = len(scores) / total_policy_seconds when it is provided.
    """
    if not scores:
        raise ValueError("cannot aggregate an empty score list")
    fps = None
    if total_policy_seconds is not None:
        if total_policy_seconds <= 0.0:
            raise ValueError("total_policy_seconds must be positive")
        fps = len(scores) / total_policy_seconds
    by_difficulty = None
    if difficulties is not None:
        if len(difficulties) != len(scores):
            raise ValueError("difficulties must align with scores")
        present = dict.fromkeys(difficulties)
        order = [lv for lv in ("Easy", "Medium", "Difficult") if lv in present]
        order.extend(lv for lv in present if lv not in order)
        by_difficulty = {}
        for level in order:
            subset = [s for s, d in zip(scores, difficulties) if d == level]
            by_difficulty[level] = (_means(subset), len(subset))
    return AggregateReport(
        overall=_means(scores),
        count=len(scores),
        fps=fps,
        by_difficulty=by_difficulty,
    )


# ---------------------------------------------------------------------------
# table rendering (markdown and CSV share the same row layout)


def _rows(entries: Iterable[tuple[str, AggregateReport]],
          per_difficulty: bool) -> tuple[list[str], list[list[str]]]:
    entries = list(entries)
    # per-level rows carry no throughput, so the column is dropped there
    with_fps = not per_difficulty and any(
        report.fps is not None for _, report in entries
    )
    header = ["Method"]
    if per_difficulty:
        header.append("Difficulty")
    header.extend(METRIC_COLUMNS)
    if with_fps:
        header.append(FPS_COLUMN)
    rows = []

    def fmt(means: MetricMeans, fps: float | None) -> list[str]:
        cells = [f"{v:.3f}" for v in means.as_tuple()]
        if with_fps:
            cells.append("" if fps is None else f"{fps:.3f}")
        return cells

    for label, report in entries:
        if per_difficulty:
            if not report.by_difficulty:
                raise ValueError(f"report {label!r} has no per-difficulty breakdown")
            for level, (means, _count) in report.by_difficulty.items():
                rows.append([label, level] + fmt(means, None))
        else:
            rows.append([label] + fmt(report.overall, report.fps))
    return header, rows


def render_markdown(entries: Iterable[tuple[str, AggregateReport]],
                    per_difficulty: bool = False) -> str:
    header, rows = _rows(entries, per_difficulty)
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join("---" for _ in header) + "|",
    ]
    lines.extend("| " + " | ".join(row) + " |" for row in rows)
    return "\n".join(lines) + "\n"


def render_csv(entries: Iterable[tuple[str, AggregateReport]],
               per_difficulty: bool = False) -> str:
    header, rows = _rows(entries, per_difficulty)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()

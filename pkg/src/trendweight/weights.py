"""Per-instance training weights: forecast-driven and heuristic baselines.

The forecast strategy turns next-quarter topic forecasts into a relative
trend multiplier: (topic's share of the forecasted total) divided by
(topic's share of the historical training counts), clamped into
[theta_lower, theta_upper].  Topics filtered out by fit quality, dropped
for small size, or never clustered keep weight 1.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from trendweight.corpus import NewsInstance, QuarterIndex
from trendweight.trend import FrequencySeries, TrendFit

logger = logging.getLogger(__name__)

STRATEGIES = ("forecast", "same_period", "previous_period", "combined", "uniform")
RATIO_MODES = ("share_ratio", "scaled_share")


@dataclass(frozen=True)
class ReweightConfig:
    theta_mape: float = 0.8
    theta_lower: float = 0.3
    theta_upper: float = 2.0
    strategy: str = "forecast"
    heuristic_boost: float = 2.0
    ratio_mode: str = "share_ratio"
    historical_window: str = "full"  # or "last_quarter"

    def __post_init__(self):
        if self.theta_mape <= 0:
            raise ValueError("theta_mape must be > 0")
        if not self.theta_lower <= 1.0 <= self.theta_upper:
            raise ValueError(
                f"need theta_lower <= 1 <= theta_upper, got [{self.theta_lower}, {self.theta_upper}]"
            )
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.heuristic_boost <= 1.0:
            raise ValueError("heuristic_boost must be > 1")
        if self.ratio_mode not in RATIO_MODES:
            raise ValueError(f"unknown ratio_mode {self.ratio_mode!r}")


@dataclass(frozen=True)
class WeightAssignment:
    instance_id: str
    topic_id: int | None
    raw_ratio: float | None
    weight: float


def bound(value: float, lower: float, upper: float) -> float:
    """Clamp a raw weight into [lower, upper]."""
    if lower > upper:
        raise ValueError(f"bound range is empty: lower {lower} > upper {upper}")
    return min(max(value, lower), upper)


def forecast_weights(
    fits: dict[int, TrendFit],
    series_list: list[FrequencySeries],
    membership: dict[str, int],
    config: ReweightConfig,
) -> list[WeightAssignment]:
    """Weights from forecasted topic shares relative to historical shares.

    Preserved topics are those whose fit MAPE is at most theta_mape.  If no
    topic survives, or all forecasts are zero, every instance keeps weight 1.
    """
    series_by_id = {s.topic_id: s for s in series_list}
    preserved = {
        tid: fit
        for tid, fit in fits.items()
        if fit.mape <= config.theta_mape and tid in series_by_id
    }

    topic_weight: dict[int, tuple[float, float]] = {}
    if preserved:
        forecast_total = sum(max(0.0, fit.forecast) for fit in preserved.values())
        hist = {}
        for tid in preserved:
            counts = series_by_id[tid].raw_counts
            hist[tid] = float(counts[-1] if config.historical_window == "last_quarter" else counts.sum())
        hist_total = sum(hist.values())
        if forecast_total > 0 and hist_total > 0:
            for tid, fit in preserved.items():
                fshare = max(0.0, fit.forecast) / forecast_total
                if config.ratio_mode == "scaled_share":
                    ratio = fshare * len(preserved)
                else:
                    ratio = fshare / (hist[tid] / hist_total)
                topic_weight[tid] = (ratio, bound(ratio, config.theta_lower, config.theta_upper))
    if not topic_weight:
        logger.warning(
            "no preserved topic with positive forecast (preserved=%d); falling back to uniform weights",
            len(preserved),
        )

    assignments = []
    for instance_id, topic_id in membership.items():
        if topic_id in topic_weight:
            ratio, weight = topic_weight[topic_id]
            assignments.append(WeightAssignment(instance_id, topic_id, ratio, weight))
        else:
            assignments.append(WeightAssignment(instance_id, topic_id, None, 1.0))
    return assignments


def heuristic_weights(
    instances: list[NewsInstance],
    target_quarter: QuarterIndex,
    strategy: str,
    config: ReweightConfig,
) -> list[WeightAssignment]:
    """Seasonality/recency baseline weights.

    same_period boosts instances sharing the target's quarter-of-year;
    previous_period boosts the most recent pre-target quarter present in
    the instance set; combined multiplies the two rules.
    """
    if strategy not in ("same_period", "previous_period", "combined"):
        raise ValueError(f"heuristic_weights got non-heuristic strategy {strategy!r}")
    prior = [x.ordinal for x in instances if x.ordinal < target_quarter.ordinal]
    last_quarter = max(prior) if prior else None

    assignments = []
    for inst in instances:
        w = 1.0
        if strategy in ("same_period", "combined") and inst.quarter_of_year == target_quarter.quarter_of_year:
            w *= config.heuristic_boost
        if strategy in ("previous_period", "combined") and inst.ordinal == last_quarter:
            w *= config.heuristic_boost
        assignments.append(WeightAssignment(inst.id, None, None, w))
    return assignments


def uniform_weights(instances: list[NewsInstance]) -> list[WeightAssignment]:
    """The plain-training baseline: every instance weighted 1."""
    return [WeightAssignment(inst.id, None, None, 1.0) for inst in instances]


def write_weights(path: str | Path, assignments: list[WeightAssignment]) -> None:
    with Path(path).open("w", encoding="utf-8") as f:
        for a in assignments:
            rec = {
                "instance_id": a.instance_id,
                "topic_id": a.topic_id,
                "raw_ratio": a.raw_ratio,
                "weight": a.weight,
            }
            f.write(json.dumps(rec, sort_keys=True) + "\n")


def read_weights(path: str | Path) -> list[WeightAssignment]:
    assignments = []
    with Path(path).open("r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            assignments.append(
                WeightAssignment(
                    instance_id=rec["instance_id"],
                    topic_id=rec["topic_id"],
                    raw_ratio=rec["raw_ratio"],
                    weight=float(rec["weight"]),
                )
            )
    return assignments

"""Rolling-quarter experiment driver and evaluation report assembly.

For a target quarter Q the pipeline balances every quarter, clusters the
pre-target pool (quarters 1..Q-1), fits per-topic trends on that window,
forecasts quarter Q, weights the classifier's training instances
(quarters 1..Q-2) per strategy, trains with early stopping on Q-1, and
evaluates on Q.  A guard on every training batch asserts that no
validation- or test-quarter instance is ever trained on.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from trendweight.classifier import TrainConfig, predict_proba, train
from trendweight.clustering import (
    ClusteringConfig,
    TopicCluster,
    assign_to_existing,
    single_pass_cluster,
)
from trendweight.corpus import Corpus, NewsInstance, make_rolling_split, undersample_balanced
from trendweight.metrics import compute_metrics
from trendweight.trend import FrequencySeries, TrendConfig, TrendFit, build_frequency_series, fit_all_trends
from trendweight.weights import (
    ReweightConfig,
    WeightAssignment,
    forecast_weights,
    heuristic_weights,
    uniform_weights,
)

logger = logging.getLogger(__name__)

TRAIN_STAGE_TAG = 211  # seed-derivation tag for classifier training

METRIC_KEYS = ("accuracy", "macro_f1", "f1_fake", "f1_real")


@dataclass
class PreparedCell:
    """Everything shared by all strategies for one (target, seed) pair."""

    target: int
    seed: int
    target_quarter_of_year: int
    balanced: dict[int, list[NewsInstance]]
    train_instances: list[NewsInstance]
    val_instances: list[NewsInstance]
    test_instances: list[NewsInstance]
    clusters: list[TopicCluster]
    series: list[FrequencySeries]
    fits: dict[int, TrendFit]
    membership: dict[str, int]


@dataclass
class CellResult:
    strategy: str
    target: int
    seed: int
    n_train: int = 0
    n_val: int = 0
    n_test: int = 0
    metrics: dict[str, float] | None = None
    existing_metrics: dict[str, float] | None = None
    new_metrics: dict[str, float] | None = None
    error: str | None = None


@dataclass
class EvalReport:
    cells: list[CellResult] = field(default_factory=list)

    def mean_metric(self, strategy: str, metric: str = "macro_f1", target: int | None = None) -> float:
        vals = [
            c.metrics[metric]
            for c in self.cells
            if c.strategy == strategy and c.metrics is not None
            and (target is None or c.target == target)
        ]
        if not vals:
            raise ValueError(f"no successful cells for strategy {strategy!r}, target {target}")
        return float(np.mean(vals))

    def summary_rows(self) -> list[dict]:
        """Per-(strategy, target) seed means plus a cross-target average block."""
        strategies = sorted({c.strategy for c in self.cells})
        targets = sorted({c.target for c in self.cells})
        rows = []
        for strategy in strategies:
            per_target = []
            for target in targets:
                cells = [
                    c for c in self.cells
                    if c.strategy == strategy and c.target == target and c.metrics is not None
                ]
                if not cells:
                    continue
                row = {"strategy": strategy, "target": target, "n_cells": len(cells)}
                for key in METRIC_KEYS:
                    row[key] = float(np.mean([c.metrics[key] for c in cells]))
                rows.append(row)
                per_target.append(row)
            if per_target:
                avg = {"strategy": strategy, "target": "average", "n_cells": len(per_target)}
                for key in METRIC_KEYS:
                    avg[key] = float(np.mean([r[key] for r in per_target]))
                rows.append(avg)
        return rows

    def to_csv(self, path: str | Path) -> None:
        header = (
            ["strategy", "target", "seed", "n_train", "n_val", "n_test"]
            + list(METRIC_KEYS)
            + [f"existing_{k}" for k in METRIC_KEYS]
            + [f"new_{k}" for k in METRIC_KEYS]
            + ["error"]
        )

        def fmt(metrics: dict[str, float] | None) -> list[str]:
            if metrics is None:
                return [""] * len(METRIC_KEYS)
            return [repr(metrics[k]) for k in METRIC_KEYS]

        lines = [",".join(header)]
        for c in self.cells:
            row = [c.strategy, str(c.target), str(c.seed), str(c.n_train), str(c.n_val), str(c.n_test)]
            row += fmt(c.metrics) + fmt(c.existing_metrics) + fmt(c.new_metrics)
            row.append(c.error or "")
            lines.append(",".join(row))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    def summary_csv(self, path: str | Path) -> None:
        lines = [",".join(["strategy", "target", "n_cells"] + list(METRIC_KEYS))]
        for row in self.summary_rows():
            lines.append(
                ",".join(
                    [row["strategy"], str(row["target"]), str(row["n_cells"])]
                    + [repr(row[k]) for k in METRIC_KEYS]
                )
            )
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    def format_table(self) -> str:
        headers = ["strategy", "target", "cells"] + [k for k in METRIC_KEYS]
        rows = [
            [r["strategy"], str(r["target"]), str(r["n_cells"])]
            + [f"{r[k]:.4f}" for k in METRIC_KEYS]
            for r in self.summary_rows()
        ]
        widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h) for i, h in enumerate(headers)]
        def line(cells):
            return "  ".join(c.ljust(w) for c, w in zip(cells, widths))
        out = [line(headers), line(["-" * w for w in widths])]
        out += [line(row) for row in rows]
        return "\n".join(out)


def training_seed(root_seed: int, target: int) -> int:
    """Classifier seed for one cell; shared across strategies so weight
    schemes are compared under identical initialization and shuffling."""
    return int(np.random.SeedSequence([TRAIN_STAGE_TAG, int(root_seed), int(target)]).generate_state(1)[0])


def prepare_cell(
    corpus: Corpus,
    target: int,
    seed: int,
    clustering_config: ClusteringConfig,
    trend_config: TrendConfig,
) -> PreparedCell:
    """Balance, cluster, and fit trends once per (target, seed)."""
    split = make_rolling_split(corpus, target)
    balanced = {q: undersample_balanced(corpus, q, seed) for q in range(1, target + 1)}

    pool: list[NewsInstance] = []
    for q in range(1, target):
        pool.extend(balanced[q])
    pool.sort(key=NewsInstance.sort_key)

    clusters = single_pass_cluster(pool, clustering_config)
    series = build_frequency_series(clusters, Q_train=target - 1, theta_count=trend_config.theta_count)
    target_qoy = corpus.quarter_index(target).quarter_of_year
    fits, _ = fit_all_trends(series, trend_config, target_qoy)
    membership = {iid: c.topic_id for c in clusters for iid in c.member_ids}

    train_instances: list[NewsInstance] = []
    for q in split.train_quarters:
        train_instances.extend(balanced[q])
    train_instances.sort(key=NewsInstance.sort_key)

    return PreparedCell(
        target=target,
        seed=seed,
        target_quarter_of_year=target_qoy,
        balanced=balanced,
        train_instances=train_instances,
        val_instances=balanced[split.val_quarter],
        test_instances=balanced[split.test_quarter],
        clusters=clusters,
        series=series,
        fits=fits,
        membership=membership,
    )


def strategy_weights(
    cell: PreparedCell, corpus: Corpus, strategy: str, reweight_config: ReweightConfig
) -> list[WeightAssignment]:
    """Weights for the classifier's training instances under one strategy."""
    if strategy == "uniform":
        return uniform_weights(cell.train_instances)
    if strategy == "forecast":
        assignments = forecast_weights(cell.fits, cell.series, cell.membership, reweight_config)
        by_id = {a.instance_id: a for a in assignments}
        return [
            by_id.get(inst.id, WeightAssignment(inst.id, None, None, 1.0))
            for inst in cell.train_instances
        ]
    return heuristic_weights(
        cell.train_instances, corpus.quarter_index(cell.target), strategy, reweight_config
    )


def to_arrays(instances: list[NewsInstance], assignments: list[WeightAssignment] | None = None):
    X = np.stack([inst.embedding for inst in instances])
    y = np.array([inst.label for inst in instances], dtype=np.int64)
    if assignments is None:
        return X, y, None
    by_id = {a.instance_id: a.weight for a in assignments}
    missing = [inst.id for inst in instances if inst.id not in by_id]
    if missing:
        raise ValueError(f"{len(missing)} training instances without a weight, e.g. {missing[0]!r}")
    w = np.array([by_id[inst.id] for inst in instances], dtype=np.float64)
    return X, y, w


def run_cell(
    cell: PreparedCell,
    corpus: Corpus,
    strategy: str,
    reweight_config: ReweightConfig,
    train_config: TrainConfig,
    clustering_config: ClusteringConfig,
    with_breakdown: bool = True,
) -> CellResult:
    """Train and evaluate one strategy on a prepared cell."""
    result = CellResult(
        strategy=strategy,
        target=cell.target,
        seed=cell.seed,
        n_train=len(cell.train_instances),
        n_val=len(cell.val_instances),
        n_test=len(cell.test_instances),
    )
    assignments = strategy_weights(cell, corpus, strategy, reweight_config)
    X_train, y_train, w = to_arrays(cell.train_instances, assignments)
    X_val, y_val, _ = to_arrays(cell.val_instances)
    X_test, y_test, _ = to_arrays(cell.test_instances)

    max_train_quarter = cell.target - 2
    ordinals = np.array([inst.ordinal for inst in cell.train_instances], dtype=np.int64)

    def batch_guard(idx):
        if np.any(ordinals[idx] > max_train_quarter):
            bad = int(ordinals[idx].max())
            raise AssertionError(
                f"temporal hygiene violated: batch contains quarter {bad} > {max_train_quarter}"
            )

    cfg = dataclasses.replace(train_config, seed=training_seed(cell.seed, cell.target))
    fit = train(X_train, y_train, X_val, y_val, cfg, weights=w, batch_guard=batch_guard)

    test_pred = (predict_proba(fit.params, X_test) >= 0.5).astype(np.int64)
    result.metrics = compute_metrics(y_test, test_pred)

    if with_breakdown and cell.clusters:
        existing, new = topic_breakdown(
            cell.test_instances, cell.clusters, test_pred, y_test, clustering_config
        )
        result.existing_metrics = existing
        result.new_metrics = new
    return result


def topic_breakdown(
    test_instances: list[NewsInstance],
    trained_clusters: list[TopicCluster],
    predictions,
    labels,
    config: ClusteringConfig,
) -> tuple[dict[str, float] | None, dict[str, float] | None]:
    """Metrics split by whether each test item lands in a training-time topic.

    Returns (existing-topic metrics, new-topic metrics); a side with no
    instances is reported as None.
    """
    predictions = np.asarray(predictions, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if len(predictions) != len(test_instances) or len(labels) != len(test_instances):
        raise ValueError("predictions and labels must align with test_instances")
    tags = assign_to_existing(test_instances, trained_clusters, config)
    existing_ids = {t.instance_id for t in tags if t.existing}

    idx_existing = [i for i, inst in enumerate(test_instances) if inst.id in existing_ids]
    idx_new = [i for i, inst in enumerate(test_instances) if inst.id not in existing_ids]

    def subset(idx):
        if not idx:
            return None
        return compute_metrics(labels[idx], predictions[idx])

    return subset(idx_existing), subset(idx_new)


def run_rolling_experiment(
    corpus: Corpus,
    strategies: list[str],
    target_quarters: list[int],
    seeds: list[int],
    clustering_config: ClusteringConfig | None = None,
    trend_config: TrendConfig | None = None,
    reweight_config: ReweightConfig | None = None,
    train_config: TrainConfig | None = None,
    with_breakdown: bool = True,
) -> EvalReport:
    """Full grid of (strategy, target quarter, seed) cells.

    Preparation (balancing, clustering, trend fitting) is shared across
    strategies within a cell so strategies differ only in their weights.
    A failed cell is recorded with its error instead of being dropped.
    """
    clustering_config = clustering_config or ClusteringConfig()
    trend_config = trend_config or TrendConfig()
    reweight_config = reweight_config or ReweightConfig()
    train_config = train_config or TrainConfig()

    report = EvalReport()
    for target in target_quarters:
        for seed in seeds:
            try:
                cell = prepare_cell(corpus, target, seed, clustering_config, trend_config)
            except Exception as e:  # noqa: BLE001 - cell failures are data, not crashes
                logger.error("cell preparation failed (target=%d seed=%d): %s", target, seed, e)
                for strategy in strategies:
                    report.cells.append(
                        CellResult(strategy=strategy, target=target, seed=seed, error=str(e))
                    )
                continue
            for strategy in strategies:
                try:
                    report.cells.append(
                        run_cell(
                            cell, corpus, strategy, reweight_config, train_config,
                            clustering_config, with_breakdown,
                        )
                    )
                except Exception as e:  # noqa: BLE001
                    logger.error(
                        "cell failed (strategy=%s target=%d seed=%d): %s", strategy, target, seed, e
                    )
                    report.cells.append(
                        CellResult(strategy=strategy, target=target, seed=seed, error=str(e))
                    )
    return report

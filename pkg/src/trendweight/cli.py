"""Command-line entry point.

Subcommands mirror the pipeline stages: synth, embed, cluster, trends,
reweight, train, eval, and the end-to-end rolling experiment.  Every
subcommand is re-runnable: identical inputs, config, and seed produce
byte-identical output files.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from trendweight import classifier
from trendweight.clustering import single_pass_cluster, write_clusters
from trendweight.config import ConfigMap
from trendweight.corpus import NewsInstance, load_corpus, save_corpus, undersample_balanced
from trendweight.embedding import hash_embed
from trendweight.metrics import compute_metrics
from trendweight.pipeline import (
    prepare_cell,
    run_rolling_experiment,
    strategy_weights,
    topic_breakdown,
    to_arrays,
    training_seed,
)
from trendweight.synthetic import EMBED_STAGE_TAG, generate_synthetic
from trendweight.trend import build_frequency_series, fit_all_trends, write_trend_report
from trendweight.weights import read_weights, write_weights

logger = logging.getLogger(__name__)

METRIC_KEYS = ("accuracy", "macro_f1", "f1_fake", "f1_real")


def _config(args) -> ConfigMap:
    cfg = ConfigMap.load(getattr(args, "config", None))
    for flag, key in (
        ("theta_sim", "clustering.theta_sim"),
        ("theta_count", "trend.theta_count"),
        ("theta_mape", "reweight.theta_mape"),
        ("theta_lower", "reweight.theta_lower"),
        ("theta_upper", "reweight.theta_upper"),
        ("ratio_mode", "reweight.ratio_mode"),
        ("strategy", "reweight.strategy"),
        ("dim", "corpus.dim"),
    ):
        if hasattr(args, flag):
            cfg.override(key, getattr(args, flag))
    return cfg


def _load(args, cfg: ConfigMap):
    return load_corpus(args.input, expected_dim=cfg.get_int("corpus.dim", None))


def _pretarget_pool(corpus, target: int, seed: int) -> list[NewsInstance]:
    pool: list[NewsInstance] = []
    for q in range(1, target):
        pool.extend(undersample_balanced(corpus, q, seed))
    pool.sort(key=NewsInstance.sort_key)
    return pool


def cmd_synth(args) -> int:
    cfg = _config(args)
    spec = cfg.synth_spec(args.seed)
    corpus = generate_synthetic(spec)
    save_corpus(args.output, corpus.instances, dim=spec.dim)
    print(f"wrote {len(corpus.instances)} instances over {corpus.n_quarters} quarters to {args.output}")
    return 0


def cmd_embed(args) -> int:
    cfg = _config(args)
    corpus = _load(args, cfg)
    dim = args.dim or corpus.dim or 256
    embed_seed = int(np.random.SeedSequence([EMBED_STAGE_TAG, args.seed]).generate_state(1)[0])
    skipped = 0
    for inst in corpus.instances:
        if inst.embedding is not None:
            continue
        try:
            inst.embedding = hash_embed(inst.text or "", dim, seed=embed_seed)
        except ValueError as e:
            logger.warning("skipping %s: %s", inst.id, e)
            skipped += 1
    kept = [x for x in corpus.instances if x.embedding is not None]
    save_corpus(args.output, kept, dim=dim)
    print(f"embedded {len(kept)} instances (skipped {skipped}) to {args.output}")
    return 0


def cmd_cluster(args) -> int:
    cfg = _config(args)
    corpus = _load(args, cfg)
    if args.target is not None:
        pool = _pretarget_pool(corpus, args.target, args.seed)
    else:
        pool = corpus.instances
    clusters = single_pass_cluster(pool, cfg.clustering_config())
    write_clusters(args.output, clusters)
    print(f"{len(clusters)} clusters over {len(pool)} instances written to {args.output}")
    return 0


def cmd_trends(args) -> int:
    cfg = _config(args)
    corpus = _load(args, cfg)
    trend_cfg = cfg.trend_config()
    pool = _pretarget_pool(corpus, args.target, args.seed)
    clusters = single_pass_cluster(pool, cfg.clustering_config())
    series = build_frequency_series(clusters, args.target - 1, trend_cfg.theta_count)
    target_qoy = corpus.quarter_index(args.target).quarter_of_year
    fits, excluded = fit_all_trends(series, trend_cfg, target_qoy)
    write_trend_report(args.output, series, fits)
    print(f"{len(fits)} topic forecasts ({len(excluded)} excluded) written to {args.output}")
    return 0


def cmd_reweight(args) -> int:
    cfg = _config(args)
    corpus = _load(args, cfg)
    reweight_cfg = cfg.reweight_config()
    cell = prepare_cell(corpus, args.target, args.seed, cfg.clustering_config(), cfg.trend_config())
    assignments = strategy_weights(cell, corpus, reweight_cfg.strategy, reweight_cfg)
    write_weights(args.output, assignments)
    print(f"{len(assignments)} weights ({reweight_cfg.strategy}) written to {args.output}")
    return 0


def cmd_train(args) -> int:
    cfg = _config(args)
    corpus = _load(args, cfg)
    target = args.target
    train_instances: list[NewsInstance] = []
    for q in range(1, target - 1):
        train_instances.extend(undersample_balanced(corpus, q, args.seed))
    train_instances.sort(key=NewsInstance.sort_key)
    val_instances = undersample_balanced(corpus, target - 1, args.seed)

    assignments = read_weights(args.weights) if args.weights else None
    X_train, y_train, w = to_arrays(train_instances, assignments)
    X_val, y_val, _ = to_arrays(val_instances)

    ordinals = np.array([x.ordinal for x in train_instances], dtype=np.int64)

    def batch_guard(idx):
        if np.any(ordinals[idx] > target - 2):
            raise AssertionError("temporal hygiene violated in training batches")

    train_cfg = cfg.train_config(seed=training_seed(args.seed, target))
    result = classifier.train(X_train, y_train, X_val, y_val, train_cfg, weights=w, batch_guard=batch_guard)
    classifier.save_checkpoint(args.output, result.params, train_cfg)
    if args.log:
        classifier.write_training_log(args.log, result.log)
    print(
        f"model (best epoch {result.best_epoch}, val macro-F1 {result.best_val_macro_f1:.4f}) "
        f"written to {args.output}"
    )
    return 0


def cmd_eval(args) -> int:
    cfg = _config(args)
    corpus = _load(args, cfg)
    params, _ = classifier.load_checkpoint(args.model)
    test_instances = undersample_balanced(corpus, args.target, args.seed)
    X_test, y_test, _ = to_arrays(test_instances)
    pred = (classifier.predict_proba(params, X_test) >= 0.5).astype(np.int64)
    metrics = compute_metrics(y_test, pred)

    header = list(METRIC_KEYS)
    row = [repr(metrics[k]) for k in METRIC_KEYS]
    if args.breakdown:
        pool = _pretarget_pool(corpus, args.target, args.seed)
        clusters = single_pass_cluster(pool, cfg.clustering_config())
        existing, new = topic_breakdown(test_instances, clusters, pred, y_test, cfg.clustering_config())
        for name, sub in (("existing", existing), ("new", new)):
            for k in METRIC_KEYS:
                header.append(f"{name}_{k}")
                row.append("" if sub is None else repr(sub[k]))
    Path(args.output).write_text(",".join(header) + "\n" + ",".join(row) + "\n", encoding="utf-8")
    print(f"test macro-F1 {metrics['macro_f1']:.4f} on quarter {args.target} -> {args.output}")
    return 0


def cmd_rolling(args) -> int:
    cfg = _config(args)
    corpus = _load(args, cfg)
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    targets = [int(t) for t in args.targets.split(",")]
    seeds = [int(s) for s in args.seeds.split(",")]
    report = run_rolling_experiment(
        corpus,
        strategies,
        targets,
        seeds,
        clustering_config=cfg.clustering_config(),
        trend_config=cfg.trend_config(),
        reweight_config=cfg.reweight_config(),
        train_config=cfg.train_config(seed=0),
    )
    report.to_csv(args.output)
    if args.summary:
        report.summary_csv(args.summary)
    print(report.format_table())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trendweight",
        description="Topic-trend forecasting and instance reweighting pipeline",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--seed", type=int, default=0, help="root seed for this command")
        return p

    p = add("synth", cmd_synth, "generate a synthetic planted-pattern corpus")
    p.add_argument("--out", dest="output", required=True)

    p = add("embed", cmd_embed, "hash-embed records that lack embedding vectors")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--dim", type=int, help="embedding dimension")

    p = add("cluster", cmd_cluster, "single-pass topic clustering")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--target", type=int, help="cluster the balanced pool before this quarter")
    p.add_argument("--theta-sim", type=float, dest="theta_sim")

    p = add("trends", cmd_trends, "fit per-topic trends and forecast the target quarter")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--theta-sim", type=float, dest="theta_sim")
    p.add_argument("--theta-count", type=int, dest="theta_count")

    p = add("reweight", cmd_reweight, "compute per-instance training weights")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--strategy", choices=["forecast", "same_period", "previous_period", "combined", "uniform"])
    p.add_argument("--theta-sim", type=float, dest="theta_sim")
    p.add_argument("--theta-count", type=int, dest="theta_count")
    p.add_argument("--theta-mape", type=float, dest="theta_mape")
    p.add_argument("--theta-lower", type=float, dest="theta_lower")
    p.add_argument("--theta-upper", type=float, dest="theta_upper")
    p.add_argument("--ratio-mode", choices=["share_ratio", "scaled_share"], dest="ratio_mode")

    p = add("train", cmd_train, "train the weighted classifier for a target quarter")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--weights", help="weight file from the reweight step")
    p.add_argument("--log", help="training log CSV path")

    p = add("eval", cmd_eval, "evaluate a checkpoint on the target quarter")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--breakdown", action="store_true", help="split metrics by existing/new topics")
    p.add_argument("--theta-sim", type=float, dest="theta_sim")

    p = add("rolling", cmd_rolling, "full rolling experiment over strategies and quarters")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--strategies", default="uniform,forecast")
    p.add_argument("--targets", required=True, help="comma-separated target quarter ordinals")
    p.add_argument("--seeds", default="0")
    p.add_argument("--summary", help="also write the per-strategy summary CSV here")
    p.add_argument("--theta-sim", type=float, dest="theta_sim")
    p.add_argument("--theta-count", type=int, dest="theta_count")
    p.add_argument("--theta-mape", type=float, dest="theta_mape")
    p.add_argument("--theta-lower", type=float, dest="theta_lower")
    p.add_argument("--theta-upper", type=float, dest="theta_upper")
    p.add_argument("--ratio-mode", choices=["share_ratio", "scaled_share"], dest="ratio_mode")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

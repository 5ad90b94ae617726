"""Topic-trend forecasting and instance reweighting for quarterly news corpora.

The package covers the full loop: load a timestamped JSONL corpus, group
items into topics by single-pass clustering over embeddings, fit a
piecewise-linear trend plus quarterly-seasonality model to each topic's
frequency series, turn next-quarter forecasts into per-instance training
weights, train a weighted binary classifier, and evaluate everything under
a rolling train/validate/test protocol.
"""

from trendweight.corpus import (
    Corpus,
    NewsInstance,
    QuarterIndex,
    SplitSpec,
    load_corpus,
    make_rolling_split,
    save_corpus,
    undersample_balanced,
)
from trendweight.embedding import cosine_similarity, hash_embed
from trendweight.clustering import (
    ClusteringConfig,
    TopicCluster,
    assign_to_existing,
    single_pass_cluster,
)
from trendweight.trend import (
    FrequencySeries,
    TrendConfig,
    TrendFit,
    build_frequency_series,
    compute_mape,
    fit_all_trends,
    fit_trend,
)
from trendweight.weights import (
    ReweightConfig,
    WeightAssignment,
    bound,
    forecast_weights,
    heuristic_weights,
    uniform_weights,
)
from trendweight.classifier import (
    ClassifierParams,
    TrainConfig,
    predict,
    train,
    weighted_loss,
)
from trendweight.metrics import compute_metrics
from trendweight.synthetic import SynthSpec, TopicSpec, generate_synthetic
from trendweight.pipeline import EvalReport, run_rolling_experiment, topic_breakdown

__version__ = "0.1.0"

__all__ = [
    "ClassifierParams",
    "ClusteringConfig",
    "Corpus",
    "EvalReport",
    "FrequencySeries",
    "NewsInstance",
    "QuarterIndex",
    "ReweightConfig",
    "SplitSpec",
    "SynthSpec",
    "TopicCluster",
    "TopicSpec",
    "TrainConfig",
    "TrendConfig",
    "TrendFit",
    "WeightAssignment",
    "assign_to_existing",
    "bound",
    "build_frequency_series",
    "compute_mape",
    "compute_metrics",
    "cosine_similarity",
    "fit_all_trends",
    "fit_trend",
    "forecast_weights",
    "generate_synthetic",
    "hash_embed",
    "heuristic_weights",
    "load_corpus",
    "make_rolling_split",
    "predict",
    "run_rolling_experiment",
    "save_corpus",
    "single_pass_cluster",
    "topic_breakdown",
    "train",
    "undersample_balanced",
    "uniform_weights",
    "weighted_loss",
]

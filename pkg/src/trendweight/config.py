"""Flat key-value configuration shared by all CLI subcommands.

Format: one ``section.key = value`` pair per line, ``#`` comments, blank
lines ignored.  CLI flags override config values, which override the
built-in defaults.

Randomness policy: every stage derives its generator from the single root
seed through ``numpy.random.SeedSequence([STAGE_TAG, root_seed, ...])``.
Stage tags: corpus generation 7, hash embedding 11, per-quarter
undersampling 101, classifier training 211.  Re-running any command with
the same config and seed therefore reproduces its outputs byte for byte.
"""

from __future__ import annotations

from pathlib import Path

from trendweight.classifier import TrainConfig
from trendweight.clustering import ClusteringConfig
from trendweight.trend import TrendConfig
from trendweight.synthetic import SynthSpec, TopicSpec, default_topics
from trendweight.weights import ReweightConfig


def parse_config_file(path: str | Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


class ConfigMap:
    """Config values plus CLI overrides, with typed access."""

    def __init__(self, values: dict[str, str] | None = None):
        self.values = dict(values or {})

    @classmethod
    def load(cls, path: str | Path | None) -> "ConfigMap":
        return cls(parse_config_file(path) if path else {})

    def override(self, key: str, value) -> None:
        if value is not None:
            self.values[key] = str(value)

    def get_str(self, key: str, default: str) -> str:
        return self.values.get(key, default)

    def get_int(self, key: str, default: int | None) -> int | None:
        raw = self.values.get(key)
        return default if raw is None else int(raw)

    def get_float(self, key: str, default: float) -> float:
        raw = self.values.get(key)
        return default if raw is None else float(raw)

    def clustering_config(self) -> ClusteringConfig:
        return ClusteringConfig(theta_sim=self.get_float("clustering.theta_sim", 0.65))

    def trend_config(self) -> TrendConfig:
        return TrendConfig(
            n_changepoints=self.get_int("trend.n_changepoints", None),
            ridge_lambda_delta=self.get_float("trend.ridge_lambda_delta", 0.5),
            ridge_lambda_beta=self.get_float("trend.ridge_lambda_beta", 0.1),
            theta_count=self.get_int("trend.theta_count", 30),
        )

    def reweight_config(self) -> ReweightConfig:
        return ReweightConfig(
            theta_mape=self.get_float("reweight.theta_mape", 0.8),
            theta_lower=self.get_float("reweight.theta_lower", 0.3),
            theta_upper=self.get_float("reweight.theta_upper", 2.0),
            strategy=self.get_str("reweight.strategy", "forecast"),
            heuristic_boost=self.get_float("reweight.heuristic_boost", 2.0),
            ratio_mode=self.get_str("reweight.ratio_mode", "share_ratio"),
            historical_window=self.get_str("reweight.historical_window", "full"),
        )

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.get_float("train.learning_rate", 1e-3),
            batch_size=self.get_int("train.batch_size", 64),
            max_epochs=self.get_int("train.max_epochs", 100),
            patience=self.get_int("train.patience", 5),
            hidden=self.get_int("train.hidden", 128),
            seed=seed,
        )

    def synth_spec(self, seed: int) -> SynthSpec:
        topics = self._synth_topics() or default_topics()
        return SynthSpec(
            topics=topics,
            n_quarters=self.get_int("synth.n_quarters", 20),
            start_year=self.get_int("synth.start_year", 2016),
            start_quarter=self.get_int("synth.start_quarter", 1),
            tokens_per_text=self.get_int("synth.tokens_per_text", 12),
            shared_signal_strength=self.get_float("synth.shared_signal_strength", 0.9),
            noise_level=self.get_float("synth.noise_level", 0.0),
            dim=self.get_int("synth.dim", 256),
            seed=seed,
        )

    def _synth_topics(self) -> tuple[TopicSpec, ...]:
        indices = sorted(
            {
                int(key.split(".")[2])
                for key in self.values
                if key.startswith("synth.topics.")
            }
        )
        topics = []
        for i in indices:
            prefix = f"synth.topics.{i}."
            topics.append(
                TopicSpec(
                    pattern=self.get_str(prefix + "pattern", "stationary"),
                    base_rate=self.get_float(prefix + "base_rate", 10.0),
                    amplitude=self.get_float(prefix + "amplitude", 0.0),
                    label_signal_strength=self.get_float(prefix + "label_signal_strength", 0.75),
                    peak_quarter=self.get_int(prefix + "peak_quarter", 2),
                    onset_quarter=self.get_int(prefix + "onset_quarter", 1),
                    vocab_size=self.get_int(prefix + "vocab_size", 8),
                )
            )
        return tuple(topics)

"""Synthetic quarterly corpora with planted topic patterns and label cues.

Each topic follows one of four per-quarter intensity patterns (decrease,
periodic, stationary, emergent) over a disjoint token vocabulary.  Labels
are signalled two ways: by a topic-specific cue-token pair and by a cue
pair shared across all topics whose meaning flips with the topic's
polarity.  Because polarities alternate across topics, the shared cue is
only learnable per topic, so how well a classifier does on a quarter
depends on which topics dominated its training emphasis.  That is exactly
the mechanism the reweighting strategies compete on.
"""

from __future__ import annotations

import datetime
from dataclasses import dataclass

import numpy as np

from trendweight.corpus import Corpus, NewsInstance, build_corpus, quarter_of_date
from trendweight.embedding import hash_embed

SYNTH_STAGE_TAG = 7  # seed-derivation tag for corpus generation
EMBED_STAGE_TAG = 11  # seed-derivation tag for the hashing embedder

PATTERNS = ("decrease", "periodic", "stationary", "emergent")

SHARED_CUES = ("alphacue", "omegacue")


@dataclass(frozen=True)
class TopicSpec:
    pattern: str
    base_rate: float
    amplitude: float = 0.0
    label_signal_strength: float = 0.75
    peak_quarter: int = 2  # periodic: quarter-of-year with the bump
    onset_quarter: int = 1  # emergent: first quarter ordinal with any items
    vocab_size: int = 8
    polarity: int | None = None  # None -> alternates with topic position

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise ValueError(f"unknown pattern {self.pattern!r}; expected one of {PATTERNS}")
        if not 0.5 <= self.label_signal_strength <= 1.0:
            raise ValueError("label_signal_strength must be in [0.5, 1.0]")
        if not 1 <= self.peak_quarter <= 4:
            raise ValueError("peak_quarter must be 1..4")


@dataclass(frozen=True)
class SynthSpec:
    topics: tuple[TopicSpec, ...]
    n_quarters: int = 20
    start_year: int = 2016
    start_quarter: int = 1
    tokens_per_text: int = 12
    shared_signal_strength: float = 0.9
    noise_level: float = 0.0
    dim: int = 256
    seed: int = 0

    def __post_init__(self):
        if self.n_quarters < 1:
            raise ValueError("n_quarters must be >= 1")
        if not self.topics:
            raise ValueError("spec needs at least one topic")
        if self.tokens_per_text < 3:
            raise ValueError("tokens_per_text must leave room for the two cue tokens")
        for t, topic in enumerate(self.topics):
            for q in range(1, self.n_quarters + 1):
                if intensity(topic, q, self.quarter_of_year(q)) < 0:
                    raise ValueError(
                        f"topic {t} ({topic.pattern}) has negative intensity at quarter {q}"
                    )

    def quarter_of_year(self, ordinal: int) -> int:
        return (self.start_quarter - 1 + ordinal - 1) % 4 + 1

    def quarter_start(self, ordinal: int) -> datetime.date:
        total = (self.start_quarter - 1) + (ordinal - 1)
        year = self.start_year + total // 4
        month = (total % 4) * 3 + 1
        return datetime.date(year, month, 1)


def intensity(topic: TopicSpec, ordinal: int, quarter_of_year: int) -> float:
    """Expected instance count for one topic in one quarter."""
    if topic.pattern == "decrease":
        return topic.base_rate - topic.amplitude * (ordinal - 1)
    if topic.pattern == "periodic":
        bump = topic.amplitude if quarter_of_year == topic.peak_quarter else 0.0
        return topic.base_rate + bump
    if topic.pattern == "stationary":
        return topic.base_rate
    # emergent
    if ordinal < topic.onset_quarter:
        return 0.0
    return topic.base_rate + topic.amplitude * (ordinal - topic.onset_quarter)


def _topic_vocab(index: int, topic: TopicSpec) -> list[str]:
    return [f"t{index}w{j}" for j in range(topic.vocab_size)]


def _topic_cues(index: int) -> tuple[str, str]:
    return f"t{index}cuepos", f"t{index}cueneg"


def _draw_count(rng: np.random.Generator, mean: float, noise_level: float) -> int:
    if noise_level == 0.0:
        return int(round(mean))
    jitter = noise_level * np.sqrt(max(mean, 0.0)) * rng.standard_normal()
    return max(0, int(round(mean + jitter)))


def generate_synthetic(spec: SynthSpec) -> Corpus:
    """Generate the planted corpus; deterministic for a fixed spec."""
    rng = np.random.default_rng(np.random.SeedSequence([SYNTH_STAGE_TAG, spec.seed]))
    embed_seed = int(
        np.random.SeedSequence([EMBED_STAGE_TAG, spec.seed]).generate_state(1)[0]
    )

    instances: list[NewsInstance] = []
    for t, topic in enumerate(spec.topics):
        vocab = _topic_vocab(t, topic)
        cue_pos, cue_neg = _topic_cues(t)
        polarity = topic.polarity if topic.polarity is not None else (1 if t % 2 == 0 else -1)
        for q in range(1, spec.n_quarters + 1):
            qoy = spec.quarter_of_year(q)
            count = _draw_count(rng, intensity(topic, q, qoy), spec.noise_level)
            if count == 0:
                continue
            start = spec.quarter_start(q)
            # exact half fake / half real per topic-quarter, odd extra alternating
            n_fake = count // 2 + (1 if count % 2 and (q + t) % 2 == 0 else 0)
            for i in range(count):
                label = 1 if i < n_fake else 0
                day = int(rng.integers(0, 88))
                background = rng.choice(vocab, size=spec.tokens_per_text - 2)
                topic_cue = _pick_cue(rng, label, 1, cue_pos, cue_neg, topic.label_signal_strength)
                shared_cue = _pick_cue(
                    rng, label, polarity, SHARED_CUES[0], SHARED_CUES[1], spec.shared_signal_strength
                )
                text = " ".join([*background, topic_cue, shared_cue])
                timestamp = start + datetime.timedelta(days=day)
                year, tqoy = quarter_of_date(timestamp)
                instances.append(
                    NewsInstance(
                        id=f"t{t}q{q:02d}i{i:04d}",
                        text=text,
                        embedding=hash_embed(text, spec.dim, seed=embed_seed),
                        label=label,
                        timestamp=timestamp,
                        year=year,
                        quarter_of_year=tqoy,
                    )
                )
    return build_corpus(instances, spec.dim)


def _pick_cue(
    rng: np.random.Generator, label: int, polarity: int, pos: str, neg: str, strength: float
) -> str:
    """Cue token agreeing with the label at the given strength.

    With polarity +1 the `pos` cue indicates fake; with -1 it indicates real.
    """
    indicates_fake = pos if polarity == 1 else neg
    indicates_real = neg if polarity == 1 else pos
    agree = rng.random() < strength
    if label == 1:
        return indicates_fake if agree else indicates_real
    return indicates_real if agree else indicates_fake


def default_topics() -> tuple[TopicSpec, ...]:
    """Four-topic benchmark layout: one of each pattern.

    Sized so the fading topic dominates history while the periodic and
    emergent topics dominate the late quarters, which is the regime where
    forecast-based reweighting should pay off.
    """
    return (
        TopicSpec(pattern="decrease", base_rate=60, amplitude=3.0),
        TopicSpec(pattern="periodic", base_rate=10, amplitude=40.0, peak_quarter=2),
        TopicSpec(pattern="stationary", base_rate=16),
        TopicSpec(pattern="emergent", base_rate=4, amplitude=2.0, onset_quarter=10),
    )


def default_spec(seed: int = 0, **overrides) -> SynthSpec:
    """The 20-quarter benchmark spec used by the CLI and the acceptance suite."""
    params = dict(topics=default_topics(), n_quarters=20, seed=seed)
    params.update(overrides)
    return SynthSpec(**params)

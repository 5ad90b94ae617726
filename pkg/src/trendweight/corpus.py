"""Corpus loading, quarter bucketing, balancing, and rolling splits.

The on-disk contract is JSON lines: one record per line with fields
``id``, ``text``, ``embedding`` (array of numbers), ``label`` (0/1) and
``timestamp`` (ISO-8601 date).  An optional first line
``{"header": true, "dim": D}`` declares the embedding dimension; loaders
accept files with or without it.
"""

from __future__ import annotations

import datetime
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

SAMPLING_STAGE_TAG = 101  # seed-derivation tag for per-quarter undersampling


@dataclass
class NewsInstance:
    """One news item with its quarter bucket."""

    id: str
    text: str | None
    embedding: np.ndarray | None
    label: int
    timestamp: datetime.date
    year: int
    quarter_of_year: int
    ordinal: int = 0  # assigned densely by the loader, 1-based

    def sort_key(self) -> tuple:
        return (self.timestamp.isoformat(), self.id)


@dataclass(frozen=True)
class QuarterIndex:
    """Position of a calendar quarter in the corpus timeline."""

    ordinal: int
    year: int
    quarter_of_year: int


@dataclass(frozen=True)
class SplitSpec:
    """Rolling split for a target quarter: train on 1..Q-2, validate on Q-1, test on Q."""

    train_quarters: tuple[int, ...]
    val_quarter: int
    test_quarter: int


@dataclass
class Corpus:
    instances: list[NewsInstance]
    quarters: list[QuarterIndex]
    dim: int
    rejected: list[tuple[str, str]] = field(default_factory=list)

    @property
    def n_quarters(self) -> int:
        return len(self.quarters)

    def quarter_index(self, ordinal: int) -> QuarterIndex:
        if not 1 <= ordinal <= len(self.quarters):
            raise ValueError(f"quarter ordinal {ordinal} outside 1..{len(self.quarters)}")
        return self.quarters[ordinal - 1]

    def in_quarter(self, ordinal: int) -> list[NewsInstance]:
        return [x for x in self.instances if x.ordinal == ordinal]


def quarter_of_date(d: datetime.date) -> tuple[int, int]:
    """Map a calendar date to its (year, quarter-of-year) pair."""
    return d.year, (d.month - 1) // 3 + 1


def _quarter_span(first: tuple[int, int], last: tuple[int, int]) -> list[tuple[int, int]]:
    """All consecutive (year, quarter) pairs from first to last inclusive.

    Quarters with no records are kept so the downstream time axis stays
    uniform.
    """
    span = []
    year, q = first
    while (year, q) <= last:
        span.append((year, q))
        q += 1
        if q == 5:
            year, q = year + 1, 1
    return span


def _parse_record(raw: dict, lineno: int) -> tuple[str, str | None, np.ndarray | None, int, datetime.date]:
    for key in ("id", "label", "timestamp"):
        if key not in raw:
            raise ValueError(f"line {lineno}: missing required field '{key}'")
    rid = str(raw["id"])
    label = raw["label"]
    if label not in (0, 1):
        raise ValueError(f"record {rid}: label must be 0 or 1, got {label!r}")
    timestamp = datetime.date.fromisoformat(str(raw["timestamp"])[:10])
    text = raw.get("text")
    emb = raw.get("embedding")
    if emb is not None:
        emb = np.asarray(emb, dtype=np.float64)
        if emb.ndim != 1:
            raise ValueError(f"record {rid}: embedding must be a flat array")
    return rid, text, emb, int(label), timestamp


def load_corpus(path: str | Path, expected_dim: int | None = None) -> Corpus:
    """Load and validate a JSONL corpus.

    Records failing validation (wrong embedding dimension, missing both
    text and embedding, zero-norm embedding) are rejected with a logged
    diagnostic naming the record id; a duplicate id is a fatal error.
    Instances come back sorted by (timestamp, id) with dense quarter
    ordinals covering the full calendar span of the data.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus file not found: {path}")

    instances: list[NewsInstance] = []
    rejected: list[tuple[str, str]] = []
    seen_ids: set[str] = set()
    dim = expected_dim

    with path.open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            if raw.get("header"):
                header_dim = raw.get("dim")
                if header_dim is not None:
                    if dim is not None and int(header_dim) != dim:
                        raise ValueError(
                            f"{path}: header declares dim {header_dim}, expected {dim}"
                        )
                    dim = int(header_dim)
                continue
            rid, text, emb, label, timestamp = _parse_record(raw, lineno)
            if rid in seen_ids:
                raise ValueError(f"duplicate instance id: {rid!r}")
            seen_ids.add(rid)
            if emb is None and not text:
                rejected.append((rid, "missing both text and embedding"))
                logger.warning("rejecting %s: missing both text and embedding", rid)
                continue
            if emb is not None:
                if dim is None:
                    dim = emb.shape[0]
                if emb.shape[0] != dim:
                    rejected.append((rid, f"embedding dim {emb.shape[0]} != {dim}"))
                    logger.warning(
                        "rejecting %s: embedding dim %d != expected %d", rid, emb.shape[0], dim
                    )
                    continue
                if not np.all(np.isfinite(emb)):
                    rejected.append((rid, "non-finite embedding"))
                    logger.warning("rejecting %s: non-finite embedding", rid)
                    continue
                if float(np.linalg.norm(emb)) == 0.0:
                    rejected.append((rid, "zero-norm embedding"))
                    logger.warning("rejecting %s: zero-norm embedding", rid)
                    continue
            year, qoy = quarter_of_date(timestamp)
            instances.append(
                NewsInstance(
                    id=rid,
                    text=text,
                    embedding=emb,
                    label=label,
                    timestamp=timestamp,
                    year=year,
                    quarter_of_year=qoy,
                )
            )

    return build_corpus(instances, dim or 0, rejected)


def build_corpus(
    instances: list[NewsInstance], dim: int, rejected: list[tuple[str, str]] | None = None
) -> Corpus:
    """Sort instances into the canonical order and assign dense quarter ordinals."""
    instances = sorted(instances, key=NewsInstance.sort_key)
    quarters: list[QuarterIndex] = []
    if instances:
        first = quarter_of_date(instances[0].timestamp)
        last = quarter_of_date(instances[-1].timestamp)
        span = _quarter_span(first, last)
        ordinal_of = {yq: i + 1 for i, yq in enumerate(span)}
        quarters = [QuarterIndex(i + 1, y, q) for i, (y, q) in enumerate(span)]
        for inst in instances:
            inst.ordinal = ordinal_of[(inst.year, inst.quarter_of_year)]
    return Corpus(instances=instances, quarters=quarters, dim=dim, rejected=rejected or [])


def save_corpus(path: str | Path, instances: list[NewsInstance], dim: int | None = None) -> None:
    """Write instances to the JSONL contract, with a dimension header when known."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as f:
        if dim is not None:
            f.write(json.dumps({"header": True, "dim": int(dim)}, sort_keys=True) + "\n")
        for inst in instances:
            rec = {
                "id": inst.id,
                "text": inst.text,
                "embedding": None if inst.embedding is None else inst.embedding.tolist(),
                "label": int(inst.label),
                "timestamp": inst.timestamp.isoformat(),
            }
            f.write(json.dumps(rec, sort_keys=True) + "\n")


def quarter_seed(seed: int, ordinal: int) -> np.random.SeedSequence:
    """Per-quarter child seed so sampling one quarter never perturbs another."""
    return np.random.SeedSequence([SAMPLING_STAGE_TAG, int(seed), int(ordinal)])


def undersample_balanced(corpus: Corpus, quarter: int, seed: int) -> list[NewsInstance]:
    """Undersample one quarter to a 1:1 fake/real ratio.

    Keeps min(n_fake, n_real) of each class, chosen uniformly at random
    under a per-quarter seed derived from ``seed``.  An already balanced
    quarter is returned whole, so the result does not depend on the seed.
    Returns an empty list (with a warning) if either class is absent.
    """
    pool = corpus.in_quarter(quarter)
    fake = [x for x in pool if x.label == 1]
    real = [x for x in pool if x.label == 0]
    if not fake or not real:
        logger.warning(
            "quarter %d has %d fake / %d real instances; returning empty balanced set",
            quarter, len(fake), len(real),
        )
        return []
    k = min(len(fake), len(real))
    rng = np.random.default_rng(quarter_seed(seed, quarter))

    def take(items: list[NewsInstance]) -> list[NewsInstance]:
        if len(items) == k:
            return list(items)
        picked = rng.choice(len(items), size=k, replace=False)
        return [items[i] for i in sorted(picked)]

    chosen = take(fake) + take(real)
    chosen.sort(key=NewsInstance.sort_key)
    return chosen


def make_rolling_split(corpus: Corpus, target: int) -> SplitSpec:
    """Rolling split for target quarter Q: train {1..Q-2}, val Q-1, test Q."""
    if target < 3:
        raise ValueError(f"target quarter must be >= 3 to leave training data, got {target}")
    if target > corpus.n_quarters:
        raise ValueError(
            f"target quarter {target} beyond corpus range 1..{corpus.n_quarters}"
        )
    return SplitSpec(
        train_quarters=tuple(range(1, target - 1)),
        val_quarter=target - 1,
        test_quarter=target,
    )

"""Single-pass incremental topic clustering over instance embeddings.

Items are processed in a fixed (timestamp, id) order.  Each item joins the
cluster whose current centroid is most cosine-similar if that similarity
strictly exceeds the threshold, updating the centroid to the running mean
of raw member embeddings; otherwise it founds a new cluster.  The pass is
order-sensitive by construction, which is why the order is pinned.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from trendweight.corpus import NewsInstance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClusteringConfig:
    theta_sim: float = 0.65

    def __post_init__(self):
        if not 0.0 < self.theta_sim <= 1.0:
            raise ValueError(f"theta_sim must be in (0, 1], got {self.theta_sim}")


@dataclass
class TopicCluster:
    """A discovered topic: centroid, members, and per-quarter member counts."""

    topic_id: int
    centroid: np.ndarray
    member_ids: list[str] = field(default_factory=list)
    counts_by_quarter: dict[int, int] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.member_ids)

    def total_count(self) -> int:
        return sum(self.counts_by_quarter.values())

    def count_in(self, ordinal: int) -> int:
        return self.counts_by_quarter.get(ordinal, 0)


@dataclass(frozen=True)
class Assignment:
    """Tag for one held-out instance: the cluster it landed in and whether
    that cluster predates the assignment pass."""

    instance_id: str
    topic_id: int
    existing: bool


class _ClusterState:
    """Mutable pass state: centroid matrix with cached norms and sizes."""

    def __init__(self, dim: int):
        self.dim = dim
        self._cap = 16
        self._cent = np.zeros((self._cap, dim), dtype=np.float64)
        self._norm = np.zeros(self._cap, dtype=np.float64)
        self._size = np.zeros(self._cap, dtype=np.int64)
        self.n = 0

    @classmethod
    def from_clusters(cls, clusters: list[TopicCluster], dim: int) -> "_ClusterState":
        state = cls(dim)
        for c in clusters:
            state._append(np.array(c.centroid, dtype=np.float64), size=c.size)
        return state

    def _grow(self) -> None:
        self._cap *= 2
        for name in ("_cent", "_norm", "_size"):
            old = getattr(self, name)
            new = np.zeros((self._cap,) + old.shape[1:], dtype=old.dtype)
            new[: self.n] = old[: self.n]
            setattr(self, name, new)

    def _append(self, centroid: np.ndarray, size: int = 1) -> int:
        if self.n == self._cap:
            self._grow()
        self._cent[self.n] = centroid
        self._norm[self.n] = np.linalg.norm(centroid)
        self._size[self.n] = size
        self.n += 1
        return self.n - 1

    def centroid(self, idx: int) -> np.ndarray:
        return self._cent[idx].copy()

    def assign(self, x: np.ndarray, theta_sim: float) -> tuple[int, bool]:
        """Place one embedding; returns (cluster index, founded a new cluster)."""
        xnorm = float(np.linalg.norm(x))
        if self.n > 0:
            sims = self._cent[: self.n] @ x / (self._norm[: self.n] * xnorm)
            np.clip(sims, -1.0, 1.0, out=sims)
            best = int(np.argmax(sims))  # argmax keeps the lowest id on ties
            if float(sims[best]) > theta_sim:
                size = int(self._size[best])
                self._cent[best] = (self._cent[best] * size + x) / (size + 1)
                self._norm[best] = np.linalg.norm(self._cent[best])
                self._size[best] = size + 1
                return best, False
        return self._append(x.copy()), True


def _ordered_valid(instances: list[NewsInstance]) -> tuple[list[NewsInstance], int]:
    items = sorted(instances, key=NewsInstance.sort_key)
    dim = None
    for inst in items:
        if inst.embedding is None:
            raise ValueError(f"instance {inst.id} has no embedding")
        if dim is None:
            dim = inst.embedding.shape[0]
        elif inst.embedding.shape[0] != dim:
            raise ValueError(
                f"instance {inst.id} embedding dim {inst.embedding.shape[0]} != {dim}"
            )
        if float(np.linalg.norm(inst.embedding)) == 0.0:
            raise ValueError(f"instance {inst.id} has a zero-norm embedding")
    return items, dim or 0


def single_pass_cluster(
    instances: list[NewsInstance], config: ClusteringConfig
) -> list[TopicCluster]:
    """Cluster instances into topics in one deterministic pass."""
    items, dim = _ordered_valid(instances)
    if not items:
        return []
    state = _ClusterState(dim)
    clusters: list[TopicCluster] = []
    for inst in items:
        idx, founded = state.assign(inst.embedding, config.theta_sim)
        if founded:
            clusters.append(TopicCluster(topic_id=idx, centroid=state.centroid(idx)))
        cluster = clusters[idx]
        cluster.centroid = state.centroid(idx)
        cluster.member_ids.append(inst.id)
        cluster.counts_by_quarter[inst.ordinal] = cluster.counts_by_quarter.get(inst.ordinal, 0) + 1
    return clusters


def assign_to_existing(
    test_instances: list[NewsInstance],
    trained_clusters: list[TopicCluster],
    config: ClusteringConfig,
) -> list[Assignment]:
    """Run the same single-pass rule warm-started from trained clusters.

    Instances joining a pre-existing cluster are tagged existing; instances
    landing in clusters created during this pass are tagged new.  Trained
    centroids keep updating during the pass, exactly as in training.
    """
    if not trained_clusters:
        raise ValueError("assign_to_existing requires at least one trained cluster")
    items, dim = _ordered_valid(test_instances)
    if dim and dim != trained_clusters[0].centroid.shape[0]:
        raise ValueError(
            f"test embedding dim {dim} != trained centroid dim {trained_clusters[0].centroid.shape[0]}"
        )
    state = _ClusterState.from_clusters(trained_clusters, trained_clusters[0].centroid.shape[0])
    n_trained = state.n
    tags = []
    for inst in items:
        idx, _ = state.assign(inst.embedding, config.theta_sim)
        tags.append(Assignment(instance_id=inst.id, topic_id=idx, existing=idx < n_trained))
    return tags


def write_clusters(path: str | Path, clusters: list[TopicCluster], sample_size: int = 8) -> None:
    """Dump clusters as JSONL: topic_id, size, counts_by_quarter, sample ids."""
    with Path(path).open("w", encoding="utf-8") as f:
        for c in clusters:
            rec = {
                "topic_id": c.topic_id,
                "size": c.size,
                "counts_by_quarter": {str(k): v for k, v in sorted(c.counts_by_quarter.items())},
                "sample_member_ids": c.member_ids[:sample_size],
            }
            f.write(json.dumps(rec, sort_keys=True) + "\n")

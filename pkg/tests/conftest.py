import datetime
import json

import numpy as np
import pytest

from trendweight.corpus import NewsInstance, build_corpus


def make_instance(iid, date, label=0, embedding=None, text=None):
    """Bare instance for unit tests; ordinal left for build_corpus to assign."""
    ts = datetime.date.fromisoformat(date)
    return NewsInstance(
        id=iid,
        text=text,
        embedding=None if embedding is None else np.asarray(embedding, dtype=np.float64),
        label=label,
        timestamp=ts,
        year=ts.year,
        quarter_of_year=(ts.month - 1) // 3 + 1,
    )


def basis_instance(iid, date, axis, dim=16, label=0):
    """Instance embedded on one coordinate axis; handy for clustering tests."""
    e = np.zeros(dim)
    e[axis] = 1.0
    return make_instance(iid, date, label=label, embedding=e)


@pytest.fixture
def corpus_file(tmp_path):
    """Small valid JSONL corpus: 3 quarters, dim-4 embeddings, both labels."""
    path = tmp_path / "corpus.jsonl"
    records = []
    rng = np.random.default_rng(42)
    dates = {1: "2020-01-15", 2: "2020-04-20", 3: "2020-08-05"}
    n = 0
    for q, date in dates.items():
        for label in (0, 1):
            for i in range(4):
                records.append(
                    {
                        "id": f"q{q}l{label}i{i}",
                        "text": f"item {n}",
                        "embedding": rng.normal(size=4).tolist(),
                        "label": label,
                        "timestamp": date,
                    }
                )
                n += 1
    with path.open("w") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")
    return path


def corpus_from_instances(instances, dim):
    return build_corpus(list(instances), dim)

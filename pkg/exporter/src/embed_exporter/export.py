"""The export job: JSONL in, JSONL with embeddings and a dimension header out."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

logger = logging.getLogger(__name__)

REQUIRED_FIELDS = ("id", "text", "label", "timestamp")


@dataclass(frozen=True)
class ExportJob:
    input_path: Path
    output_path: Path
    encoder: str = "hash:384"
    batch_size: int = 32

    def __post_init__(self):
        if self.batch_size <= 0:
            raise ValueError("batch_size must be positive")


@dataclass
class ExportStats:
    dim: int
    written: int
    skipped: list[str]


def _read_records(path: Path) -> list[dict]:
    records = []
    with path.open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if rec.get("header"):
                continue
            missing = [k for k in REQUIRED_FIELDS if k not in rec]
            if missing:
                raise ValueError(f"{path}:{lineno}: record missing fields {missing}")
            records.append(rec)
    return records


def export_embeddings(job: ExportJob, encoder=None) -> ExportStats:
    """Embed every record's text and write the enriched corpus.

    Records whose text is empty (or whitespace) are skipped with a logged
    id.  The id, text, label, and timestamp fields pass through verbatim;
    the first output line is a header declaring the encoder dimension.
    """
    from embed_exporter.encoders import resolve_encoder

    if encoder is None:
        encoder = resolve_encoder(job.encoder)

    records = _read_records(Path(job.input_path))
    skipped = [rec["id"] for rec in records if not str(rec.get("text") or "").strip()]
    for rid in skipped:
        logger.warning("skipping %s: empty text", rid)
    todo = [rec for rec in records if str(rec.get("text") or "").strip()]

    vectors = []
    for start in range(0, len(todo), job.batch_size):
        batch = todo[start : start + job.batch_size]
        vectors.extend(encoder.encode([rec["text"] for rec in batch]))

    out_path = Path(job.output_path)
    with out_path.open("w", encoding="utf-8") as f:
        f.write(json.dumps({"header": True, "dim": encoder.dim, "encoder": encoder.name},
                           sort_keys=True) + "\n")
        for rec, vec in zip(todo, vectors):
            out = {
                "id": rec["id"],
                "text": rec["text"],
                "embedding": [float(x) for x in vec],
                "label": rec["label"],
                "timestamp": rec["timestamp"],
            }
            f.write(json.dumps(out, sort_keys=True) + "\n")
    return ExportStats(dim=encoder.dim, written=len(todo), skipped=skipped)

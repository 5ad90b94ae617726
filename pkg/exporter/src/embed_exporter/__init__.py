"""Batch text-to-embedding exporter for the JSONL corpus contract.

Reads corpora of raw-text records, runs a configurable sentence encoder,
and writes the same records back with an ``embedding`` array and a header
line declaring the encoder's output dimension.  The output is consumed by
the training pipeline purely through the file format.
"""

from embed_exporter.encoders import resolve_encoder
from embed_exporter.export import ExportJob, export_embeddings

__version__ = "0.1.0"

__all__ = ["ExportJob", "export_embeddings", "resolve_encoder"]

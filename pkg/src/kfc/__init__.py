"""Embedded single-file retrieval engine: sparse TF-IDF plus exact-substring boosting."""

from .container import Container, create_container, open_container
from .records import ContainerStats, DocumentRecord, Modality, SegmentRecord

__version__ = "0.1.0"

__all__ = [
    "Container",
    "ContainerStats",
    "DocumentRecord",
    "Modality",
    "SegmentRecord",
    "create_container",
    "open_container",
]

from .extract import (
    ExtractConfig,
    ExtractedText,
    extract_text,
    flatten_json,
    normalize_text,
    register_extractor,
    segment_records,
    segment_text,
    serialize_tabular_row,
)
from .modality import detect_modality
from .sync import (
    SyncConfig,
    SyncReport,
    compute_file_signature,
    glob_to_regex,
    sync_directory,
    watch_directory,
)

__all__ = [
    "ExtractConfig",
    "ExtractedText",
    "SyncConfig",
    "SyncReport",
    "compute_file_signature",
    "detect_modality",
    "extract_text",
    "flatten_json",
    "glob_to_regex",
    "normalize_text",
    "register_extractor",
    "segment_records",
    "segment_text",
    "serialize_tabular_row",
    "sync_directory",
    "watch_directory",
]

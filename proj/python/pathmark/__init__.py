"""Structure-based search over model repositories."""

from ._pathmark import (
    ContractError,
    Index,
    NotFoundError,
    ParseError,
    StorageError,
    UnclassifiableError,
    UnsupportedFeatureError,
    ValidationError,
    bm25_term,
    extract_paths,
    normalize_label,
    parse_model,
    synth_corpus,
)

__all__ = [
    "ContractError",
    "Index",
    "NotFoundError",
    "ParseError",
    "StorageError",
    "UnclassifiableError",
    "UnsupportedFeatureError",
    "ValidationError",
    "bm25_term",
    "extract_paths",
    "normalize_label",
    "parse_model",
    "synth_corpus",
]

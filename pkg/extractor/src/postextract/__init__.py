"""postextract: raw images and sentences in, schema-conformant
multi-modal post records out, ready for the postweave batch engine."""

from .rawposts import ExtractError, RawPost, week_ordinal

__version__ = "0.1.0"

__all__ = [
    "ExtractError",
    "RawPost",
    "week_ordinal",
    "__version__",
]

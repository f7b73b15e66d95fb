"""postweave: multi-modal post records in, feature matrices, filtered
pseudo-labels, and a three-layer post graph out."""

from .records import (
    DataError,
    GraphConfig,
    PostRecord,
    SpatialNetwork,
    UserRelations,
    week_ordinal,
)

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "GraphConfig",
    "PostRecord",
    "SpatialNetwork",
    "UserRelations",
    "week_ordinal",
    "__version__",
]

"""mvrs: text-to-video retrieval with segmentation-based explainability.

Frames are filtered, orientation-normalized, embedded into a shared
text/image vector space, grouped into near-duplicate segments, and
indexed for filtered cosine search; free-form text queries return ranked
videos, and a candidate-set mask predictor explains what matched, frame
by frame.
"""

from .embedding import EmbedderConfig, embed_frame, embed_text, unit_normalize
from .index import AnnParams, MetadataFilter, SearchHit, VectorIndex, cosine_similarity
from .model import (
    FrameRecord,
    QueryResult,
    SegmentGroup,
    VideoAsset,
    VideoMetadata,
    validate_catalog,
)
from .preprocess import (
    PreprocessConfig,
    filter_blurry,
    group_similar,
    laplacian_variance,
    normalize_orientation,
    rotate_quarter_cw,
)
from .retrieval import QueryRequest, RetrievalEngine, aggregate_video_scores

__version__ = "0.1.0"

__all__ = [
    "EmbedderConfig",
    "embed_frame",
    "embed_text",
    "unit_normalize",
    "AnnParams",
    "MetadataFilter",
    "SearchHit",
    "VectorIndex",
    "cosine_similarity",
    "FrameRecord",
    "QueryResult",
    "SegmentGroup",
    "VideoAsset",
    "VideoMetadata",
    "validate_catalog",
    "PreprocessConfig",
    "filter_blurry",
    "group_similar",
    "laplacian_variance",
    "normalize_orientation",
    "rotate_quarter_cw",
    "QueryRequest",
    "RetrievalEngine",
    "aggregate_video_scores",
    "__version__",
]

"""hdsem: high-dimensional bipolar vector semantics.

Deterministic bit-packed hypervectors, bundle-sum set membership with
closed-form precision/recall analytics, and three applications built on
them: word context embeddings, sentence retrieval, and a 1-NN spam filter.
"""

from .context import (
    ContextModel,
    build_context_model,
    context_arithmetic,
    context_contains,
    context_similarity,
    context_stats,
    similar_words,
)
from .core import (
    DEFAULT_SEED,
    BundleVector,
    FilterAnalytics,
    Hypervector,
    MembershipScore,
    bundle_add,
    decide_membership,
    dot,
    generate_hypervector,
    membership_score,
    nearest_in_set,
    normal_cdf,
    orthogonality_bound,
    predict_filter_analytics,
)
from .errors import DataError
from .experiments import (
    MembershipSimConfig,
    RhoCurveConfig,
    membership_sim,
    rho_curve,
)
from .sentences import build_sentence_index, query_sentences, split_sentences
from .spam import classify, cross_validate, ingest_lingspam, train_filter
from .textpipe import (
    PipelineConfig,
    Vocabulary,
    build_vocabulary,
    default_config,
    load_stopwords,
    preprocess,
    strip_gutenberg_boilerplate,
    tokenize,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_SEED",
    "BundleVector",
    "ContextModel",
    "DataError",
    "FilterAnalytics",
    "Hypervector",
    "MembershipScore",
    "MembershipSimConfig",
    "PipelineConfig",
    "RhoCurveConfig",
    "Vocabulary",
    "build_context_model",
    "build_sentence_index",
    "build_vocabulary",
    "bundle_add",
    "classify",
    "context_arithmetic",
    "context_contains",
    "context_similarity",
    "context_stats",
    "cross_validate",
    "decide_membership",
    "default_config",
    "dot",
    "generate_hypervector",
    "ingest_lingspam",
    "load_stopwords",
    "membership_score",
    "membership_sim",
    "nearest_in_set",
    "normal_cdf",
    "orthogonality_bound",
    "predict_filter_analytics",
    "preprocess",
    "query_sentences",
    "rho_curve",
    "similar_words",
    "split_sentences",
    "strip_gutenberg_boilerplate",
    "tokenize",
    "train_filter",
    "__version__",
]

"""clevrgraph: structural graphs, feature bundles, and visualizations for the
CLEVR domain — question text and scene JSON in, order-invariant graphs out,
with one-hot / table embedding providers, DOT rendering, and 2-D projections."""

from .diagnostics import Diagnostic
from .embed import (
    EmbeddingProvider,
    FeatureBundle,
    OneHotProvider,
    TableProvider,
    bundles_equal,
    default_onehot_provider,
    embed,
    export_bundle,
    import_bundle,
)
from .errors import ClevrGraphError
from .graph import (
    EDGE_LABELS,
    Edge,
    Node,
    StructuralGraph,
    adjacency,
    deserialize,
    serialize,
)
from .grounding import GroundingResult, ground, ground_result
from .lexicon import (
    CATEGORIES,
    GENERIC_OBJECT,
    MATCHING_LABELS,
    NOT_IN_LEXICON,
    SPATIAL_LABELS,
    Lexicon,
    default_lexicon,
    load_lexicon,
    parse_lexicon,
)
from .projection import (
    KMeansResult,
    PooledVector,
    ProjectionResult,
    kmeans,
    pca2,
    pool,
    scatter_svg,
    to_csv,
    tsne2,
)
from .scene import SceneDocument, SceneObject, check_scene_consistency, load_scenes, parse_scene
from .text import (
    EntitySpan,
    RelationMention,
    TextParse,
    Token,
    analyze_text,
    classify_question,
    extract_relations,
    parse_text,
    recognize_entities,
    tokenize,
)
from .viz import render_svg, to_dot

__version__ = "0.1.0"

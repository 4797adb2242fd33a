"""Embedding-space visualization: pooling, 2-D projection, clustering, reports."""

from ._kernels import ENV_FLAG, HAVE_NUMBA, get_kernels, resolve_backend
from .methods import (
    DEFAULT_ITERS,
    DEFAULT_LEARNING_RATE,
    DEFAULT_PERPLEXITY,
    KMeansResult,
    PooledVector,
    kl_divergence,
    kmeans,
    pca2,
    pool,
    tsne2,
    tsne_affinities,
)
from .report import PALETTE, Point, ProjectionResult, scatter_svg, to_csv

__all__ = [
    "ENV_FLAG",
    "HAVE_NUMBA",
    "get_kernels",
    "resolve_backend",
    "DEFAULT_ITERS",
    "DEFAULT_LEARNING_RATE",
    "DEFAULT_PERPLEXITY",
    "KMeansResult",
    "PooledVector",
    "kl_divergence",
    "kmeans",
    "pca2",
    "pool",
    "tsne2",
    "tsne_affinities",
    "PALETTE",
    "Point",
    "ProjectionResult",
    "scatter_svg",
    "to_csv",
]

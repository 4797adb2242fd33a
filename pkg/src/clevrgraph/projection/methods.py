"""Graph-level pooling, PCA and exact t-SNE 2-D projection, and k-means clustering.

All entry points are deterministic given their seed; the heavy loops run on the
kernel backend selected by CLEVRGRAPH_BACKEND (see _kernels).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateInputError, EmptyGraphError, ProjectionError
from ._kernels import get_kernels
from .report import Point, ProjectionResult

_BISECTION_TOL = 1e-7  # bits; comfortably inside the documented 1e-5 contract
_BISECTION_STEPS = 200

EARLY_EXAGGERATION = 12.0
EXAGGERATION_ITERS = 250
DEFAULT_LEARNING_RATE = 200.0
DEFAULT_ITERS = 1000
DEFAULT_PERPLEXITY = 30.0


@dataclass
class PooledVector:
    """One graph pooled to a fixed vector, tagged with its id and optional group."""

    id: str
    group: str | None
    v: np.ndarray


@dataclass
class KMeansResult:
    labels: np.ndarray  # int64, length n
    centroids: np.ndarray  # k x d
    inertia: float
    inertia_trace: list[float] = field(default_factory=list)
    n_iter: int = 0


def pool(bundle, mode: str = "mean") -> np.ndarray:
    """Element-wise mean or sum over the node-feature rows of a bundle."""
    if mode not in ("mean", "sum"):
        raise ProjectionError(f"unknown pooling mode {mode!r}")
    X = np.asarray(bundle.X, dtype=np.float64)
    if X.shape[0] == 0:
        raise EmptyGraphError("cannot pool a bundle with zero nodes")
    return X.sum(axis=0) if mode == "sum" else X.mean(axis=0)


def _as_matrix(vectors):
    """Accept an (n, d) array or a sequence of PooledVector; return ids, groups, X."""
    if isinstance(vectors, np.ndarray):
        X = np.asarray(vectors, dtype=np.float64)
        if X.ndim != 2:
            raise ProjectionError(f"expected a 2-D array, got shape {X.shape}")
        ids = [str(i) for i in range(X.shape[0])]
        return ids, [None] * X.shape[0], X
    items = list(vectors)
    if not items:
        raise ProjectionError("no vectors to project")
    dims = {int(np.asarray(p.v).shape[0]) for p in items}
    if len(dims) != 1:
        raise ProjectionError(f"pooled vectors disagree on dimension: {sorted(dims)}")
    X = np.stack([np.asarray(p.v, dtype=np.float64) for p in items])
    return [p.id for p in items], [p.group for p in items], X


def pca2(vectors) -> ProjectionResult:
    """Project onto the top-2 principal directions. Deterministic: each
    component's largest-magnitude loading is made positive. Stress is the
    residual variance fraction left outside the two components."""
    ids, groups, X = _as_matrix(vectors)
    n, d = X.shape
    if n < 2 or d < 2:
        raise ProjectionError(f"pca2 needs at least 2 vectors of dimension >= 2, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ProjectionError("non-finite values in input vectors")
    Xc = X - X.mean(axis=0)
    cov = (Xc.T @ Xc) / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    eigvals = np.maximum(eigvals, 0.0)
    total = float(eigvals.sum())
    if total <= 0.0:
        raise DegenerateInputError("all input vectors are identical; no variance to project")
    components = eigvecs[:, ::-1][:, :2].copy()
    for k in range(2):
        anchor = int(np.argmax(np.abs(components[:, k])))
        if components[anchor, k] < 0:
            components[:, k] = -components[:, k]
    coords = Xc @ components
    top2 = float(eigvals[-1] + eigvals[-2])
    stress = max(0.0, 1.0 - top2 / total)
    points = [
        Point(id=ids[i], group=groups[i], x=float(coords[i, 0]), y=float(coords[i, 1]))
        for i in range(n)
    ]
    return ProjectionResult(points=points, cluster=None, stress=stress, method="pca")


def tsne_affinities(X, perplexity: float, backend: str | None = None):
    """Symmetrized joint affinity matrix P and the achieved per-point entropy in
    bits. P is symmetric, non-negative, zero-diagonal, and sums to 1."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    n = X.shape[0]
    kern = get_kernels(backend)
    D2 = kern.pairwise_sq(X)
    target_bits = math.log2(perplexity)
    P_cond, entropy_bits = kern.affinity_rows(D2, target_bits, _BISECTION_TOL, _BISECTION_STEPS)
    P = (P_cond + P_cond.T) / (2.0 * n)
    return P, entropy_bits


def kl_divergence(P, Q) -> float:
    """KL(P || Q) over off-diagonal entries; zero P entries contribute zero."""
    P = np.asarray(P, dtype=np.float64)
    Q = np.asarray(Q, dtype=np.float64)
    mask = P > 0.0
    return float(np.sum(P[mask] * np.log(P[mask] / Q[mask])))


def tsne2(
    vectors,
    perplexity: float | None = None,
    iters: int = DEFAULT_ITERS,
    seed: int = 0,
    learning_rate: float = DEFAULT_LEARNING_RATE,
    backend: str | None = None,
) -> ProjectionResult:
    """Exact (O(n^2)) t-SNE to 2-D.

    Update rule: gradient descent on KL(P||Q) with early exaggeration 12 for the
    first 250 iterations, momentum 0.5 switching to 0.8 at iteration 250, and
    per-coordinate gains (+0.2 on sign disagreement, x0.8 otherwise, floored at
    0.01). A step is only accepted if it does not increase the running
    objective; otherwise it is halved (up to 32 times, then skipped), so within
    each phase the objective trace is non-increasing by construction.
    Initialization is N(0, 1e-4) from a seeded PCG64 generator. When perplexity
    is omitted it defaults to 30 clamped into [1, (n-1)/3]. Stress is the final
    (unexaggerated) KL divergence; objective_trace[i] is the objective at the
    start of iteration i, against that iteration's (possibly exaggerated) P.
    """
    ids, groups, X = _as_matrix(vectors)
    n = X.shape[0]
    if n < 3:
        raise ProjectionError(f"tsne2 needs at least 3 vectors, got {n}")
    if not np.all(np.isfinite(X)):
        raise ProjectionError("non-finite values in input vectors")
    max_perplexity = (n - 1) / 3.0
    if perplexity is None:
        perplexity = min(DEFAULT_PERPLEXITY, max_perplexity)
    if not 1.0 <= perplexity <= max_perplexity:
        raise ProjectionError(
            f"perplexity {perplexity} out of range [1, {max_perplexity:.6g}] for n={n}"
        )
    if iters < 1:
        raise ProjectionError("iters must be >= 1")

    kern = get_kernels(backend)
    P, _ = tsne_affinities(X, perplexity, backend=backend)

    rng = np.random.default_rng(seed)
    Y = rng.normal(0.0, 1e-4, size=(n, 2))
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    exaggerated = P * EARLY_EXAGGERATION
    trace = []
    kl = grad = None
    for it in range(iters):
        running_P = exaggerated if it < EXAGGERATION_ITERS else P
        if kl is None or it == EXAGGERATION_ITERS:
            kl, grad = kern.tsne_step(Y, running_P)
        trace.append(kl)
        momentum = 0.5 if it < EXAGGERATION_ITERS else 0.8
        flip = np.sign(grad) != np.sign(update)
        gains = np.where(flip, gains + 0.2, gains * 0.8)
        np.maximum(gains, 0.01, out=gains)
        step = momentum * update - learning_rate * (gains * grad)
        accepted = False
        for _ in range(32):
            Y_try = Y + step
            Y_try = Y_try - Y_try.mean(axis=0)
            kl_try, grad_try = kern.tsne_step(Y_try, running_P)
            if kl_try <= kl:
                accepted = True
                break
            step = step * 0.5
        if accepted:
            Y, kl, grad = Y_try, kl_try, grad_try
            update = step
        else:
            update = np.zeros_like(Y)

    stress, _ = kern.tsne_step(Y, P)
    points = [
        Point(id=ids[i], group=groups[i], x=float(Y[i, 0]), y=float(Y[i, 1])) for i in range(n)
    ]
    return ProjectionResult(
        points=points, cluster=None, stress=float(stress), method="tsne", objective_trace=trace
    )


def _kmeans_data(data):
    if isinstance(data, ProjectionResult):
        return np.array([[p.x, p.y] for p in data.points], dtype=np.float64)
    _, _, X = _as_matrix(data)
    return X


def kmeans(
    data,
    k: int,
    seed: int = 0,
    max_iter: int = 300,
    backend: str | None = None,
) -> KMeansResult:
    """Lloyd's algorithm with k-means++ seeding, run to an assignment fixpoint
    (or max_iter). Accepts raw vectors, PooledVectors, or a ProjectionResult
    (clustering its 2-D points). Deterministic given the seed; inertia after
    every assignment step is kept in inertia_trace and never increases."""
    X = _kmeans_data(data)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ProjectionError(f"k must be in [1, {n}], got {k}")
    if not np.all(np.isfinite(X)):
        raise ProjectionError("non-finite values in input vectors")
    kern = get_kernels(backend)
    rng = np.random.default_rng(seed)

    # k-means++: spread the initial centroids with squared-distance weighting.
    centroids = np.zeros((k, X.shape[1]), dtype=np.float64)
    centroids[0] = X[int(rng.integers(n))]
    closest = ((X - centroids[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = float(closest.sum())
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=closest / total))
        centroids[c] = X[idx]
        dist = ((X - centroids[c]) ** 2).sum(axis=1)
        np.minimum(closest, dist, out=closest)

    labels = np.full(n, -1, dtype=np.int64)
    trace: list[float] = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        new_labels, sqdists = kern.kmeans_assign(X, centroids)
        trace.append(float(sqdists.sum()))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        sums, counts = kern.kmeans_sums(X, labels, k)
        for c in range(k):
            if counts[c] > 0:
                centroids[c] = sums[c] / counts[c]
            else:
                # Re-seed an empty cluster on the point farthest from its centroid.
                far = int(np.argmax(sqdists))
                centroids[c] = X[far]
                sqdists[far] = 0.0
    return KMeansResult(
        labels=labels,
        centroids=centroids,
        inertia=trace[-1],
        inertia_trace=trace,
        n_iter=n_iter,
    )

"""Numeric kernels behind t-SNE and k-means, in two interchangeable backends.

The numba backend JIT-compiles explicit loops; the numpy backend is vectorized.
Selection: the CLEVRGRAPH_BACKEND environment variable ("auto", "numba",
"numpy"; default auto = numba when importable), or an explicit backend argument
on the public entry points. Both backends are deterministic run-to-run; their
results may differ in the last float bits because summation order differs.

Kernel contract (shared by both backends, float64 in/out):
    pairwise_sq(X)                  -> (n, n) squared euclidean distances, zero diagonal
    affinity_rows(D2, target, tol, max_steps)
                                    -> (P_cond, entropy_bits): row-conditional Gaussian
                                       affinities with per-row bandwidth bisected until
                                       the row entropy (bits) hits `target` within `tol`
    tsne_step(Y, P)                 -> (kl, grad): Student-t Q from Y, KL(P||Q), and
                                       the analytic gradient d KL / d Y
    kmeans_assign(X, C)             -> (labels, sqdists) nearest-centroid assignment
    kmeans_sums(X, labels, k)       -> (sums, counts) per-cluster accumulators
"""

from __future__ import annotations

import math
import os

import numpy as np

from ..errors import ProjectionError

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only on numba-less installs
    HAVE_NUMBA = False

ENV_FLAG = "CLEVRGRAPH_BACKEND"

_LN2 = math.log(2.0)


def resolve_backend(override: str | None = None) -> str:
    choice = (override or os.environ.get(ENV_FLAG) or "auto").lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ProjectionError(f"unknown backend {choice!r} (use auto, numba, or numpy)")
    if choice == "auto":
        return "numba" if HAVE_NUMBA else "numpy"
    if choice == "numba" and not HAVE_NUMBA:
        raise ProjectionError("numba backend requested but numba is not importable")
    return choice


# ---------------------------------------------------------------- numpy backend


def _np_pairwise_sq(X):
    sq = np.einsum("ij,ij->i", X, X)
    D2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(D2, 0.0, out=D2)
    np.fill_diagonal(D2, 0.0)
    return D2


def _np_affinity_rows(D2, target_bits, tol, max_steps):
    n = D2.shape[0]
    P = np.zeros((n, n), dtype=np.float64)
    entropy = np.zeros(n, dtype=np.float64)
    for i in range(n):
        d2 = D2[i]
        beta, beta_min, beta_max = 1.0, -np.inf, np.inf
        row = np.zeros(n)
        h_bits = -np.inf
        for _ in range(max_steps):
            row = np.exp(-beta * d2)
            row[i] = 0.0
            s = row.sum()
            if s <= 1e-300:
                h_bits = -np.inf
            else:
                h_nats = math.log(s) + beta * float(np.dot(d2, row)) / s
                h_bits = h_nats / _LN2
            diff = h_bits - target_bits
            if abs(diff) <= tol:
                break
            if diff > 0.0:
                beta_min = beta
                beta = beta * 2.0 if beta_max == np.inf else (beta + beta_max) / 2.0
            else:
                beta_max = beta
                beta = beta / 2.0 if beta_min == -np.inf else (beta + beta_min) / 2.0
        s = row.sum()
        if s > 0.0:
            P[i] = row / s
        entropy[i] = h_bits
    return P, entropy


def _np_tsne_step(Y, P):
    D2 = _np_pairwise_sq(Y)
    W = 1.0 / (1.0 + D2)
    np.fill_diagonal(W, 0.0)
    Z = W.sum()
    Q = W / Z
    mask = P > 0.0
    kl = float(np.sum(P[mask] * np.log(P[mask] / Q[mask])))
    M = (P - Q) * W
    grad = 4.0 * (M.sum(axis=1)[:, None] * Y - M @ Y)
    return kl, grad


def _np_kmeans_assign(X, C):
    xsq = np.einsum("ij,ij->i", X, X)
    csq = np.einsum("ij,ij->i", C, C)
    D2 = xsq[:, None] + csq[None, :] - 2.0 * (X @ C.T)
    np.maximum(D2, 0.0, out=D2)
    labels = np.argmin(D2, axis=1).astype(np.int64)
    return labels, D2[np.arange(X.shape[0]), labels]


def _np_kmeans_sums(X, labels, k):
    sums = np.zeros((k, X.shape[1]), dtype=np.float64)
    np.add.at(sums, labels, X)
    counts = np.bincount(labels, minlength=k).astype(np.int64)
    return sums, counts


# ---------------------------------------------------------------- numba backend

if HAVE_NUMBA:

    @njit(cache=True)
    def _nb_pairwise_sq(X):
        n, d = X.shape
        out = np.zeros((n, n), dtype=np.float64)
        for i in range(n):
            for j in range(i + 1, n):
                s = 0.0
                for k in range(d):
                    diff = X[i, k] - X[j, k]
                    s += diff * diff
                out[i, j] = s
                out[j, i] = s
        return out

    @njit(cache=True)
    def _nb_affinity_rows(D2, target_bits, tol, max_steps):
        n = D2.shape[0]
        P = np.zeros((n, n), dtype=np.float64)
        entropy = np.zeros(n, dtype=np.float64)
        ln2 = math.log(2.0)
        for i in range(n):
            beta = 1.0
            beta_min = -np.inf
            beta_max = np.inf
            h_bits = -np.inf
            s = 0.0
            for _ in range(max_steps):
                s = 0.0
                weighted = 0.0
                for j in range(n):
                    if j != i:
                        p = math.exp(-beta * D2[i, j])
                        P[i, j] = p
                        s += p
                        weighted += D2[i, j] * p
                if s <= 1e-300:
                    h_bits = -np.inf
                else:
                    h_bits = (math.log(s) + beta * weighted / s) / ln2
                diff = h_bits - target_bits
                if abs(diff) <= tol:
                    break
                if diff > 0.0:
                    beta_min = beta
                    if beta_max == np.inf:
                        beta = beta * 2.0
                    else:
                        beta = (beta + beta_max) / 2.0
                else:
                    beta_max = beta
                    if beta_min == -np.inf:
                        beta = beta / 2.0
                    else:
                        beta = (beta + beta_min) / 2.0
            # P[i] holds the last evaluated (unnormalized) row; normalize in place.
            if s > 0.0:
                for j in range(n):
                    P[i, j] /= s
            entropy[i] = h_bits
        return P, entropy

    @njit(cache=True)
    def _nb_tsne_step(Y, P):
        n = Y.shape[0]
        W = np.zeros((n, n), dtype=np.float64)
        Z = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                dx = Y[i, 0] - Y[j, 0]
                dy = Y[i, 1] - Y[j, 1]
                w = 1.0 / (1.0 + dx * dx + dy * dy)
                W[i, j] = w
                W[j, i] = w
                Z += 2.0 * w
        kl = 0.0
        grad = np.zeros((n, 2), dtype=np.float64)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                q = W[i, j] / Z
                p = P[i, j]
                if p > 0.0:
                    kl += p * math.log(p / q)
                coef = 4.0 * (p - q) * W[i, j]
                grad[i, 0] += coef * (Y[i, 0] - Y[j, 0])
                grad[i, 1] += coef * (Y[i, 1] - Y[j, 1])
        return kl, grad

    @njit(cache=True)
    def _nb_kmeans_assign(X, C):
        n, d = X.shape
        k = C.shape[0]
        labels = np.zeros(n, dtype=np.int64)
        sqdists = np.zeros(n, dtype=np.float64)
        for i in range(n):
            best = np.inf
            best_j = 0
            for j in range(k):
                s = 0.0
                for c in range(d):
                    diff = X[i, c] - C[j, c]
                    s += diff * diff
                if s < best:
                    best = s
                    best_j = j
            labels[i] = best_j
            sqdists[i] = best
        return labels, sqdists

    @njit(cache=True)
    def _nb_kmeans_sums(X, labels, k):
        n, d = X.shape
        sums = np.zeros((k, d), dtype=np.float64)
        counts = np.zeros(k, dtype=np.int64)
        for i in range(n):
            lab = labels[i]
            counts[lab] += 1
            for c in range(d):
                sums[lab, c] += X[i, c]
        return sums, counts


class Kernels:
    def __init__(self, name, pairwise_sq, affinity_rows, tsne_step, kmeans_assign, kmeans_sums):
        self.name = name
        self.pairwise_sq = pairwise_sq
        self.affinity_rows = affinity_rows
        self.tsne_step = tsne_step
        self.kmeans_assign = kmeans_assign
        self.kmeans_sums = kmeans_sums


_NUMPY = Kernels(
    "numpy", _np_pairwise_sq, _np_affinity_rows, _np_tsne_step, _np_kmeans_assign, _np_kmeans_sums
)
_NUMBA = (
    Kernels(
        "numba", _nb_pairwise_sq, _nb_affinity_rows, _nb_tsne_step, _nb_kmeans_assign, _nb_kmeans_sums
    )
    if HAVE_NUMBA
    else None
)


def get_kernels(backend: str | None = None) -> Kernels:
    return _NUMBA if resolve_backend(backend) == "numba" else _NUMPY

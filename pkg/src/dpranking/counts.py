"""Nonparametric ranking by Laplace-noised win counts (Copeland counting).

Edge DP adds Laplace(2/eps) noise to the per-item win counts; individual DP
adds Laplace(L/eps), since one user's bundle of L comparisons moves each
count by at most L. Top-k selection and full ranking post-process one shared
noise draw, so nested top-k sets are consistent at no extra privacy cost.
"""

from __future__ import annotations

import math

import numpy as np

from .data import EdgeDataset, IndividualDataset, rng_from

__all__ = ["win_counts", "noise_scale", "noisy_counts", "noisy_topk", "noisy_full_ranking"]


def win_counts(data: EdgeDataset | IndividualDataset) -> np.ndarray:
    """Total wins per item; the counts sum to the number of comparisons."""
    if isinstance(data, EdgeDataset):
        i, j, y = data.graph.i, data.graph.j, data.y
    elif isinstance(data, IndividualDataset):
        i, j, y = data.i, data.j, data.y
    else:
        raise TypeError(f"unsupported dataset type {type(data).__name__}")
    winners = np.where(y == 1, i, j)
    return np.bincount(winners, minlength=data.n).astype(np.int64)


def noise_scale(epsilon: float, regime: str, L: int = 1) -> float:
    """Laplace scale: 2/eps for edge DP, L/eps for individual DP; 0 at eps=inf."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if math.isinf(epsilon):
        return 0.0
    if regime == "edge":
        return 2.0 / epsilon
    if regime == "individual":
        if L < 1:
            raise ValueError("L must be >= 1")
        return L / epsilon
    raise ValueError("regime must be 'edge' or 'individual'")


def noisy_counts(counts: np.ndarray, epsilon: float, regime: str,
                 L: int = 1, seed=None) -> np.ndarray:
    """Counts plus i.i.d. Laplace noise at the regime's scale."""
    counts = np.asarray(counts, dtype=float)
    scale = noise_scale(epsilon, regime, L)
    if scale == 0.0:
        return counts.copy()
    rng = rng_from(seed)
    return counts + rng.laplace(scale=scale, size=len(counts))


def _rank_desc(values: np.ndarray) -> np.ndarray:
    # descending by value, ties by lowest index
    return np.lexsort((np.arange(len(values)), -values))


def noisy_topk(counts: np.ndarray, k: int, epsilon: float, regime: str,
               L: int = 1, seed=None) -> np.ndarray:
    """Indices (0-based, sorted) of the k largest noisy counts."""
    n = len(counts)
    if not 1 <= k <= n:
        raise ValueError("k must lie in [1, n]")
    noisy = noisy_counts(counts, epsilon, regime, L, seed)
    return np.sort(_rank_desc(noisy)[:k])


def noisy_full_ranking(counts: np.ndarray, epsilon: float, regime: str,
                       L: int = 1, seed=None) -> np.ndarray:
    """All items sorted by noisy count descending, one shared noise draw."""
    noisy = noisy_counts(counts, epsilon, regime, L, seed)
    return _rank_desc(noisy)

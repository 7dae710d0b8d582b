"""Spectral clustering: k-means on the rows of the top-k left singular basis."""

import numpy as np

from .errors import DimensionError
from .kmeans import KMeansParams, KMeansResult, kmeans
from .matrix_core import DataMatrix, EigenBasis, top_k_left_singular


def spectral_cluster_details(
    m: DataMatrix,
    k: int,
    params: KMeansParams | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, KMeansResult, EigenBasis]:
    """Like :func:`spectral_cluster` but also returns the k-means result and
    the singular basis, for diagnostics."""
    n, p = m.rows, m.cols
    if not 2 <= k <= min(n, p):
        raise DimensionError(f"k={k} out of range for a {n}x{p} matrix")
    basis = top_k_left_singular(m, k)
    result = kmeans(basis.vectors, k, params=params, rng=rng)
    return result.labels, result, basis


def spectral_cluster(
    m: DataMatrix,
    k: int,
    params: KMeansParams | None = None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Cluster the samples into k groups by running k-means on the rows of
    the matrix of leading left singular vectors. All k clusters come back
    non-empty; labels are in {0, ..., k-1}."""
    labels, _, _ = spectral_cluster_details(m, k, params=params, rng=rng)
    return labels

"""Spectral initialization on a feature subset followed by Lloyd refinement.

The column restriction happens first, so features outside the selected
set cannot influence the output in any way.
"""

import math

import numpy as np

from .errors import DimensionError, SelectionEmptyError
from .kmeans import KMeansParams, lloyd_from_labels
from .matrix_core import DataMatrix
from .spectral import spectral_cluster


def default_iteration_count(n: int) -> int:
    """Default number of refinement iterations, ceil(4 ln n)."""
    return max(0, math.ceil(4.0 * math.log(n))) if n > 1 else 0


def spec_lloyd(
    m: DataMatrix,
    k: int,
    selected: np.ndarray,
    iterations: int | None = None,
    params: KMeansParams | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Cluster on the selected columns: spectral initialization, then up to
    ``iterations`` rounds of center update and nearest-center reassignment
    (early stop on a fixed point).

    Returns the final labels and the k x len(selected) center matrix.
    """
    selected = np.asarray(selected, dtype=np.int64)
    if selected.size == 0:
        raise SelectionEmptyError("selected feature set is empty")
    if selected.min() < 0 or selected.max() >= m.cols:
        raise DimensionError("selected indices out of column range")
    sub = m.values[:, selected]
    init_labels = spectral_cluster(DataMatrix(sub), k, params=params, rng=rng)
    if iterations is None:
        iterations = default_iteration_count(m.rows)
    result, _ = lloyd_from_labels(sub, init_labels, k=k, max_iter=iterations)
    return result.labels, result.centers

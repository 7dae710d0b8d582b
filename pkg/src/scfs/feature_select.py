"""Per-feature variance-explained scores against a labeling, and selection rules.

For each column the score is the ratio of within-group to total sum of
squares; values near 0 mean the labeling explains almost all of the
column's variation, values near 1 mean it explains none.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, PartitionError, SelectionEmptyError
from .matrix_core import DataMatrix


@dataclass
class FeatureScores:
    """Per-feature sums of squares and scores, plus the chosen feature set.

    ``selected``/``tau`` stay None until a selection rule has been applied.
    """

    residual_ss: np.ndarray
    total_ss: np.ndarray
    score: np.ndarray
    selected: np.ndarray | None = None
    tau: float | None = None

    @property
    def n_features(self) -> int:
        return self.score.shape[0]


def score_features(m: DataMatrix, labels: np.ndarray) -> FeatureScores:
    """Score every column against the grouping given by ``labels``.

    For column j: the residual sum of squares around the group means, the
    total sum of squares around the grand mean, and their ratio. Constant
    columns (zero total SS) score 1 by convention.
    """
    y = m.values
    n, p = y.shape
    if n < 2:
        raise DimensionError(f"need at least 2 samples, got {n}")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape[0] != n:
        raise DimensionError("labels length must match the number of samples")
    if labels.min() < 0:
        raise PartitionError("labels must be nonnegative")
    k = int(labels.max()) + 1
    counts = np.bincount(labels, minlength=k)
    if (counts == 0).any():
        raise PartitionError(f"every group in 0..{k - 1} must be non-empty")

    onehot = (labels[None, :] == np.arange(k)[:, None]).astype(np.float64)
    group_means = (onehot @ y) / counts[:, None]
    # grand mean as the size-weighted mean of group means, so that k=1
    # reproduces the group mean bit-for-bit and the score is exactly 1
    grand_mean = (counts @ group_means) / n

    resid = y - group_means[labels]
    residual_ss = np.einsum("ij,ij->j", resid, resid)
    dev = y - grand_mean
    total_ss = np.einsum("ij,ij->j", dev, dev)

    with np.errstate(divide="ignore", invalid="ignore"):
        score = np.where(total_ss > 0, residual_ss / np.where(total_ss > 0, total_ss, 1.0), 1.0)
    return FeatureScores(residual_ss=residual_ss, total_ss=total_ss, score=score)


def select_threshold(scores: FeatureScores, tau: float) -> np.ndarray:
    """Indices of all features with score <= tau, ascending.

    Raises SelectionEmptyError when no feature passes; callers decide the
    fallback.
    """
    if not 0.0 < tau < 1.0:
        raise DomainError(f"tau must lie in (0, 1), got {tau}")
    selected = np.flatnonzero(scores.score <= tau)
    if selected.size == 0:
        raise SelectionEmptyError(f"no feature scored <= {tau}")
    return selected


def select_top_m(scores: FeatureScores, m: int) -> np.ndarray:
    """Indices of the m lowest-scoring features (ties go to the lower index),
    returned ascending."""
    p = scores.n_features
    if not 1 <= m <= p:
        raise DimensionError(f"m={m} out of range for {p} features")
    order = np.argsort(scores.score, kind="stable")[:m]
    return np.sort(order)


def population_r_squared(
    theta: float, sigma: float, a11: float, a12: float, a21: float, a22: float
) -> float:
    """Expected variance-explained of a feature for a symmetric two-cluster
    model with means +-theta and noise sd sigma, when the estimated label
    has joint cell probabilities a_kl = P(true=k, est=l)."""
    probs = (a11, a12, a21, a22)
    if any(a < 0 for a in probs):
        raise DomainError("cell probabilities must be nonnegative")
    if abs(sum(probs) - 1.0) > 1e-9:
        raise DomainError("cell probabilities must sum to 1")
    if a11 + a21 <= 0 or a22 + a12 <= 0:
        raise DomainError("each estimated-label cell must have positive mass")
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    bracket = (a11 - a21) ** 2 / (a11 + a21) + (a22 - a12) ** 2 / (a22 + a12)
    return theta**2 / (theta**2 + sigma**2) * bracket


def scores_to_csv(scores: FeatureScores, path) -> None:
    """Write per-feature scores as CSV: feature_index, c, m, sc, selected."""
    selected = set() if scores.selected is None else set(int(j) for j in scores.selected)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("feature_index,c,m,sc,selected\n")
        for j in range(scores.n_features):
            fh.write(
                f"{j},{float(scores.residual_ss[j])!r},{float(scores.total_ss[j])!r},"
                f"{float(scores.score[j])!r},{1 if j in selected else 0}\n"
            )

"""Evaluation metrics for clusterings and feature selections.

Label-matching metrics minimize over group permutations: exhaustively for
k <= 8, and through an assignment solver above that (exact for the
misclustering rate, a documented surrogate for the group-wise rate).
"""

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DimensionError, DomainError, PartitionError

# permutation enumeration is exact and affordable up to this many groups
ENUMERATION_LIMIT = 8


@dataclass
class EvalReport:
    """One row of evaluation results; selection metrics are optional."""

    misclustering: float
    groupwise_b: float
    ari: float
    f1: float | None = None
    precision: float | None = None
    recall: float | None = None

    def to_text(self) -> str:
        lines = [
            f"misclustering = {self.misclustering!r}",
            f"groupwise_b = {self.groupwise_b!r}",
            f"ari = {self.ari!r}",
        ]
        if self.f1 is not None:
            lines += [
                f"f1 = {self.f1!r}",
                f"precision = {self.precision!r}",
                f"recall = {self.recall!r}",
            ]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        header = "misclustering,groupwise_b,ari"
        row = f"{self.misclustering!r},{self.groupwise_b!r},{self.ari!r}"
        if self.f1 is not None:
            header += ",f1,precision,recall"
            row += f",{self.f1!r},{self.precision!r},{self.recall!r}"
        return header + "\n" + row + "\n"


def _as_labels(a, b):
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionError("label vectors must be 1-D and of equal length")
    if a.size == 0:
        raise DimensionError("label vectors must be non-empty")
    if a.min() < 0 or b.min() < 0:
        raise DimensionError("labels must be nonnegative")
    return a, b


def _contingency(a, b):
    k = int(max(a.max(), b.max())) + 1
    table = np.zeros((k, k), dtype=np.int64)
    np.add.at(table, (a, b), 1)
    return table


def misclustering_rate(truth, pred) -> float:
    """Fraction of samples whose label disagrees, minimized over all
    relabelings of the prediction."""
    truth, pred = _as_labels(truth, pred)
    table = _contingency(truth, pred)
    k = table.shape[0]
    n = truth.size
    if k <= ENUMERATION_LIMIT:
        best = max(
            sum(table[perm[b], b] for b in range(k))
            for perm in itertools.permutations(range(k))
        )
    else:
        # the objective is a linear assignment problem, so this is exact
        rows, cols = linear_sum_assignment(-table)
        best = int(table[rows, cols].sum())
    return (n - best) / n


def _groups_from_labels(labels, name):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1 or labels.size == 0:
        raise DimensionError(f"{name} must be a non-empty 1-D label vector")
    if labels.min() < 0:
        raise PartitionError(f"{name} labels must be nonnegative")
    k = int(labels.max()) + 1
    counts = np.bincount(labels, minlength=k)
    if (counts == 0).any():
        raise PartitionError(f"{name} must have every group 0..{k - 1} non-empty")
    return labels, k, counts


def groupwise_mislabel(truth, pred) -> float:
    """Worst-group mislabeling rate, minimized over group matchings.

    For a matching, each group contributes the larger of its false-positive
    fraction and its false-negative fraction; the score is the worst group
    under the best matching. Exhaustive over permutations for k <= 8;
    beyond that the matching maximizing total agreement is used, which may
    overstate the minimum (a warning is emitted).
    """
    truth, kt, t_sizes = _groups_from_labels(truth, "truth")
    pred, kp, g_sizes = _groups_from_labels(pred, "pred")
    if truth.size != pred.size:
        raise DimensionError("label vectors must have equal length")
    if kt != kp:
        raise PartitionError(f"partitions have different group counts: {kt} vs {kp}")
    k = kt
    inter = np.zeros((k, k), dtype=np.int64)  # inter[g, t] = |G_g cap T_t|
    np.add.at(inter, (pred, truth), 1)

    def worst(perm):
        # perm[a] = predicted group matched to true group a
        w = 0.0
        for a in range(k):
            g = perm[a]
            fp = (g_sizes[g] - inter[g, a]) / g_sizes[g]
            fn = (t_sizes[a] - inter[g, a]) / t_sizes[a]
            w = max(w, fp, fn)
        return w

    if k <= ENUMERATION_LIMIT:
        return min(worst(perm) for perm in itertools.permutations(range(k)))
    warnings.warn(
        "groupwise_mislabel with more than 8 groups is evaluated at the "
        "max-agreement matching and may not be the exact minimum",
        stacklevel=2,
    )
    rows, cols = linear_sum_assignment(-inter)
    perm = [0] * k
    for g, t in zip(rows, cols):
        perm[t] = g
    return worst(perm)


def adjusted_rand_index(a, b) -> float:
    """Chance-corrected pair-counting agreement between two labelings.

    Returns 1 for identical partitions; a degenerate zero denominator
    (both partitions trivially equal) also returns 1.
    """
    a, b = _as_labels(a, b)
    table = _contingency(a, b)
    n = a.size

    def comb2(x):
        return x * (x - 1) / 2.0

    sum_cells = comb2(table).sum()
    sum_rows = comb2(table.sum(axis=1)).sum()
    sum_cols = comb2(table.sum(axis=0)).sum()
    total = comb2(n)
    expected = sum_rows * sum_cols / total if total > 0 else 0.0
    denom = 0.5 * (sum_rows + sum_cols) - expected
    if denom == 0:
        return 1.0
    return float((sum_cells - expected) / denom)


def selection_f1(true_set, est_set) -> tuple[float, float, float]:
    """F1, precision, and recall of an estimated feature set against the
    true one. Empty sets contribute 0 instead of dividing by zero."""
    t = set(int(j) for j in true_set)
    e = set(int(j) for j in est_set)
    hit = len(t & e)
    precision = hit / len(e) if e else 0.0
    recall = hit / len(t) if t else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return f1, precision, recall


def snr_per_feature(centers, cluster_sizes, noise_sds) -> np.ndarray:
    """Size-weighted between-cluster variance of each column divided by
    n * sd_j^2. Columns where all centers agree contribute 0."""
    centers = np.asarray(centers, dtype=np.float64)
    sizes = np.asarray(cluster_sizes, dtype=np.float64)
    sds = np.asarray(noise_sds, dtype=np.float64)
    if centers.ndim != 2 or sizes.shape[0] != centers.shape[0]:
        raise DimensionError("cluster_sizes must have one entry per center row")
    if sds.shape[0] != centers.shape[1]:
        raise DimensionError("noise_sds must have one entry per column")
    n = sizes.sum()
    weighted_mean = (sizes @ centers) / n
    between = sizes @ (centers - weighted_mean) ** 2
    informative = between > 0
    if (sds[informative] <= 0).any():
        raise DomainError("noise sd must be positive on informative columns")
    out = np.zeros(centers.shape[1])
    out[informative] = between[informative] / (n * sds[informative] ** 2)
    return out


def empirical_snr(centers, cluster_sizes, noise_sds) -> float:
    """Minimum per-feature signal-to-noise ratio over informative columns
    (columns whose centers actually differ)."""
    per = snr_per_feature(centers, cluster_sizes, noise_sds)
    centers = np.asarray(centers, dtype=np.float64)
    sizes = np.asarray(cluster_sizes, dtype=np.float64)
    weighted_mean = (sizes @ centers) / sizes.sum()
    informative = (sizes @ (centers - weighted_mean) ** 2) > 0
    if not informative.any():
        raise DomainError("no informative columns: all centers coincide")
    return float(per[informative].min())


def center_separation(centers) -> tuple[float, float, float]:
    """Minimum and maximum pairwise distance between center rows, and their
    ratio (inf when two centers coincide)."""
    centers = np.asarray(centers, dtype=np.float64)
    k = centers.shape[0]
    if k < 2:
        raise DimensionError("need at least 2 centers")
    dmin, dmax = math.inf, 0.0
    for u in range(k):
        for v in range(u + 1, k):
            d = float(np.linalg.norm(centers[u] - centers[v]))
            dmin = min(dmin, d)
            dmax = max(dmax, d)
    lam = dmax / dmin if dmin > 0 else math.inf
    return dmin, dmax, lam


def evaluate(truth, pred, true_support=None, est_support=None) -> EvalReport:
    """Bundle the label metrics (and selection metrics when supports are
    given) into one report."""
    mis = misclustering_rate(truth, pred)
    b = groupwise_mislabel(truth, pred)
    ari = adjusted_rand_index(truth, pred)
    if true_support is not None and est_support is not None:
        f1, prec, rec = selection_f1(true_support, est_support)
        return EvalReport(mis, b, ari, f1=f1, precision=prec, recall=rec)
    return EvalReport(mis, b, ari)

"""End-to-end three-stage pipeline and tuning helpers.

Stage 1 clusters spectrally on all columns to get provisional labels,
stage 2 scores every feature against those labels and keeps the ones the
labels explain well, stage 3 re-clusters on the kept columns (variant
"scfs1") and optionally refines with Lloyd iterations (variant "scfs2").
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, SelectionEmptyError
from .feature_select import FeatureScores, score_features, select_threshold, select_top_m
from .kmeans import KMeansParams, kmeans, lloyd_from_labels
from .matrix_core import DataMatrix, standardize, top_k_left_singular
from .rng import derive_rng
from .spectral import spectral_cluster_details
from .speclloyd import default_iteration_count

VARIANTS = ("scfs1", "scfs2")

# sub-stream keys under the pipeline seed
_AUTOK_KEY, _STAGE1_KEY, _STAGE3_KEY = 0, 1, 3

# a turn weaker than this in the variation-explained curve is flagged as
# low confidence (calibrated on pure-noise draws, whose turn strength stays
# below ~0.06)
ELBOW_FLATNESS = 0.08


@dataclass
class PipelineConfig:
    """Run settings; ``k="auto"`` selects the cluster count from the data.

    ``iterations=None`` means the ceil(4 ln n) default. ``fallback_top_m``
    (default ceil(0.05 p)) is the minimum number of features stage 3 runs
    on: when the threshold keeps fewer than that, the selection is topped
    up with the best-scoring features.
    """

    k: int | str = "auto"
    tau: float = 0.9
    iterations: int | None = None
    restarts: int = 10
    max_iter: int = 100
    seed: int = 0
    variant: str = "scfs2"
    fallback_top_m: int | None = None

    def validate(self) -> None:
        if self.k != "auto":
            if not isinstance(self.k, (int, np.integer)) or self.k < 2:
                raise DomainError(f'k must be "auto" or an integer >= 2, got {self.k!r}')
        if not 0.0 < self.tau < 1.0:
            raise DomainError(f"tau must lie in (0, 1), got {self.tau}")
        if self.iterations is not None and self.iterations < 0:
            raise DomainError("iterations must be nonnegative")
        if self.restarts < 1 or self.max_iter < 1:
            raise DomainError("restarts and max_iter must be at least 1")
        if self.variant not in VARIANTS:
            raise DomainError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.fallback_top_m is not None and self.fallback_top_m < 1:
            raise DomainError("fallback_top_m must be at least 1")


@dataclass
class PipelineReport:
    """Everything a run produced: final labels, the feature set, per-feature
    scores, the stage-1 labels, the cluster count used, and run diagnostics."""

    labels: np.ndarray
    selected: np.ndarray
    scores: FeatureScores
    stage1_labels: np.ndarray
    k_used: int
    diagnostics: dict


@dataclass
class ClusterCountSelection:
    """Chosen cluster count, the variation-explained curve behind it, and
    whether the elbow was pronounced enough to trust."""

    k: int
    xi_curve: np.ndarray
    confident: bool


@dataclass
class _StageOutputs:
    stage1_labels: np.ndarray
    scores: FeatureScores
    selected: np.ndarray
    scfs1_labels: np.ndarray
    scfs2_labels: np.ndarray
    k_used: int
    diagnostics: dict


def select_num_clusters(
    m: DataMatrix,
    k_max: int,
    params: KMeansParams | None = None,
    rng: np.random.Generator | None = None,
) -> ClusterCountSelection:
    """Pick the cluster count from the variation-explained curve.

    For each k the curve holds 1 - within-SS/total-SS of k-means on the
    top-k singular basis (0 at k=1 by convention). Because each k uses its
    own basis, the curve rises while added singular directions still carry
    cluster structure and falls once they are noise, so the change point is
    the curve maximum over 2..k_max. Confidence is the discrete second
    difference at the chosen k: below ``ELBOW_FLATNESS`` (or a maximum
    sitting at the k_max boundary) the flag is cleared.
    """
    n, p = m.rows, m.cols
    if k_max < 3:
        raise DomainError(f"k_max must be at least 3, got {k_max}")
    if k_max > min(n, p):
        raise DimensionError(f"k_max={k_max} exceeds min(n, p)={min(n, p)}")
    xi = np.zeros(k_max)
    for k in range(2, k_max + 1):
        basis = top_k_left_singular(m, k)
        u = basis.vectors
        result = kmeans(u, k, params=params, rng=rng)
        total = float(np.sum((u - u.mean(axis=0)) ** 2))
        xi[k - 1] = 1.0 - result.objective / total if total > 0 else 0.0
    best = int(np.argmax(xi[1:])) + 2
    if best < k_max:
        strength = 2 * xi[best - 1] - xi[best - 2] - xi[best]
        confident = bool(strength >= ELBOW_FLATNESS)
    else:
        confident = False  # still rising at the boundary: range too small
    return ClusterCountSelection(k=best, xi_curve=xi, confident=confident)


def _run_stages(m: DataMatrix, cfg: PipelineConfig) -> _StageOutputs:
    cfg.validate()
    if not m.is_standardized:
        m = standardize(m)
    n, p = m.rows, m.cols
    params = KMeansParams(restarts=cfg.restarts, max_iter=cfg.max_iter)
    diagnostics: dict = {"seed": cfg.seed, "n": n, "p": p}

    if cfg.k == "auto":
        selection = select_num_clusters(
            m, min(20, n, p), params=params, rng=derive_rng(cfg.seed, _AUTOK_KEY)
        )
        k = selection.k
        diagnostics["k_source"] = "auto"
        diagnostics["k_confident"] = selection.confident
    else:
        k = int(cfg.k)
        diagnostics["k_source"] = "fixed"
    if k > min(n, p):
        raise DimensionError(f"k={k} exceeds min(n, p)={min(n, p)}")

    stage1_labels, stage1_km, _ = spectral_cluster_details(
        m, k, params=params, rng=derive_rng(cfg.seed, _STAGE1_KEY)
    )
    diagnostics["stage1_objective"] = stage1_km.objective
    diagnostics["stage1_iterations"] = stage1_km.iterations
    diagnostics["stage1_restart"] = stage1_km.restart_index

    scores = score_features(m, stage1_labels)
    # the fallback count doubles as a floor: a threshold pass that keeps
    # fewer features than this is topped up with the next-best scores
    # (top-m by score always contains every feature the threshold kept)
    floor = min(max(cfg.fallback_top_m or math.ceil(0.05 * p), k), p)
    try:
        selected = select_threshold(scores, cfg.tau)
        fallback = selected.size < floor
    except SelectionEmptyError:
        fallback = True
    if fallback:
        selected = select_top_m(scores, floor)
    diagnostics["fallback_engaged"] = fallback
    scores.selected = selected
    scores.tau = cfg.tau
    diagnostics["selected_count"] = int(selected.size)

    sub = m.values[:, selected]
    scfs1_labels, stage3_km, _ = spectral_cluster_details(
        DataMatrix(sub), k, params=params, rng=derive_rng(cfg.seed, _STAGE3_KEY)
    )
    diagnostics["stage3_objective"] = stage3_km.objective
    diagnostics["stage3_iterations"] = stage3_km.iterations
    diagnostics["stage3_restart"] = stage3_km.restart_index

    budget = cfg.iterations if cfg.iterations is not None else default_iteration_count(n)
    diagnostics["iteration_budget"] = budget
    if cfg.variant == "scfs2" and budget > 0:
        refined, _ = lloyd_from_labels(sub, scfs1_labels, k=k, max_iter=budget)
        scfs2_labels = refined.labels
        diagnostics["lloyd_iterations"] = refined.iterations
        diagnostics["final_within_ss"] = refined.objective
    else:
        base, _ = lloyd_from_labels(sub, scfs1_labels, k=k, max_iter=0)
        scfs2_labels = scfs1_labels
        diagnostics["lloyd_iterations"] = 0
        diagnostics["final_within_ss"] = base.objective

    return _StageOutputs(
        stage1_labels=stage1_labels,
        scores=scores,
        selected=selected,
        scfs1_labels=scfs1_labels,
        scfs2_labels=scfs2_labels,
        k_used=k,
        diagnostics=diagnostics,
    )


def run_scfs(m: DataMatrix, cfg: PipelineConfig) -> PipelineReport:
    """Run the full pipeline and return the report for the configured variant."""
    out = _run_stages(m, cfg)
    labels = out.scfs1_labels if cfg.variant == "scfs1" else out.scfs2_labels
    return PipelineReport(
        labels=labels,
        selected=out.selected,
        scores=out.scores,
        stage1_labels=out.stage1_labels,
        k_used=out.k_used,
        diagnostics=out.diagnostics,
    )


def report_to_text(report: PipelineReport) -> str:
    """Flatten a report into a deterministic key = value document.

    Labels and scores are written to their own CSV files by the callers;
    here the selected set is inlined as a comma-joined index list.
    """
    lines = [
        "schema = scfs-report-1",
        f"n = {report.labels.shape[0]}",
        f"k_used = {report.k_used}",
        f"selected_count = {report.selected.size}",
        "selected = " + ",".join(str(int(j)) for j in report.selected),
    ]
    for key in sorted(report.diagnostics):
        value = report.diagnostics[key]
        if isinstance(value, (float, np.floating)):
            lines.append(f"{key} = {float(value)!r}")
        else:
            lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def write_labels_csv(path, labels) -> None:
    """One 0-based integer label per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for v in np.asarray(labels, dtype=np.int64):
            fh.write(f"{int(v)}\n")


def read_labels_csv(path) -> np.ndarray:
    """Read labels written by :func:`write_labels_csv` (header tolerated)."""
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            token = line.strip()
            if token == "":
                continue
            try:
                values.append(int(float(token)))
            except ValueError:
                if i == 0:
                    continue  # header row
                raise DomainError(f"{path}: line {i + 1}: not an integer label") from None
    if not values:
        raise DomainError(f"{path}: no labels found")
    return np.asarray(values, dtype=np.int64)

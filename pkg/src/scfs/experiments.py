"""Seeded Monte Carlo experiment grids.

Three experiment kinds are supported, each driven by a declarative JSON
config (see README for the schema):

* ``feature_selection`` - F1/precision/recall of the score threshold (or a
  top-s rule) against corrupted initial labels, over a grid of signal
  strengths, sample-size ratios, and corruption rates.
* ``method_comparison`` - mean misclustering of the spectral+Lloyd
  baseline on all columns versus the pipeline variants, over a grid of
  sample-size ratios.
* ``error_sweep`` - mean spectral-clustering error while one generator
  parameter sweeps and the rest stay fixed.

Repetition r of cell c runs on the derived stream (seed, c, r), so results
do not depend on scheduling or on how many workers run them.
"""

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .errors import ConfigError, SelectionEmptyError
from .feature_select import score_features, select_threshold, select_top_m
from .kmeans import KMeansParams, lloyd_from_labels
from .metrics import misclustering_rate, selection_f1
from .pipeline import PipelineConfig, _run_stages
from .rng import derive_rng, derive_seed
from .spectral import spectral_cluster
from .speclloyd import default_iteration_count
from .synthgen import SynthSpec, corrupt_labels, generate_data, samples_for_log_ratio

METHODS = ("speclloyd", "scfs1", "scfs2")

_REP_GEN_KEY = 0
_REP_GUESS_KEY = 1
_REP_PIPE_KEY = 2
_REP_SPECTRAL_KEY = 3


def resolve_jobs(jobs=None) -> int:
    """Worker count: explicit argument, then SCFS_JOBS, then the CPU count."""
    if jobs is None:
        env = os.environ.get("SCFS_JOBS", "").strip()
        jobs = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(jobs))


def _parallel_map(fn, tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def _require(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"config is missing required key {key!r}")
    return cfg[key]


def _as_list(value):
    return list(value) if isinstance(value, (list, tuple)) else [value]


# ---------------------------------------------------------------------------
# feature selection grid
# ---------------------------------------------------------------------------

def _feature_selection_rep(task):
    (base_seed, cell, rep, k, p, s, sigma_k, ratio, eta, tau, mode) = task
    n = samples_for_log_ratio(ratio, p)
    spec = SynthSpec(k=k, n=n, p=p, s=s, sigma_k=sigma_k,
                     seed=derive_seed(base_seed, cell, rep, _REP_GEN_KEY))
    data, truth, support = generate_data(spec)
    guess = corrupt_labels(truth, eta, k, derive_rng(base_seed, cell, rep, _REP_GUESS_KEY))

    scores = score_features(data, guess)
    if mode == "top_s":
        est = select_top_m(scores, s)
    else:
        try:
            est = select_threshold(scores, tau)
        except SelectionEmptyError:
            est = np.array([], dtype=np.int64)
    return selection_f1(support, est)


def run_feature_selection(cfg: dict, jobs=None) -> list[dict]:
    """Grid over (sigma_k, n_over_logp, eta); one output row per cell."""
    k = int(_require(cfg, "k"))
    p = int(_require(cfg, "p"))
    s = int(_require(cfg, "s"))
    sigma_grid = [float(v) for v in _as_list(_require(cfg, "sigma_k"))]
    ratio_grid = [float(v) for v in _as_list(_require(cfg, "n_over_logp"))]
    eta_grid = [float(v) for v in _as_list(_require(cfg, "eta"))]
    reps = int(cfg.get("reps", 50))
    seed = int(cfg.get("seed", 0))
    tau = float(cfg.get("tau", 0.9))
    mode = cfg.get("selection", "threshold")
    if mode not in ("threshold", "top_s"):
        raise ConfigError(f"selection must be 'threshold' or 'top_s', got {mode!r}")

    cells = [
        (sigma_k, ratio, eta)
        for sigma_k in sigma_grid
        for ratio in ratio_grid
        for eta in eta_grid
    ]
    tasks = [
        (seed, ci, rep, k, p, s, sigma_k, ratio, eta, tau, mode)
        for ci, (sigma_k, ratio, eta) in enumerate(cells)
        for rep in range(reps)
    ]
    results = _parallel_map(_feature_selection_rep, tasks, resolve_jobs(jobs))

    rows = []
    for ci, (sigma_k, ratio, eta) in enumerate(cells):
        chunk = np.array(results[ci * reps : (ci + 1) * reps])
        rows.append(
            {
                "sigma_k": sigma_k,
                "n_over_logp": ratio,
                "eta": eta,
                "f1_mean": float(chunk[:, 0].mean()),
                "f1_sd": float(chunk[:, 0].std(ddof=1)) if reps > 1 else 0.0,
                "precision_mean": float(chunk[:, 1].mean()),
                "recall_mean": float(chunk[:, 2].mean()),
            }
        )
    return rows


# ---------------------------------------------------------------------------
# method comparison grid
# ---------------------------------------------------------------------------

def _method_comparison_rep(task):
    (base_seed, cell, rep, k, p, s, sigma_k, ratio, noise, tau,
     iterations, restarts, max_iter, fallback_top_m) = task
    n = samples_for_log_ratio(ratio, p)
    spec = SynthSpec(k=k, n=n, p=p, s=s, sigma_k=sigma_k, noise=noise,
                     seed=derive_seed(base_seed, cell, rep, _REP_GEN_KEY))
    data, truth, _ = generate_data(spec)

    pipe_cfg = PipelineConfig(
        k=k,
        tau=tau,
        iterations=iterations,
        restarts=restarts,
        max_iter=max_iter,
        seed=derive_seed(base_seed, cell, rep, _REP_PIPE_KEY),
        variant="scfs2",
        fallback_top_m=fallback_top_m,
    )
    out = _run_stages(data, pipe_cfg)

    # baseline: same spectral initialization, Lloyd refinement on all columns
    budget = iterations if iterations is not None else default_iteration_count(n)
    baseline, _ = lloyd_from_labels(data.values, out.stage1_labels, k=k, max_iter=budget)

    return (
        misclustering_rate(truth, baseline.labels),
        misclustering_rate(truth, out.scfs1_labels),
        misclustering_rate(truth, out.scfs2_labels),
    )


def run_method_comparison(cfg: dict, jobs=None) -> list[dict]:
    """Grid over n_over_logp; one output row per (cell, method)."""
    k = int(_require(cfg, "k"))
    p = int(_require(cfg, "p"))
    s = int(_require(cfg, "s"))
    sigma_k = float(_require(cfg, "sigma_k"))
    ratio_grid = [float(v) for v in _as_list(_require(cfg, "n_over_logp"))]
    noise = cfg.get("noise", "gaussian")
    reps = int(cfg.get("reps", 50))
    seed = int(cfg.get("seed", 0))
    tau = float(cfg.get("tau", 0.9))
    iterations = cfg.get("iterations")
    iterations = int(iterations) if iterations is not None else None
    restarts = int(cfg.get("restarts", 10))
    max_iter = int(cfg.get("max_iter", 100))
    fallback_top_m = cfg.get("fallback_top_m")
    fallback_top_m = int(fallback_top_m) if fallback_top_m is not None else None

    tasks = [
        (seed, ci, rep, k, p, s, sigma_k, ratio, noise, tau,
         iterations, restarts, max_iter, fallback_top_m)
        for ci, ratio in enumerate(ratio_grid)
        for rep in range(reps)
    ]
    results = _parallel_map(_method_comparison_rep, tasks, resolve_jobs(jobs))

    rows = []
    for ci, ratio in enumerate(ratio_grid):
        chunk = np.array(results[ci * reps : (ci + 1) * reps])
        for mi, method in enumerate(METHODS):
            rows.append(
                {
                    "n_over_logp": ratio,
                    "method": method,
                    "mean_error": float(chunk[:, mi].mean()),
                    "sd_error": float(chunk[:, mi].std(ddof=1)) if reps > 1 else 0.0,
                }
            )
    return rows


# ---------------------------------------------------------------------------
# single-parameter error sweep
# ---------------------------------------------------------------------------

def _error_sweep_rep(task):
    (base_seed, cell, rep, k, n, p, s, sigma_k, restarts, max_iter) = task
    spec = SynthSpec(k=k, n=n, p=p, s=s, sigma_k=sigma_k,
                     seed=derive_seed(base_seed, cell, rep, _REP_GEN_KEY))
    data, truth, _ = generate_data(spec)
    labels = spectral_cluster(
        data, k, params=KMeansParams(restarts=restarts, max_iter=max_iter),
        rng=derive_rng(base_seed, cell, rep, _REP_SPECTRAL_KEY),
    )
    return misclustering_rate(truth, labels)


def run_error_sweep(cfg: dict, jobs=None) -> list[dict]:
    """Sweep one of p, n, sigma_k while the others stay fixed; one row per value."""
    k = int(_require(cfg, "k"))
    base = {
        "n": int(_require(cfg, "n")),
        "p": int(_require(cfg, "p")),
        "s": int(_require(cfg, "s")),
        "sigma_k": float(_require(cfg, "sigma_k")),
    }
    param = _require(cfg, "sweep_param")
    if param not in ("p", "n", "sigma_k"):
        raise ConfigError(f"sweep_param must be 'p', 'n', or 'sigma_k', got {param!r}")
    values = _as_list(_require(cfg, "sweep_values"))
    reps = int(cfg.get("reps", 50))
    seed = int(cfg.get("seed", 0))
    restarts = int(cfg.get("restarts", 10))
    max_iter = int(cfg.get("max_iter", 100))

    tasks = []
    for ci, value in enumerate(values):
        cell = dict(base)
        cell[param] = float(value) if param == "sigma_k" else int(value)
        tasks += [
            (seed, ci, rep, k, cell["n"], cell["p"], cell["s"], cell["sigma_k"],
             restarts, max_iter)
            for rep in range(reps)
        ]
    results = _parallel_map(_error_sweep_rep, tasks, resolve_jobs(jobs))

    rows = []
    for ci, value in enumerate(values):
        chunk = np.array(results[ci * reps : (ci + 1) * reps])
        rows.append(
            {
                "value": float(value),
                "mean_error": float(chunk.mean()),
                "sd_error": float(chunk.std(ddof=1)) if reps > 1 else 0.0,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# dispatch and output
# ---------------------------------------------------------------------------

RUNNERS = {
    "feature_selection": (run_feature_selection,
                          ("sigma_k", "n_over_logp", "eta", "f1_mean", "f1_sd",
                           "precision_mean", "recall_mean")),
    "method_comparison": (run_method_comparison,
                          ("n_over_logp", "method", "mean_error", "sd_error")),
    "error_sweep": (run_error_sweep, ("value", "mean_error", "sd_error")),
}


def run_experiment(cfg: dict, jobs=None) -> tuple[list[dict], tuple[str, ...]]:
    """Dispatch on cfg["experiment"]; returns (rows, column order)."""
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    kind = _require(cfg, "experiment")
    if kind not in RUNNERS:
        raise ConfigError(f"unknown experiment kind {kind!r}; expected one of {sorted(RUNNERS)}")
    runner, columns = RUNNERS[kind]
    return runner(cfg, jobs=jobs), columns


def rows_to_csv(rows: list[dict], columns: tuple[str, ...], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            cells = []
            for col in columns:
                v = row[col]
                cells.append(repr(float(v)) if isinstance(v, float) else str(v))
            fh.write(",".join(cells) + "\n")

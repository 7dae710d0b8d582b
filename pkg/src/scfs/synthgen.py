"""Synthetic sparse-mixture data: orthonormal-row centers on a small support,
additive Gaussian or heavy-tailed noise, and label corruption for
initial-guess experiments."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GenerationError
from .matrix_core import DataMatrix, standardize
from .rng import derive_rng

# sub-stream keys under the spec seed
_CENTER_KEY, _LABEL_KEY, _NOISE_KEY = 0, 1, 2

NOISE_KINDS = ("gaussian", "t2", "none")
ASSIGNMENT_KINDS = ("uniform", "balanced")


@dataclass
class SynthSpec:
    """Parameters of one synthetic data set.

    k clusters, n samples, p features of which the first s are informative,
    signal strength sigma_k. ``noise`` is "gaussian", "t2" (Student t with
    2 degrees of freedom), or "none" (test hook). ``assignment`` picks
    labels i.i.d. uniform or as-balanced-as-possible.
    """

    k: int
    n: int
    p: int
    s: int
    sigma_k: float
    noise: str = "gaussian"
    seed: int = 0
    assignment: str = "uniform"

    def validate(self) -> None:
        if self.k < 1 or self.n < 1 or self.p < 1 or self.s < 1:
            raise DomainError("k, n, p, s must all be at least 1")
        if self.s > self.p:
            raise DomainError(f"s={self.s} cannot exceed p={self.p}")
        if self.k > self.s:
            raise DomainError(f"k={self.k} cannot exceed s={self.s}")
        if self.k > self.n:
            raise DomainError(f"k={self.k} cannot exceed n={self.n}")
        if not self.sigma_k > 0:
            raise DomainError(f"sigma_k must be positive, got {self.sigma_k}")
        if self.noise not in NOISE_KINDS:
            raise DomainError(f"noise must be one of {NOISE_KINDS}, got {self.noise!r}")
        if self.assignment not in ASSIGNMENT_KINDS:
            raise DomainError(
                f"assignment must be one of {ASSIGNMENT_KINDS}, got {self.assignment!r}"
            )


def samples_for_log_ratio(ratio: float, p: int) -> int:
    """Sample count from an n/log(p) ratio, natural log, rounded up."""
    if p < 2:
        raise DomainError("p must be at least 2 to derive n from n/log p")
    return math.ceil(ratio * math.log(p))


def generate_centers(spec: SynthSpec, rng: np.random.Generator | None = None) -> np.ndarray:
    """k x p center matrix: the first k rows of the left singular matrix of
    an s x s standard Gaussian draw, scaled by sigma_k, zero elsewhere.

    Rows are orthonormal before scaling, so every nonzero singular value of
    the result equals sigma_k and all pairwise row distances are equal.
    """
    spec.validate()
    if rng is None:
        rng = derive_rng(spec.seed, _CENTER_KEY)
    gauss = rng.standard_normal((spec.s, spec.s))
    left, _, _ = np.linalg.svd(gauss)
    centers = np.zeros((spec.k, spec.p))
    centers[:, : spec.s] = spec.sigma_k * left[: spec.k, :]
    return centers


def generate_labels(spec: SynthSpec, rng: np.random.Generator | None = None) -> np.ndarray:
    """Cluster label per sample. Uniform mode redraws the whole vector until
    every cluster is hit (capped at 1000 attempts)."""
    spec.validate()
    if rng is None:
        rng = derive_rng(spec.seed, _LABEL_KEY)
    if spec.assignment == "balanced":
        reps = math.ceil(spec.n / spec.k)
        pool = np.tile(np.arange(spec.k), reps)[: spec.n]
        return rng.permutation(pool)
    for _ in range(1000):
        labels = rng.integers(0, spec.k, size=spec.n)
        if np.bincount(labels, minlength=spec.k).min() > 0:
            return labels
    raise GenerationError("could not draw labels with every cluster non-empty")


def _draw_noise(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    shape = (spec.n, spec.p)
    if spec.noise == "gaussian":
        return rng.standard_normal(shape)
    if spec.noise == "t2":
        # standard t with 2 df: normal over sqrt(chi2_2 / 2)
        return rng.standard_normal(shape) / np.sqrt(rng.chisquare(2, shape) / 2.0)
    return np.zeros(shape)


def generate_data(
    spec: SynthSpec, rng: np.random.Generator | None = None
) -> tuple[DataMatrix, np.ndarray, np.ndarray]:
    """Full draw: centers, labels, noise, then column standardization.

    Returns the standardized matrix, the true labels, and the informative
    support {0, ..., s-1}.
    """
    spec.validate()
    if rng is None:
        rng_c = derive_rng(spec.seed, _CENTER_KEY)
        rng_l = derive_rng(spec.seed, _LABEL_KEY)
        rng_w = derive_rng(spec.seed, _NOISE_KEY)
    else:
        rng_c = rng_l = rng_w = rng
    centers = generate_centers(spec, rng_c)
    labels = generate_labels(spec, rng_l)
    raw = centers[labels, :] + _draw_noise(spec, rng_w)
    data = standardize(DataMatrix(raw))
    return data, labels, np.arange(spec.s)


def corrupt_labels(
    truth: np.ndarray, eta: float, k: int, rng: np.random.Generator
) -> np.ndarray:
    """Keep each label with probability 1 - eta, otherwise replace it with
    one of the other k-1 values uniformly."""
    if not 0.0 <= eta < 1.0:
        raise DomainError(f"eta must lie in [0, 1), got {eta}")
    truth = np.asarray(truth, dtype=np.int64)
    out = truth.copy()
    if k < 2:
        return out
    flip = rng.random(truth.shape[0]) < eta
    # uniform over the k-1 values different from the current label
    shifts = rng.integers(1, k, size=truth.shape[0])
    out[flip] = (truth[flip] + shifts[flip]) % k
    return out

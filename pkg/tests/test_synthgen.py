import numpy as np
import pytest

from scfs.errors import DomainError
from scfs.matrix_core import DataMatrix, standardize
from scfs.metrics import misclustering_rate
from scfs.rng import derive_rng
from scfs.synthgen import (
    SynthSpec,
    corrupt_labels,
    generate_centers,
    generate_data,
    generate_labels,
    samples_for_log_ratio,
)


def _kurtosis(x):
    c = x - x.mean()
    return float((c**4).mean() / (c**2).mean() ** 2)


def test_centers_have_orthonormal_scaled_rows():
    spec = SynthSpec(k=4, n=10, p=30, s=12, sigma_k=3.5, seed=1)
    centers = generate_centers(spec)
    gram = centers @ centers.T
    assert np.abs(gram - 3.5**2 * np.eye(4)).max() <= 1e-8
    svs = np.linalg.svd(centers, compute_uv=False)[:4]
    assert svs == pytest.approx(np.full(4, 3.5), abs=1e-8)
    assert np.all(centers[:, 12:] == 0.0)


def test_labels_uniform_proportions():
    spec = SynthSpec(k=4, n=100_000, p=8, s=4, sigma_k=1.0, seed=2)
    labels = generate_labels(spec)
    props = np.bincount(labels, minlength=4) / labels.size
    assert np.abs(props - 0.25).max() <= 0.01


def test_labels_with_n_equal_k_form_permutation():
    spec = SynthSpec(k=5, n=5, p=10, s=5, sigma_k=1.0, seed=3)
    labels = generate_labels(spec)
    assert sorted(labels.tolist()) == [0, 1, 2, 3, 4]


def test_labels_single_cluster():
    spec = SynthSpec(k=1, n=7, p=4, s=2, sigma_k=1.0, seed=4)
    assert np.all(generate_labels(spec) == 0)


def test_balanced_assignment_sizes():
    spec = SynthSpec(k=4, n=103, p=8, s=4, sigma_k=1.0, seed=5, assignment="balanced")
    counts = np.bincount(generate_labels(spec), minlength=4)
    assert counts.max() - counts.min() <= 1


def test_zero_noise_rows_collapse_to_k_points():
    spec = SynthSpec(k=3, n=20, p=15, s=6, sigma_k=2.0, noise="none", seed=6)
    centers = generate_centers(spec)
    labels = generate_labels(spec)
    raw = centers[labels]
    assert np.unique(raw, axis=0).shape[0] == 3
    # the full draw still standardizes without issue
    data, got_labels, support = generate_data(spec)
    assert np.array_equal(got_labels, labels)
    assert support.tolist() == list(range(6))
    assert np.all(data.values[:, 6:] == 0.0)  # degenerate noise-free columns


def test_gaussian_noise_columns_have_normal_kurtosis():
    spec = SynthSpec(k=2, n=10_000, p=6, s=2, sigma_k=3.0, seed=7)
    data, _, _ = generate_data(spec)
    for j in range(2, 6):
        assert 2.8 < _kurtosis(data.values[:, j]) < 3.2


def test_t2_noise_is_heavy_tailed_where_gaussian_is_not():
    heavy = 0
    for rep in range(20):
        spec = SynthSpec(k=2, n=10_000, p=4, s=2, sigma_k=3.0, noise="t2", seed=100 + rep)
        data, _, _ = generate_data(spec)
        excess = _kurtosis(data.values[:, 3]) - 3.0
        heavy += excess > 1.0
    assert heavy >= 19  # at least 95 percent of draws


def test_t2_median_near_zero():
    rng = derive_rng(300)
    draws = rng.standard_normal(100_000) / np.sqrt(rng.chisquare(2, 100_000) / 2.0)
    assert abs(float(np.median(draws))) <= 0.02


def test_corrupt_labels_identity_at_zero():
    truth = derive_rng(8).integers(0, 4, 50)
    assert np.array_equal(corrupt_labels(truth, 0.0, 4, derive_rng(9)), truth)


def test_corrupt_labels_rate_matches_eta():
    truth = derive_rng(10).integers(0, 4, 100_000)
    noisy = corrupt_labels(truth, 0.3, 4, derive_rng(11))
    rate = float((noisy != truth).mean())
    assert abs(rate - 0.3) <= 0.01


def test_corrupt_labels_two_cluster_flip_goes_to_other_value():
    truth = np.zeros(1000, dtype=int)
    noisy = corrupt_labels(truth, 0.3, 2, derive_rng(12))
    assert set(np.unique(noisy)) <= {0, 1}
    assert (noisy == 1).sum() > 0


def test_corrupt_misclustering_matches_flip_rate_for_small_eta():
    truth = derive_rng(13).integers(0, 4, 2000)
    noisy = corrupt_labels(truth, 0.05, 4, derive_rng(14))
    assert misclustering_rate(truth, noisy) == pytest.approx(float((noisy != truth).mean()))


def test_seed_determinism():
    spec = SynthSpec(k=3, n=40, p=25, s=10, sigma_k=2.0, seed=909)
    a, la, _ = generate_data(spec)
    b, lb, _ = generate_data(spec)
    assert a.values.tobytes() == b.values.tobytes()
    assert np.array_equal(la, lb)


def test_spec_validation():
    with pytest.raises(DomainError):
        SynthSpec(k=4, n=10, p=5, s=8, sigma_k=1.0).validate()  # s > p
    with pytest.raises(DomainError):
        SynthSpec(k=6, n=10, p=10, s=5, sigma_k=1.0).validate()  # k > s
    with pytest.raises(DomainError):
        SynthSpec(k=4, n=3, p=10, s=5, sigma_k=1.0).validate()  # k > n
    with pytest.raises(DomainError):
        SynthSpec(k=2, n=10, p=10, s=5, sigma_k=0.0).validate()
    with pytest.raises(DomainError):
        SynthSpec(k=2, n=0, p=10, s=5, sigma_k=1.0).validate()
    with pytest.raises(DomainError):
        SynthSpec(k=2, n=10, p=10, s=5, sigma_k=1.0, noise="cauchy").validate()


def test_samples_for_log_ratio_uses_natural_log():
    assert samples_for_log_ratio(30, 8000) == 270
    assert samples_for_log_ratio(100, 500) == 622
    with pytest.raises(DomainError):
        samples_for_log_ratio(10, 1)


def test_generated_data_is_standardized():
    spec = SynthSpec(k=3, n=50, p=20, s=10, sigma_k=2.0, seed=15)
    data, _, _ = generate_data(spec)
    assert data.is_standardized
    live = ~data.degenerate
    assert np.abs(data.values[:, live].mean(axis=0)).max() < 1e-10
    assert np.abs(data.values[:, live].std(axis=0, ddof=1) - 1.0).max() < 1e-8

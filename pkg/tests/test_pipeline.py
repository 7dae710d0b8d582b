import math
from dataclasses import replace

import numpy as np
import pytest

from scfs.errors import DimensionError, DomainError
from scfs.matrix_core import DataMatrix
from scfs.metrics import misclustering_rate
from scfs.pipeline import (
    PipelineConfig,
    read_labels_csv,
    report_to_text,
    run_scfs,
    select_num_clusters,
    write_labels_csv,
)
from scfs.rng import derive_rng
from scfs.synthgen import SynthSpec, generate_data


def _table_style_data(seed, k=4, n=120, p=200, s=40, sigma_k=8.0, noise="gaussian"):
    spec = SynthSpec(k=k, n=n, p=p, s=s, sigma_k=sigma_k, noise=noise, seed=seed)
    return generate_data(spec)


def test_seed_determinism_byte_identical():
    data, _, _ = _table_style_data(1)
    cfg = PipelineConfig(k=4, seed=77)
    a = run_scfs(data, cfg)
    b = run_scfs(data, cfg)
    assert a.labels.tobytes() == b.labels.tobytes()
    assert a.selected.tobytes() == b.selected.tobytes()
    assert report_to_text(a) == report_to_text(b)


def test_variants_share_stage_one_and_selection():
    data, _, _ = _table_style_data(2)
    r1 = run_scfs(data, PipelineConfig(k=4, seed=5, variant="scfs1"))
    r2 = run_scfs(data, PipelineConfig(k=4, seed=5, variant="scfs2"))
    assert np.array_equal(r1.stage1_labels, r2.stage1_labels)
    assert np.array_equal(r1.selected, r2.selected)
    assert r1.scores.score.tobytes() == r2.scores.score.tobytes()


def test_scfs2_with_zero_iterations_equals_scfs1():
    data, _, _ = _table_style_data(3)
    cfg1 = PipelineConfig(k=4, seed=9, variant="scfs1", iterations=0)
    cfg2 = PipelineConfig(k=4, seed=9, variant="scfs2", iterations=0)
    a = run_scfs(data, cfg1)
    b = run_scfs(data, cfg2)
    assert np.array_equal(a.labels, b.labels)
    assert report_to_text(a) == report_to_text(b)


def test_zero_noise_gives_perfect_clustering():
    spec = SynthSpec(k=3, n=60, p=40, s=20, sigma_k=4.0, noise="none", seed=4)
    data, truth, _ = generate_data(spec)
    for variant in ("scfs1", "scfs2"):
        report = run_scfs(data, PipelineConfig(k=3, seed=11, variant=variant))
        assert misclustering_rate(truth, report.labels) == 0.0


def test_fallback_engages_on_uninformative_scores():
    # pure noise: no feature passes any sensible threshold, so the selection
    # is topped up to the floor and the report says so
    rng = derive_rng(42)
    data = DataMatrix(rng.normal(size=(50, 100)))
    report = run_scfs(data, PipelineConfig(k=3, tau=0.01, seed=13))
    assert report.diagnostics["fallback_engaged"] is True
    assert report.selected.size == math.ceil(0.05 * 100)

    custom = run_scfs(data, PipelineConfig(k=3, tau=0.01, seed=13, fallback_top_m=9))
    assert custom.selected.size == 9


def test_threshold_selection_above_floor_is_untouched():
    data, _, _ = _table_style_data(6, sigma_k=12.0)
    report = run_scfs(data, PipelineConfig(k=4, seed=21))
    if not report.diagnostics["fallback_engaged"]:
        assert np.all(report.scores.score[report.selected] <= 0.9)
        assert report.selected.size >= math.ceil(0.05 * 200)


def test_report_contents_and_serialization(tmp_path):
    data, _, _ = _table_style_data(7)
    report = run_scfs(data, PipelineConfig(k=4, seed=3))
    assert report.labels.shape == (120,)
    assert report.k_used == 4
    assert np.all(report.selected < 200)
    text = report_to_text(report)
    assert text.startswith("schema = scfs-report-1\n")
    assert "k_used = 4" in text
    assert "fallback_engaged" in text

    path = tmp_path / "labels.csv"
    write_labels_csv(path, report.labels)
    assert np.array_equal(read_labels_csv(path), report.labels)


def test_config_validation():
    data, _, _ = _table_style_data(8)
    with pytest.raises(DomainError):
        run_scfs(data, PipelineConfig(k=1, seed=0))
    with pytest.raises(DomainError):
        run_scfs(data, PipelineConfig(k=4, tau=1.5, seed=0))
    with pytest.raises(DomainError):
        run_scfs(data, PipelineConfig(k=4, variant="scfs3", seed=0))
    with pytest.raises(DomainError):
        run_scfs(data, PipelineConfig(k=4, restarts=0, seed=0))


def test_auto_k_on_well_separated_data():
    spec = SynthSpec(k=4, n=120, p=80, s=80, sigma_k=10.0, seed=9001)
    data, truth, _ = generate_data(spec)
    report = run_scfs(data, PipelineConfig(k="auto", seed=17))
    assert report.k_used == 4
    assert misclustering_rate(truth, report.labels) <= 0.05


def test_select_num_clusters_recovers_four_in_most_runs():
    hits = 0
    confident = 0
    for rep in range(50):
        spec = SynthSpec(k=4, n=120, p=80, s=80, sigma_k=10.0, seed=9000 + rep)
        data, _, _ = generate_data(spec)
        sel = select_num_clusters(data, 8, rng=derive_rng(9100, rep))
        hits += sel.k == 4
        confident += sel.confident
    assert hits >= 45  # 90 percent
    assert confident >= 45


def test_select_num_clusters_flags_pure_noise():
    flagged = 0
    for rep in range(20):
        spec = SynthSpec(k=1, n=120, p=80, s=2, sigma_k=1e-6, seed=9500 + rep)
        data, _, _ = generate_data(spec)
        sel = select_num_clusters(data, 8, rng=derive_rng(9600, rep))
        flagged += not sel.confident
    assert flagged >= 16  # 80 percent on noise-only data


def test_xi_curve_shape_on_clustered_data():
    spec = SynthSpec(k=4, n=120, p=80, s=80, sigma_k=10.0, seed=9009)
    data, _, _ = generate_data(spec)
    sel = select_num_clusters(data, 8, rng=derive_rng(9700))
    xi = sel.xi_curve
    assert xi[0] == 0.0
    assert xi[7] >= xi[1] - 0.05  # explained variation does not collapse
    assert np.argmax(xi) + 1 == 4  # peaks at the true cluster count


def test_select_num_clusters_bounds():
    data, _, _ = _table_style_data(10)
    with pytest.raises(DomainError):
        select_num_clusters(data, 2, rng=derive_rng(0))
    with pytest.raises(DimensionError):
        select_num_clusters(data, 121, rng=derive_rng(0))

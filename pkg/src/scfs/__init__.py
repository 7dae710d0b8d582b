"""High-dimensional clustering via spectral initialization, feature
screening, and Lloyd refinement on the selected features."""

from .errors import (
    ConfigError,
    CsvFormatError,
    DimensionError,
    DomainError,
    GenerationError,
    NumericalError,
    PartitionError,
    ScfsError,
    SelectionEmptyError,
)
from .matrix_core import (
    DataMatrix,
    EigenBasis,
    read_matrix_csv,
    standardize,
    top_k_left_singular,
    write_matrix_csv,
)
from .kmeans import KMeansParams, KMeansResult, kmeans, lloyd_from_labels, lloyd_run, seed_plus_plus
from .spectral import spectral_cluster, spectral_cluster_details
from .feature_select import (
    FeatureScores,
    population_r_squared,
    score_features,
    scores_to_csv,
    select_threshold,
    select_top_m,
)
from .speclloyd import default_iteration_count, spec_lloyd
from .pipeline import (
    ClusterCountSelection,
    PipelineConfig,
    PipelineReport,
    read_labels_csv,
    report_to_text,
    run_scfs,
    select_num_clusters,
    write_labels_csv,
)
from .synthgen import SynthSpec, corrupt_labels, generate_centers, generate_data, generate_labels, samples_for_log_ratio
from .metrics import (
    EvalReport,
    adjusted_rand_index,
    center_separation,
    empirical_snr,
    evaluate,
    groupwise_mislabel,
    misclustering_rate,
    selection_f1,
    snr_per_feature,
)
from .rng import derive_rng, derive_seed

__version__ = "0.1.0"

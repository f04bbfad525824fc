"""Noise-aware minimal selection of optical bandpass filters.

The library covers the full pipeline: spectral response integration,
spectral-angle adjacency, exact max-min filter selection (binary search
over angle values with an exact independent-set solver), per-band SNR
pruning, from-scratch random forest / gradient boosting classifiers with
stratified k-fold cross-validation, and the conditional selection loop
that grows a minimal filter subset to a target cross-validation score.
"""

__version__ = "0.1.0"

from .cfbs import (
    CfbsConfig,
    MinimalSelection,
    SweepCell,
    cfbs_select,
    evaluate_selection,
    greedy_expand,
    save_sweep_csv,
    sweep,
)
from .classify import (
    ClassifierSpec,
    CvReport,
    FoldPlan,
    TrainedModel,
    cross_val_score,
    fit,
    make_folds,
    predict,
)
from .dataset import (
    DEFAULT_GRID,
    LabeledDataset,
    SampleRecord,
    SyntheticConfig,
    generate_catalog,
    generate_synthetic,
    load_catalog_json,
    load_dataset_csv,
    save_catalog_json,
    save_dataset_csv,
    subset_catalog,
)
from .selection import (
    AngleGraph,
    SelectionResult,
    SelectionVector,
    build_adjacency,
    fbs_select,
    full_search_select,
    max_independent_set,
    min_pairwise_angle,
    spectral_angle,
    trim_to_n,
    uniform_select,
)
from .snr import BandSnr, SnrProfile, band_snr, prune_bands, save_snr_profile_csv, snr_profile
from .spectral import (
    FilterCatalog,
    FilterCurve,
    FilterMatrix,
    NormalizationParams,
    Spectrum,
    WavelengthGrid,
    apply_normalization,
    bandwidth_normalized_response,
    build_filter_matrix,
    denormalize,
    filter_response,
    fit_normalization,
    representative_spectra,
    response_matrix,
)

__all__ = [name for name in dir() if not name.startswith("_")]

"""Multiscale fractal texture descriptors, fusion, and classification.

The package follows the data flow of its CLI: images become 3-D surface
point sets; Bouligand-Minkowski dilation volumes (exact EDT) and the
Voss probability curve turn each window into a multiscale descriptor
vector; descriptor families are concatenated and projected by a
class-scatter discriminant; a deterministic linear SVM evaluates the
result under stratified cross-validation.
"""

from .baselines import BaselineConfig, fourier_descriptors, gabor_descriptors
from .classify import (
    ConfusionMatrix,
    EvalReport,
    SvmModel,
    cross_validate,
    fold_assignments,
    format_report_table,
    metrics_from_confusion,
    predict,
    train_svm,
)
from .errors import (
    AlignmentError,
    ConfigError,
    DegenerateInputError,
    FormatError,
    FraxelError,
    PairingError,
    ParameterError,
    ResourceError,
)
from .fusion import (
    FeatureMatrix,
    ScatterPair,
    apply_projection,
    concat_features,
    discriminant_transform,
    fit_pca_projection,
    fit_scatter_projection,
    pca_transform,
    scatter_matrices,
    scatter_spectrum,
)
from .images import (
    ManifestEntry,
    Surface,
    from_surface,
    load_image,
    load_manifest,
    luminance,
    save_image,
    save_manifest,
    synth_fbm,
    to_surface,
)
from .minkowski import (
    DilationVolumeCurve,
    DistanceField,
    attainable_radii,
    bm_descriptors,
    bm_dimension,
    dilation_volumes,
    edt3d,
)
from .pipeline import (
    RunConfig,
    SignatureRecord,
    extract_features,
    pair_faces,
    read_features,
    records_to_matrix,
    sweep_descriptors,
    write_features,
    write_report,
)
from .preprocess import WindowSet, extract_windows, radon_align
from .regression import FitResult, loglog_slope
from .voss import (
    ProbabilityCurve,
    probability_curve,
    voss_descriptors,
    voss_dimension,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "BaselineConfig",
    "ConfigError",
    "ConfusionMatrix",
    "DegenerateInputError",
    "DilationVolumeCurve",
    "DistanceField",
    "EvalReport",
    "FeatureMatrix",
    "FitResult",
    "FormatError",
    "FraxelError",
    "ManifestEntry",
    "PairingError",
    "ParameterError",
    "ProbabilityCurve",
    "ResourceError",
    "RunConfig",
    "ScatterPair",
    "SignatureRecord",
    "Surface",
    "SvmModel",
    "WindowSet",
    "apply_projection",
    "attainable_radii",
    "bm_descriptors",
    "bm_dimension",
    "concat_features",
    "cross_validate",
    "dilation_volumes",
    "discriminant_transform",
    "edt3d",
    "extract_features",
    "extract_windows",
    "fit_pca_projection",
    "fit_scatter_projection",
    "fold_assignments",
    "format_report_table",
    "fourier_descriptors",
    "from_surface",
    "gabor_descriptors",
    "load_image",
    "load_manifest",
    "loglog_slope",
    "luminance",
    "metrics_from_confusion",
    "pair_faces",
    "pca_transform",
    "predict",
    "probability_curve",
    "radon_align",
    "read_features",
    "records_to_matrix",
    "save_image",
    "save_manifest",
    "scatter_matrices",
    "scatter_spectrum",
    "sweep_descriptors",
    "synth_fbm",
    "to_surface",
    "train_svm",
    "voss_descriptors",
    "voss_dimension",
    "write_features",
    "write_report",
    "__version__",
]

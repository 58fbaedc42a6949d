"""Linear editing directions for generative-model latent spaces.

Estimate a unit direction along which a scalar attribute varies, from a
small set of latents with [0, 1] labels; then score latents along it,
calibrate a linear strength model, apply edits, and evaluate against
planted ground truth.
"""

__version__ = "0.1.0"

from .errors import (
    CoincidentCenters,
    ConstantLabels,
    ConstantSeries,
    DegenerateBinning,
    DegenerateDistances,
    DimensionMismatch,
    DuplicateId,
    EditvecError,
    EmptyGroupSet,
    InvalidConfig,
    LabelOutOfRange,
    NonBinaryLabels,
    NonFiniteInput,
    ParseError,
    SingularDenominator,
    ZeroDenominatorForm,
)
from .dataset import (
    DEFAULT_BIN_EDGES,
    BinEdges,
    GroupedLatentSet,
    GroupStatistics,
    LabeledLatentSet,
    LatentGroup,
    bin_labels,
    binary_groups,
    group_stats,
    load_labeled_latents,
    save_labeled_latents,
    serialize_labeled_latents,
    split_bipolar,
)
from .linalg import (
    DEFAULT_EPSILON_POLICY,
    EigenSolution,
    EpsilonPolicy,
    ScatterPair,
    rayleigh_quotient,
    regularize,
    scatter_between,
    scatter_pair,
    scatter_within,
    top_generalized_eigenpair,
)
from .estimators import (
    METHODS,
    EditingDirection,
    estimate_binary_lda,
    estimate_bipolar,
    estimate_center_difference,
    estimate_discretized,
)
from .semantics import (
    LinearSemanticModel,
    apply_edit,
    fit_lambda,
    predict_strength,
    signed_distance,
)
from .synthetic import (
    LABEL_MODELS,
    PlantedDataset,
    SyntheticConfig,
    direction_normals,
    generate_planted_dataset,
    holdout_uniforms,
    planted_direction,
    record_normals,
)
from .evaluation import (
    DirectionComparison,
    RecoveryReport,
    compare_directions,
    projection_strength_correlation,
    recovery_report,
)
from .artifacts import (
    DirectionArtifact,
    artifact_from_estimate,
    canonical_json,
    dataset_fingerprint,
    load_artifact,
    load_planted_sidecar,
    planted_sidecar,
    save_artifact,
)

__all__ = [
    "__version__",
    "EditvecError",
    "InvalidConfig",
    "DimensionMismatch",
    "NonFiniteInput",
    "EmptyGroupSet",
    "SingularDenominator",
    "ZeroDenominatorForm",
    "ParseError",
    "LabelOutOfRange",
    "DuplicateId",
    "DegenerateBinning",
    "CoincidentCenters",
    "NonBinaryLabels",
    "ConstantLabels",
    "DegenerateDistances",
    "ConstantSeries",
    "LabeledLatentSet",
    "BinEdges",
    "DEFAULT_BIN_EDGES",
    "LatentGroup",
    "GroupedLatentSet",
    "GroupStatistics",
    "load_labeled_latents",
    "save_labeled_latents",
    "serialize_labeled_latents",
    "bin_labels",
    "split_bipolar",
    "binary_groups",
    "group_stats",
    "EpsilonPolicy",
    "DEFAULT_EPSILON_POLICY",
    "EigenSolution",
    "ScatterPair",
    "scatter_between",
    "scatter_within",
    "scatter_pair",
    "regularize",
    "rayleigh_quotient",
    "top_generalized_eigenpair",
    "EditingDirection",
    "METHODS",
    "estimate_binary_lda",
    "estimate_bipolar",
    "estimate_center_difference",
    "estimate_discretized",
    "LinearSemanticModel",
    "signed_distance",
    "fit_lambda",
    "predict_strength",
    "apply_edit",
    "SyntheticConfig",
    "PlantedDataset",
    "LABEL_MODELS",
    "generate_planted_dataset",
    "planted_direction",
    "record_normals",
    "direction_normals",
    "holdout_uniforms",
    "DirectionComparison",
    "RecoveryReport",
    "projection_strength_correlation",
    "compare_directions",
    "recovery_report",
    "DirectionArtifact",
    "artifact_from_estimate",
    "canonical_json",
    "dataset_fingerprint",
    "save_artifact",
    "load_artifact",
    "planted_sidecar",
    "load_planted_sidecar",
]

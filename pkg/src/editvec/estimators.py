"""Editing-direction estimators.

Four routes to a unit direction in latent space:

* ``binary_lda`` — two-class Fisher discriminant on {0,1}-labeled data,
  solved in closed form as ``(V + eps I)^{-1} (m1 - m0)``.
* ``center_diff`` — the normalized difference of two group centers.
* ``bipolar`` — two-class Fisher between the low- and high-label tails of
  a continuous-labeled set.
* ``discretized`` — label binning followed by the single-vector
  multi-group Fisher problem, solved as a generalized eigenproblem.

Every estimator returns a unit vector whose sign is aligned so that
projections correlate non-negatively with the training labels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dataset import (
    BinEdges,
    DEFAULT_BIN_EDGES,
    GroupedLatentSet,
    LabeledLatentSet,
    binary_groups,
    bin_labels,
    group_stats,
    split_bipolar,
)
from .errors import CoincidentCenters, DegenerateBinning, NonBinaryLabels
from .linalg import (
    EpsilonPolicy,
    cholesky_with_policy,
    rayleigh_quotient,
    scatter_between,
    scatter_within,
    top_generalized_eigenpair,
)

COINCIDENT_TOL = 1e-12

METHODS = ("binary_lda", "center_diff", "bipolar", "discretized")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class EditingDirection:
    """A unit direction in latent space with estimation metadata.

    ``raw_sign`` records the solver-output sign relative to the aligned
    direction: -1 means alignment flipped the solver's vector.
    """

    n: np.ndarray
    method: str
    feature_name: str = "feature"
    eigenvalue: float | None = None
    epsilon_used: float | None = None
    sign_aligned: bool = False
    raw_sign: int = 1

    def __post_init__(self):
        n = np.array(self.n, dtype=np.float64)
        object.__setattr__(self, "n", _frozen(n))
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    @property
    def dim(self) -> int:
        return self.n.shape[0]


def _aligned(
    n: np.ndarray,
    latents: np.ndarray,
    labels: np.ndarray,
    method: str,
    feature_name: str,
    eigenvalue: float | None,
    epsilon_used: float | None,
) -> EditingDirection:
    # flip when projections anti-correlate with labels; covariance carries
    # the correlation's sign without needing the full normalization
    t = latents @ n
    cov = float((t - t.mean()) @ (labels - labels.mean()))
    raw_sign = 1
    if cov < 0.0:
        n = -n
        raw_sign = -1
    return EditingDirection(
        n=n,
        method=method,
        feature_name=feature_name,
        eigenvalue=eigenvalue,
        epsilon_used=epsilon_used,
        sign_aligned=True,
        raw_sign=raw_sign,
    )


def _two_class_fisher(
    groups: GroupedLatentSet, epsilon_policy: EpsilonPolicy | float | None
) -> tuple[np.ndarray, float, float]:
    """Closed-form Fisher direction for a 2-group partition.

    Returns (unit direction, generalized eigenvalue, epsilon used). The
    direction solves (V + eps I) x = m1 - m0; for two groups this is the
    top generalized eigenvector regardless of class sizes.
    """
    if groups.n_groups != 2:
        raise DegenerateBinning(f"two-class Fisher needs 2 groups, got {groups.n_groups}")
    stats = group_stats(groups)
    diff = stats.means[1] - stats.means[0]
    if float(np.linalg.norm(diff)) < COINCIDENT_TOL:
        raise CoincidentCenters("class centers coincide; no discriminant direction")
    within = scatter_within(groups)
    lower, eps = cholesky_with_policy(within, epsilon_policy)
    raw = scipy.linalg.cho_solve((lower, True), diff, check_finite=False)
    n = raw / np.linalg.norm(raw)
    between = scatter_between(groups)
    ridged = within + eps * np.eye(groups.dim)
    eigenvalue = rayleigh_quotient(n, between, ridged)
    return n, eigenvalue, eps


def estimate_binary_lda(
    dataset: LabeledLatentSet,
    epsilon_policy: EpsilonPolicy | float | None = None,
    feature_name: str = "feature",
) -> EditingDirection:
    """Two-class Fisher direction for an exactly {0,1}-labeled set."""
    if not dataset.is_binary:
        raise NonBinaryLabels("binary LDA requires labels in {0, 1}")
    groups = binary_groups(dataset)
    n, eigenvalue, eps = _two_class_fisher(groups, epsilon_policy)
    return _aligned(
        n, dataset.latents, dataset.labels, "binary_lda", feature_name, eigenvalue, eps
    )


def estimate_center_difference(
    groups: GroupedLatentSet,
    align_with: LabeledLatentSet | None = None,
    feature_name: str = "feature",
) -> EditingDirection:
    """Normalized vector from the first group's center to the second's.

    Group order follows label order, so the direction already points from
    low to high strength; passing ``align_with`` additionally applies the
    empirical correlation sign check against that set's labels.
    """
    if groups.n_groups != 2:
        raise DegenerateBinning(
            f"center difference needs exactly 2 groups, got {groups.n_groups}"
        )
    stats = group_stats(groups)
    diff = stats.means[1] - stats.means[0]
    norm = float(np.linalg.norm(diff))
    if norm < COINCIDENT_TOL:
        raise CoincidentCenters("group centers coincide")
    n = diff / norm
    if align_with is not None:
        return _aligned(
            n, align_with.latents, align_with.labels, "center_diff", feature_name, None, None
        )
    return EditingDirection(
        n=n,
        method="center_diff",
        feature_name=feature_name,
        sign_aligned=True,
    )


def estimate_bipolar(
    dataset: LabeledLatentSet,
    low_quantile: float = 1.0 / 3.0,
    high_quantile: float = 2.0 / 3.0,
    epsilon_policy: EpsilonPolicy | float | None = None,
    feature_name: str = "feature",
) -> EditingDirection:
    """Two-class Fisher between the low- and high-label tails.

    Identical to running :func:`estimate_binary_lda` on the two groups
    produced by :func:`editvec.dataset.split_bipolar`.
    """
    groups = split_bipolar(dataset, low_quantile, high_quantile)
    n, eigenvalue, eps = _two_class_fisher(groups, epsilon_policy)
    # align against the retained tails relabeled 0/1; equivalent in sign to
    # aligning against the original labels restricted to those records
    retained = np.vstack([g.members for g in groups.groups])
    tail_labels = np.concatenate(
        [np.zeros(len(groups.groups[0])), np.ones(len(groups.groups[1]))]
    )
    return _aligned(n, retained, tail_labels, "bipolar", feature_name, eigenvalue, eps)


def estimate_discretized(
    dataset: LabeledLatentSet,
    edges: BinEdges = DEFAULT_BIN_EDGES,
    epsilon_policy: EpsilonPolicy | float | None = None,
    feature_name: str = "feature",
) -> EditingDirection:
    """Multi-group Fisher direction after binning continuous labels.

    Bins the labels, builds the unweighted between-group and within-group
    scatter matrices, and takes the top generalized eigenpair.
    """
    groups = bin_labels(dataset, edges)
    between = scatter_between(groups)
    within = scatter_within(groups)
    solution = top_generalized_eigenpair(between, within, epsilon_policy)
    return _aligned(
        np.array(solution.direction),
        dataset.latents,
        dataset.labels,
        "discretized",
        feature_name,
        solution.eigenvalue,
        solution.epsilon_used,
    )

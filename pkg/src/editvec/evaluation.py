"""Direction quality metrics.

Covers the two comparison kinds used throughout: how well projections
onto a direction track the labels (Pearson correlation, Spearman behind
a flag), and how far two unit directions are from each other (cosine,
raw and sign-aligned L2, angle). A recovery report bundles both against
a known planted direction, computed on held-out records.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.stats

from .dataset import LabeledLatentSet
from .errors import ConstantSeries, DimensionMismatch, InvalidConfig
from .estimators import EditingDirection
from .semantics import signed_distance


def _unit_vector(direction) -> np.ndarray:
    if isinstance(direction, EditingDirection):
        return direction.n
    return np.asarray(direction, dtype=np.float64)


@dataclass(frozen=True)
class DirectionComparison:
    """Pairwise distances between two unit directions.

    ``l2_sign_aligned`` ignores overall sign: it is the smaller of
    ``|a - b|`` and ``|a + b|``, so antipodal directions compare as
    identical. ``angle_degrees`` uses the raw cosine, not its absolute
    value, so it ranges over [0, 180].
    """

    cosine: float
    l2_raw: float
    l2_sign_aligned: float
    angle_degrees: float


@dataclass(frozen=True)
class RecoveryReport:
    """How well an estimate matches the planted truth.

    ``correlation_on_holdout`` is computed only on records the estimator
    never saw; ``cosine_to_planted`` is sign-agnostic.
    """

    cosine_to_planted: float
    correlation_on_holdout: float
    n_train: int
    n_holdout: int
    method: str


def projection_strength_correlation(
    direction, dataset: LabeledLatentSet, method: str = "pearson"
) -> float:
    """Correlation between projections n^T z and the labels.

    Pearson by default; pass ``method="spearman"`` for the rank
    version. Needs at least 3 records and non-constant labels and
    projections.
    """
    if method not in ("pearson", "spearman"):
        raise InvalidConfig(f"correlation method must be pearson or spearman, got {method!r}")
    if len(dataset) < 3:
        raise ConstantSeries(f"need at least 3 records, got {len(dataset)}")
    projections = signed_distance(direction, dataset.latents)
    labels = dataset.labels
    if float(np.ptp(labels)) == 0.0:
        raise ConstantSeries("labels are constant; correlation undefined")
    if float(np.ptp(projections)) == 0.0:
        raise ConstantSeries("projections are constant; correlation undefined")
    if method == "spearman":
        return float(scipy.stats.spearmanr(projections, labels).statistic)
    p = projections - projections.mean()
    l = labels - labels.mean()
    return float((p @ l) / np.sqrt((p @ p) * (l @ l)))


def compare_directions(a, b) -> DirectionComparison:
    """Cosine, L2 distances, and angle between two unit directions."""
    va = _unit_vector(a)
    vb = _unit_vector(b)
    if va.shape != vb.shape:
        raise DimensionMismatch(f"direction dims differ: {va.shape[0]} vs {vb.shape[0]}")
    cosine = float(va @ vb)
    l2_raw = float(np.linalg.norm(va - vb))
    l2_flipped = float(np.linalg.norm(va + vb))
    angle = float(np.degrees(np.arccos(np.clip(cosine, -1.0, 1.0))))
    return DirectionComparison(
        cosine=cosine,
        l2_raw=l2_raw,
        l2_sign_aligned=min(l2_raw, l2_flipped),
        angle_degrees=angle,
    )


def recovery_report(
    estimated: EditingDirection,
    planted: np.ndarray,
    holdout: LabeledLatentSet,
    n_train: int,
    train_ids=None,
) -> RecoveryReport:
    """Sign-agnostic cosine to the planted truth plus holdout correlation.

    ``holdout`` must be disjoint from the training records; when
    ``train_ids`` is provided the disjointness is checked, otherwise it
    is the caller's contract.
    """
    p = np.asarray(planted, dtype=np.float64)
    if p.shape != estimated.n.shape:
        raise DimensionMismatch(
            f"planted dim {p.shape} differs from estimate dim {estimated.n.shape}"
        )
    norm = float(np.linalg.norm(p))
    if abs(norm - 1.0) > 1e-6:
        raise InvalidConfig(f"planted direction must be unit norm, got {norm}")
    if train_ids is not None:
        overlap = set(train_ids) & set(holdout.ids)
        if overlap:
            raise InvalidConfig(
                f"holdout overlaps training set on {len(overlap)} ids, e.g. {sorted(overlap)[0]!r}"
            )
        n_train = len(set(train_ids))
    cosine = abs(float(estimated.n @ (p / norm)))
    correlation = projection_strength_correlation(estimated, holdout)
    return RecoveryReport(
        cosine_to_planted=cosine,
        correlation_on_holdout=correlation,
        n_train=int(n_train),
        n_holdout=len(holdout),
        method=estimated.method,
    )


def format_report_text(report: dict) -> str:
    """Render a nested report document as aligned key-value lines.

    Nested dictionaries flatten with dotted keys; floats print with 6
    significant digits. Intended for quick terminal reading next to the
    canonical JSON output.
    """
    rows: list[tuple[str, str]] = []

    def walk(prefix: str, value) -> None:
        if isinstance(value, dict):
            for key in sorted(value):
                walk(f"{prefix}.{key}" if prefix else str(key), value[key])
        elif isinstance(value, float):
            rows.append((prefix, f"{value:.6g}"))
        elif isinstance(value, (list, tuple)):
            rows.append((prefix, "[" + ", ".join(str(v) for v in value) + "]"))
        else:
            rows.append((prefix, str(value)))

    walk("", report)
    width = max((len(k) for k, _ in rows), default=0)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)

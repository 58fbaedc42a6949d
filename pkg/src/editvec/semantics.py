"""Linear strength model over a direction: scoring, fitting, editing.

The model reads ``strength(z) = lam * (n^T z) + intercept`` where ``n``
is a unit editing direction. ``signed_distance`` gives the projection
``n^T z`` (negative on one side of the hyperplane through the origin),
``fit_lambda`` calibrates ``lam`` and ``intercept`` against labels by
least squares, and ``apply_edit`` moves a latent along the direction.
Predictions are never clamped to [0, 1]; callers clamp if they need to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import LabeledLatentSet
from .errors import (
    ConstantLabels,
    DegenerateDistances,
    DimensionMismatch,
    NonFiniteInput,
)
from .estimators import EditingDirection


def _direction_vector(direction) -> np.ndarray:
    if isinstance(direction, EditingDirection):
        return direction.n
    return np.asarray(direction, dtype=np.float64)


def _check_dim(n: np.ndarray, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.ndim not in (1, 2) or z.shape[-1] != n.shape[0]:
        raise DimensionMismatch(
            f"latent shape {z.shape} incompatible with direction dim {n.shape[0]}"
        )
    return z


def signed_distance(direction, z):
    """Projection of latents onto the direction, ``n^T z``.

    Accepts a single latent of shape (dim,) and returns a float, or a
    batch of shape (count, dim) and returns an array of length count.
    The value is linear in ``z`` and changes sign when ``z`` crosses the
    hyperplane through the origin normal to ``n``.
    """
    n = _direction_vector(direction)
    z = _check_dim(n, z)
    out = z @ n
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class LinearSemanticModel:
    """Affine map from projection to predicted strength.

    ``with_intercept`` records the fitting mode: False means the
    intercept was forced to zero during the fit.
    """

    direction: EditingDirection
    lam: float
    intercept: float = 0.0
    with_intercept: bool = True

    def predict(self, z):
        return predict_strength(self, z)


def fit_lambda(
    direction: EditingDirection,
    dataset: LabeledLatentSet,
    with_intercept: bool = True,
) -> LinearSemanticModel:
    """Least-squares fit of ``label ~ lam * (n^T z) + intercept``.

    With ``with_intercept=False`` the intercept is pinned at zero and
    only the slope is fitted. Raises ConstantLabels when every label is
    identical and DegenerateDistances when every projection is.
    """
    labels = dataset.labels
    if len(dataset) < 2 or float(np.ptp(labels)) == 0.0:
        raise ConstantLabels("labels do not vary; slope is unidentifiable")
    d = dataset.latents @ direction.n
    if float(np.ptp(d)) == 0.0:
        raise DegenerateDistances("all projections onto the direction are equal")
    if with_intercept:
        d_centered = d - d.mean()
        lam = float(d_centered @ (labels - labels.mean())) / float(d_centered @ d_centered)
        intercept = float(labels.mean() - lam * d.mean())
    else:
        lam = float(d @ labels) / float(d @ d)
        intercept = 0.0
    return LinearSemanticModel(
        direction=direction, lam=lam, intercept=intercept, with_intercept=with_intercept
    )


def predict_strength(model: LinearSemanticModel, z):
    """Raw model output ``lam * (n^T z) + intercept``, not clamped."""
    d = signed_distance(model.direction, z)
    if isinstance(d, float):
        return model.lam * d + model.intercept
    return model.lam * d + model.intercept


def apply_edit(z, direction, scale: float):
    """Move latents along the direction: ``z + scale * n``.

    Broadcasts over batches: shape (dim,) or (count, dim). Scale zero is
    the identity, and consecutive edits add their scales.
    """
    if not math.isfinite(scale):
        raise NonFiniteInput(f"edit scale must be finite, got {scale!r}")
    n = _direction_vector(direction)
    z = _check_dim(n, z)
    return z + scale * n

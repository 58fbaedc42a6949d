"""Synthetic latent datasets with a planted direction as ground truth.

Latents are standard normal draws; labels follow one of two models
driven by the projection onto a planted unit direction:

* ``linear_clipped``: clip(offset + slope * n^T z + eta, 0, 1)
* ``threshold_binary``: 1 if n^T z + eta > 0 else 0

with eta ~ N(0, noise_sigma^2). Out-of-range labels are clipped, never
resampled, so the record count is exact; the clipped fraction is
reported.

Random stream contract
----------------------
All randomness comes from counter-based Philox (4x64, 10 rounds) with
the 128-bit key set little-endian from the 64-bit seed. Each draw site
owns a disjoint region of the 256-bit counter space:

* record ``i``: counter ``i * 2**64``, consuming ``dim + 1`` values
  (``dim`` latent coordinates, then the label noise)
* planted direction: counter ``2**192``, consuming ``dim`` values
* holdout selection: counter ``2 * 2**192``, one value per record

Each raw 64-bit output ``r`` maps to the open-interval uniform
``u = ((r >> 11) + 0.5) * 2**-53`` and normals are ``ndtri(u)`` (the
inverse standard normal CDF). The stream is a cross-implementation
contract, pinned by golden-file tests, so records may be generated in
parallel and out of order without changing the output. Projections that
feed the labels use an exactly rounded dot product, so emitted bytes do
not depend on the linear-algebra backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .dataset import LabeledLatentSet
from .errors import InvalidConfig

LABEL_MODELS = ("linear_clipped", "threshold_binary")

RECORD_COUNTER_STRIDE = 1 << 64
DIRECTION_COUNTER = 1 << 192
HOLDOUT_COUNTER = 2 << 192

MAX_SEED = (1 << 64) - 1


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def raw_stream(seed: int, counter: int, count: int) -> np.ndarray:
    """Raw 64-bit Philox outputs starting at the given 256-bit counter."""
    bg = np.random.Philox(counter=counter, key=seed)
    return bg.random_raw(count)


def uniforms_from_raw(raw: np.ndarray) -> np.ndarray:
    # top 53 bits, shifted into the open interval (0, 1)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def record_normals(seed: int, index: int, count: int) -> np.ndarray:
    """Standard normal draws owned by record ``index``."""
    raw = raw_stream(seed, index * RECORD_COUNTER_STRIDE, count)
    return ndtri(uniforms_from_raw(raw))


def direction_normals(seed: int, dim: int) -> np.ndarray:
    """Standard normal draws owned by the planted-direction site."""
    raw = raw_stream(seed, DIRECTION_COUNTER, dim)
    return ndtri(uniforms_from_raw(raw))


def holdout_uniforms(seed: int, count: int) -> np.ndarray:
    """Uniform draws owned by the holdout-selection site, one per record."""
    raw = raw_stream(seed, HOLDOUT_COUNTER, count)
    return uniforms_from_raw(raw)


@dataclass(frozen=True)
class SyntheticConfig:
    """Parameters for one planted-direction dataset.

    ``planted`` may be an explicit unit vector; when None the direction
    is drawn from the dedicated counter region and normalized.
    """

    dim: int
    n_samples: int
    seed: int
    slope: float = 0.1
    offset: float = 0.5
    noise_sigma: float = 0.05
    label_model: str = "linear_clipped"
    planted: np.ndarray | None = None

    def __post_init__(self):
        if not isinstance(self.dim, int) or self.dim < 1:
            raise InvalidConfig(f"dim must be a positive integer, got {self.dim!r}")
        if not isinstance(self.n_samples, int) or self.n_samples < 1:
            raise InvalidConfig(
                f"n_samples must be a positive integer, got {self.n_samples!r}"
            )
        if not isinstance(self.seed, int) or not 0 <= self.seed <= MAX_SEED:
            raise InvalidConfig(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if not (math.isfinite(self.slope) and self.slope > 0.0):
            raise InvalidConfig(f"slope must be positive and finite, got {self.slope!r}")
        if not math.isfinite(self.offset):
            raise InvalidConfig(f"offset must be finite, got {self.offset!r}")
        if not (math.isfinite(self.noise_sigma) and self.noise_sigma >= 0.0):
            raise InvalidConfig(
                f"noise_sigma must be nonnegative and finite, got {self.noise_sigma!r}"
            )
        if self.label_model not in LABEL_MODELS:
            raise InvalidConfig(
                f"label_model must be one of {LABEL_MODELS}, got {self.label_model!r}"
            )
        if self.planted is not None:
            p = np.array(self.planted, dtype=np.float64)
            if p.shape != (self.dim,):
                raise InvalidConfig(
                    f"planted direction has shape {p.shape}, expected ({self.dim},)"
                )
            if not np.all(np.isfinite(p)):
                raise InvalidConfig("planted direction has non-finite entries")
            norm = float(np.linalg.norm(p))
            if abs(norm - 1.0) > 1e-9:
                raise InvalidConfig(f"planted direction must be unit norm, got {norm}")
            object.__setattr__(self, "planted", _frozen(p / norm))


@dataclass(frozen=True)
class PlantedDataset:
    """A generated dataset together with its ground truth."""

    dataset: LabeledLatentSet
    planted: np.ndarray
    config: SyntheticConfig
    clipped_fraction: float
    clipped_mask: np.ndarray

    @property
    def unclipped(self) -> LabeledLatentSet:
        """Records whose label was not clipped at the [0, 1] boundary."""
        keep = np.flatnonzero(~self.clipped_mask)
        return self.dataset.subset(keep)


def _exact_dot(a: np.ndarray, b: np.ndarray) -> float:
    # exactly rounded sum of products: keeps emitted bytes independent of
    # the BLAS build, which is what makes cross-platform golden files hold
    return math.fsum(a * b)


def planted_direction(cfg: SyntheticConfig) -> np.ndarray:
    """The ground-truth unit direction for a config."""
    if cfg.planted is not None:
        return cfg.planted
    v = direction_normals(cfg.seed, cfg.dim)
    norm = math.sqrt(_exact_dot(v, v))
    if norm == 0.0:
        raise InvalidConfig("drawn planted direction has zero norm")
    return _frozen(v / norm)


def generate_planted_dataset(cfg: SyntheticConfig) -> PlantedDataset:
    """Deterministically generate latents and labels for a config.

    Output depends only on ``cfg``; identical configs give identical
    bytes when serialized. Each record's draws come from its own counter
    region, so the result is independent of generation order.
    """
    dim, n = cfg.dim, cfg.n_samples
    raw = np.empty((n, dim + 1), dtype=np.uint64)
    for i in range(n):
        raw[i] = raw_stream(cfg.seed, i * RECORD_COUNTER_STRIDE, dim + 1)
    values = ndtri(uniforms_from_raw(raw))
    latents = values[:, :dim]
    eta = values[:, dim] * cfg.noise_sigma

    truth = planted_direction(cfg)
    projection = np.array([_exact_dot(latents[i], truth) for i in range(n)])
    if cfg.label_model == "linear_clipped":
        raw_labels = cfg.offset + cfg.slope * projection + eta
        labels = np.clip(raw_labels, 0.0, 1.0)
        clipped = raw_labels != labels
    else:
        labels = (projection + eta > 0.0).astype(np.float64)
        clipped = np.zeros(n, dtype=bool)

    ids = tuple(f"r{i:06d}" for i in range(n))
    dataset = LabeledLatentSet(ids=ids, latents=latents, labels=labels)
    return PlantedDataset(
        dataset=dataset,
        planted=truth,
        config=cfg,
        clipped_fraction=float(clipped.mean()),
        clipped_mask=_frozen(clipped),
    )

"""Persistence: canonical JSON documents, direction artifacts, sidecars.

All JSON written by this package goes through :func:`canonical_json`:
sorted keys, two-space indent, no NaN or infinity, trailing newline.
Parsing a canonical document and re-serializing it reproduces the exact
bytes, because Python's shortest-repr float formatting is a fixed point
of the parse/format cycle. Dataset fingerprints are SHA-256 over the
canonical CSV serialization.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import LabeledLatentSet, serialize_labeled_latents
from .errors import ParseError
from .estimators import METHODS, EditingDirection
from .semantics import LinearSemanticModel
from .synthetic import PlantedDataset

SCHEMA_VERSION = 1

UNIT_NORM_TOL = 1e-9

ARTIFACT_KEYS = frozenset(
    {
        "schema_version",
        "feature_name",
        "method",
        "dim",
        "n",
        "lambda",
        "intercept",
        "epsilon_used",
        "eigenvalue",
        "bins",
        "quantiles",
        "training_set_fingerprint",
        "seed_info",
    }
)


def canonical_json(doc) -> str:
    """Serialize a document to the package's canonical JSON form."""
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, doc) -> None:
    Path(path).write_text(canonical_json(doc), encoding="utf-8")


def read_json(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected a JSON object at top level")
    return doc


def dataset_fingerprint(dataset: LabeledLatentSet) -> str:
    """SHA-256 hex digest of the dataset's canonical CSV bytes."""
    return hashlib.sha256(serialize_labeled_latents(dataset).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class DirectionArtifact:
    """On-disk form of an estimated direction plus its strength model.

    ``bins`` is set for the discretized method, ``quantiles`` for the
    bipolar method; both are None otherwise. ``seed_info`` records how
    any holdout split was drawn so evaluation can reuse it.
    """

    feature_name: str
    method: str
    dim: int
    n: np.ndarray
    lam: float
    intercept: float
    epsilon_used: float | None = None
    eigenvalue: float | None = None
    bins: tuple | None = None
    quantiles: tuple | None = None
    training_set_fingerprint: str | None = None
    seed_info: dict | None = None
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        n = np.array(self.n, dtype=np.float64)
        n.flags.writeable = False
        object.__setattr__(self, "n", n)

    def to_dict(self) -> dict:
        return {
            "schema_version": int(self.schema_version),
            "feature_name": str(self.feature_name),
            "method": str(self.method),
            "dim": int(self.dim),
            "n": [float(v) for v in self.n],
            "lambda": float(self.lam),
            "intercept": float(self.intercept),
            "epsilon_used": None if self.epsilon_used is None else float(self.epsilon_used),
            "eigenvalue": None if self.eigenvalue is None else float(self.eigenvalue),
            "bins": None if self.bins is None else [float(v) for v in self.bins],
            "quantiles": None if self.quantiles is None else [float(v) for v in self.quantiles],
            "training_set_fingerprint": self.training_set_fingerprint,
            "seed_info": self.seed_info,
        }

    def direction(self) -> EditingDirection:
        return EditingDirection(
            n=np.array(self.n),
            method=self.method,
            feature_name=self.feature_name,
            eigenvalue=self.eigenvalue,
            epsilon_used=self.epsilon_used,
            sign_aligned=True,
        )

    def model(self) -> LinearSemanticModel:
        return LinearSemanticModel(
            direction=self.direction(), lam=self.lam, intercept=self.intercept
        )


def artifact_from_estimate(
    direction: EditingDirection,
    model: LinearSemanticModel,
    bins=None,
    quantiles=None,
    training_set_fingerprint: str | None = None,
    seed_info: dict | None = None,
) -> DirectionArtifact:
    """Bundle an estimated direction and fitted model for persistence."""
    return DirectionArtifact(
        feature_name=direction.feature_name,
        method=direction.method,
        dim=direction.dim,
        n=np.array(direction.n),
        lam=model.lam,
        intercept=model.intercept,
        epsilon_used=direction.epsilon_used,
        eigenvalue=direction.eigenvalue,
        bins=None if bins is None else tuple(bins),
        quantiles=None if quantiles is None else tuple(quantiles),
        training_set_fingerprint=training_set_fingerprint,
        seed_info=seed_info,
    )


def artifact_from_dict(doc: dict, origin: str = "artifact") -> DirectionArtifact:
    keys = set(doc)
    missing = ARTIFACT_KEYS - keys
    extra = keys - ARTIFACT_KEYS
    if missing:
        raise ParseError(f"{origin}: missing keys {sorted(missing)}")
    if extra:
        raise ParseError(f"{origin}: unknown keys {sorted(extra)}")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ParseError(
            f"{origin}: unsupported schema_version {doc['schema_version']!r}"
        )
    if doc["method"] not in METHODS:
        raise ParseError(f"{origin}: unknown method {doc['method']!r}")
    n = np.array(doc["n"], dtype=np.float64)
    if n.ndim != 1 or n.shape[0] != doc["dim"]:
        raise ParseError(
            f"{origin}: direction length {n.shape} does not match dim {doc['dim']!r}"
        )
    if not np.all(np.isfinite(n)):
        raise ParseError(f"{origin}: direction has non-finite entries")
    norm = float(np.linalg.norm(n))
    if abs(norm - 1.0) > UNIT_NORM_TOL:
        raise ParseError(f"{origin}: direction norm {norm} is not 1 within {UNIT_NORM_TOL}")
    return DirectionArtifact(
        feature_name=doc["feature_name"],
        method=doc["method"],
        dim=int(doc["dim"]),
        n=n,
        lam=float(doc["lambda"]),
        intercept=float(doc["intercept"]),
        epsilon_used=doc["epsilon_used"],
        eigenvalue=doc["eigenvalue"],
        bins=None if doc["bins"] is None else tuple(doc["bins"]),
        quantiles=None if doc["quantiles"] is None else tuple(doc["quantiles"]),
        training_set_fingerprint=doc["training_set_fingerprint"],
        seed_info=doc["seed_info"],
    )


def save_artifact(path, artifact: DirectionArtifact) -> None:
    write_json(path, artifact.to_dict())


def load_artifact(path) -> DirectionArtifact:
    return artifact_from_dict(read_json(path), origin=str(path))


def planted_sidecar(planted: PlantedDataset) -> dict:
    """Ground-truth document written next to a synthetic dataset."""
    cfg = planted.config
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "planted_truth",
        "dim": int(cfg.dim),
        "n_samples": int(cfg.n_samples),
        "seed": int(cfg.seed),
        "slope": float(cfg.slope),
        "offset": float(cfg.offset),
        "noise_sigma": float(cfg.noise_sigma),
        "label_model": cfg.label_model,
        "planted": [float(v) for v in planted.planted],
        "clipped_fraction": float(planted.clipped_fraction),
    }


def load_planted_sidecar(path) -> tuple[np.ndarray, dict]:
    """Read a ground-truth sidecar; returns (unit direction, document)."""
    doc = read_json(path)
    if doc.get("kind") != "planted_truth":
        raise ParseError(f"{path}: not a planted-truth sidecar")
    p = np.array(doc.get("planted"), dtype=np.float64)
    if p.ndim != 1 or not np.all(np.isfinite(p)):
        raise ParseError(f"{path}: invalid planted direction")
    norm = float(np.linalg.norm(p))
    if abs(norm - 1.0) > 1e-6:
        raise ParseError(f"{path}: planted direction norm {norm} is not 1")
    p.flags.writeable = False
    return p, doc

"""Labeled latent datasets: CSV ingestion, label binning, and group statistics.

The on-disk format is a UTF-8 CSV with header ``id,label,z0,...,z{d-1}``.
Ids are restricted to ``[A-Za-z0-9_-]`` and labels are decimal reals in
[0, 1] (scientific notation accepted). See docs/FORMATS.md.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateBinning,
    DimensionMismatch,
    DuplicateId,
    EmptyGroupSet,
    InvalidConfig,
    LabelOutOfRange,
    NonFiniteInput,
    ParseError,
)

_ID_PATTERN = re.compile(r"^[A-Za-z0-9_-]+$")


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class LabeledLatentSet:
    """Latent codes paired with scalar strengths in [0, 1].

    Record order is meaningful and preserved by every operation; the arrays
    are read-only so instances are safe to share across threads.
    """

    ids: tuple[str, ...]
    latents: np.ndarray  # (n, dim) float64
    labels: np.ndarray  # (n,) float64

    def __post_init__(self):
        latents = np.asarray(self.latents, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.float64)
        if latents.ndim != 2 or latents.shape[1] < 1:
            raise DimensionMismatch(
                f"latents must be a (n, dim) matrix with dim >= 1, got shape {latents.shape}"
            )
        n = latents.shape[0]
        if labels.shape != (n,) or len(self.ids) != n:
            raise DimensionMismatch(
                f"ids ({len(self.ids)}), latents ({latents.shape[0]}) and "
                f"labels ({labels.shape[0]}) must have equal length"
            )
        if not np.all(np.isfinite(latents)) or not np.all(np.isfinite(labels)):
            raise NonFiniteInput("latents and labels must be finite")
        bad = np.flatnonzero((labels < 0.0) | (labels > 1.0))
        if bad.size:
            i = int(bad[0])
            raise LabelOutOfRange(
                f"record '{self.ids[i]}': label {labels[i]!r} outside [0, 1]"
            )
        seen: set[str] = set()
        for rid in self.ids:
            if rid in seen:
                raise DuplicateId(f"duplicate record id '{rid}'")
            seen.add(rid)
        object.__setattr__(self, "ids", tuple(self.ids))
        latents = latents.copy()
        latents.flags.writeable = False
        labels = labels.copy()
        labels.flags.writeable = False
        object.__setattr__(self, "latents", latents)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.latents.shape[1]

    def __len__(self) -> int:
        return self.latents.shape[0]

    @property
    def is_binary(self) -> bool:
        """True when every label is exactly 0.0 or 1.0."""
        return bool(np.all((self.labels == 0.0) | (self.labels == 1.0)))

    def subset(self, indices: Sequence[int]) -> "LabeledLatentSet":
        """Rows at `indices`, preserving the given order."""
        idx = list(indices)
        return LabeledLatentSet(
            ids=tuple(self.ids[i] for i in idx),
            latents=self.latents[idx],
            labels=self.labels[idx],
        )


@dataclass(frozen=True)
class BinEdges:
    """Strictly increasing bin edges spanning [0, 1].

    ``edges`` has M+1 entries for M bins; the first must be 0.0 and the
    last 1.0. Bins are half-open ``[e_i, e_{i+1})`` except the last, which
    is closed.
    """

    edges: tuple[float, ...]

    def __post_init__(self):
        edges = tuple(float(e) for e in self.edges)
        if len(edges) < 3:
            raise InvalidConfig("bin edges need at least 3 points (2 bins)")
        if edges[0] != 0.0 or edges[-1] != 1.0:
            raise InvalidConfig(f"bin edges must span [0, 1], got {edges}")
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise InvalidConfig(f"bin edges must be strictly increasing, got {edges}")
        object.__setattr__(self, "edges", edges)

    @property
    def n_bins(self) -> int:
        return len(self.edges) - 1

    def bin_of(self, label: float) -> int:
        """Bin index for a label; the final bin includes its upper edge."""
        for i in range(self.n_bins - 1):
            if self.edges[i] <= label < self.edges[i + 1]:
                return i
        return self.n_bins - 1

    def describe(self) -> str:
        return "edges=" + ",".join(repr(e) for e in self.edges)


DEFAULT_BIN_EDGES = BinEdges((0.0, 0.2, 0.4, 0.6, 0.8, 1.0))


@dataclass(frozen=True)
class LatentGroup:
    """One labeled bin: its original bin index and member latents (input order)."""

    index: int
    members: np.ndarray  # (n_i, dim)

    def __post_init__(self):
        members = np.asarray(self.members, dtype=np.float64)
        if members.ndim != 2:
            raise DimensionMismatch(f"group members must be (n_i, dim), got {members.shape}")
        members = members.copy()
        members.flags.writeable = False
        object.__setattr__(self, "members", members)

    def __len__(self) -> int:
        return self.members.shape[0]


@dataclass(frozen=True)
class GroupedLatentSet:
    """A partition of retained records into labeled bins, ordered by label range."""

    dim: int
    groups: tuple[LatentGroup, ...]
    binning: str
    provenance: str = ""
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        for g in self.groups:
            if g.members.shape[1] != self.dim:
                raise DimensionMismatch(
                    f"group {g.index} has dim {g.members.shape[1]}, expected {self.dim}"
                )
        object.__setattr__(self, "groups", tuple(self.groups))
        object.__setattr__(self, "notes", tuple(self.notes))

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def n_total(self) -> int:
        return sum(len(g) for g in self.groups)

    def counts(self) -> tuple[int, ...]:
        return tuple(len(g) for g in self.groups)


@dataclass(frozen=True)
class GroupStatistics:
    """Group means, counts, and the member-weighted global mean."""

    means: tuple[np.ndarray, ...]
    counts: tuple[int, ...]
    global_mean: np.ndarray


def load_labeled_latents(source: str | Path | IO, fmt: str = "csv") -> LabeledLatentSet:
    """Parse a labeled latent dataset from a path or open stream.

    Raises ParseError, DimensionMismatch, LabelOutOfRange, or DuplicateId
    with the offending line or record named.
    """
    if fmt != "csv":
        raise InvalidConfig(f"unsupported dataset format {fmt!r}")
    if hasattr(source, "read"):
        return _parse_csv(source)
    with open(source, "r", encoding="utf-8", newline="") as fh:
        return _parse_csv(fh)


def _parse_csv(stream: IO) -> LabeledLatentSet:
    raw = stream.read()
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    reader = csv.reader(io.StringIO(raw))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty file", line=1) from None
    if len(header) < 3 or header[0] != "id" or header[1] != "label":
        raise ParseError(
            f"header must be 'id,label,z0,...', got {','.join(header[:4])}...", line=1
        )
    dim = len(header) - 2
    expected = [f"z{i}" for i in range(dim)]
    if header[2:] != expected:
        raise ParseError(
            f"latent columns must be named z0..z{dim - 1} in order", line=1
        )

    ids: list[str] = []
    labels: list[float] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != dim + 2:
            raise DimensionMismatch(
                f"line {lineno}: expected {dim + 2} fields, got {len(row)}"
            )
        rid = row[0]
        if not _ID_PATTERN.match(rid):
            raise ParseError(f"invalid id {rid!r}", line=lineno)
        if rid in seen:
            raise DuplicateId(f"line {lineno}: duplicate id '{rid}'")
        seen.add(rid)
        try:
            label = float(row[1])
            values = [float(v) for v in row[2:]]
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        if not math.isfinite(label) or not all(math.isfinite(v) for v in values):
            raise ParseError("non-finite value", line=lineno)
        if not 0.0 <= label <= 1.0:
            raise LabelOutOfRange(f"record '{rid}': label {label!r} outside [0, 1]")
        ids.append(rid)
        labels.append(label)
        rows.append(values)
    if not ids:
        raise ParseError("file has a header but no records", line=2)
    return LabeledLatentSet(ids=tuple(ids), latents=np.array(rows), labels=np.array(labels))


def save_labeled_latents(dataset: LabeledLatentSet, target: str | Path | IO) -> None:
    """Write the CSV form of a dataset.

    Floats are written with shortest round-trip formatting, so a
    save/load cycle reproduces every value bit-exactly.
    """
    text = serialize_labeled_latents(dataset)
    if hasattr(target, "write"):
        target.write(text)
        return
    with open(target, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def serialize_labeled_latents(dataset: LabeledLatentSet) -> str:
    for rid in dataset.ids:
        if not _ID_PATTERN.match(rid):
            raise ParseError(f"id {rid!r} not serializable under the CSV schema")
    lines = ["id,label," + ",".join(f"z{i}" for i in range(dataset.dim))]
    for rid, label, z in zip(dataset.ids, dataset.labels, dataset.latents):
        lines.append(rid + "," + repr(float(label)) + "," + ",".join(repr(float(v)) for v in z))
    return "\n".join(lines) + "\n"


def bin_labels(
    dataset: LabeledLatentSet,
    edges: BinEdges = DEFAULT_BIN_EDGES,
    provenance: str = "",
) -> GroupedLatentSet:
    """Partition records into label bins.

    Empty bins are dropped (noted in ``notes``); at least two non-empty
    bins must remain or DegenerateBinning is raised. Member order inside
    each bin is input order.
    """
    assignments = [edges.bin_of(float(lbl)) for lbl in dataset.labels]
    groups: list[LatentGroup] = []
    notes: list[str] = []
    for i in range(edges.n_bins):
        member_idx = [j for j, b in enumerate(assignments) if b == i]
        if not member_idx:
            lo, hi = edges.edges[i], edges.edges[i + 1]
            close = "]" if i == edges.n_bins - 1 else ")"
            notes.append(f"bin {i} [{lo!r},{hi!r}{close} empty, dropped")
            continue
        groups.append(LatentGroup(index=i, members=dataset.latents[member_idx]))
    if len(groups) < 2:
        raise DegenerateBinning(
            f"binning left {len(groups)} non-empty bin(s); need at least 2"
        )
    return GroupedLatentSet(
        dim=dataset.dim,
        groups=tuple(groups),
        binning=edges.describe(),
        provenance=provenance,
        notes=tuple(notes),
    )


def _nearest_rank(sorted_values: np.ndarray, q: float) -> float:
    # nearest-rank quantile: k = ceil(q * N), 1-indexed order statistics
    n = len(sorted_values)
    k = max(1, math.ceil(q * n))
    return float(sorted_values[k - 1])


def split_bipolar(
    dataset: LabeledLatentSet,
    low_quantile: float = 1.0 / 3.0,
    high_quantile: float = 2.0 / 3.0,
    provenance: str = "",
) -> GroupedLatentSet:
    """Two-class split at empirical label quantiles, discarding the middle.

    Class 0 holds records with label <= the low-quantile cut, class 1 those
    with label >= the high-quantile cut. When the cuts coincide, class 0
    takes priority for records sitting exactly on them.
    """
    if not (0.0 < low_quantile < high_quantile < 1.0):
        raise InvalidConfig(
            f"quantiles must satisfy 0 < low < high < 1, got ({low_quantile}, {high_quantile})"
        )
    ordered = np.sort(dataset.labels)
    low_cut = _nearest_rank(ordered, low_quantile)
    high_cut = _nearest_rank(ordered, high_quantile)
    low_idx = [i for i, lbl in enumerate(dataset.labels) if lbl <= low_cut]
    taken = set(low_idx)
    high_idx = [
        i for i, lbl in enumerate(dataset.labels) if lbl >= high_cut and i not in taken
    ]
    if not low_idx or not high_idx:
        raise DegenerateBinning(
            f"bipolar split left an empty class (cuts {low_cut!r}, {high_cut!r})"
        )
    return GroupedLatentSet(
        dim=dataset.dim,
        groups=(
            LatentGroup(index=0, members=dataset.latents[low_idx]),
            LatentGroup(index=1, members=dataset.latents[high_idx]),
        ),
        binning=f"bipolar(low_q={low_quantile!r},high_q={high_quantile!r})",
        provenance=provenance,
        notes=(f"low_cut={low_cut!r}", f"high_cut={high_cut!r}"),
    )


def binary_groups(dataset: LabeledLatentSet, provenance: str = "") -> GroupedLatentSet:
    """Two groups from an exactly {0, 1}-labeled set (class 0 first)."""
    if not dataset.is_binary:
        raise DegenerateBinning("labels are not exactly {0, 1}")
    zeros = np.flatnonzero(dataset.labels == 0.0)
    ones = np.flatnonzero(dataset.labels == 1.0)
    if zeros.size == 0 or ones.size == 0:
        raise DegenerateBinning("one of the two binary classes is empty")
    return GroupedLatentSet(
        dim=dataset.dim,
        groups=(
            LatentGroup(index=0, members=dataset.latents[zeros]),
            LatentGroup(index=1, members=dataset.latents[ones]),
        ),
        binning="binary",
        provenance=provenance,
    )


def group_stats(groups: GroupedLatentSet) -> GroupStatistics:
    """Arithmetic group means plus the member-weighted mean of all members."""
    if groups.n_groups < 1:
        raise EmptyGroupSet("need at least one group")
    means = tuple(_frozen_array(g.members.mean(axis=0)) for g in groups.groups)
    counts = groups.counts()
    total = np.zeros(groups.dim)
    for g in groups.groups:
        total += g.members.sum(axis=0)
    global_mean = _frozen_array(total / groups.n_total)
    return GroupStatistics(means=means, counts=counts, global_mean=global_mean)


def merge_groups(groups: Iterable[LatentGroup]) -> np.ndarray:
    """All members stacked in group order (within groups: input order)."""
    return np.vstack([g.members for g in groups])

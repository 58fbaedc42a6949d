import numpy as np

from editvec import GroupedLatentSet, LabeledLatentSet, LatentGroup


def make_set(latents, labels, ids=None) -> LabeledLatentSet:
    """Build a LabeledLatentSet from plain arrays with generated ids."""
    latents = np.asarray(latents, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if ids is None:
        ids = tuple(f"r{i}" for i in range(len(labels)))
    return LabeledLatentSet(ids=tuple(ids), latents=latents, labels=labels)


def make_groups(member_arrays) -> GroupedLatentSet:
    """Build a GroupedLatentSet directly from per-group member arrays."""
    arrays = [np.asarray(a, dtype=np.float64) for a in member_arrays]
    dim = arrays[0].shape[1]
    groups = tuple(LatentGroup(index=i, members=a) for i, a in enumerate(arrays))
    return GroupedLatentSet(dim=dim, groups=groups, binning="manual")


def random_psd(rng, dim: int, rank: int | None = None) -> np.ndarray:
    """Random symmetric PSD matrix, optionally rank-deficient."""
    cols = dim if rank is None else rank
    a = rng.standard_normal((dim, cols))
    return a @ a.T

"""Scatter matrices and the regularized generalized eigensolver.

The central operation maximizes a Rayleigh quotient
``mu' A mu / mu' (B + eps I) mu`` over unit vectors, via Cholesky whitening
of the ridged denominator followed by a symmetric eigensolve. The ridge
``eps`` is chosen by an :class:`EpsilonPolicy` and escalated only when the
Cholesky factorization fails.

All functions are pure; matrices returned here are exactly symmetric
(symmetrized after accumulation) and read-only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dataset import GroupedLatentSet, group_stats
from .errors import (
    DimensionMismatch,
    EmptyGroupSet,
    InvalidConfig,
    NonFiniteInput,
    SingularDenominator,
    ZeroDenominatorForm,
)

#: Relative eigenvalue gap below which the top eigenpair counts as tied.
TIE_GAP = 1e-10


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def _symmetrized(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def _check_square_symmetric(m: np.ndarray, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteInput(f"{name} contains non-finite entries")
    if not np.array_equal(m, m.T):
        scale = np.abs(m).max()
        if np.abs(m - m.T).max() > 1e-9 * max(scale, 1.0):
            raise ValueError(f"{name} is not symmetric")
        m = _symmetrized(m)
    return m


@dataclass(frozen=True)
class EpsilonPolicy:
    """Ridge selection for the denominator of the generalized eigenproblem.

    The starting ridge is ``initial`` when given, otherwise
    ``relative_scale * trace(B)/dim`` (falling back to ``relative_scale``
    itself for a zero-trace B). Each Cholesky failure multiplies the ridge
    by ``growth``, at most ``max_escalations`` times.
    """

    initial: float | None = None
    relative_scale: float = 1e-6
    growth: float = 10.0
    max_escalations: int = 6

    def __post_init__(self):
        if self.initial is not None and self.initial < 0:
            raise InvalidConfig("initial epsilon must be >= 0")
        if self.relative_scale <= 0 or self.growth <= 1 or self.max_escalations < 0:
            raise InvalidConfig("invalid epsilon policy parameters")

    @classmethod
    def fixed(cls, epsilon: float) -> "EpsilonPolicy":
        """A policy that tries exactly one ridge value."""
        return cls(initial=float(epsilon), max_escalations=0)

    def _base(self, denominator: np.ndarray) -> float:
        t = float(np.trace(denominator)) / denominator.shape[0]
        return t if t > 0 else 1.0

    def first_epsilon(self, denominator: np.ndarray) -> float:
        if self.initial is not None:
            return self.initial
        return self.relative_scale * self._base(denominator)

    def next_epsilon(self, epsilon: float, denominator: np.ndarray) -> float:
        if epsilon == 0.0:
            return self.relative_scale * self._base(denominator)
        return epsilon * self.growth


DEFAULT_EPSILON_POLICY = EpsilonPolicy()


@dataclass(frozen=True)
class EigenSolution:
    """Top generalized eigenpair: unit direction, eigenvalue, ridge used, residual."""

    direction: np.ndarray
    eigenvalue: float
    epsilon_used: float
    residual: float

    def __post_init__(self):
        d = np.array(self.direction, dtype=np.float64)
        object.__setattr__(self, "direction", _frozen(d))


@dataclass(frozen=True)
class ScatterPair:
    """Between-group matrix, within-group matrix, and the grouping's statistics."""

    between: np.ndarray
    within: np.ndarray
    group_sizes: tuple[int, ...]
    global_mean: np.ndarray


def scatter_between(groups: GroupedLatentSet, weighted: bool = False) -> np.ndarray:
    """Sum of outer products of group-mean deviations from the global mean.

    The global mean is the member-weighted mean of all retained records.
    By default each group contributes one unweighted outer product;
    ``weighted=True`` multiplies each by its member count, which is the
    form satisfying the total-scatter decomposition.
    """
    if groups.n_groups < 2:
        raise EmptyGroupSet("between-group scatter needs at least 2 non-empty groups")
    stats = group_stats(groups)
    s = np.zeros((groups.dim, groups.dim))
    for mean, count in zip(stats.means, stats.counts):
        dev = mean - stats.global_mean
        w = count if weighted else 1.0
        s += w * np.outer(dev, dev)
    return _frozen(_symmetrized(s))


def scatter_within(groups: GroupedLatentSet) -> np.ndarray:
    """Sum over groups of outer products of member deviations from the group mean.

    Singleton groups contribute zero.
    """
    v = np.zeros((groups.dim, groups.dim))
    for g in groups.groups:
        centered = g.members - g.members.mean(axis=0)
        v += centered.T @ centered
    return _frozen(_symmetrized(v))


def scatter_pair(groups: GroupedLatentSet, weighted: bool = False) -> ScatterPair:
    """Both scatter matrices plus group sizes and the global mean."""
    stats = group_stats(groups)
    return ScatterPair(
        between=scatter_between(groups, weighted=weighted),
        within=scatter_within(groups),
        group_sizes=stats.counts,
        global_mean=stats.global_mean,
    )


def regularize(m: np.ndarray, epsilon: float) -> np.ndarray:
    """``m + epsilon * I``."""
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    m = np.asarray(m, dtype=np.float64)
    return _frozen(m + epsilon * np.eye(m.shape[0]))


def rayleigh_quotient(mu: np.ndarray, numerator: np.ndarray, denominator: np.ndarray) -> float:
    """``(mu' N mu) / (mu' D mu)``; scale-invariant in mu."""
    mu = np.asarray(mu, dtype=np.float64)
    if np.linalg.norm(mu) == 0.0:
        raise ZeroDenominatorForm("probe vector is zero")
    num_form = float(mu @ numerator @ mu)
    den_form = float(mu @ denominator @ mu)
    if den_form <= 0.0:
        raise ZeroDenominatorForm(
            f"denominator form is {den_form!r} at the probe vector"
        )
    return num_form / den_form


def cholesky_with_policy(
    denominator: np.ndarray, policy: EpsilonPolicy | float | None = None
) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of ``denominator + eps I`` under the ridge policy.

    Returns ``(L, eps)``. Raises SingularDenominator when the factorization
    still fails at the policy's largest ridge.
    """
    policy = _as_policy(policy)
    den = _check_square_symmetric(denominator, "denominator")
    eye = np.eye(den.shape[0])
    eps = policy.first_epsilon(den)
    for _ in range(policy.max_escalations + 1):
        try:
            lower = scipy.linalg.cholesky(den + eps * eye, lower=True, check_finite=False)
            return lower, eps
        except scipy.linalg.LinAlgError:
            eps = policy.next_epsilon(eps, den)
    raise SingularDenominator(
        f"denominator not positive definite even at epsilon={eps!r}"
    )


def _as_policy(policy: EpsilonPolicy | float | None) -> EpsilonPolicy:
    if policy is None:
        return DEFAULT_EPSILON_POLICY
    if isinstance(policy, EpsilonPolicy):
        return policy
    return EpsilonPolicy.fixed(float(policy))


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    for x in v:
        if x != 0.0:
            return -v if x < 0.0 else v
    return v


def top_generalized_eigenpair(
    numerator: np.ndarray,
    denominator: np.ndarray,
    epsilon_policy: EpsilonPolicy | float | None = None,
) -> EigenSolution:
    """Unit vector maximizing ``mu' N mu / mu' (D + eps I) mu``.

    Whitens with the Cholesky factor of the ridged denominator, solves the
    resulting symmetric standard eigenproblem, and back-transforms. When
    the top eigenvalue is tied (relative gap below ``TIE_GAP``), the
    direction is the projection of the earliest standard basis vector onto
    the optimal subspace, taken in the whitened metric, so the result is
    deterministic across platforms. The returned direction has its first
    nonzero component positive.

    Parameters
    ----------
    numerator, denominator:
        Symmetric PSD matrices of equal dimension.
    epsilon_policy:
        An :class:`EpsilonPolicy`, a bare float (used as a fixed ridge with
        no escalation), or None for the default relative policy.
    """
    num = _check_square_symmetric(numerator, "numerator")
    den = _check_square_symmetric(denominator, "denominator")
    if num.shape != den.shape:
        raise DimensionMismatch(
            f"numerator {num.shape} and denominator {den.shape} differ"
        )
    dim = num.shape[0]
    lower, eps = cholesky_with_policy(den, epsilon_policy)

    # W = L^{-1} N L^{-T}; two triangular solves, then re-symmetrize.
    half = scipy.linalg.solve_triangular(lower, num, lower=True, check_finite=False)
    whitened = scipy.linalg.solve_triangular(lower, half.T, lower=True, check_finite=False)
    whitened = _symmetrized(whitened)
    eigvals, eigvecs = scipy.linalg.eigh(whitened, check_finite=False)
    top = float(eigvals[-1])

    tied = np.flatnonzero(eigvals >= top - TIE_GAP * abs(top))
    if tied.size > 1:
        basis = eigvecs[:, tied]
        y = None
        for k in range(dim):
            proj = basis @ basis[k, :]
            norm = np.linalg.norm(proj)
            if norm > 1e-8:
                y = proj / norm
                break
        if y is None:  # unreachable: some axis always projects onto the subspace
            y = eigvecs[:, -1]
    else:
        y = eigvecs[:, -1]

    mu = scipy.linalg.solve_triangular(lower, y, lower=True, trans="T", check_finite=False)
    mu = mu / np.linalg.norm(mu)
    mu = _canonical_sign(mu)

    eigenvalue = max(top, 0.0)
    image = scipy.linalg.cho_solve((lower, True), num @ mu, check_finite=False)
    residual = float(np.linalg.norm(image - eigenvalue * mu))
    return EigenSolution(
        direction=mu, eigenvalue=eigenvalue, epsilon_used=eps, residual=residual
    )

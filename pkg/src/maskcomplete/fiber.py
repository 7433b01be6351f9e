"""Numerical test for whether a mask pins down finitely many completions.

Rank-r matrices are parametrized as U @ V with U (m x r) and V (r x n).
The set of rank-r matrices has dimension (m+n-r)*r; the factor chart
carries r*r redundant directions (U, V) -> (U G, G^-1 V), so the Jacobian
of the observed entries with respect to the factor entries has rank at
most (m+n-r)*r.  The number of completion degrees of freedom left by a
mask is (m+n-r)*r minus that Jacobian rank, evaluated at a random point;
zero means only finitely many rank-r matrices share the observed entries.

The rank of a polynomial-entry matrix at a Gaussian random point equals
its generic rank with probability one, so the test depends only on the
mask.  Two independent samples are drawn and must agree; disagreement
signals numerical trouble and raises instead of returning a guess.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DEFAULT_RANK_TOL, FactorPair, numerical_rank, random_factors
from .masks import Mask, derive_seed

__all__ = ["FiberReport", "masking_jacobian", "fiber_dimension_test", "target_dimension"]


def target_dimension(m: int, n: int, r: int) -> int:
    """Dimension of the set of m x n matrices of rank at most r."""
    return (m + n - r) * r


@dataclass(frozen=True)
class FiberReport:
    jacobian_rank: int
    target_dim: int
    fiber_dim_estimate: int
    generically_finite: bool


def masking_jacobian(mask: Mask, factors: FactorPair) -> np.ndarray:
    """Derivatives of the observed entries of U @ V in the factor entries.

    Row order: canonical (row-major) mask order.  Column order: all U
    entries row-major, then all V entries row-major.  Entry (i, j) of the
    product is sum_k U[i, k] V[k, j], so the row for cell (i, j) holds
    V[k, j] at the U[i, k] columns and U[i, k] at the V[k, j] columns.
    """
    u, v = factors
    m, r = u.shape
    r2, n = v.shape
    if r2 != r:
        raise ValueError(f"factor shapes {u.shape} and {v.shape} do not chain")
    if (m, n) != (mask.m, mask.n):
        raise ValueError(f"factors give a {m}x{n} matrix, mask is {mask.m}x{mask.n}")
    alpha = mask.edge_count()
    jac = np.zeros((alpha, (m + n) * r))
    for row, (i, j) in enumerate(mask.entries):
        jac[row, i * r : (i + 1) * r] = v[:, j]
        jac[row, m * r + j : m * r + j + n * r : n] = u[i, :]
    return jac


def fiber_dimension_test(
    mask: Mask, r: int, seed: int = 0, tol: float = DEFAULT_RANK_TOL
) -> FiberReport:
    """Estimate the completion degrees of freedom left by the mask.

    Draws two independent Gaussian factor pairs; the Jacobian ranks must
    agree (they do with probability one), otherwise a RuntimeError is
    raised rather than reporting an unreliable dimension.
    """
    if not 1 <= r <= min(mask.m, mask.n):
        raise ValueError(f"rank {r} outside [1, min({mask.m}, {mask.n})]")
    target = target_dimension(mask.m, mask.n, r)
    ranks = []
    for draw in range(2):
        factors = random_factors(
            mask.m, mask.n, r, derive_seed(seed, "fiber-sample", draw)
        )
        ranks.append(numerical_rank(masking_jacobian(mask, factors), tol))
    if ranks[0] != ranks[1]:
        raise RuntimeError(
            f"Jacobian rank differs between samples ({ranks[0]} vs {ranks[1]}); "
            "the instance is numerically degenerate at this tolerance"
        )
    rank = ranks[0]
    return FiberReport(
        jacobian_rank=rank,
        target_dim=target,
        fiber_dim_estimate=target - rank,
        generically_finite=(target - rank) == 0,
    )

"""Small dense linear-algebra kernels.

The determinant is computed by our own LU elimination with partial
pivoting because the completion solver needs its cofactor arithmetic to be
self-contained and auditable.  Numerical rank and the compact SVD delegate
to LAPACK through numpy; only the contracts below are relied on.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

__all__ = [
    "FactorPair",
    "determinant",
    "numerical_rank",
    "random_factors",
    "random_rank_r",
    "svd_compact",
]

DEFAULT_RANK_TOL = 1e-9


class FactorPair(NamedTuple):
    """Low-rank factorization U (m x r) times V (r x n)."""

    u: np.ndarray
    v: np.ndarray


def determinant(a: np.ndarray) -> float:
    """Determinant via LU with partial pivoting, sign tracked through swaps.

    Singular matrices return 0 up to roundoff; no exception is raised.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected square matrix, got shape {a.shape}")
    k = a.shape[0]
    if k == 0:
        return 1.0
    sign = 1.0
    for col in range(k - 1):
        p = col + int(np.argmax(np.abs(a[col:, col])))
        if a[p, col] == 0.0:
            return 0.0
        if p != col:
            a[[col, p]] = a[[p, col]]
            sign = -sign
        pivot = a[col, col]
        factors = a[col + 1 :, col] / pivot
        a[col + 1 :, col:] -= np.outer(factors, a[col, col:])
    return float(sign * np.prod(np.diag(a)))


def numerical_rank(a: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> int:
    """Count of singular values above tol times the largest one."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def random_factors(m: int, n: int, r: int, seed: int) -> FactorPair:
    """Independent standard-normal factors, deterministic per seed."""
    if not 1 <= r <= min(m, n):
        raise ValueError(f"rank {r} outside [1, min({m}, {n})]")
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((m, r))
    v = rng.standard_normal((r, n))
    return FactorPair(u, v)


def random_rank_r(m: int, n: int, r: int, seed: int) -> np.ndarray:
    """Random m x n matrix of rank r (with probability one)."""
    u, v = random_factors(m, n, r, seed)
    return u @ v


def svd_compact(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Compact SVD: singular values (descending), left and right factors.

    Returns (s, u, vt) with a == u @ diag(s) @ vt up to roundoff.
    """
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite entries")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    return s, u, vt

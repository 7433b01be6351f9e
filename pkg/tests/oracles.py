"""Independent brute-force oracles used to freeze expected test values.

Everything here is deliberately naive and shares no code path with the
package: cofactor expansion for determinants, explicit edge-subset
enumeration for connectivity, characteristic-polynomial eigenvalues for
singular values, and central finite differences for derivatives.
"""

from __future__ import annotations

import itertools
from collections import deque

import numpy as np


def cofactor_determinant(a) -> float:
    """Recursive cofactor expansion along the first row (small n only)."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n == 0:
        return 1.0
    if n == 1:
        return float(a[0, 0])
    total = 0.0
    for j in range(n):
        minor = np.delete(a[1:], j, axis=1)
        total += ((-1.0) ** j) * a[0, j] * cofactor_determinant(minor)
    return total


def bfs_connected(m: int, n: int, entries) -> bool:
    """All m+n vertices in one component (rows 0..m-1, cols m..m+n-1)."""
    if m + n == 0:
        return True
    adj = {v: [] for v in range(m + n)}
    for i, j in entries:
        adj[i].append(m + j)
        adj[m + j].append(i)
    seen = {0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == m + n


def edge_connectivity_bruteforce(m: int, n: int, entries) -> int:
    """Smallest number of edges whose removal disconnects the graph.

    Exponential in the edge count; callers keep it at <= 14 edges.
    """
    entries = list(entries)
    if not bfs_connected(m, n, entries):
        return 0
    for k in range(1, len(entries) + 1):
        for removed in itertools.combinations(range(len(entries)), k):
            kept = [e for idx, e in enumerate(entries) if idx not in removed]
            if not bfs_connected(m, n, kept):
                return k
    return len(entries)


def charpoly_coefficients(g: np.ndarray) -> np.ndarray:
    """Characteristic polynomial of a square matrix via Faddeev-LeVerrier.

    Returns coefficients [1, c1, ..., cn] of lambda^n + c1 lambda^(n-1) + ...
    """
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    mat = np.zeros_like(g)
    for k in range(1, n + 1):
        mat = g @ mat + coeffs[k - 1] * np.eye(n)
        coeffs[k] = -np.trace(g @ mat) / k
    return coeffs


def gram_eigenvalues(a: np.ndarray) -> np.ndarray:
    """Eigenvalues of a^T a from its characteristic polynomial, descending."""
    g = np.asarray(a, dtype=float).T @ np.asarray(a, dtype=float)
    roots = np.roots(charpoly_coefficients(g))
    vals = np.sort(np.real(roots))[::-1]
    return np.clip(vals, 0.0, None)


def finite_difference_jacobian(f, x0: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Central differences of a vector-valued function of a flat vector."""
    x0 = np.asarray(x0, dtype=float)
    f0 = np.asarray(f(x0))
    jac = np.zeros((f0.size, x0.size))
    for k in range(x0.size):
        xp = x0.copy()
        xm = x0.copy()
        xp[k] += step
        xm[k] -= step
        jac[:, k] = (np.asarray(f(xp)) - np.asarray(f(xm))) / (2 * step)
    return jac

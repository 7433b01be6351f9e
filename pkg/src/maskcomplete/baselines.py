"""Optimization baselines for the comparison experiments.

Two solvers for the same data, different relaxations:

* `nuclear_norm_complete` minimizes the nuclear norm subject to matching
  the observed entries, solved by ADMM whose proximal step is singular
  value thresholding and whose feasibility step overwrites the observed
  cells with their given values.
* `rank_r_fit` minimizes the observed-entry residual over matrices of
  rank at most r by alternating least squares on the factors, restarted
  from several seeded Gaussian initializations.  This stands in for
  Grassmann-manifold solvers of the same program; it optimizes the
  identical objective and is labeled as a proxy in the experiment output.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .linalg import svd_compact
from .masks import MaskedMatrix, derive_seed

__all__ = [
    "SolverConfig",
    "NuclearNormResult",
    "RankFitResult",
    "nuclear_norm_complete",
    "rank_r_fit",
    "rank_r_fit_all",
    "singular_value_threshold",
    "success",
]


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 2000
    abs_tol: float = 1e-7
    rel_tol: float = 1e-6
    admm_rho: float = 1.0
    restarts: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.abs_tol <= 0 or self.rel_tol <= 0 or self.admm_rho <= 0:
            raise ValueError("tolerances and admm_rho must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")

    def replace(self, **kw) -> "SolverConfig":
        return dataclasses.replace(self, **kw)


@dataclass(frozen=True)
class NuclearNormResult:
    matrix: np.ndarray
    converged: bool
    iterations: int
    primal_residual: float
    dual_residual: float
    nuclear_norm_history: tuple[float, ...]


@dataclass(frozen=True)
class RankFitResult:
    matrix: np.ndarray
    observed_residual: float
    underdetermined: bool
    residual_history: tuple[float, ...]  # after every half-step
    seed: int


def singular_value_threshold(a: np.ndarray, tau: float) -> np.ndarray:
    """Shrink singular values by tau and clamp at zero."""
    s, u, vt = svd_compact(a)
    s = np.maximum(s - tau, 0.0)
    return (u * s) @ vt


def nuclear_norm_complete(
    masked: MaskedMatrix, config: SolverConfig | None = None
) -> NuclearNormResult:
    """ADMM for: minimize nuclear norm subject to observed entries fixed.

    Splitting X = Z with Z carrying the data constraint:
        X   <- svt(Z - W, 1/rho)
        Z   <- X + W, then observed cells reset to their given values
        W   <- W + X - Z
    Standard primal/dual residual stopping; the returned matrix is the
    last Z, so observed entries match the data exactly.
    """
    cfg = config or SolverConfig()
    if masked.mask.edge_count() == 0:
        raise ValueError("empty mask: nothing constrains the completion")
    m, n = masked.m, masked.n
    obs = masked.mask.to_dense().astype(bool)
    b = np.where(obs, np.nan_to_num(masked.to_dense_with_nan()), 0.0)

    rho = cfg.admm_rho
    z = b.copy()
    x = b.copy()
    w = np.zeros((m, n))
    sqrt_mn = float(np.sqrt(m * n))
    history: list[float] = []
    converged = False
    it = 0
    r_norm = s_norm = float("inf")
    for it in range(1, cfg.max_iters + 1):
        x = singular_value_threshold(z - w, 1.0 / rho)
        z_old = z
        z = x + w
        z[obs] = b[obs]
        w = w + x - z
        history.append(float(np.sum(svd_compact(z)[0])))
        r_norm = float(np.linalg.norm(x - z))
        s_norm = float(rho * np.linalg.norm(z - z_old))
        eps_pri = sqrt_mn * cfg.abs_tol + cfg.rel_tol * max(
            np.linalg.norm(x), np.linalg.norm(z)
        )
        eps_dual = sqrt_mn * cfg.abs_tol + cfg.rel_tol * float(np.linalg.norm(rho * w))
        if r_norm <= eps_pri and s_norm <= eps_dual:
            converged = True
            break
    return NuclearNormResult(z, converged, it, r_norm, s_norm, tuple(history))


def _half_step_rows(
    u: np.ndarray, v: np.ndarray, obs_idx: list[np.ndarray], vals: list[np.ndarray]
) -> None:
    """Optimal U given V, row by row over each row's observed columns."""
    r = u.shape[1]
    for i, cols in enumerate(obs_idx):
        if cols.size == 0:
            u[i] = 0.0
            continue
        a = v[:, cols].T
        y = vals[i]
        if cols.size >= r:
            g = a.T @ a
            try:
                sol = np.linalg.solve(g, a.T @ y)
                if not np.all(np.isfinite(sol)):
                    raise np.linalg.LinAlgError
            except np.linalg.LinAlgError:
                sol = np.linalg.lstsq(a, y, rcond=None)[0]
        else:
            sol = np.linalg.lstsq(a, y, rcond=None)[0]
        u[i] = sol


def _observed_residual(
    u: np.ndarray, v: np.ndarray, idx: tuple[np.ndarray, np.ndarray], values: np.ndarray
) -> float:
    fitted = np.einsum("ik,ki->i", u[idx[0]], v[:, idx[1]])
    return float(np.linalg.norm(fitted - values))


def rank_r_fit_all(
    masked: MaskedMatrix, r: int, config: SolverConfig | None = None
) -> list[RankFitResult]:
    """One alternating-least-squares fit per restart, all returned."""
    cfg = config or SolverConfig()
    mask = masked.mask
    if mask.edge_count() == 0:
        raise ValueError("empty mask: nothing to fit")
    if not 1 <= r <= min(mask.m, mask.n):
        raise ValueError(f"rank {r} outside [1, min({mask.m}, {mask.n})]")
    m, n = mask.m, mask.n
    entries = mask.entries
    values = np.array([masked.values[e] for e in entries])
    idx = (
        np.array([i for i, _ in entries], dtype=int),
        np.array([j for _, j in entries], dtype=int),
    )
    scale = float(np.linalg.norm(values)) or 1.0

    row_cols = [idx[1][idx[0] == i] for i in range(m)]
    col_rows = [idx[0][idx[1] == j] for j in range(n)]
    row_vals = [values[idx[0] == i] for i in range(m)]
    col_vals = [values[idx[1] == j] for j in range(n)]
    underdetermined = any(c.size < r for c in row_cols) or any(
        c.size < r for c in col_rows
    )

    results = []
    for restart in range(cfg.restarts):
        sub_seed = derive_seed(cfg.seed, "rank-fit-restart", restart)
        rng = np.random.default_rng(sub_seed)
        u = rng.standard_normal((m, r))
        v = rng.standard_normal((r, n))
        history: list[float] = []
        prev = float("inf")
        for _ in range(cfg.max_iters):
            _half_step_rows(u, v, row_cols, row_vals)
            history.append(_observed_residual(u, v, idx, values))
            vt = v.T
            _half_step_rows(vt, u.T, col_rows, col_vals)
            v = vt.T
            res = _observed_residual(u, v, idx, values)
            history.append(res)
            if res <= 1e-13 * scale:
                break
            if prev - res <= cfg.rel_tol * max(res, cfg.abs_tol):
                break
            prev = res
        results.append(
            RankFitResult(u @ v, history[-1], underdetermined, tuple(history), sub_seed)
        )
    return results


def rank_r_fit(
    masked: MaskedMatrix, r: int, config: SolverConfig | None = None
) -> RankFitResult:
    """Best restart of the alternating-least-squares fit."""
    results = rank_r_fit_all(masked, r, config)
    return min(results, key=lambda res: res.observed_residual)


def success(recovered: np.ndarray, truth: np.ndarray, threshold: float) -> bool:
    """Relative Frobenius recovery criterion."""
    recovered = np.asarray(recovered, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if recovered.shape != truth.shape:
        raise ValueError(f"shape mismatch {recovered.shape} vs {truth.shape}")
    return float(np.linalg.norm(recovered - truth)) <= threshold * float(
        np.linalg.norm(truth)
    )

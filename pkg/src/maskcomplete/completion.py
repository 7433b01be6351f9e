"""Exact completion of a generic rank-r matrix from observed entries.

Each step finds an (r+1) x (r+1) block of the current matrix with exactly
one unknown cell.  Forcing the block's determinant to zero is an affine
equation c*x + d = 0 in the unknown x, where c is the signed cofactor of
the unknown cell and d the determinant with x set to zero; both come from
our pivoted elimination.  The solved value is inserted, the mask grows by
one cell, and the loop repeats until the matrix is full or no block
remains.

On generic data a block's cofactor is nonzero.  Near-degenerate blocks
(tiny cofactor relative to the block's largest entry) are skipped in
favor of better-conditioned candidates; the run fails only when every
remaining block is degenerate, which signals non-generic input values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .closure import ClosureEngine, ClosureStep
from .graphs import edge_count_condition, is_r_connected, min_degree_condition
from .linalg import determinant, numerical_rank
from .masks import Mask, MaskedMatrix, derive_seed

__all__ = [
    "DegenerateBlockError",
    "CompleteOptions",
    "InferredEntry",
    "CompletionResult",
    "solve_block_entry",
    "complete",
    "verify_completion",
]

DEGENERATE_COFACTOR_TOL = 1e-10


class DegenerateBlockError(ValueError):
    """The unknown cell's cofactor is numerically zero (non-generic data)."""


@dataclass(frozen=True)
class CompleteOptions:
    strategy: str = "exhaustive"
    seed: int = 0
    precheck: bool = True
    check_connectivity: bool = False
    candidates_per_step: int = 8
    degenerate_tol: float = DEGENERATE_COFACTOR_TOL
    minor_sample_budget: int = 64


@dataclass(frozen=True)
class InferredEntry:
    cell: tuple[int, int]
    value: float
    rows: tuple[int, ...]
    cols: tuple[int, ...]
    pivot: float  # |cofactor| / block scale at solve time


@dataclass(frozen=True)
class CompletionResult:
    matrix: np.ndarray
    inferred: tuple[InferredEntry, ...]
    residual_max_minor: float

    def to_json_dict(self) -> dict:
        """Inference trace for the CLI sidecar; indices are 1-based."""
        return {
            "inferred": [
                {
                    "cell": [e.cell[0] + 1, e.cell[1] + 1],
                    "value": e.value,
                    "rows": [i + 1 for i in e.rows],
                    "cols": [j + 1 for j in e.cols],
                    "pivot": e.pivot,
                }
                for e in self.inferred
            ],
            "inferred_count": len(self.inferred),
            "residual_max_minor": self.residual_max_minor,
        }


def _block_coefficients(block: np.ndarray) -> tuple[float, float, float, tuple[int, int]]:
    """(cofactor, det_at_zero, scale, unknown_position) for a one-hole block.

    The block must be square with exactly one NaN.  Its determinant as a
    function of the unknown x is cofactor * x + det_at_zero.
    """
    if block.ndim != 2 or block.shape[0] != block.shape[1]:
        raise ValueError(f"expected square block, got shape {block.shape}")
    holes = np.argwhere(np.isnan(block))
    if len(holes) != 1:
        raise ValueError(f"expected exactly one unknown cell, found {len(holes)}")
    p, q = (int(x) for x in holes[0])
    known = block[np.isfinite(block)]
    scale = float(np.max(np.abs(known))) if known.size else 0.0
    filled = block.copy()
    filled[p, q] = 0.0
    d = determinant(filled)
    minor = np.delete(np.delete(block, p, axis=0), q, axis=1)
    c = ((-1.0) ** (p + q)) * determinant(minor)
    return c, d, scale, (p, q)


def solve_block_entry(block: np.ndarray, tol: float = DEGENERATE_COFACTOR_TOL) -> float:
    """Unique value for the single NaN cell making the block singular.

    Raises DegenerateBlockError when the unknown's cofactor is at or below
    tol times the block's largest known entry; the caller should try a
    different block.
    """
    block = np.asarray(block, dtype=float)
    c, d, scale, _ = _block_coefficients(block)
    if abs(c) <= tol * scale:
        raise DegenerateBlockError(
            f"cofactor {c:.3e} below {tol:g} * scale {scale:.3e}"
        )
    return -d / c


def _scored_candidates(
    a: np.ndarray, steps: list[ClosureStep]
) -> list[tuple[float, float, float, ClosureStep]]:
    """(score, cofactor, det_at_zero, step), best conditioned first."""
    scored = []
    for step in steps:
        block = a[np.ix_(step.rows, step.cols)]
        c, d, scale, _ = _block_coefficients(block)
        score = abs(c) / scale if scale > 0 else 0.0
        scored.append((score, c, d, step))
    scored.sort(key=lambda t: -t[0])
    return scored


def complete(
    masked: MaskedMatrix, r: int, options: Optional[CompleteOptions] = None
) -> Optional[CompletionResult]:
    """Run the closure completion; None when the mask defeats it.

    None is returned when the optional precheck fails, when no
    one-unknown block exists before the matrix is full, or when every
    remaining block is numerically degenerate.
    """
    opts = options or CompleteOptions()
    mask = masked.mask
    if not 1 <= r <= min(mask.m, mask.n):
        raise ValueError(f"rank {r} outside [1, min({mask.m}, {mask.n})]")
    a = masked.to_dense_with_nan()
    if not np.all(np.isfinite(a[~np.isnan(a)])):
        raise ValueError("non-finite observed values")

    if opts.precheck and not mask.is_full():
        if not edge_count_condition(mask, r) or not min_degree_condition(mask, r)[0]:
            return None
        if opts.check_connectivity and not is_r_connected(mask, r)[0]:
            return None

    engine = ClosureEngine(mask, r, strategy=opts.strategy, seed=opts.seed)
    inferred: list[InferredEntry] = []
    while not engine.is_full():
        cands = engine.candidate_steps(limit=opts.candidates_per_step)
        if not cands:
            return None
        scored = _scored_candidates(a, cands)
        if scored[0][0] <= opts.degenerate_tol:
            # Every sampled block is degenerate; widen to all remaining
            # blocks before giving up on this non-generic instance.
            cands = engine.candidate_steps(limit=10**9, per_hole=32)
            scored = _scored_candidates(a, cands) if cands else []
            if not scored or scored[0][0] <= opts.degenerate_tol:
                return None
        score, c, d, step = scored[0]
        value = -d / c
        a[step.added] = value
        inferred.append(
            InferredEntry(step.added, float(value), step.rows, step.cols, float(score))
        )
        engine.apply(step)

    residual = _max_sampled_minor(a, r, opts.minor_sample_budget, opts.seed)
    return CompletionResult(a, tuple(inferred), residual)


def _max_sampled_minor(a: np.ndarray, r: int, budget: int, seed: int) -> float:
    m, n = a.shape
    if r + 1 > min(m, n) or budget <= 0:
        return 0.0
    rng = np.random.default_rng(derive_seed(seed, "minor-sample", m, n, r))
    worst = 0.0
    for _ in range(budget):
        rows = rng.choice(m, size=r + 1, replace=False)
        cols = rng.choice(n, size=r + 1, replace=False)
        worst = max(worst, abs(determinant(a[np.ix_(rows, cols)])))
    return worst


def verify_completion(
    result: CompletionResult,
    r: int,
    sample_budget: int = 200,
    rank_tol: float = 1e-6,
    minor_tol: float = 1e-6,
    seed: int = 0,
) -> bool:
    """Post-hoc sanity check of a claimed completion.

    The matrix must have numerical rank at most r and every sampled
    (r+1) x (r+1) determinant must vanish relative to the entry scale.
    """
    a = np.asarray(result.matrix, dtype=float)
    if not np.all(np.isfinite(a)):
        return False
    if numerical_rank(a, rank_tol) > r:
        return False
    m, n = a.shape
    if r + 1 > min(m, n):
        return True
    scale = max(1.0, float(np.max(np.abs(a))))
    threshold = minor_tol * scale ** (r + 1)
    rng = np.random.default_rng(derive_seed(seed, "verify-minors", m, n, r))
    for _ in range(sample_budget):
        rows = rng.choice(m, size=r + 1, replace=False)
        cols = rng.choice(n, size=r + 1, replace=False)
        if abs(determinant(a[np.ix_(rows, cols)])) > threshold:
            return False
    return True

"""Rank closure of observation masks.

A mask is r-closable when repeatedly finding an (r+1) x (r+1) block with
exactly one unobserved cell, and marking that cell observed, eventually
fills the whole grid.  The filled-in pattern (the r-closure) is the same
whatever order blocks are picked in; only the step sequence differs.

Two block-search strategies are provided:

* "exhaustive": scan unobserved cells in row-major order; for each, try
  r-subsets of candidate rows in lexicographic order and take the first
  subset sharing at least r observed columns with the cell's row.  Fully
  deterministic; finds a block whenever one exists.
* "heuristic": order cells and candidate rows/columns by current vertex
  degree (densest first) and try a bounded number of seeded random row
  subsets per cell before moving on.  Fast on large masks, may miss
  blocks; callers that need certainty fall back to "exhaustive".

Internally each row's observed columns are a bitmask, so testing a row
subset is a chain of ANDs and popcounts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .masks import Mask, derive_seed

__all__ = [
    "ClosureStep",
    "ClosureTrace",
    "find_completable_block",
    "r_closure",
    "is_r_closable",
    "normalize_strategy",
]

DEFAULT_HEURISTIC_RETRIES = 50

_STRATEGIES = {"exhaustive": "exhaustive", "heuristic": "heuristic", "degree-heuristic": "heuristic"}


def normalize_strategy(strategy: str) -> str:
    try:
        return _STRATEGIES[strategy]
    except KeyError:
        raise ValueError(f"unknown strategy {strategy!r} (use 'exhaustive' or 'heuristic')") from None


@dataclass(frozen=True)
class ClosureStep:
    """One block completion: r+1 rows x r+1 cols observed except `added`."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    added: tuple[int, int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(sorted(self.rows)))
        object.__setattr__(self, "cols", tuple(sorted(self.cols)))
        if self.added[0] not in self.rows or self.added[1] not in self.cols:
            raise ValueError("added cell outside the block")


@dataclass(frozen=True)
class ClosureTrace:
    initial: Mask
    steps: tuple[ClosureStep, ...]
    final: Mask

    @property
    def closable(self) -> bool:
        return self.final.is_full()

    def replay(self) -> Mask:
        """Re-apply the steps to the initial mask (for verification)."""
        mask = self.initial
        for step in self.steps:
            for i in step.rows:
                for j in step.cols:
                    if (i, j) != step.added and (i, j) not in mask:
                        raise ValueError(f"step block not observed at ({i}, {j})")
            mask = mask.with_entry(*step.added)
        return mask

    def to_json_dict(self) -> dict:
        """JSON form; indices are 1-based."""
        return {
            "initial_alpha": self.initial.edge_count(),
            "steps": [
                {
                    "rows": [i + 1 for i in s.rows],
                    "cols": [j + 1 for j in s.cols],
                    "added": [s.added[0] + 1, s.added[1] + 1],
                }
                for s in self.steps
            ],
            "final_alpha": self.final.edge_count(),
            "closable": self.closable,
        }


def _first_bits(x: int, count: int) -> list[int]:
    out = []
    idx = 0
    while x and len(out) < count:
        if x & 1:
            out.append(idx)
        x >>= 1
        idx += 1
    return out


class ClosureEngine:
    """Mutable closure state shared by the closure and completion passes.

    Tracks which unobserved cells could still head a completable block:
    a cell goes dormant when its search fails and is woken only when a
    newly added cell could take part in one of its blocks, so no firing
    opportunity is ever missed.
    """

    def __init__(self, mask: Mask, r: int, strategy: str = "exhaustive", seed: int = 0,
                 retries: int = DEFAULT_HEURISTIC_RETRIES):
        if not 1 <= r <= min(mask.m, mask.n):
            raise ValueError(f"rank {r} outside [1, min({mask.m}, {mask.n})]")
        self.m, self.n, self.r = mask.m, mask.n, r
        self.strategy = normalize_strategy(strategy)
        self.retries = retries
        self.rowbits = [0] * mask.m
        for i, j in mask.entries:
            self.rowbits[i] |= 1 << j
        self.row_deg = list(mask.row_degrees())
        self.col_deg = list(mask.col_degrees())
        self.pending: set[tuple[int, int]] = {
            (i, j) for i in range(mask.m) for j in range(mask.n) if (i, j) not in mask
        }
        self.dormant: set[tuple[int, int]] = set()
        self.steps: list[ClosureStep] = []
        self._rng = np.random.default_rng(derive_seed(seed, "closure", mask.m, mask.n, r))

    # -- queries ----------------------------------------------------------

    def observed(self, i: int, j: int) -> bool:
        return bool((self.rowbits[i] >> j) & 1)

    def is_full(self) -> bool:
        return not self.pending and not self.dormant

    def current_mask(self) -> Mask:
        entries = [
            (i, j) for i in range(self.m) for j in range(self.n) if self.observed(i, j)
        ]
        return Mask(self.m, self.n, tuple(entries))

    def _hole_order(self) -> list[tuple[int, int]]:
        if self.strategy == "exhaustive":
            return sorted(self.pending)
        return sorted(
            self.pending,
            key=lambda h: (-(self.row_deg[h[0]] + self.col_deg[h[1]]), h[0], h[1]),
        )

    # -- block search ------------------------------------------------------

    def _blocks_exhaustive(self, i: int, j: int) -> Iterator[ClosureStep]:
        """All blocks for hole (i, j), lexicographic in the row subset."""
        r = self.r
        base = self.rowbits[i] & ~(1 << j)
        if base.bit_count() < r:
            return
        cand = [k for k in range(self.m) if k != i and self.observed(k, j)]
        if len(cand) < r:
            return
        chosen: list[int] = []

        def dfs(start: int, acc: int) -> Iterator[int]:
            if len(chosen) == r:
                yield acc
                return
            for idx in range(start, len(cand)):
                if len(cand) - idx < r - len(chosen):
                    break
                na = acc & self.rowbits[cand[idx]]
                if na.bit_count() >= r:
                    chosen.append(cand[idx])
                    yield from dfs(idx + 1, na)
                    chosen.pop()

        for acc in dfs(0, base):
            cols = _first_bits(acc, r)
            yield ClosureStep(tuple([i] + chosen), tuple([j] + cols), (i, j))

    def _blocks_heuristic(self, i: int, j: int) -> Iterator[ClosureStep]:
        """Degree-guided seeded attempts for hole (i, j)."""
        r = self.r
        base = self.rowbits[i] & ~(1 << j)
        if base.bit_count() < r:
            return
        cand = [k for k in range(self.m) if k != i and self.observed(k, j)]
        if len(cand) < r:
            return
        cand.sort(key=lambda k: (-self.row_deg[k], k))

        def check(rows: list[int]) -> Optional[ClosureStep]:
            acc = base
            for k in rows:
                acc &= self.rowbits[k]
                if acc.bit_count() < r:
                    return None
            common = _first_bits(acc, self.n)
            common.sort(key=lambda c: (-self.col_deg[c], c))
            return ClosureStep(tuple([i] + rows), tuple([j] + common[:r]), (i, j))

        step = check(cand[:r])
        if step is not None:
            yield step
        for _ in range(self.retries):
            rows = [cand[t] for t in self._rng.choice(len(cand), size=r, replace=False)]
            step = check(rows)
            if step is not None:
                yield step

    def _blocks_for_hole(self, hole: tuple[int, int]) -> Iterator[ClosureStep]:
        if self.r + 1 > min(self.m, self.n):
            return iter(())
        if self.strategy == "exhaustive":
            return self._blocks_exhaustive(*hole)
        return self._blocks_heuristic(*hole)

    def candidate_steps(self, limit: int = 1, per_hole: int = 1) -> list[ClosureStep]:
        """Up to `limit` firing blocks, scanning holes in strategy order.

        Holes found to have no block are parked dormant; holes that do
        fire stay pending until their cell is actually added.
        """
        out: list[ClosureStep] = []
        for hole in self._hole_order():
            produced = 0
            for step in self._blocks_for_hole(hole):
                out.append(step)
                produced += 1
                if produced >= per_hole or len(out) >= limit:
                    break
            if produced == 0:
                self.pending.discard(hole)
                self.dormant.add(hole)
            if len(out) >= limit:
                break
        return out

    # -- state update ------------------------------------------------------

    def apply(self, step: ClosureStep) -> None:
        i, j = step.added
        if self.observed(i, j):
            raise ValueError(f"cell ({i}, {j}) already observed")
        self.rowbits[i] |= 1 << j
        self.row_deg[i] += 1
        self.col_deg[j] += 1
        self.pending.discard((i, j))
        self.dormant.discard((i, j))
        self.steps.append(step)
        # A dormant hole (k, l) can fire again only through a block that
        # contains the new cell, which requires k == i, l == j, or both
        # (i, l) and (k, j) observed.
        wake = [
            (k, l)
            for (k, l) in self.dormant
            if k == i or l == j or (self.observed(i, l) and self.observed(k, j))
        ]
        for hole in wake:
            self.dormant.discard(hole)
            self.pending.add(hole)

    def run_closure(self) -> None:
        """Add block cells until no completable block remains."""
        while True:
            steps = self.candidate_steps(limit=1)
            if not steps:
                break
            self.apply(steps[0])


def find_completable_block(
    mask: Mask, r: int, strategy: str = "exhaustive", seed: int = 0
) -> Optional[ClosureStep]:
    """First (r+1) x (r+1) block with exactly one unobserved cell, or None."""
    engine = ClosureEngine(mask, r, strategy=strategy, seed=seed)
    steps = engine.candidate_steps(limit=1)
    return steps[0] if steps else None


def r_closure(
    mask: Mask, r: int, strategy: str = "exhaustive", seed: int = 0
) -> ClosureTrace:
    """Saturate the mask under block completion and record the steps."""
    engine = ClosureEngine(mask, r, strategy=strategy, seed=seed)
    engine.run_closure()
    return ClosureTrace(mask, tuple(engine.steps), engine.current_mask())


def is_r_closable(mask: Mask, r: int) -> bool:
    """Whether the exhaustive closure reaches the fully observed grid."""
    return r_closure(mask, r, strategy="exhaustive").closable

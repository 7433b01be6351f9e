"""Combinatorial necessary conditions on the observation pattern.

The mask is read as a bipartite graph: row vertices 0..m-1, column
vertices m..m+n-1, one edge per observed cell.  A mask can define a
uniquely solvable rank-r completion problem only if

  (i)   it has at least r*(m+n-r) entries,
  (ii)  every row and column has at least r entries,
  (iii) the graph stays connected after removing any r-1 edges, and
  (iv)  for every partition of the vertices into bipartite blocks, the
        number of cross-block edges is at least
        r*(m+n-r) - sum_i (m_i*n_i - max(0, m_i-r)*max(0, n_i-r)).

(iii) is decided exactly by m+n-1 unit-capacity max-flow computations
from a fixed root.  (iv) quantifies over all vertex partitions; the
search below is exact for small masks (see `partition_search_is_exhaustive`)
and best-effort above that, always returning a re-checkable witness when
it claims a violation.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .masks import Mask, derive_seed

__all__ = [
    "BipartitePartition",
    "ConditionReport",
    "edge_count_bound",
    "edge_count_condition",
    "min_degree_condition",
    "max_flow",
    "is_r_connected",
    "partition_bound_holds",
    "partition_bound_numbers",
    "search_violating_partition",
    "partition_search_is_exhaustive",
    "necessary_conditions_report",
    "connected_components",
    "is_connected",
]

DEFAULT_PARTITION_BUDGET = 1_000_000

# Memory guard for the exhaustive subset tables (cells of the 2^m x 2^n
# internal-edge-count matrix).
_EXHAUSTIVE_CELL_CAP = 1 << 22


def _check_rank(mask: Mask, r: int) -> None:
    if not 1 <= r <= min(mask.m, mask.n):
        raise ValueError(f"rank {r} outside [1, min({mask.m}, {mask.n})]")


def edge_count_bound(m: int, n: int, r: int) -> int:
    """Minimum entry count for rank-r identifiability."""
    return r * (m + n - r)


def edge_count_condition(mask: Mask, r: int) -> bool:
    """Condition (i): entry count reaches r*(m+n-r)."""
    _check_rank(mask, r)
    return mask.edge_count() >= edge_count_bound(mask.m, mask.n, r)


def min_degree_condition(mask: Mask, r: int) -> tuple[bool, tuple[int, ...], tuple[int, ...]]:
    """Condition (ii): every row and column is observed at least r times.

    Returns (ok, violating_rows, violating_cols).
    """
    _check_rank(mask, r)
    bad_rows = tuple(i for i, d in enumerate(mask.row_degrees()) if d < r)
    bad_cols = tuple(j for j, d in enumerate(mask.col_degrees()) if d < r)
    return (not bad_rows and not bad_cols, bad_rows, bad_cols)


# ---------------------------------------------------------------------------
# Unit-capacity max flow on the bipartite adjacency graph.
#
# Vertices are numbered 0..m-1 (rows) then m..m+n-1 (columns).  Each
# observed cell is an undirected unit-capacity edge, stored as a pair of
# arcs with capacity 1 each; pushing on one arc frees the other, which is
# exactly the residual structure of an undirected edge.
# ---------------------------------------------------------------------------


class _FlowGraph:
    def __init__(self, mask: Mask):
        self.m = mask.m
        self.n = mask.n
        self.size = mask.m + mask.n
        self.to: list[int] = []
        self.res: list[int] = []
        self.adj: list[list[int]] = [[] for _ in range(self.size)]
        self.edge_of_arc: list[tuple[int, int]] = []
        for i, j in mask.entries:
            u, v = i, mask.m + j
            self.adj[u].append(len(self.to))
            self.to.append(v)
            self.res.append(1)
            self.edge_of_arc.append((i, j))
            self.adj[v].append(len(self.to))
            self.to.append(u)
            self.res.append(1)
            self.edge_of_arc.append((i, j))

    def reset(self) -> None:
        for a in range(len(self.res)):
            self.res[a] = 1

    def _augment(self, s: int, t: int) -> bool:
        """One BFS augmenting path; returns False when t is unreachable."""
        prev_arc = [-1] * self.size
        prev_arc[s] = -2
        q = deque([s])
        while q:
            u = q.popleft()
            if u == t:
                break
            for a in self.adj[u]:
                v = self.to[a]
                if self.res[a] > 0 and prev_arc[v] == -1:
                    prev_arc[v] = a
                    q.append(v)
        if prev_arc[t] == -1:
            return False
        v = t
        while v != s:
            a = prev_arc[v]
            self.res[a] -= 1
            self.res[a ^ 1] += 1
            v = self.to[a ^ 1]
        return True

    def max_flow(self, s: int, t: int, cutoff: Optional[int] = None) -> int:
        flow = 0
        while cutoff is None or flow < cutoff:
            if not self._augment(s, t):
                break
            flow += 1
        return flow

    def residual_reachable(self, s: int) -> set[int]:
        seen = {s}
        q = deque([s])
        while q:
            u = q.popleft()
            for a in self.adj[u]:
                v = self.to[a]
                if self.res[a] > 0 and v not in seen:
                    seen.add(v)
                    q.append(v)
        return seen

    def min_cut_edges(self, s: int) -> tuple[tuple[int, int], ...]:
        """Mask entries crossing the residual-reachability cut around s."""
        side = self.residual_reachable(s)
        cut = []
        for i, j in set(self.edge_of_arc):
            u, v = i, self.m + j
            if (u in side) != (v in side):
                cut.append((i, j))
        return tuple(sorted(cut))


def max_flow(mask: Mask, source: int, sink: int) -> int:
    """Maximum flow between two vertices with unit capacity per edge.

    Vertices: 0..m-1 are rows, m..m+n-1 are columns.  A disconnected
    source/sink pair yields flow 0.
    """
    size = mask.m + mask.n
    if not (0 <= source < size and 0 <= sink < size):
        raise ValueError(f"vertex outside [0, {size})")
    if source == sink:
        raise ValueError("source equals sink")
    g = _FlowGraph(mask)
    return g.max_flow(source, sink)


def is_r_connected(mask: Mask, r: int) -> tuple[bool, Optional[tuple[tuple[int, int], ...]]]:
    """Condition (iii): the graph survives removal of any r-1 edges.

    Decided by m+n-1 max-flow computations from vertex 0, each stopped as
    soon as r augmenting paths exist.  When the answer is no, the second
    element is a separating edge set of size < r taken from the min cut.
    """
    _check_rank(mask, r)
    g = _FlowGraph(mask)
    for t in range(1, g.size):
        g.reset()
        flow = g.max_flow(0, t, cutoff=r)
        if flow < r:
            return False, g.min_cut_edges(0)
    return True, None


def connected_components(mask: Mask) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Connected components as (rows, cols) pairs; isolated vertices are
    singleton components."""
    m, n = mask.m, mask.n
    adj: list[list[int]] = [[] for _ in range(m + n)]
    for i, j in mask.entries:
        adj[i].append(m + j)
        adj[m + j].append(i)
    seen = [False] * (m + n)
    comps = []
    for start in range(m + n):
        if seen[start]:
            continue
        seen[start] = True
        q = deque([start])
        rows, cols = [], []
        while q:
            u = q.popleft()
            (rows if u < m else cols).append(u if u < m else u - m)
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    q.append(v)
        comps.append((tuple(sorted(rows)), tuple(sorted(cols))))
    return comps


def is_connected(mask: Mask) -> bool:
    return len(connected_components(mask)) == 1


# ---------------------------------------------------------------------------
# Condition (iv): the partition bound.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BipartitePartition:
    """Partition of the row and column vertices into bipartite blocks.

    Each block is a (rows, cols) pair; the row sets partition 0..m-1 and
    the column sets partition 0..n-1.  A block may be empty on one side.
    """

    blocks: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    def __post_init__(self) -> None:
        norm = tuple(
            (tuple(sorted(int(i) for i in rows)), tuple(sorted(int(j) for j in cols)))
            for rows, cols in self.blocks
        )
        object.__setattr__(self, "blocks", norm)
        for rows, cols in norm:
            if not rows and not cols:
                raise ValueError("empty block")

    def validate_for(self, m: int, n: int) -> None:
        rows = [i for b in self.blocks for i in b[0]]
        cols = [j for b in self.blocks for j in b[1]]
        if sorted(rows) != list(range(m)) or sorted(cols) != list(range(n)):
            raise ValueError(f"blocks do not partition {m} rows and {n} columns")


def singleton_partition(m: int, n: int) -> BipartitePartition:
    """Every vertex its own block; all edges are cross-edges."""
    blocks = [((i,), ()) for i in range(m)] + [((), (j,)) for j in range(n)]
    return BipartitePartition(tuple(blocks))


def component_partition(mask: Mask) -> BipartitePartition:
    return BipartitePartition(tuple(connected_components(mask)))


def _block_capacity(mi: int, ni: int, r: int) -> int:
    return mi * ni - max(0, mi - r) * max(0, ni - r)


def partition_bound_numbers(
    mask: Mask, r: int, partition: BipartitePartition
) -> tuple[int, int]:
    """(cross_edges, required) for the condition (iv) inequality."""
    partition.validate_for(mask.m, mask.n)
    row_block = {}
    col_block = {}
    for b, (rows, cols) in enumerate(partition.blocks):
        for i in rows:
            row_block[i] = b
        for j in cols:
            col_block[j] = b
    internal = 0
    for i, j in mask.entries:
        if row_block[i] == col_block[j]:
            internal += 1
    cross = mask.edge_count() - internal
    required = edge_count_bound(mask.m, mask.n, r) - sum(
        _block_capacity(len(rows), len(cols), r) for rows, cols in partition.blocks
    )
    return cross, required


def partition_bound_holds(mask: Mask, r: int, partition: BipartitePartition) -> bool:
    """Condition (iv) for one concrete partition."""
    _check_rank(mask, r)
    cross, required = partition_bound_numbers(mask, r, partition)
    return cross >= required


def partition_search_is_exhaustive(
    m: int, n: int, budget: int = DEFAULT_PARTITION_BUDGET
) -> bool:
    """Whether `search_violating_partition` covers all partitions.

    The search is exact whenever every (row-subset, column-subset) pair
    fits in the budget; absence of a witness then proves (iv).
    """
    if m > 16 or n > 16:
        return False
    cells = (1 << m) * (1 << n)
    return cells <= min(budget, _EXHAUSTIVE_CELL_CAP)


def _subset_bits(size: int) -> np.ndarray:
    """(2^size, size) 0/1 array; row x holds the bits of x."""
    xs = np.arange(1 << size, dtype=np.int64)
    return (xs[:, None] >> np.arange(size)[None, :]) & 1


def _internal_edge_table(grid: np.ndarray) -> np.ndarray:
    """edges[R, C] = observed cells inside rows R x cols C, for all subsets."""
    rowbits = _subset_bits(grid.shape[0])
    colbits = _subset_bits(grid.shape[1])
    return (rowbits @ grid) @ colbits.T


def _bits_to_tuple(x: int) -> tuple[int, ...]:
    out = []
    idx = 0
    while x:
        if x & 1:
            out.append(idx)
        x >>= 1
        idx += 1
    return tuple(out)


def _family_to_partition(
    m: int, n: int, family: list[tuple[int, int]]
) -> BipartitePartition:
    """Chosen (row-bits, col-bits) blocks padded with singletons."""
    used_r = 0
    used_c = 0
    blocks = []
    for rb, cb in family:
        blocks.append((_bits_to_tuple(rb), _bits_to_tuple(cb)))
        used_r |= rb
        used_c |= cb
    for i in range(m):
        if not (used_r >> i) & 1:
            blocks.append(((i,), ()))
    for j in range(n):
        if not (used_c >> j) & 1:
            blocks.append(((), (j,)))
    return BipartitePartition(tuple(blocks))


def _best_disjoint_family(
    blocks: list[tuple[int, int, int]], node_budget: int
) -> tuple[int, list[tuple[int, int]], bool]:
    """Max total excess over row- and column-disjoint blocks.

    blocks: (row_bits, col_bits, excess) with excess > 0, any order.
    Returns (best_sum, best_family, search_completed).
    """
    blocks = sorted(blocks, key=lambda b: -b[2])
    suffix = [0] * (len(blocks) + 1)
    for i in range(len(blocks) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + blocks[i][2]
    best_sum = 0
    best_family: list[tuple[int, int]] = []
    nodes = 0
    complete = True

    def dfs(idx: int, used_r: int, used_c: int, acc: int, family: list[tuple[int, int]]) -> None:
        nonlocal best_sum, best_family, nodes, complete
        if acc > best_sum:
            best_sum = acc
            best_family = list(family)
        if nodes > node_budget:
            complete = False
            return
        nodes += 1
        for i in range(idx, len(blocks)):
            if acc + suffix[i] <= best_sum:
                return
            rb, cb, ex = blocks[i]
            if (rb & used_r) or (cb & used_c):
                continue
            family.append((rb, cb))
            dfs(i + 1, used_r | rb, used_c | cb, acc + ex, family)
            family.pop()

    dfs(0, 0, 0, 0, [])
    return best_sum, best_family, complete


def _exhaustive_violation_search(
    mask: Mask, r: int, budget: int
) -> tuple[Optional[BipartitePartition], bool]:
    """Exact search via dense blocks.

    A partition can violate (iv) only through blocks with more than r rows
    and more than r columns whose internal edge count exceeds
    r*(rows+cols-r); every other block can be split into singletons
    without weakening the violation.  Hence a violating partition exists
    iff some disjoint family of such blocks has total excess greater than
    alpha - r*(m+n-r).
    """
    m, n = mask.m, mask.n
    gap = mask.edge_count() - edge_count_bound(m, n, r)
    grid = mask.to_dense().astype(np.int64)
    edges = _internal_edge_table(grid)
    pcr = _subset_bits(m).sum(axis=1)
    pcc = _subset_bits(n).sum(axis=1)
    cap = r * (pcr[:, None] + pcc[None, :] - r)
    excess = edges - cap
    eligible = (pcr[:, None] >= r + 1) & (pcc[None, :] >= r + 1)
    positive = np.argwhere(eligible & (excess > 0))
    if positive.size == 0:
        return None, True
    blocks = [(int(rb), int(cb), int(excess[rb, cb])) for rb, cb in positive]
    best_sum, family, complete = _best_disjoint_family(blocks, node_budget=max(budget, 10_000))
    if best_sum > gap:
        return _family_to_partition(m, n, family), True
    return None, complete


# Randomized fallback examines at most this many candidate columns even
# when the caller's budget is larger; the budget mainly sizes the
# exhaustive subset tables.
_HEURISTIC_SAMPLE_CAP = 20_000


def _heuristic_violation_search(
    mask: Mask, r: int, budget: int, seed: int
) -> Optional[BipartitePartition]:
    """Seeded randomized block sampling plus component-derived candidates."""
    m, n = mask.m, mask.n
    gap = mask.edge_count() - edge_count_bound(m, n, r)
    comp = component_partition(mask)
    if len(comp.blocks) > 1 and not partition_bound_holds(mask, r, comp):
        return comp
    if r + 1 > m or r + 1 > n:
        # No block can beat its capacity; only the component and
        # singleton partitions could have violated.
        return None

    grid = mask.to_dense().astype(np.int64)
    row_deg = grid.sum(axis=1)
    col_deg = grid.sum(axis=0)
    rng = np.random.default_rng(derive_seed(seed, "violating-partition", m, n, r))
    found: dict[tuple[int, int], int] = {}
    sample_budget = min(budget, _HEURISTIC_SAMPLE_CAP)
    examined = 0

    def consider(rows: np.ndarray) -> None:
        nonlocal examined
        rows = np.unique(rows)
        if len(rows) < r + 1:
            return
        counts = grid[rows].sum(axis=0)
        order = np.argsort(-counts, kind="stable")
        picked: list[int] = []
        edge_total = 0
        for j in order:
            picked.append(int(j))
            edge_total += int(counts[j])
            examined += 1
            if len(picked) >= r + 1:
                ex = edge_total - r * (len(rows) + len(picked) - r)
                if ex > 0:
                    rb = int(sum(1 << int(i) for i in rows))
                    cb = int(sum(1 << int(jj) for jj in picked))
                    if ex > found.get((rb, cb), 0):
                        found[(rb, cb)] = ex

    # Deterministic candidates first (densest rows), then random subsets.
    dense_rows = np.argsort(-row_deg, kind="stable")
    for a in range(r + 1, m + 1):
        consider(dense_rows[:a])
        if examined >= sample_budget:
            break
    while examined < sample_budget:
        a = int(rng.integers(r + 1, m + 1))
        consider(rng.choice(m, size=a, replace=False))

    # Transposed pass: densest columns against their best rows.
    dense_cols = np.argsort(-col_deg, kind="stable")
    for b in range(r + 1, n + 1):
        cols = np.unique(dense_cols[:b])
        counts = grid[:, cols].sum(axis=1)
        order = np.argsort(-counts, kind="stable")
        picked = []
        edge_total = 0
        for i in order:
            picked.append(int(i))
            edge_total += int(counts[i])
            if len(picked) >= r + 1:
                ex = edge_total - r * (len(picked) + len(cols) - r)
                if ex > 0:
                    rb = int(sum(1 << int(ii) for ii in picked))
                    cb = int(sum(1 << int(j) for j in cols))
                    if ex > found.get((rb, cb), 0):
                        found[(rb, cb)] = ex

    if not found:
        return None
    blocks = [(rb, cb, ex) for (rb, cb), ex in found.items()]
    best_sum, family, _ = _best_disjoint_family(blocks, node_budget=50_000)
    if best_sum > gap:
        part = _family_to_partition(m, n, family)
        if not partition_bound_holds(mask, r, part):
            return part
    return None


def search_violating_partition(
    mask: Mask,
    r: int,
    budget: int = DEFAULT_PARTITION_BUDGET,
    seed: int = 0,
) -> Optional[BipartitePartition]:
    """Look for a partition violating condition (iv).

    Returns a violating partition, or None.  None is a proof that (iv)
    holds only when `partition_search_is_exhaustive(m, n, budget)` is
    true; otherwise it just means none was found within budget.
    """
    _check_rank(mask, r)
    m, n = mask.m, mask.n
    if mask.edge_count() < edge_count_bound(m, n, r):
        # With too few entries the all-singletons partition already
        # violates the bound: every edge is a cross-edge.
        return singleton_partition(m, n)
    if partition_search_is_exhaustive(m, n, budget):
        part, complete = _exhaustive_violation_search(mask, r, budget)
        if part is not None or complete:
            return part
    return _heuristic_violation_search(mask, r, budget, seed)


# ---------------------------------------------------------------------------
# Aggregate report.
# ---------------------------------------------------------------------------


@dataclass
class ConditionReport:
    """Pass/fail detail for the necessary conditions, one mask, one rank.

    The closability and Jacobian fields start out None and are filled by
    the closure and fiber-dimension modules.
    """

    m: int
    n: int
    r: int
    alpha: int
    bound_i: int
    cond_i: bool
    cond_ii: bool
    violating_rows: tuple[int, ...]
    violating_cols: tuple[int, ...]
    cond_iii: bool
    violating_cut: Optional[tuple[tuple[int, int], ...]]
    cond_iv_status: str  # "pass" | "violated" | "unknown"
    violating_partition: Optional[BipartitePartition]
    r_closable: Optional[bool] = None
    jacobian_rank: Optional[int] = None
    jacobian_target: Optional[int] = None

    def to_json_dict(self) -> dict:
        """JSON form with fixed field names; indices are 1-based."""
        vertices = None
        if not self.cond_ii:
            vertices = {
                "rows": [i + 1 for i in self.violating_rows],
                "cols": [j + 1 for j in self.violating_cols],
            }
        cut = None
        if self.violating_cut is not None:
            cut = [[i + 1, j + 1] for i, j in self.violating_cut]
        partition = None
        if self.violating_partition is not None:
            partition = {
                "blocks": [
                    {"rows": [i + 1 for i in rows], "cols": [j + 1 for j in cols]}
                    for rows, cols in self.violating_partition.blocks
                ]
            }
        return {
            "alpha": self.alpha,
            "bound_i": self.bound_i,
            "cond_i": self.cond_i,
            "cond_ii": self.cond_ii,
            "violating_vertices": vertices,
            "cond_iii": self.cond_iii,
            "violating_cut": cut,
            "cond_iv_status": self.cond_iv_status,
            "violating_partition": partition,
            "r_closable": self.r_closable,
            "jacobian_rank": self.jacobian_rank,
            "jacobian_target": self.jacobian_target,
        }


def necessary_conditions_report(
    mask: Mask, r: int, partition_budget: int = DEFAULT_PARTITION_BUDGET
) -> ConditionReport:
    """Evaluate conditions (i)-(iii) exactly and (iv) best-effort."""
    _check_rank(mask, r)
    alpha = mask.edge_count()
    bound = edge_count_bound(mask.m, mask.n, r)
    cond_i = alpha >= bound
    cond_ii, bad_rows, bad_cols = min_degree_condition(mask, r)
    cond_iii, cut = is_r_connected(mask, r)
    part = search_violating_partition(mask, r, budget=partition_budget)
    if part is not None:
        iv_status = "violated"
    elif partition_search_is_exhaustive(mask.m, mask.n, partition_budget):
        iv_status = "pass"
    else:
        iv_status = "unknown"
    return ConditionReport(
        m=mask.m,
        n=mask.n,
        r=r,
        alpha=alpha,
        bound_i=bound,
        cond_i=cond_i,
        cond_ii=cond_ii,
        violating_rows=bad_rows,
        violating_cols=bad_cols,
        cond_iii=cond_iii,
        violating_cut=cut,
        cond_iv_status=iv_status,
        violating_partition=part,
    )

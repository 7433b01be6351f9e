"""Observation masks, partially observed matrices, and their text formats.

A mask records which cells of an m x n matrix are observed.  It doubles as
the bipartite adjacency structure used by the combinatorial tests: rows are
one vertex class, columns the other, and each observed cell (i, j) is an
edge between row i and column j.

Indices are 0-based everywhere in the Python API.  All user-facing text
(reports, traces, CLI JSON) uses 1-based indices; the converters live with
the serializers that emit them.

Text formats
------------
Mask grid: one line per row, each line a string of '0'/'1' characters with
no separators.

Masked matrix: CSV, one row per line.  Unobserved cells are written as '?'
(an empty field is also accepted on input).  Values use the shortest
decimal form that round-trips to the same float, so serialize/parse is
bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import math

import numpy as np

__all__ = [
    "Mask",
    "MaskedMatrix",
    "MaskFormatError",
    "mask_from_dense",
    "random_mask",
    "apply_mask",
    "parse_mask_text",
    "serialize_mask_text",
    "parse_masked_matrix",
    "serialize_masked_matrix",
]


class MaskFormatError(ValueError):
    """Malformed mask or masked-matrix text."""


@dataclass(frozen=True)
class Mask:
    """Set of observed (row, col) index pairs of an m x n matrix.

    Entries are stored sorted in row-major order; that order is the
    canonical iteration order referenced by every downstream tie-break.
    """

    m: int
    n: int
    entries: tuple[tuple[int, int], ...]
    _entry_set: frozenset[tuple[int, int]] = field(
        init=False, repr=False, compare=False, hash=False, default=None
    )

    def __post_init__(self) -> None:
        if self.m < 0 or self.n < 0:
            raise ValueError(f"negative dimensions {self.m}x{self.n}")
        entries = tuple(sorted((int(i), int(j)) for i, j in self.entries))
        seen = frozenset(entries)
        if len(seen) != len(entries):
            raise ValueError("duplicate mask entries")
        for i, j in entries:
            if not (0 <= i < self.m and 0 <= j < self.n):
                raise ValueError(f"entry ({i}, {j}) outside {self.m}x{self.n}")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_entry_set", seen)

    def edge_count(self) -> int:
        """Number of observed entries (the number of revealed values)."""
        return len(self.entries)

    def __contains__(self, pair: tuple[int, int]) -> bool:
        return pair in self._entry_set

    def is_full(self) -> bool:
        return len(self.entries) == self.m * self.n

    def row_degrees(self) -> list[int]:
        deg = [0] * self.m
        for i, _ in self.entries:
            deg[i] += 1
        return deg

    def col_degrees(self) -> list[int]:
        deg = [0] * self.n
        for _, j in self.entries:
            deg[j] += 1
        return deg

    def to_dense(self) -> np.ndarray:
        """0/1 grid with ones exactly at the observed cells."""
        grid = np.zeros((self.m, self.n), dtype=np.int8)
        for i, j in self.entries:
            grid[i, j] = 1
        return grid

    def with_entry(self, i: int, j: int) -> "Mask":
        """New mask with one extra observed cell."""
        if (i, j) in self:
            raise ValueError(f"entry ({i}, {j}) already present")
        return Mask(self.m, self.n, self.entries + ((i, j),))


@dataclass(frozen=True)
class MaskedMatrix:
    """A mask together with a real value at every observed cell."""

    mask: Mask
    values: Mapping[tuple[int, int], float]

    def __post_init__(self) -> None:
        keys = set(self.values.keys())
        entries = set(self.mask.entries)
        if keys != entries:
            missing = entries - keys
            extra = keys - entries
            raise ValueError(
                f"values do not match mask entries "
                f"(missing {sorted(missing)[:3]}, extra {sorted(extra)[:3]})"
            )
        clean = {k: float(v) for k, v in self.values.items()}
        for k, v in clean.items():
            if not math.isfinite(v):
                raise ValueError(f"non-finite value {v!r} at {k}")
        object.__setattr__(self, "values", clean)

    @property
    def m(self) -> int:
        return self.mask.m

    @property
    def n(self) -> int:
        return self.mask.n

    def to_dense_with_nan(self) -> np.ndarray:
        """Dense array with NaN at unobserved cells."""
        a = np.full((self.m, self.n), np.nan)
        for (i, j), v in self.values.items():
            a[i, j] = v
        return a


def mask_from_dense(grid: np.ndarray) -> Mask:
    """Mask with an entry wherever the 0/1 grid holds a one.

    Rejects any grid entry that is not exactly 0 or 1.
    """
    grid = np.asarray(grid)
    if grid.ndim != 2:
        raise ValueError(f"expected 2-d grid, got shape {grid.shape}")
    ok = (grid == 0) | (grid == 1)
    if not np.all(ok):
        bad = np.argwhere(~ok)[0]
        raise ValueError(
            f"non-binary entry {grid[tuple(bad)]!r} at {tuple(int(x) for x in bad)}"
        )
    m, n = grid.shape
    entries = tuple((int(i), int(j)) for i, j in np.argwhere(grid == 1))
    return Mask(m, n, entries)


def random_mask(m: int, n: int, k: int, seed: int) -> Mask:
    """Uniformly random mask with exactly k observed cells.

    Sampling is without replacement over all m*n cells and deterministic
    for a fixed seed.
    """
    if m < 0 or n < 0:
        raise ValueError(f"negative dimensions {m}x{n}")
    if not 0 <= k <= m * n:
        raise ValueError(f"k={k} outside [0, {m * n}]")
    rng = np.random.default_rng(seed)
    flat = rng.choice(m * n, size=k, replace=False)
    entries = tuple((int(f) // n, int(f) % n) for f in flat)
    return Mask(m, n, entries)


def apply_mask(a: np.ndarray, mask: Mask) -> MaskedMatrix:
    """Restrict a full matrix to the observed cells of the mask."""
    a = np.asarray(a, dtype=float)
    if a.shape != (mask.m, mask.n):
        raise ValueError(f"matrix shape {a.shape} != mask {mask.m}x{mask.n}")
    values = {(i, j): float(a[i, j]) for i, j in mask.entries}
    return MaskedMatrix(mask, values)


def parse_mask_text(text: str) -> Mask:
    """Parse the 0/1 grid format (one row per line, no separators)."""
    lines = [ln for ln in text.splitlines() if ln.strip() != ""]
    if not lines:
        raise MaskFormatError("empty mask text")
    width = len(lines[0].strip())
    rows = []
    for ln in lines:
        ln = ln.strip()
        if len(ln) != width:
            raise MaskFormatError(f"ragged row {ln!r} (expected width {width})")
        if set(ln) - {"0", "1"}:
            raise MaskFormatError(f"invalid character in row {ln!r}")
        rows.append([int(c) for c in ln])
    return mask_from_dense(np.array(rows, dtype=np.int8))


def serialize_mask_text(mask: Mask) -> str:
    grid = mask.to_dense()
    return "\n".join("".join(str(int(c)) for c in row) for row in grid) + "\n"


def _format_value(v: float) -> str:
    # repr of a float is the shortest decimal string that round-trips.
    return repr(float(v))


def parse_masked_matrix(text: str) -> MaskedMatrix:
    """Parse the CSV-with-holes format ('?' or empty field = unobserved)."""
    lines = [ln for ln in text.splitlines() if ln.strip() != ""]
    if not lines:
        raise MaskFormatError("empty masked-matrix text")
    rows = [ln.split(",") for ln in lines]
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise MaskFormatError("ragged rows in masked-matrix text")
    entries: list[tuple[int, int]] = []
    values: dict[tuple[int, int], float] = {}
    for i, row in enumerate(rows):
        for j, tok in enumerate(row):
            tok = tok.strip()
            if tok in ("?", ""):
                continue
            try:
                v = float(tok)
            except ValueError as exc:
                raise MaskFormatError(f"bad value {tok!r} at row {i + 1}") from exc
            if not math.isfinite(v):
                raise MaskFormatError(f"non-finite value {tok!r} at row {i + 1}")
            entries.append((i, j))
            values[(i, j)] = v
    mask = Mask(len(rows), width, tuple(entries))
    return MaskedMatrix(mask, values)


def serialize_masked_matrix(mm: MaskedMatrix) -> str:
    lines = []
    for i in range(mm.m):
        cells = []
        for j in range(mm.n):
            if (i, j) in mm.mask:
                cells.append(_format_value(mm.values[(i, j)]))
            else:
                cells.append("?")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def serialize_dense_matrix(a: np.ndarray) -> str:
    """Full matrix in the same CSV format (no holes)."""
    a = np.asarray(a, dtype=float)
    return "\n".join(",".join(_format_value(v) for v in row) for row in a) + "\n"


def derive_seed(*parts: int | str) -> int:
    """Stable 64-bit seed from a tuple of integers/strings.

    SHA-256 of the ':'-joined decimal/text parts, truncated to 8 bytes.
    Used everywhere a sub-seed is derived from a master seed so that
    reruns are bit-reproducible across platforms.
    """
    import hashlib

    h = hashlib.sha256(":".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(h[:8], "big")

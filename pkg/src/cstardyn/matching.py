"""Deterministic bipartite matching via augmenting paths.

Instances here are tiny (a handful of rows), so the classic Kuhn algorithm
with fixed iteration order is used; determinism matters more than speed
because matchings end up inside emitted certificates.
"""
from __future__ import annotations

from typing import Sequence


def maximum_matching(adjacency: Sequence[Sequence[int]], num_cols: int) -> list[int | None]:
    """Row-to-column maximum matching; rows and columns are tried in order."""
    match_col: list[int | None] = [None] * num_cols
    match_row: list[int | None] = [None] * len(adjacency)

    def try_augment(row: int, seen: list[bool]) -> bool:
        # free columns first, so complete relations match up identically
        for col in adjacency[row]:
            if not seen[col] and match_col[col] is None:
                seen[col] = True
                match_col[col] = row
                match_row[row] = col
                return True
        for col in adjacency[row]:
            if seen[col]:
                continue
            seen[col] = True
            if try_augment(match_col[col], seen):
                match_col[col] = row
                match_row[row] = col
                return True
        return False

    for row in range(len(adjacency)):
        try_augment(row, [False] * num_cols)
    return match_row


def perfect_matching(adjacency: Sequence[Sequence[int]], num_cols: int) -> tuple[int, ...] | None:
    """A perfect row-to-column matching, or None when none exists."""
    if len(adjacency) != num_cols:
        return None
    match_row = maximum_matching(adjacency, num_cols)
    if any(c is None for c in match_row):
        return None
    return tuple(match_row)  # type: ignore[arg-type]


def hall_violator(adjacency: Sequence[Sequence[int]], num_cols: int) -> tuple[int, ...] | None:
    """A set of rows whose joint neighborhood is strictly smaller.

    Returns None when a perfect matching exists.  Otherwise the rows
    reachable by alternating paths from an unmatched row witness the Hall
    condition failure.
    """
    match_row = maximum_matching(adjacency, num_cols)
    match_col: list[int | None] = [None] * num_cols
    for r, c in enumerate(match_row):
        if c is not None:
            match_col[c] = r
    try:
        start = next(r for r, c in enumerate(match_row) if c is None)
    except StopIteration:
        if len(adjacency) == num_cols:
            return None
        start = len(adjacency) - 1 if len(adjacency) > num_cols else None
        if start is None:
            return None
    rows = {start}
    cols: set[int] = set()
    frontier = [start]
    while frontier:
        row = frontier.pop()
        for col in adjacency[row]:
            if col in cols:
                continue
            cols.add(col)
            owner = match_col[col]
            if owner is not None and owner not in rows:
                rows.add(owner)
                frontier.append(owner)
    return tuple(sorted(rows))

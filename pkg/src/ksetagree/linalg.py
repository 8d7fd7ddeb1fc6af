"""Exact rank computation over the rationals, integer arithmetic only.

Rows are sparse integer vectors. Elimination is fraction-free: each step
cross-multiplies (pv * row - rv * pivot_row) and divides the result by its
gcd, so entries stay integral and bounded without ever touching floats or
rationals. Unit pivots are preferred, which keeps the common incidence
matrices division-free in practice.
"""

from __future__ import annotations

from math import gcd
from typing import Sequence


def exact_rank(rows: Sequence[dict[int, int]]) -> int:
    """Rank over the rationals of a sparse integer matrix given by rows."""
    work = [dict(r) for r in rows if r]
    rank = 0
    while work:
        # Pivot choice: unit entries first, then sparsest row; result is
        # order-independent (rank is unique), this only controls fill.
        best_key = None
        best_ri = -1
        best_col = -1
        for ri, row in enumerate(work):
            for c, v in row.items():
                key = (abs(v) != 1, len(row), abs(v))
                if best_key is None or key < best_key:
                    best_key = key
                    best_ri = ri
                    best_col = c
            if best_key == (False, 1, 1):
                break
        pivot_row = work.pop(best_ri)
        pv = pivot_row[best_col]
        rank += 1
        reduced: list[dict[int, int]] = []
        for row in work:
            rv = row.pop(best_col, None)
            if rv is None:
                if row:
                    reduced.append(row)
                continue
            new: dict[int, int] = {}
            for c, v in row.items():
                new[c] = pv * v
            for c, v in pivot_row.items():
                if c == best_col:
                    continue
                acc = new.get(c, 0) - rv * v
                if acc:
                    new[c] = acc
                elif c in new:
                    del new[c]
            if new:
                g = 0
                for v in new.values():
                    g = gcd(g, v)
                    if g == 1:
                        break
                if g > 1:
                    new = {c: v // g for c, v in new.items()}
                reduced.append(new)
        work = reduced
    return rank

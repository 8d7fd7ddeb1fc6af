"""Combinatorial numbers of generator graph sets.

Domination, equal-domination, covering numbers, distributed domination,
max-covering numbers and their coefficients, plus covering-number
sequences. Everything is computed by exact subset enumeration over
bit-packed process sets; there are no heuristics, since the theorems
these numbers feed demand exact values and n <= 16.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .graphs import Digraph, Model, _popcount


def _check_common_n(graphs: Sequence[Digraph]) -> int:
    if not graphs:
        raise ValueError("need a non-empty graph set")
    n = graphs[0].n
    if any(g.n != n for g in graphs):
        raise ValueError("graphs must share the process count")
    return n


def dom(g: Digraph) -> int:
    """Smallest size of a process set whose out-neighborhoods cover everyone."""
    full = g.full_mask
    for i in range(1, g.n + 1):
        for combo in itertools.combinations(range(g.n), i):
            out = 0
            for p in combo:
                out |= g.rows[p]
            if out == full:
                return i
    raise AssertionError("the full process set always dominates")


def edom_single(g: Digraph) -> int:
    """Smallest i such that every i-subset dominates ``g``."""
    full = g.full_mask
    worst = 0  # largest non-dominating subset seen
    for mask in range(1, full + 1):
        out = 0
        m = mask
        while m:
            low = m & -m
            out |= g.rows[low.bit_length() - 1]
            m ^= low
        if out != full:
            size = _popcount(mask)
            if size > worst:
                worst = size
    return worst + 1


def edom(graphs: Sequence[Digraph]) -> int:
    """Equal-domination number of a set: max over the per-graph values."""
    _check_common_n(graphs)
    return max(edom_single(g) for g in graphs)


def joint_dom(graphs: Sequence[Digraph]) -> int:
    """Simultaneous domination: smallest set dominating every graph at once.

    Distinct from per-graph domination: the same seed set must reach
    everyone in each graph separately.
    """
    n = _check_common_n(graphs)
    full = (1 << n) - 1
    for i in range(1, n + 1):
        for combo in itertools.combinations(range(n), i):
            pmask = 0
            for p in combo:
                pmask |= 1 << p
            if all(g.out_mask(pmask) == full for g in graphs):
                return i
    raise AssertionError("the full process set always dominates")


def cov_single(g: Digraph, i: int) -> int:
    """Minimum number of processes reached by any i-subset in ``g``."""
    if not 1 <= i <= g.n:
        raise ValueError(f"i={i} outside [1, {g.n}]")
    best = g.n
    for combo in itertools.combinations(range(g.n), i):
        out = 0
        for p in combo:
            out |= g.rows[p]
        size = _popcount(out)
        if size < best:
            best = size
            if best == i:  # cannot go lower: out-sets contain their seeds
                break
    return best


def cov(graphs: Sequence[Digraph], i: int) -> int:
    """i-th covering number of a set: min over graphs of the per-graph value.

    Total over i in [1, n]; the bounds layer restricts to i < edom(S) where
    the theorems need it.
    """
    _check_common_n(graphs)
    return min(cov_single(g, i) for g in graphs)


def edom_over(graphs: Sequence[Digraph]) -> int:
    """Distributed domination number.

    Smallest i > 0 such that every i-subset of processes, pooled across
    every sub-multiset of min(i, |S|) generators, reaches everyone.
    Repetition is allowed, so singleton supports are the binding case and
    the value equals the worst per-graph equal-domination threshold; the
    quantifier is kept in this form because the worked examples (star
    unions give n - s + 1) pin it down.
    """
    _check_common_n(graphs)
    return max(edom_single(g) for g in graphs)


def max_cov(graphs: Sequence[Digraph], i: int) -> int:
    """i-th max-covering number: the largest non-full pooled reach.

    Maximum over i-subsets P and generator sub-multisets of size
    min(i, |S|) (supports of size 1..min(i, |S|)) whose pooled out-sets
    miss someone, of the pooled out-set size. Undefined (ValueError) for
    i >= the distributed domination number, where no such pair exists.
    """
    n = _check_common_n(graphs)
    if not 1 <= i < edom_over(graphs):
        raise ValueError(
            f"max_cov is defined for 1 <= i < edom_over(S); got i={i}"
        )
    full = (1 << n) - 1
    take = min(i, len(graphs))
    best = 0
    for combo in itertools.combinations(range(n), i):
        pmask = 0
        for p in combo:
            pmask |= 1 << p
        outs = sorted({g.out_mask(pmask) for g in graphs})
        for size in range(1, take + 1):
            for chosen in itertools.combinations(outs, size):
                union = 0
                for o in chosen:
                    union |= o
                if union != full and _popcount(union) > best:
                    best = _popcount(union)
    return best


def m_coeff(graphs: Sequence[Digraph], i: int) -> int:
    """i-th max-covering coefficient.

    floor((n - i - 1) / (max_cov_i - i)) when the max-covering number
    exceeds i, else n - i.
    """
    n = _check_common_n(graphs)
    mc = max_cov(graphs, i)
    if mc > i:
        return (n - i - 1) // (mc - i)
    return n - i


@dataclass(frozen=True)
class CoveringSequence:
    """Covering-number sequence of a graph set, truncated deterministically.

    The sequence stops at n, at a fixed point below the equal-domination
    threshold (all later terms would repeat), or at ``max_len``.
    """

    values: tuple[int, ...]
    reaches_n: bool
    rounds_to_n: int | None  # 1-based index where n first appears


def covering_sequence(
    graphs: Sequence[Digraph], i: int, max_len: int = 64
) -> CoveringSequence:
    """Iterated covering numbers: how far i seeded processes must spread.

    Each term bounds from below how many processes have heard the seeds
    after that many rounds; once a term reaches the equal-domination
    threshold the next term is n.
    """
    n = _check_common_n(graphs)
    if i < 1:
        raise ValueError("i must be >= 1")
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    threshold = max(edom_single(g) for g in graphs)
    values: list[int] = []
    current = i
    for _ in range(max_len):
        nxt = n if current >= threshold else min(cov_single(g, current) for g in graphs)
        values.append(nxt)
        if nxt == n:
            return CoveringSequence(tuple(values), True, len(values))
        if nxt == current:  # fixed point below the threshold
            break
        current = nxt
    return CoveringSequence(tuple(values), False, None)


@dataclass(frozen=True)
class MetricsReport:
    """All combinatorial numbers of a model's effective generator set.

    ``cov`` is tabulated on 1 <= i < edom, ``max_cov`` and ``m_coeff``
    on 1 <= i < edom_over. ``notes`` records, per metric, the index of
    the canonically-first effective generator realizing the extremum.
    """

    n: int
    generator_count: int
    dom: tuple[int, ...]
    edom: int
    cov: dict[int, int]
    edom_over: int
    max_cov: dict[int, int]
    m_coeff: dict[int, int]
    notes: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "generator_count": self.generator_count,
            "dom": list(self.dom),
            "edom": self.edom,
            "cov": {str(k): v for k, v in sorted(self.cov.items())},
            "edom_over": self.edom_over,
            "max_cov": {str(k): v for k, v in sorted(self.max_cov.items())},
            "m_coeff": {str(k): v for k, v in sorted(self.m_coeff.items())},
            "notes": {k: v for k, v in sorted(self.notes.items())},
        }


def metrics_report(model: Model) -> MetricsReport:
    """Compute the full metrics table for a model's effective generators."""
    gens = list(model.effective_generators())
    n = model.n
    doms = tuple(dom(g) for g in gens)
    per_edom = [edom_single(g) for g in gens]
    ed = max(per_edom)
    notes: dict[str, int] = {"edom": per_edom.index(ed)}

    covs: dict[int, int] = {}
    for i in range(1, ed):
        per = [cov_single(g, i) for g in gens]
        covs[i] = min(per)
        notes[f"cov[{i}]"] = per.index(covs[i])

    edo = edom_over(gens)
    maxcovs: dict[int, int] = {}
    coeffs: dict[int, int] = {}
    for i in range(1, edo):
        maxcovs[i] = max_cov(gens, i)
        coeffs[i] = m_coeff(gens, i)

    report = MetricsReport(
        n=n,
        generator_count=len(gens),
        dom=doms,
        edom=ed,
        cov=covs,
        edom_over=edo,
        max_cov=maxcovs,
        m_coeff=coeffs,
        notes=notes,
    )
    _check_report_invariants(report)
    return report


def _check_report_invariants(r: MetricsReport) -> None:
    for d in r.dom:
        if not 1 <= d <= r.edom <= r.n:
            raise AssertionError("dom/edom ordering violated")
    if r.edom_over > r.edom:
        raise AssertionError("distributed domination may not exceed equal domination")

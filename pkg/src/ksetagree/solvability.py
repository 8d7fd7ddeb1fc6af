"""Ground-truth solvability of k-set agreement by oblivious algorithms.

A decision map assigns a heard value to every flat view (the set of
(process, initial value) pairs a process knows after the rounds). The
oracle enumerates every reachable scenario exactly and decides by
exhaustive backtracking whether a map exists under which every scenario
yields at most k distinct decisions. UNSAT is therefore a sound
impossibility proof for oblivious algorithms deciding after exactly
``rounds`` rounds; SAT certifies solvability for value domains of at most
``values`` values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import BudgetExceeded
from .graphs import (
    Digraph,
    Model,
    bits_of,
    identity_graph,
    mask_of,
    product_set,
    product_reachability_search,
)
from .sat import Solver

DEFAULT_SCENARIO_BUDGET = 2_000_000
DEFAULT_NODE_BUDGET = 5_000_000

FlatView = tuple  # sorted tuple of (process, value) pairs


def flat_view(entries: Sequence[tuple[int, int]]) -> FlatView:
    """Canonical flat view: sorted, one value per process."""
    out = tuple(sorted(set(entries)))
    procs = [q for q, _ in out]
    if len(set(procs)) != len(procs):
        raise ValueError(f"two values for one process: {out}")
    if not out:
        raise ValueError("a flat view cannot be empty")
    return out


def _flat_from_mask(mask: int, assignment: Sequence[int]) -> FlatView:
    return tuple((q, assignment[q]) for q in bits_of(mask))


@dataclass(frozen=True)
class Scenario:
    """One reachable execution: an r-round product graph plus inputs."""

    graph: Digraph
    assignment: tuple[int, ...]

    def view_of(self, p: int) -> FlatView:
        return _flat_from_mask(self.graph.in_mask(p), self.assignment)


def _graph_from_cols(n: int, cols: Sequence[int]) -> Digraph:
    rows = [0] * n
    for v in range(n):
        col = cols[v]
        bit = 1 << v
        for u in bits_of(col):
            rows[u] |= bit
    return Digraph.from_rows(n, rows)


def _relaxed_products(
    prefix: Digraph, g: Digraph, counter: list[int], budget: int
) -> Iterator[Digraph]:
    """All products prefix * H over supergraphs H of g, without enumerating
    the supergraphs: an extra edge (w, v) adds the prefix sources of w to
    column v of the product, and columns vary independently."""
    n = g.n
    base = _compose(prefix, g)
    colsets: list[list[int]] = []
    total = 1
    for v in range(n):
        seeds = sorted(
            {prefix.cols[w] for w in range(n) if w != v and not g.has_edge(w, v)}
        )
        reach = {0}
        frontier = [0]
        while frontier:
            cur = frontier.pop()
            for s in seeds:
                nxt = cur | s
                if nxt not in reach:
                    reach.add(nxt)
                    frontier.append(nxt)
                    counter[0] += 1
                    if counter[0] > budget:
                        raise BudgetExceeded("scenario graph enumeration", budget)
        colsets.append(sorted(reach))
        total *= len(reach)
        if total + counter[0] > budget:
            raise BudgetExceeded("scenario graph enumeration", budget)
    counter[0] += total
    base_cols = base.cols
    for choice in itertools.product(*colsets):
        yield _graph_from_cols(n, [base_cols[v] | choice[v] for v in range(n)])


def _supergraphs(g: Digraph, counter: list[int], budget: int) -> Iterator[Digraph]:
    return _relaxed_products(identity_graph(g.n), g, counter, budget)


def scenario_graphs(
    model: Model,
    rounds: int,
    relax_last: bool = False,
    budget: int = DEFAULT_SCENARIO_BUDGET,
) -> list[Digraph]:
    """Every graph reachable as an r-round product of model graphs.

    With ``relax_last`` only the last factor ranges over a generator's full
    upward closure while earlier factors stay at generators; that subset is
    what the multi-round impossibility argument consumes. For one round the
    two modes coincide (all supergraphs of the generators). The exact
    (relax_last=False) multi-round set is computed by filtering candidate
    supergraphs of each base product through the reachability search; the
    relaxed set is reachable by construction and needs no search.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    gens = model.effective_generators()
    counter = [0]

    if rounds == 1:
        seen: dict[tuple[int, ...], Digraph] = {}
        for g in gens:
            for h in _supergraphs(g, counter, budget):
                seen.setdefault(h.rows, h)
        return sorted(seen.values(), key=Digraph.sort_key)

    prefixes = product_set(model, rounds - 1, budget=budget)
    relaxed: dict[tuple[int, ...], Digraph] = {}
    for prefix in prefixes:
        for g in gens:
            for prod in _relaxed_products(prefix, g, counter, budget):
                relaxed.setdefault(prod.rows, prod)
    if relax_last:
        return sorted(relaxed.values(), key=Digraph.sort_key)

    # Exact set: candidates above each base product, kept when some factor
    # tuple reaches them. The relaxed set is always reachable.
    reachable = dict(relaxed)
    tuples = list(itertools.product(gens, repeat=rounds))
    counter[0] += len(tuples)
    if counter[0] > budget:
        raise BudgetExceeded("scenario graph enumeration", budget)
    candidates: dict[tuple[int, ...], tuple[Digraph, list]] = {}
    for tup in tuples:
        base = tup[0]
        for g in tup[1:]:
            base = _compose(base, g)
        for cand in _supergraphs(base, counter, budget):
            if cand.rows in reachable:
                continue
            entry = candidates.setdefault(cand.rows, (cand, []))
            entry[1].append(tup)
    for rows, (cand, tups) in sorted(candidates.items()):
        for tup in tups:
            result = product_reachability_search(tup, cand, budget=budget)
            if result.found:
                reachable[rows] = cand
                break
    return sorted(reachable.values(), key=Digraph.sort_key)


def _compose(g: Digraph, h: Digraph) -> Digraph:
    rows = [h.out_mask(row) for row in g.rows]
    return Digraph.from_rows(g.n, rows)


def scenarios(
    model: Model,
    rounds: int,
    values: int,
    relax_last: bool = False,
    budget: int = DEFAULT_SCENARIO_BUDGET,
) -> Iterator[Scenario]:
    """Stream of (graph, assignment) pairs, deduplicated and deterministic."""
    if values < 1:
        raise ValueError("need at least one value")
    graphs = scenario_graphs(model, rounds, relax_last, budget)
    if len(graphs) * values**model.n > budget:
        raise BudgetExceeded("scenario enumeration", budget)
    for g in graphs:
        for x in itertools.product(range(values), repeat=model.n):
            yield Scenario(g, x)


# -- the oracle ----------------------------------------------------------------


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a solvability decision.

    ``status`` is SAT, UNSAT, or BUDGET; budget exhaustion is never folded
    into UNSAT. A SAT witness maps every reachable flat view to a decided
    value appearing in that view.
    """

    status: str
    witness: dict | None
    scenario_graph_count: int
    view_count: int
    constraint_count: int
    nodes: int
    note: str = ""


def _maximal_sets(sets: set[frozenset[int]]) -> list[frozenset[int]]:
    posting: dict[int, list[int]] = {}
    kept: list[frozenset[int]] = []
    for s in sorted(sets, key=len, reverse=True):
        cands: set[int] | None = None
        for v in s:
            lst = posting.get(v)
            if lst is None:
                cands = set()
                break
            cands = set(lst) if cands is None else cands & set(lst)
            if not cands:
                break
        if cands:
            continue  # a strictly larger kept set contains every view of s
        idx = len(kept)
        kept.append(s)
        for v in s:
            posting.setdefault(v, []).append(idx)
    return kept


def decide_solvability(
    model: Model,
    rounds: int,
    k: int,
    values: int,
    *,
    scenario_budget: int = DEFAULT_SCENARIO_BUDGET,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> SolveResult:
    """Decide existence of an oblivious decision map for k-set agreement.

    Scenario constraints are deduplicated (they depend only on the set of
    distinct in-views and the input assignment) and subsumption-filtered,
    then decided exhaustively by a deterministic conflict-driven search.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if values < 1:
        raise ValueError("need at least one value")
    n = model.n
    try:
        graphs = scenario_graphs(model, rounds, relax_last=False, budget=scenario_budget)
    except BudgetExceeded as exc:
        return SolveResult("BUDGET", None, 0, 0, 0, 0, str(exc))

    # Scenario constraints depend only on the set of distinct in-views.
    profiles = sorted(
        {frozenset(g.cols[p] for p in range(n)) for g in graphs},
        key=lambda s: tuple(sorted(s)),
    )

    view_ids: dict[FlatView, int] = {}
    views: list[FlatView] = []

    def intern(fv: FlatView) -> int:
        got = view_ids.get(fv)
        if got is None:
            got = len(views)
            view_ids[fv] = got
            views.append(fv)
        return got

    raw_constraints: set[frozenset[int]] = set()
    instance_count = len(profiles) * values**n
    if instance_count > scenario_budget:
        return SolveResult(
            "BUDGET",
            None,
            len(graphs),
            0,
            0,
            0,
            f"{instance_count} scenario instances exceed budget {scenario_budget}",
        )
    for profile in profiles:
        masks = sorted(profile)
        for x in itertools.product(range(values), repeat=n):
            ids = frozenset(intern(_flat_from_mask(mask, x)) for mask in masks)
            if len(ids) > k:
                raw_constraints.add(ids)

    constraints = [tuple(sorted(c)) for c in _maximal_sets(raw_constraints)]
    constraints.sort()
    domains = [sorted({val for _, val in fv}) for fv in views]

    try:
        witness_vals, nodes = _search(views, domains, constraints, k, values, node_budget)
    except BudgetExceeded as exc:
        return SolveResult(
            "BUDGET", None, len(graphs), len(views), len(constraints), exc.budget, str(exc)
        )
    if witness_vals is None:
        return SolveResult(
            "UNSAT", None, len(graphs), len(views), len(constraints), nodes
        )
    witness = {views[i]: witness_vals[i] for i in range(len(views))}
    return SolveResult("SAT", witness, len(graphs), len(views), len(constraints), nodes)


def _search(
    views: list[FlatView],
    domains: list[list[int]],
    constraints: list[tuple[int, ...]],
    k: int,
    values: int,
    node_budget: int,
) -> tuple[list[int] | None, int]:
    """Exhaustive, deterministic search for a valid decision map.

    Encodes the instance propositionally (a selector per view and value,
    a value-used marker per scenario and value, and a bound of k used
    values per scenario) and decides it with the in-tree conflict-driven
    solver. Returns the chosen domain values per view, or None when the
    instance is refuted; the second component counts solver conflicts.
    """
    nvars = len(views)
    x_base: list[int] = []
    total = 0
    for dom in domains:
        x_base.append(total)
        total += len(dom)

    # Constraints whose views cannot produce more than k values are inert.
    active: list[tuple[tuple[int, ...], list[int]]] = []
    for c in constraints:
        union: set[int] = set()
        for v in c:
            union.update(domains[v])
        if len(union) > k:
            vals = sorted(union)
            active.append((c, vals))

    u_base: list[int] = []
    for c, vals in active:
        u_base.append(total)
        total += len(vals)

    solver = Solver(total)
    for v in range(nvars):
        base = x_base[v]
        width = len(domains[v])
        solver.add_clause([2 * (base + j) for j in range(width)])
        for j1 in range(width):
            for j2 in range(j1 + 1, width):
                solver.add_clause([2 * (base + j1) + 1, 2 * (base + j2) + 1])

    for idx, (c, vals) in enumerate(active):
        ub = u_base[idx]
        pos = {d: j for j, d in enumerate(vals)}
        for v in c:
            for j, d in enumerate(domains[v]):
                solver.add_clause([2 * (x_base[v] + j) + 1, 2 * (ub + pos[d])])
        for combo in itertools.combinations(range(len(vals)), k + 1):
            solver.add_clause([2 * (ub + j) + 1 for j in combo])

    sat = solver.solve(conflict_budget=node_budget)
    if not sat:
        return None, solver.conflicts
    model = solver.assign
    result = []
    for v in range(nvars):
        chosen = None
        for j, d in enumerate(domains[v]):
            if model[x_base[v] + j] == 1:
                chosen = d
                break
        if chosen is None:
            raise AssertionError("solver model left a view undecided")
        result.append(chosen)
    return result, solver.conflicts


def validate_decision_map(dmap: dict) -> None:
    """Check the heard-value validity invariant of a decision map."""
    for view, decision in dmap.items():
        vals = {val for _, val in view}
        if decision not in vals:
            raise ValueError(f"decision {decision} was not heard in view {view}")


def check_decision_map(
    model: Model,
    rounds: int,
    k: int,
    values: int,
    dmap: dict,
    budget: int = DEFAULT_SCENARIO_BUDGET,
) -> tuple[bool, str]:
    """Replay a decision map over a fresh scenario enumeration."""
    validate_decision_map(dmap)
    n = model.n
    for sc in scenarios(model, rounds, values, relax_last=False, budget=budget):
        decisions = set()
        for p in range(n):
            view = sc.view_of(p)
            if view not in dmap:
                return False, f"no decision for view {view}"
            decisions.add(dmap[view])
        if len(decisions) > k:
            return False, (
                f"{len(decisions)} distinct decisions on graph "
                f"{sc.graph.nonloop_edges()} with inputs {sc.assignment}"
            )
    return True, "ok"


def decision_map_to_json(dmap: dict) -> list[dict]:
    entries = sorted(dmap.items())
    return [
        {"view": [[q, val] for q, val in view], "decide": decision}
        for view, decision in entries
    ]


def decision_map_from_json(data: list) -> dict:
    out = {}
    for entry in data:
        view = flat_view([(int(q), int(val)) for q, val in entry["view"]])
        out[view] = int(entry["decide"])
    validate_decision_map(out)
    return out


# -- protocol simulation --------------------------------------------------------


@dataclass(frozen=True)
class SimulationReport:
    """Exact worst case of a one-shot minimum protocol over all scenarios."""

    worst_case: int
    scenario_graph_count: int
    worst_graph: Digraph
    worst_assignment: tuple[int, ...]


def simulate_min_protocol(
    model: Model,
    rounds: int,
    strategy: str,
    fixed_set: Sequence[int] | None = None,
    budget: int = DEFAULT_SCENARIO_BUDGET,
) -> SimulationReport:
    """Worst-case distinct-decision count of the minimum protocols.

    ``min-received`` decides the minimum value heard; ``min-of-fixed-set``
    decides the minimum value heard from a fixed process set, which must
    dominate every scenario graph. Assignments range over all permutations
    of n distinct values: decisions select heard values, so distinct inputs
    maximize distinct outputs, making this an exact worst case.
    """
    n = model.n
    full = (1 << n) - 1
    graphs = scenario_graphs(model, rounds, relax_last=False, budget=budget)
    if strategy == "min-received":
        pmask = full
    elif strategy == "min-of-fixed-set":
        if not fixed_set:
            raise ValueError("min-of-fixed-set needs the fixed process set")
        pmask = mask_of(fixed_set)
        for g in graphs:
            if g.out_mask(pmask) != full:
                raise ValueError(
                    f"fixed set {sorted(fixed_set)} does not dominate scenario "
                    f"graph with edges {g.nonloop_edges()}"
                )
    else:
        raise ValueError(f"unknown strategy {strategy!r}")

    worst = 0
    worst_graph = graphs[0]
    worst_x: tuple[int, ...] = tuple(range(n))
    for g in graphs:
        sources = [g.cols[p] & pmask for p in range(n)]
        for x in itertools.permutations(range(n)):
            decided = {min(x[q] for q in bits_of(mask)) for mask in sources}
            if len(decided) > worst:
                worst = len(decided)
                worst_graph = g
                worst_x = x
    return SimulationReport(worst, len(graphs), worst_graph, worst_x)

"""Directed communication graphs over a fixed process set.

Graphs are immutable, carry mandatory self-loops, and store adjacency as
bit-packed rows (process ids are bit positions, row ``u`` is the set of
processes hearing ``u``). A :class:`Model` is a finite list of generator
graphs, optionally closed under process permutation; it denotes the
round-based model whose per-round graphs are exactly the supergraphs of
at least one generator.
"""

from __future__ import annotations

import itertools
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import BudgetExceeded

MIN_PROCS = 2
MAX_PROCS = 16  # adjacency rows fit one machine word; keeps exhaustive ops honest
SYM_CLOSURE_MAX = 8  # factorial permutation enumeration guard
DEFAULT_PRODUCT_BUDGET = 10**6
DEFAULT_SEARCH_BUDGET = 10**6


def _popcount(x: int) -> int:
    return bin(x).count("1")


def bits_of(mask: int) -> Iterator[int]:
    """Yield the set bit positions of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(procs: Iterable[int]) -> int:
    m = 0
    for p in procs:
        m |= 1 << p
    return m


class Digraph:
    """A directed graph on processes ``0..n-1`` with every self-loop present."""

    __slots__ = ("n", "rows", "cols", "_hash")

    n: int
    rows: tuple[int, ...]
    cols: tuple[int, ...]

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()) -> None:
        if not MIN_PROCS <= n <= MAX_PROCS:
            raise ValueError(f"process count {n} outside [{MIN_PROCS}, {MAX_PROCS}]")
        rows = [1 << u for u in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            rows[u] |= 1 << v
        self._init_from_rows(n, tuple(rows))

    @classmethod
    def from_rows(cls, n: int, rows: Sequence[int]) -> "Digraph":
        """Build from adjacency rows; self-loops are added if missing."""
        if not MIN_PROCS <= n <= MAX_PROCS:
            raise ValueError(f"process count {n} outside [{MIN_PROCS}, {MAX_PROCS}]")
        full = (1 << n) - 1
        fixed = []
        for u, row in enumerate(rows):
            if row & ~full:
                raise ValueError(f"row {u} has bits outside [0, {n})")
            fixed.append(row | (1 << u))
        obj = cls.__new__(cls)
        obj._init_from_rows(n, tuple(fixed))
        return obj

    def _init_from_rows(self, n: int, rows: tuple[int, ...]) -> None:
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "rows", rows)
        cols = [0] * n
        for u in range(n):
            row = rows[u]
            bit = 1 << u
            for v in bits_of(row):
                cols[v] |= bit
        object.__setattr__(self, "cols", tuple(cols))
        object.__setattr__(self, "_hash", hash((n, rows)))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Digraph is immutable")

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Digraph)
            and self.n == other.n
            and self.rows == other.rows
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Digraph({self.n}, {self.nonloop_edges()})"

    # -- basic queries ----------------------------------------------------

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u] >> v & 1)

    def out_mask(self, pmask: int) -> int:
        """Union of out-neighborhoods of the processes in ``pmask``."""
        out = 0
        for p in bits_of(pmask):
            out |= self.rows[p]
        return out

    def out_set(self, procs: Iterable[int]) -> frozenset[int]:
        return frozenset(bits_of(self.out_mask(mask_of(procs))))

    def in_mask(self, p: int) -> int:
        """Processes heard by ``p`` (always includes ``p``)."""
        return self.cols[p]

    def in_view(self, p: int) -> frozenset[int]:
        return frozenset(bits_of(self.cols[p]))

    def edge_count(self) -> int:
        return sum(_popcount(row) for row in self.rows)

    def edge_list(self) -> list[tuple[int, int]]:
        """All edges including self-loops, sorted."""
        return [(u, v) for u in range(self.n) for v in bits_of(self.rows[u])]

    def nonloop_edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, v in self.edge_list() if u != v]

    def sort_key(self) -> tuple:
        """Canonical ordering key: lexicographic on the sorted edge list."""
        return (self.n, tuple(self.edge_list()))

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        """JSON form; self-loops are omitted and implied."""
        return {"n": self.n, "edges": [list(e) for e in self.nonloop_edges()]}

    @classmethod
    def from_json(cls, data: dict) -> "Digraph":
        if not isinstance(data, dict) or "n" not in data:
            raise ValueError("graph JSON must be an object with an 'n' field")
        edges = data.get("edges", [])
        try:
            pairs = [(int(u), int(v)) for u, v in edges]
        except (TypeError, ValueError) as exc:
            raise ValueError(f"malformed edge list: {edges!r}") from exc
        return cls(int(data["n"]), pairs)


# -- graph builders --------------------------------------------------------


def identity_graph(n: int) -> Digraph:
    """Loops only: nobody hears anybody else."""
    return Digraph(n)


def complete_graph(n: int) -> Digraph:
    full = (1 << n) - 1
    return Digraph.from_rows(n, [full] * n)


def star_graph(n: int, center: int) -> Digraph:
    """The center broadcasts to everyone; leaves stay silent."""
    return Digraph(n, [(center, v) for v in range(n)])


def union_of_stars(n: int, centers: Iterable[int]) -> Digraph:
    return Digraph(n, [(c, v) for c in centers for v in range(n)])


def cycle_graph(n: int) -> Digraph:
    """Directed ring i -> i+1 (mod n), plus loops."""
    return Digraph(n, [(i, (i + 1) % n) for i in range(n)])


# -- relations on graphs ----------------------------------------------------


def upward_contains(g: Digraph, h: Digraph) -> bool:
    """True iff ``h`` lies in the upward closure of ``g`` (``E(h) >= E(g)``)."""
    if g.n != h.n:
        raise ValueError("graphs must share the process count")
    return all(hr & gr == gr for gr, hr in zip(g.rows, h.rows))


def path_product(g: Digraph, h: Digraph) -> Digraph:
    """Two-step path graph: edge (u, v) iff some w has (u, w) in g and (w, v) in h."""
    if g.n != h.n:
        raise ValueError("graphs must share the process count")
    rows = [h.out_mask(row) for row in g.rows]
    return Digraph.from_rows(g.n, rows)


def permute_graph(g: Digraph, pi: Sequence[int]) -> Digraph:
    """Relabel processes by the permutation ``pi`` (process p becomes pi[p])."""
    rows = [0] * g.n
    for u in range(g.n):
        row = 0
        for v in bits_of(g.rows[u]):
            row |= 1 << pi[v]
        rows[pi[u]] = row
    return Digraph.from_rows(g.n, rows)


def symmetric_closure(gens: Sequence[Digraph]) -> list[Digraph]:
    """All vertex-permuted images of the given graphs, deduplicated.

    Output order is canonical (lexicographic on sorted edge lists).
    Guarded to n <= 8 since all n! permutations are enumerated.
    """
    if not gens:
        raise ValueError("need at least one generator")
    n = gens[0].n
    if any(g.n != n for g in gens):
        raise ValueError("generators must share the process count")
    if n > SYM_CLOSURE_MAX:
        raise ValueError(f"symmetric closure guarded to n <= {SYM_CLOSURE_MAX}")
    seen: dict[tuple[int, ...], Digraph] = {}
    for g in gens:
        for pi in itertools.permutations(range(n)):
            img = permute_graph(g, pi)
            seen.setdefault(img.rows, img)
    return sorted(seen.values(), key=Digraph.sort_key)


def dedup_graphs(graphs: Iterable[Digraph]) -> list[Digraph]:
    """Deduplicate by edge set, keeping first occurrences in order."""
    seen: set[tuple[int, ...]] = set()
    out = []
    for g in graphs:
        if g.rows not in seen:
            seen.add(g.rows)
            out.append(g)
    return out


class Model:
    """A round-based model given by generator graphs and a symmetry flag.

    The model's per-round graphs are all supergraphs of at least one
    effective generator; when ``symmetric`` is set the effective generators
    are the permutation closure of the stored ones.
    """

    __slots__ = ("n", "generators", "symmetric", "_effective")

    def __init__(
        self, n: int, generators: Sequence[Digraph], symmetric: bool = False
    ) -> None:
        if not generators:
            raise ValueError("a model needs at least one generator")
        if any(g.n != n for g in generators):
            raise ValueError("all generators must share the model's process count")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "generators", tuple(dedup_graphs(generators)))
        object.__setattr__(self, "symmetric", bool(symmetric))
        object.__setattr__(self, "_effective", None)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Model is immutable")

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Model)
            and self.n == other.n
            and self.generators == other.generators
            and self.symmetric == other.symmetric
        )

    def __hash__(self) -> int:
        return hash((self.n, self.generators, self.symmetric))

    def __repr__(self) -> str:
        return (
            f"Model(n={self.n}, generators={len(self.generators)}, "
            f"symmetric={self.symmetric})"
        )

    def effective_generators(self) -> tuple[Digraph, ...]:
        """Generators after symmetric closure (if flagged), canonical order."""
        cached = self._effective
        if cached is None:
            if self.symmetric:
                cached = tuple(symmetric_closure(self.generators))
            else:
                cached = self.generators
            object.__setattr__(self, "_effective", cached)
        return cached

    def contains(self, h: Digraph) -> bool:
        """Single-round membership: does some effective generator sit below ``h``?"""
        if h.n != self.n:
            raise ValueError("graph and model must share the process count")
        return any(upward_contains(g, h) for g in self.effective_generators())

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "generators": [g.to_json() for g in self.generators],
            "symmetric": self.symmetric,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Model":
        if not isinstance(data, dict) or "n" not in data or "generators" not in data:
            raise ValueError("model JSON must carry 'n' and 'generators'")
        n = int(data["n"])
        gens = [Digraph.from_json(g) for g in data["generators"]]
        if any(g.n != n for g in gens):
            raise ValueError("generator process counts disagree with model 'n'")
        return cls(n, gens, bool(data.get("symmetric", False)))


def model_contains(model: Model, h: Digraph) -> bool:
    return model.contains(h)


# -- iterated products -------------------------------------------------------


def product_set(
    model: Model,
    rounds: int,
    *,
    budget: int = DEFAULT_PRODUCT_BUDGET,
    workers: int = 1,
) -> list[Digraph]:
    """All r-fold path products of effective generators, deduplicated.

    Intermediate products are deduplicated round by round (the product of a
    prefix depends only on its value, not the factor tuple), so the work per
    round is ``|frontier| * |generators|``; that count is charged against
    ``budget``. Output order is canonical. ``workers > 1`` splits each
    round's frontier across threads; the result is identical to the
    sequential one.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    gens = model.effective_generators()
    frontier = dedup_graphs(gens)
    spent = 0
    for _ in range(rounds - 1):
        spent += len(frontier) * len(gens)
        if spent > budget:
            raise BudgetExceeded("product enumeration", budget)
        if workers > 1 and len(frontier) > 1:
            chunks = [frontier[i::workers] for i in range(workers)]
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = pool.map(
                    lambda chunk: [path_product(p, g) for p in chunk for g in gens],
                    chunks,
                )
                produced = [g for part in parts for g in part]
        else:
            produced = [path_product(p, g) for p in frontier for g in gens]
        frontier = dedup_graphs(produced)
    return sorted(frontier, key=Digraph.sort_key)


def _product_of(graphs: Sequence[Digraph]) -> Digraph:
    acc = graphs[0]
    for g in graphs[1:]:
        acc = path_product(acc, g)
    return acc


@dataclass(frozen=True)
class ReachResult:
    """Outcome of a product reachability search.

    ``witness`` holds factor supergraphs multiplying to the target when
    found; otherwise the search space was exhausted and the target is
    certifiably not reachable. ``nodes`` counts explored search states.
    """

    found: bool
    witness: tuple[Digraph, ...] | None
    nodes: int


class _Counter:
    __slots__ = ("value", "_lock")

    def __init__(self) -> None:
        self.value = 0
        self._lock = threading.Lock()

    def add(self, k: int = 1) -> int:
        with self._lock:
            self.value += k
            return self.value


def product_reachability_search(
    factors: Sequence[Digraph],
    target: Digraph,
    *,
    budget: int = DEFAULT_SEARCH_BUDGET,
    workers: int = 1,
) -> ReachResult:
    """Decide whether ``target`` is a product of supergraphs of ``factors``.

    Searches for graphs ``H_i`` with ``E(H_i) >= E(factors[i])`` whose path
    product equals ``target`` exactly. Pruning uses product monotonicity:
    an edge added to a factor whose induced product edges already leave
    ``target`` can never appear in a witness, so it is dropped for the whole
    subtree. Raises :class:`BudgetExceeded` when the node budget runs out
    before a decision (distinct from a refutation).
    """
    if not factors:
        raise ValueError("need at least one factor")
    n = target.n
    if any(f.n != n for f in factors):
        raise ValueError("factors and target must share the process count")

    base = _product_of(factors)
    if not upward_contains(base, target):
        # Some base edge is missing from the target; supersets only add edges.
        return ReachResult(False, None, 1)

    r = len(factors)
    # Suffix products of the unmodified factors, suffixes[i] = factors[i:] product.
    suffixes: list[Digraph] = [identity_graph(n)] * (r + 1)
    for i in range(r - 1, -1, -1):
        suffixes[i] = path_product(factors[i], suffixes[i + 1])

    counter = _Counter()

    def safe_additions(prefix: Digraph, i: int) -> list[tuple[int, int]]:
        # Candidate edges for factor i that cannot, on their own, push the
        # product outside the target (with later factors at their base value).
        suffix = suffixes[i + 1]
        out: list[tuple[int, int]] = []
        for u in range(n):
            for w in range(n):
                if factors[i].rows[u] >> w & 1:
                    continue
                post = suffix.rows[w]
                ok = True
                for x in bits_of(prefix.cols[u]):
                    if post & ~target.rows[x]:
                        ok = False
                        break
                if ok:
                    out.append((u, w))
        return out

    def search(prefix: Digraph, i: int, chosen: list[Digraph]) -> tuple[Digraph, ...] | None:
        if counter.add() > budget:
            raise BudgetExceeded("product reachability search", budget)
        if i == r:
            if prefix == target:
                return tuple(chosen)
            return None
        candidates = safe_additions(prefix, i)

        def expand(j: int, rows: list[int]) -> tuple[Digraph, ...] | None:
            if j == len(candidates):
                factor = Digraph.from_rows(n, rows)
                nxt = path_product(prefix, factor)
                # Monotonicity prune: partial product must stay inside target.
                if not upward_contains(nxt, target):
                    return None
                chosen.append(factor)
                try:
                    return search(nxt, i + 1, chosen)
                finally:
                    chosen.pop()
            if counter.add() > budget:
                raise BudgetExceeded("product reachability search", budget)
            u, w = candidates[j]
            got = expand(j + 1, rows)  # exclude branch first: minimal witnesses
            if got is not None:
                return got
            rows2 = list(rows)
            rows2[u] |= 1 << w
            return expand(j + 1, rows2)

        return expand(0, list(factors[i].rows))

    if workers > 1:
        first = safe_additions(identity_graph(n), 0)
        if first:
            # Split on the first candidate edge of factor 0; the exclude
            # branch comes first in the deterministic merge order.
            u, w = first[0]
            with_edge = [Digraph.from_rows(n, [
                row | (1 << w) if idx == u else row
                for idx, row in enumerate(factors[0].rows)
            ])] + list(factors[1:])
            without = list(factors)

            def run(fs: Sequence[Digraph], forbid: tuple[int, int] | None):
                # Re-run the sequential search on the restricted problem.
                return _restricted_search(fs, target, budget, forbid)

            with ThreadPoolExecutor(max_workers=2) as pool:
                fut_a = pool.submit(run, without, (u, w))
                fut_b = pool.submit(run, with_edge, None)
                res_a = fut_a.result()
                res_b = fut_b.result()
            if res_a.found:
                return ReachResult(True, res_a.witness, res_a.nodes + res_b.nodes)
            if res_b.found:
                return ReachResult(True, res_b.witness, res_a.nodes + res_b.nodes)
            return ReachResult(False, None, res_a.nodes + res_b.nodes)

    witness = search(identity_graph(n), 0, [])
    return ReachResult(witness is not None, witness, counter.value)


def _restricted_search(
    factors: Sequence[Digraph],
    target: Digraph,
    budget: int,
    forbidden_first: tuple[int, int] | None,
) -> ReachResult:
    """Sequential reachability search, optionally excluding one candidate
    edge from factor 0 (used by the parallel split)."""
    n = target.n
    base = _product_of(factors)
    if not upward_contains(base, target):
        return ReachResult(False, None, 1)
    r = len(factors)
    suffixes: list[Digraph] = [identity_graph(n)] * (r + 1)
    for i in range(r - 1, -1, -1):
        suffixes[i] = path_product(factors[i], suffixes[i + 1])
    nodes = 0

    def safe_additions(prefix: Digraph, i: int) -> list[tuple[int, int]]:
        suffix = suffixes[i + 1]
        out: list[tuple[int, int]] = []
        for u in range(n):
            for w in range(n):
                if factors[i].rows[u] >> w & 1:
                    continue
                if i == 0 and forbidden_first == (u, w):
                    continue
                post = suffix.rows[w]
                if all(not (post & ~target.rows[x]) for x in bits_of(prefix.cols[u])):
                    out.append((u, w))
        return out

    def search(prefix: Digraph, i: int, chosen: list[Digraph]):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded("product reachability search", budget)
        if i == r:
            return tuple(chosen) if prefix == target else None
        candidates = safe_additions(prefix, i)

        def expand(j: int, rows: list[int]):
            nonlocal nodes
            if j == len(candidates):
                factor = Digraph.from_rows(n, rows)
                nxt = path_product(prefix, factor)
                if not upward_contains(nxt, target):
                    return None
                chosen.append(factor)
                try:
                    return search(nxt, i + 1, chosen)
                finally:
                    chosen.pop()
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded("product reachability search", budget)
            u, w = candidates[j]
            got = expand(j + 1, rows)
            if got is not None:
                return got
            rows2 = list(rows)
            rows2[u] |= 1 << w
            return expand(j + 1, rows2)

        return expand(0, list(factors[i].rows))

    witness = search(identity_graph(n), 0, [])
    return ReachResult(witness is not None, witness, nodes)

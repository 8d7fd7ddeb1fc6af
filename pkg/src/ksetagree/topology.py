"""Colored simplicial complexes for round-based models.

Vertices are (color, view) pairs: the color is a process id and the view
is either a set of process ids (who was heard), an input value, or a flat
set of (process, value) pairs. Complexes are stored by their facet list;
faces are generated on demand. Connectivity is certified three ways:
non-vanishing reduced homology refutes, shellability confirms up to
dimension - 1, and the remaining cases are reported as consistent only.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import BudgetExceeded
from .graphs import Digraph, Model, bits_of
from .linalg import exact_rank

DEFAULT_FACE_BUDGET = 200_000
DEFAULT_SHELLING_BUDGET = 10**6

View = object  # int, tuple[int, ...] or tuple[tuple[int, int], ...]
Vertex = tuple  # (color, view)
Simplex = tuple  # vertices sorted by color


def view_key(view: View) -> tuple:
    """Total order on heterogeneous view payloads."""
    if isinstance(view, int):
        return (0, (view,))
    items = tuple(view)
    if items and isinstance(items[0], tuple):
        return (2, items)
    return (1, items)


def canonical_view(view: Iterable[int] | int) -> View:
    """Sort a collection payload; integers pass through."""
    if isinstance(view, int):
        return view
    return tuple(sorted(view))


def make_simplex(vertices: Iterable[Vertex]) -> Simplex:
    """Canonical simplex: vertices sorted by color, at most one per color."""
    vs = sorted(set(vertices), key=lambda v: (v[0], view_key(v[1])))
    colors = [c for c, _ in vs]
    if len(set(colors)) != len(colors):
        raise ValueError(f"two vertices share a color: {vs}")
    return tuple(vs)


def simplex_dim(s: Simplex) -> int:
    return len(s) - 1


def faces_of(s: Simplex) -> Iterable[Simplex]:
    """All non-empty faces, the simplex itself included."""
    for k in range(1, len(s) + 1):
        yield from itertools.combinations(s, k)


def _maximal(simplices: Iterable[Simplex]) -> list[Simplex]:
    """Drop duplicates and any simplex contained in another."""
    unique = sorted(set(simplices), key=len, reverse=True)
    kept: list[Simplex] = []
    kept_sets: list[frozenset] = []
    for s in unique:
        fs = frozenset(s)
        if any(fs <= other for other in kept_sets):
            continue
        kept.append(s)
        kept_sets.append(fs)
    return kept


def _canon_order(simplices: Iterable[Simplex]) -> tuple[Simplex, ...]:
    return tuple(
        sorted(
            simplices,
            key=lambda s: (len(s), [(c, view_key(v)) for c, v in s]),
        )
    )


class Complex:
    """A colored simplicial complex, stored by its facets.

    Downward closure is implicit: membership queries answer for all faces.
    """

    __slots__ = ("facets", "_hash")

    facets: tuple[Simplex, ...]

    def __init__(self, facets: Iterable[Simplex] = ()) -> None:
        normalized = [make_simplex(f) for f in facets]
        object.__setattr__(self, "facets", _canon_order(_maximal(normalized)))
        object.__setattr__(self, "_hash", hash(self.facets))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Complex is immutable")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Complex) and self.facets == other.facets

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Complex({len(self.facets)} facets, dim {self.dim})"

    def is_empty(self) -> bool:
        return not self.facets

    @property
    def dim(self) -> int:
        return max((len(f) - 1 for f in self.facets), default=-1)

    def is_pure(self) -> bool:
        dims = {len(f) for f in self.facets}
        return len(dims) <= 1

    def vertices(self) -> list[Vertex]:
        return sorted(
            {v for f in self.facets for v in f},
            key=lambda v: (v[0], view_key(v[1])),
        )

    def contains_simplex(self, s: Simplex) -> bool:
        fs = frozenset(s)
        return any(fs <= frozenset(f) for f in self.facets)

    def faces_by_dim(self, budget: int = DEFAULT_FACE_BUDGET) -> dict[int, list[Simplex]]:
        """All faces grouped by dimension; raises if the count exceeds budget."""
        seen: set[Simplex] = set()
        total = 0
        for f in self.facets:
            for face in faces_of(f):
                if face not in seen:
                    seen.add(face)
                    total += 1
                    if total > budget:
                        raise BudgetExceeded("face enumeration", budget)
        out: dict[int, list[Simplex]] = {}
        for face in seen:
            out.setdefault(len(face) - 1, []).append(face)
        for k in out:
            out[k] = list(_canon_order(out[k]))
        return out

    def euler_characteristic(self, budget: int = DEFAULT_FACE_BUDGET) -> int:
        faces = self.faces_by_dim(budget)
        return sum((-1) ** k * len(fs) for k, fs in faces.items())

    def union(self, other: "Complex") -> "Complex":
        return Complex(self.facets + other.facets)

    def intersection(self, other: "Complex") -> "Complex":
        """Common faces: pairwise facet intersections, maximal kept."""
        sims = []
        other_sets = [frozenset(g) for g in other.facets]
        for f in self.facets:
            fs = frozenset(f)
            for gs in other_sets:
                common = fs & gs
                if common:
                    sims.append(make_simplex(common))
        return Complex(sims)

    def to_json(self) -> dict:
        def render_view(view: View):
            if isinstance(view, int):
                return view
            return [list(x) if isinstance(x, tuple) else x for x in view]

        return {
            "facets": [
                [[c, render_view(v)] for c, v in f] for f in self.facets
            ]
        }


def intersect_all(complexes: Sequence[Complex]) -> Complex:
    acc = complexes[0]
    for c in complexes[1:]:
        acc = acc.intersection(c)
        if acc.is_empty():
            break
    return acc


# -- model-derived objects ---------------------------------------------------


def uninterpreted_simplex(g: Digraph) -> Simplex:
    """One vertex per process, whose view is the set of processes it heard."""
    return make_simplex(
        (p, tuple(sorted(bits_of(g.in_mask(p))))) for p in range(g.n)
    )


class PseudosphereSpec:
    """Per-color families of admissible views; the induced complex takes one
    view per color with a non-empty family, in every combination."""

    __slots__ = ("n", "families")

    def __init__(self, n: int, families: Sequence[Iterable[View]]) -> None:
        if len(families) != n:
            raise ValueError("need one view family per color")
        canon = tuple(
            tuple(sorted({canonical_view(v) for v in fam}, key=view_key))
            for fam in families
        )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "families", canon)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("PseudosphereSpec is immutable")

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, PseudosphereSpec)
            and self.n == other.n
            and self.families == other.families
        )

    def __hash__(self) -> int:
        return hash((self.n, self.families))

    def __repr__(self) -> str:
        sizes = [len(f) for f in self.families]
        return f"PseudosphereSpec(n={self.n}, sizes={sizes})"

    def facet_count(self) -> int:
        count = 1
        for fam in self.families:
            if fam:
                count *= len(fam)
        if all(not fam for fam in self.families):
            return 0
        return count

    def nonempty_colors(self) -> list[int]:
        return [i for i, fam in enumerate(self.families) if fam]


def pseudosphere(spec: PseudosphereSpec, budget: int = DEFAULT_FACE_BUDGET) -> Complex:
    """Materialize the complex: one view per non-empty color, all combinations."""
    colors = spec.nonempty_colors()
    if not colors:
        return Complex()
    if spec.facet_count() > budget:
        raise BudgetExceeded("pseudosphere facet enumeration", budget)
    facets = []
    for choice in itertools.product(*(spec.families[c] for c in colors)):
        facets.append(tuple(zip(colors, choice)))
    return Complex(facets)


def intersect_pseudospheres(
    a: PseudosphereSpec, b: PseudosphereSpec
) -> PseudosphereSpec:
    """Componentwise intersection of the view families."""
    if a.n != b.n:
        raise ValueError("specs must share the color count")
    return PseudosphereSpec(
        a.n,
        [
            tuple(v for v in fa if v in set(fb))
            for fa, fb in zip(a.families, b.families)
        ],
    )


def closed_above_spec(g: Digraph) -> PseudosphereSpec:
    """Admissible views of each process over all supergraphs of ``g``:
    every superset of the process's view in ``g`` itself."""
    n = g.n
    full = g.full_mask
    families = []
    for p in range(n):
        base = g.in_mask(p)
        rest = full & ~base
        fam = []
        sub = rest
        while True:
            fam.append(tuple(sorted(bits_of(base | sub))))
            if sub == 0:
                break
            sub = (sub - 1) & rest
        families.append(fam)
    return PseudosphereSpec(n, families)


class UnionOfPseudospheres:
    """Union of per-generator pseudospheres; facets enumerated on demand."""

    __slots__ = ("specs",)

    def __init__(self, specs: Sequence[PseudosphereSpec]) -> None:
        if not specs:
            raise ValueError("need at least one spec")
        object.__setattr__(self, "specs", tuple(specs))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("UnionOfPseudospheres is immutable")

    def facet_count_upper_bound(self) -> int:
        return sum(s.facet_count() for s in self.specs)

    def facets(self, budget: int = DEFAULT_FACE_BUDGET) -> list[Simplex]:
        if self.facet_count_upper_bound() > budget:
            raise BudgetExceeded("pseudosphere union facet enumeration", budget)
        seen: set[Simplex] = set()
        for spec in self.specs:
            for facet in pseudosphere(spec, budget).facets:
                seen.add(facet)
        return list(_canon_order(seen))

    def to_complex(self, budget: int = DEFAULT_FACE_BUDGET) -> Complex:
        return Complex(self.facets(budget))


def uninterpreted_complex(model: Model) -> UnionOfPseudospheres:
    """Who-heard-whom complex of a model: union over effective generators of
    the per-generator pseudosphere of admissible views."""
    return UnionOfPseudospheres(
        [closed_above_spec(g) for g in model.effective_generators()]
    )


def interpret(
    uninterpreted: Complex | UnionOfPseudospheres,
    inputs: Complex,
    budget: int = DEFAULT_FACE_BUDGET,
) -> Complex:
    """Substitute input values into who-heard-whom views.

    Every facet pairing of the uninterpreted complex and the input complex
    yields a facet where process p's view becomes the flat set of
    (q, input of q) for each q that p heard. The input complex must be pure
    with one vertex per color.
    """
    if isinstance(uninterpreted, UnionOfPseudospheres):
        upper = uninterpreted.facet_count_upper_bound()
        src = None
        n = uninterpreted.specs[0].n
    else:
        src = uninterpreted.facets
        upper = len(src)
        n = max((len(f) for f in src), default=0)
    if not inputs.is_pure():
        raise ValueError("input complex must be pure")
    in_facets = inputs.facets
    if not in_facets:
        raise ValueError("input complex must be non-empty")
    if n and len(in_facets[0]) != n:
        raise ValueError(
            f"input complex has dimension {len(in_facets[0]) - 1}, expected {n - 1}"
        )
    if upper * len(in_facets) > budget:
        raise BudgetExceeded("interpretation facet enumeration", budget)
    if src is None:
        src = uninterpreted.facets(budget)

    out = set()
    for tau in in_facets:
        values = dict(tau)
        for sigma in src:
            vertices = []
            for p, heard in sigma:
                flat = tuple(sorted((q, values[q]) for q in heard if q in values))
                vertices.append((p, flat))
            out.add(make_simplex(vertices))
    return Complex(out)


def input_pseudosphere(n: int, m: int, budget: int = DEFAULT_FACE_BUDGET) -> Complex:
    """All assignments of one of m values to each of n processes."""
    if m < 1:
        raise ValueError("need at least one value")
    spec = PseudosphereSpec(n, [list(range(m))] * n)
    return pseudosphere(spec, budget)


# -- homology and connectivity ------------------------------------------------


def reduced_homology_ranks(
    c: Complex, up_to: int, budget: int = DEFAULT_FACE_BUDGET
) -> list[int]:
    """Reduced rational Betti numbers in dimensions 0..up_to.

    Exact: boundary ranks are computed by fraction-free integer
    elimination. The empty complex reports zeros (its only non-trivial
    reduced homology lives in dimension -1, handled by the callers that
    care about emptiness).
    """
    if up_to < 0:
        return []
    faces = c.faces_by_dim(budget)
    index: dict[int, dict[Simplex, int]] = {
        k: {s: i for i, s in enumerate(fs)} for k, fs in faces.items()
    }

    rank_cache: dict[int, int] = {}

    def boundary_rank(k: int) -> int:
        # rank of the boundary map from k-chains to (k-1)-chains;
        # k = 0 is the augmentation onto the ground ring.
        if k in rank_cache:
            return rank_cache[k]
        if k not in faces or not faces[k]:
            rank_cache[k] = 0
            return 0
        if k == 0:
            rank_cache[0] = 1
            return 1
        lower = index[k - 1]
        rows = []
        for s in faces[k]:
            row: dict[int, int] = {}
            for j in range(len(s)):
                face = s[:j] + s[j + 1 :]
                row[lower[face]] = -1 if j % 2 else 1
            rows.append(row)
        rank_cache[k] = exact_rank(rows)
        return rank_cache[k]

    ranks = []
    for k in range(up_to + 1):
        nk = len(faces.get(k, ()))
        if nk == 0:
            ranks.append(0)
            continue
        ranks.append(nk - boundary_rank(k) - boundary_rank(k + 1))
    return ranks


class ConnectivityVerdict(enum.Enum):
    CERTIFIED_NO = "certified-no"
    HOMOLOGY_CONSISTENT = "homology-consistent"
    SHELLABLE_YES = "shellable-yes"


def certify_connectivity(
    c: Complex,
    k: int,
    budget: int = DEFAULT_FACE_BUDGET,
    shelling_budget: int = DEFAULT_SHELLING_BUDGET,
) -> ConnectivityVerdict:
    """Three-valued k-connectivity verdict.

    Non-zero reduced homology in dimensions 0..k refutes; a shelling order
    of a pure complex of dimension >= k+1 confirms; otherwise the homology
    necessary condition passed but homotopy is not certified.
    """
    if k < 0:
        raise ValueError("certify_connectivity expects k >= 0")
    if c.is_empty():
        return ConnectivityVerdict.CERTIFIED_NO
    ranks = reduced_homology_ranks(c, k, budget)
    if any(ranks):
        return ConnectivityVerdict.CERTIFIED_NO
    if c.is_pure() and c.dim >= k + 1:
        try:
            order = find_shelling_order(c, budget=shelling_budget)
        except BudgetExceeded:
            order = None
        if order is not None:
            return ConnectivityVerdict.SHELLABLE_YES
    return ConnectivityVerdict.HOMOLOGY_CONSISTENT


def nerve(cover: Sequence[Complex]) -> Complex:
    """Which sub-families of the cover intersect: vertex i per non-empty
    cover element, a simplex per index set with a common simplex."""
    live = [i for i, c in enumerate(cover) if not c.is_empty()]
    facets: list[Simplex] = []

    def grow(yes: list[int], acc: Complex, rest: list[int]) -> None:
        extended = False
        for idx, i in enumerate(rest):
            nxt = acc.intersection(cover[i]) if yes else cover[i]
            if not nxt.is_empty():
                extended = True
                grow(yes + [i], nxt, rest[idx + 1 :])
        if yes and not extended:
            facets.append(tuple((i, i) for i in yes))

    grow([], Complex(), live)
    return Complex(facets)


def find_shelling_order(
    c: Complex, budget: int = DEFAULT_SHELLING_BUDGET
) -> list[Simplex] | None:
    """Search for a shelling order of a pure complex.

    Backtracking over facet orderings in canonical order, memoizing failed
    prefix sets (the admissibility of the next facet depends only on the
    set already placed). Returns None when the search space is exhausted:
    the complex is certifiably non-shellable. Budget exhaustion raises
    instead.
    """
    if not c.is_pure():
        raise ValueError("shelling is defined for pure complexes")
    facets = list(c.facets)
    r = len(facets)
    if r <= 1:
        return facets
    d = c.dim
    if d == 0:
        return facets  # every 0-dimensional complex shells in any order
    sets = [frozenset(f) for f in facets]
    failed: set[frozenset[int]] = set()
    visited = 0

    def admissible(placed: list[int], nxt: int) -> bool:
        inters = []
        fs = sets[nxt]
        for i in placed:
            common = fs & sets[i]
            if common:
                inters.append(common)
        full = [t for t in inters if len(t) == d]
        if not full:
            return False
        return all(any(t <= big for big in full) for t in inters)

    def extend(placed: list[int], used: frozenset[int]) -> list[int] | None:
        nonlocal visited
        if len(placed) == r:
            return placed
        if used in failed:
            return None
        visited += 1
        if visited > budget:
            raise BudgetExceeded("shelling search", budget)
        for i in range(r):
            if i in used:
                continue
            if admissible(placed, i):
                got = extend(placed + [i], used | {i})
                if got is not None:
                    return got
        failed.add(used)
        return None

    for first in range(r):
        got = extend([first], frozenset([first]))
        if got is not None:
            return [facets[i] for i in got]
    return None


# -- shellability-to-connectivity transfer ------------------------------------


@dataclass
class TransferCheck:
    label: str
    status: str  # pass-certain | pass-homology | fail
    detail: str = ""


@dataclass
class TransferReport:
    """Instance report for the shellability connectivity-transfer argument.

    The hypotheses and the conclusion are checked independently on the given
    instance; the implication itself is trusted, not re-proved.
    """

    level: int
    shelling_found: bool
    hypothesis1_ok: bool
    hypothesis2_ok: bool
    conclusion_ok: bool
    checks: list[TransferCheck] = field(default_factory=list)

    def all_pass(self) -> bool:
        return (
            self.shelling_found
            and self.hypothesis1_ok
            and self.hypothesis2_ok
            and self.conclusion_ok
        )


def _level_status(c: Complex, level: int, budget: int) -> tuple[str, str]:
    if level <= -2:
        return "pass-certain", "no condition at this level"
    if level == -1:
        if c.is_empty():
            return "fail", "required non-empty, found empty"
        return "pass-certain", "non-empty"
    verdict = certify_connectivity(c, level, budget)
    if verdict is ConnectivityVerdict.CERTIFIED_NO:
        return "fail", f"reduced homology obstructs {level}-connectivity"
    if verdict is ConnectivityVerdict.SHELLABLE_YES:
        return "pass-certain", "shellable of sufficient dimension"
    return "pass-homology", "homology ranks vanish (necessary condition)"


def verify_connectivity_transfer(
    a: Complex,
    images: Mapping[Simplex, Complex],
    level: int,
    budget: int = DEFAULT_FACE_BUDGET,
) -> TransferReport:
    """Exercise the shellability transfer argument on one instance.

    Hypothesis (1), the intersection-equation transfer, is verified along
    the canonical shelling order (exactly the prefix instances the
    inductive argument consumes). Hypothesis (2) checks the required
    connectivity of (t+1)-wise image intersections for facets sharing a
    codimension-1 face with the first. The conclusion checks the union.
    """
    facet_set = set(a.facets)
    if facet_set != set(images.keys()):
        raise ValueError("images must be keyed by exactly the facets of the complex")
    if not a.is_pure():
        raise ValueError("the source complex must be pure")
    d = a.dim
    checks: list[TransferCheck] = []

    order = find_shelling_order(a)
    shelling_found = order is not None
    if order is None:
        checks.append(TransferCheck("shelling", "fail", "no shelling order found"))
        return TransferReport(level, False, False, False, False, checks)
    checks.append(TransferCheck("shelling", "pass-certain", f"{len(order)} facets"))

    # Hypothesis (1) along shelling prefixes.
    hyp1_ok = True
    order_sets = [frozenset(f) for f in order]
    for t in range(1, len(order)):
        phi = order[t]
        phi_set = order_sets[t]
        taus = _maximal(
            make_simplex(phi_set & order_sets[i])
            for i in range(t)
            if phi_set & order_sets[i]
        )
        sigmas = []
        for tau in taus:
            tau_set = frozenset(tau)
            if len(tau) != d:  # shelling guarantees pure codim-1 prefixes
                hyp1_ok = False
                continue
            for i in range(t):
                if tau_set <= order_sets[i]:
                    sigmas.append(order[i])
                    break
        prefix_image = images[order[0]]
        for i in range(1, t):
            prefix_image = prefix_image.union(images[order[i]])
        lhs = prefix_image.intersection(images[phi])
        rhs = Complex()
        for sigma in sigmas:
            rhs = rhs.union(images[phi].intersection(images[sigma]))
        if lhs != rhs:
            hyp1_ok = False
            checks.append(
                TransferCheck(
                    f"hypothesis-1 prefix {t}",
                    "fail",
                    "image intersection equation does not transfer",
                )
            )
    if hyp1_ok:
        checks.append(TransferCheck("hypothesis-1", "pass-certain", "all prefixes"))

    # Hypothesis (2): (level - t)-connectivity of (t+1)-wise intersections.
    hyp2_ok = True
    facets = list(a.facets)
    fsets = [frozenset(f) for f in facets]
    for i0, phi0 in enumerate(facets):
        neighbors = [
            j
            for j in range(len(facets))
            if j != i0 and len(fsets[i0] & fsets[j]) == d
        ]
        for t in range(0, level + 2):
            if t > len(neighbors):
                break
            for rest in itertools.combinations(neighbors, t):
                inter = images[phi0]
                for j in rest:
                    inter = inter.intersection(images[facets[j]])
                    if inter.is_empty():
                        break
                status, detail = _level_status(inter, level - t, budget)
                if status == "fail":
                    hyp2_ok = False
                    checks.append(
                        TransferCheck(
                            f"hypothesis-2 t={t} around facet {i0}",
                            "fail",
                            detail,
                        )
                    )
    if hyp2_ok:
        checks.append(TransferCheck("hypothesis-2", "pass-homology", "all collections"))

    target = images[order[0]]
    for f in order[1:]:
        target = target.union(images[f])
    status, detail = _level_status(target, level, budget)
    checks.append(TransferCheck("conclusion", status, detail))
    conclusion_ok = status != "fail"

    return TransferReport(
        level, shelling_found, hyp1_ok, hyp2_ok, conclusion_ok, checks
    )

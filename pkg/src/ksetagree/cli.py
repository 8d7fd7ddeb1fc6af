"""Command line surface: parse model files, dispatch, emit deterministic JSON.

Exit codes: 0 for any answered run (UNSAT is an answer), 2 for malformed
input or usage errors, 3 for budget exhaustion. Reports are byte-stable
for a fixed input: keys are sorted and all list orders are canonical.
The environment variable KSETAGREE_BUDGET overrides every default budget
at once; explicit flags still win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from .bounds import AuditError, BoundsConsistencyError, audit, bounds_report
from .errors import BudgetExceeded
from .graphs import (
    DEFAULT_PRODUCT_BUDGET,
    DEFAULT_SEARCH_BUDGET,
    Digraph,
    Model,
    product_reachability_search,
    product_set,
)
from .metrics import metrics_report
from .solvability import (
    DEFAULT_NODE_BUDGET,
    DEFAULT_SCENARIO_BUDGET,
    check_decision_map,
    decide_solvability,
    decision_map_to_json,
    simulate_min_protocol,
)
from .topology import (
    DEFAULT_FACE_BUDGET,
    certify_connectivity,
    closed_above_spec,
    find_shelling_order,
    nerve,
    pseudosphere,
    reduced_homology_ranks,
    uninterpreted_complex,
)

BUDGET_ENV = "KSETAGREE_BUDGET"


def _env_default(fallback: int) -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return fallback
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{BUDGET_ENV} must be an integer, got {raw!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ksetagree",
        description="Agreement bounds, topology checks, and an exact "
        "solvability oracle for round-based models defined by required "
        "subgraphs.",
    )
    parser.add_argument(
        "--output", choices=("json", "text"), default="json", help="report format"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("model", help="path to a model JSON file")
        p.add_argument(
            "--product-budget", type=int, default=None, help="product enumeration cap"
        )
        p.add_argument(
            "--scenario-budget", type=int, default=None, help="scenario enumeration cap"
        )
        p.add_argument(
            "--simplex-budget", type=int, default=None, help="face enumeration cap"
        )
        p.add_argument(
            "--node-budget", type=int, default=None, help="search node cap"
        )

    p = sub.add_parser("metrics", help="graph metrics of the model")
    add_common(p)

    p = sub.add_parser("bounds", help="upper and lower agreement bounds")
    add_common(p)
    p.add_argument("--rounds", type=int, default=1)

    p = sub.add_parser("solve", help="decide oblivious solvability exactly")
    add_common(p)
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--k", type=int, required=True, help="agreement bound")
    p.add_argument("--values", type=int, required=True, help="value domain size")

    p = sub.add_parser("topology", help="topological checks on the model complex")
    add_common(p)
    p.add_argument(
        "--check",
        choices=("pseudosphere", "homology", "shelling", "nerve"),
        required=True,
    )

    p = sub.add_parser("product", help="r-fold products, or reach a target graph")
    add_common(p)
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--target", default=None, help="path to a graph JSON file")

    p = sub.add_parser("audit", help="bounds against the exact oracle")
    add_common(p)
    p.add_argument("--rounds", type=int, default=1)

    return parser


def _load_model(path: str) -> Model:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return Model.from_json(data)


def _budgets(args: argparse.Namespace) -> dict[str, int]:
    return {
        "product": args.product_budget
        if args.product_budget is not None
        else _env_default(DEFAULT_PRODUCT_BUDGET),
        "scenario": args.scenario_budget
        if args.scenario_budget is not None
        else _env_default(DEFAULT_SCENARIO_BUDGET),
        "simplex": args.simplex_budget
        if args.simplex_budget is not None
        else _env_default(DEFAULT_FACE_BUDGET),
        "node": args.node_budget
        if args.node_budget is not None
        else _env_default(DEFAULT_NODE_BUDGET),
    }


def _run_metrics(args) -> tuple[dict, int]:
    model = _load_model(args.model)
    return {"metrics": metrics_report(model).to_json()}, 0


def _run_bounds(args) -> tuple[dict, int]:
    model = _load_model(args.model)
    budgets = _budgets(args)
    report = bounds_report(model, args.rounds, budgets["product"])
    return {"bounds": report.to_json()}, 0


def _run_solve(args) -> tuple[dict, int]:
    model = _load_model(args.model)
    budgets = _budgets(args)
    result = decide_solvability(
        model,
        args.rounds,
        args.k,
        args.values,
        scenario_budget=budgets["scenario"],
        node_budget=budgets["node"],
    )
    payload: dict = {
        "result": result.status,
        "rounds": args.rounds,
        "k": args.k,
        "values": args.values,
        "scenario_graphs": result.scenario_graph_count,
        "views": result.view_count,
        "constraints": result.constraint_count,
        "nodes": result.nodes,
        "scope": "oblivious algorithms deciding after exactly the given rounds",
    }
    if result.note:
        payload["note"] = result.note
    if result.witness is not None:
        ok, msg = check_decision_map(
            model, args.rounds, args.k, args.values, result.witness,
            budget=budgets["scenario"],
        )
        payload["witness"] = decision_map_to_json(result.witness)
        payload["witness_replay"] = msg if not ok else "ok"
        if not ok:
            raise AssertionError(f"witness failed independent replay: {msg}")
    return payload, 3 if result.status == "BUDGET" else 0


def _run_topology(args) -> tuple[dict, int]:
    model = _load_model(args.model)
    budgets = _budgets(args)
    face_budget = budgets["simplex"]
    gens = model.effective_generators()
    union = uninterpreted_complex(model)
    if args.check == "pseudosphere":
        per_gen = []
        for g in gens:
            spec = closed_above_spec(g)
            per_gen.append(
                {
                    "family_sizes": [len(f) for f in spec.families],
                    "facets": spec.facet_count(),
                }
            )
        complex_ = union.to_complex(face_budget)
        return {
            "check": "pseudosphere",
            "generators": per_gen,
            "union_facets": len(complex_.facets),
        }, 0
    if args.check == "homology":
        complex_ = union.to_complex(face_budget)
        ranks = reduced_homology_ranks(complex_, model.n - 2, face_budget)
        verdict = certify_connectivity(complex_, model.n - 2, face_budget)
        return {
            "check": "homology",
            "reduced_ranks": ranks,
            "verdict": verdict.value,
            "level": model.n - 2,
        }, 0
    if args.check == "shelling":
        complex_ = union.to_complex(face_budget)
        order = find_shelling_order(complex_)
        return {
            "check": "shelling",
            "shellable": order is not None,
            "facets": len(complex_.facets),
        }, 0
    cover = [pseudosphere(closed_above_spec(g), face_budget) for g in gens]
    nerve_complex = nerve(cover)
    full = len(nerve_complex.facets) == 1 and len(nerve_complex.facets[0]) == len(gens)
    return {
        "check": "nerve",
        "cover_size": len(gens),
        "nerve_facets": [len(f) for f in nerve_complex.facets],
        "is_full_simplex": full,
    }, 0


def _run_product(args) -> tuple[dict, int]:
    model = _load_model(args.model)
    budgets = _budgets(args)
    if args.target is None:
        graphs = product_set(model, args.rounds, budget=budgets["product"])
        return {
            "rounds": args.rounds,
            "products": [g.to_json() for g in graphs],
        }, 0
    with open(args.target, "r", encoding="utf-8") as fh:
        target = Digraph.from_json(json.load(fh))
    gens = model.effective_generators()
    attempts = []
    found = None
    import itertools as _it

    for tup in _it.product(gens, repeat=args.rounds):
        result = product_reachability_search(
            tup, target, budget=budgets["product"]
        )
        attempts.append(result.nodes)
        if result.found:
            found = result
            break
    payload: dict = {
        "rounds": args.rounds,
        "target": target.to_json(),
        "reachable": found is not None,
        "search_nodes": sum(attempts),
    }
    if found is not None and found.witness is not None:
        payload["witness_factors"] = [g.to_json() for g in found.witness]
    return payload, 0


def _run_audit(args) -> tuple[dict, int]:
    model = _load_model(args.model)
    budgets = _budgets(args)
    report = audit(
        model,
        args.rounds,
        product_budget=budgets["product"],
        scenario_budget=budgets["scenario"],
        node_budget=budgets["node"],
    )
    return {"audit": report.to_json()}, 0


_HANDLERS = {
    "metrics": _run_metrics,
    "bounds": _run_bounds,
    "solve": _run_solve,
    "topology": _run_topology,
    "product": _run_product,
    "audit": _run_audit,
}


def _render_text(payload: dict) -> str:
    lines: list[str] = []

    def walk(prefix: str, value) -> None:
        if isinstance(value, dict):
            for key in sorted(value):
                walk(f"{prefix}{key}.", value[key])
        elif isinstance(value, list):
            lines.append(f"{prefix[:-1]}: {json.dumps(value, sort_keys=True)}")
        else:
            lines.append(f"{prefix[:-1]}: {value}")

    walk("", payload)
    return "\n".join(lines)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        payload, code = _HANDLERS[args.command](args)
    except BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return 3
    except (AuditError, BoundsConsistencyError) as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.output == "json":
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(_render_text(payload))
    return code


if __name__ == "__main__":
    raise SystemExit(main())
